#pragma once

// Independent reference implementations and checkers. Everything here is
// written against the recursive tree operator directly, without the
// binary-counter scratch machinery of the production kernel, so the two
// routes can be compared bit-for-bit.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tbik/matmul.hpp"
#include "tbik/matrix.hpp"

namespace tbik::oracle {

// Recursive pairwise reduction over a power-of-two leaf sequence:
// T(left half) + T(right half), f32 adds.
float tree_reduce(std::span<const float> leaves);

// Partitions leaves into C contiguous blocks, reduces each block with the
// tree operator, reduces the block results with the tree operator, and
// compares bit-exactly with the tree over all leaves.
bool check_theorem1(std::span<const float> leaves, std::int64_t tp_size);

// Same check for an arbitrary explicit partition (index lists). Used to show
// that contiguity is what makes the hierarchical reduction exact.
bool check_partition(std::span<const float> leaves,
                     const std::vector<std::vector<std::int64_t>>& parts);

// Ascending-k fma accumulation over the full K extent, f32 and f64.
Matrix sequential_matmul_f32(const Matrix& a, const Matrix& b);
std::vector<double> matmul_f64(const Matrix& a, const Matrix& b);

// Reference for the tree kernel: per element, leaf group values are built by
// a sequential f32 fold of the tile dot products, then reduced with the
// recursive tree operator.
Matrix global_tree_matmul(const Matrix& a, const Matrix& b,
                          const BlockConfig& cfg, std::int64_t c_max);

// ---- reproducibility metrics ----

using TokenProb = std::pair<std::int32_t, float>;
// Top-k (token id, probability) pairs for one position, probabilities
// descending, ties broken by ascending token id.
using TopKProbs = std::vector<TokenProb>;

// U: number of distinct generated token sequences.
std::int64_t unique_output_count(
    const std::vector<std::vector<std::int32_t>>& outputs);

// D: per position, the max over the union of top-k token ids of
// (max over runs - min over runs) of that token's probability, a missing
// token contributing probability 0; averaged over positions.
float max_prob_divergence(const std::vector<std::vector<TopKProbs>>& runs);

}  // namespace tbik::oracle
