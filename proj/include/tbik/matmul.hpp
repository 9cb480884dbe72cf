#pragma once

// Tiled GEMM whose K-dimension accumulation follows a fixed binary reduction
// tree with a sequential prefix of k_first tiles per leaf.
//
// The reduction order depends only on (K, block_k, k_first). It is the same
// tree that the collective all-reduce walks across ranks, which is what makes
// row-parallel layer outputs bit-identical for every tensor-parallel size:
// splitting K across C ranks hands each rank a contiguous, power-of-two
// aligned block of leaves, i.e. a complete subtree.

#include <cstdint>

#include "tbik/matrix.hpp"

namespace tbik {

struct BlockConfig {
  std::int64_t block_m = 0;
  std::int64_t block_k = 0;
  std::int64_t block_n = 0;
  // Tiles merged sequentially before the first carry-over. 0 = pick the
  // smallest feasible value in plan_blocks.
  std::int64_t k_first = 0;
};

// Defaults tuned per storage type (block_m, block_k, block_n).
BlockConfig default_block_config(Dtype dtype);

struct ReductionPlan {
  std::int64_t tiles_total = 0;  // T = ceil(K / block_k)
  std::int64_t k_first = 1;
  std::int64_t leaves = 0;       // T / k_first, always a power of two
  std::int64_t depth = 0;        // log2(leaves) + 1 scratch levels
};

bool is_power_of_two(std::int64_t v);
std::int64_t log2_exact(std::int64_t v);

// Chooses or validates k_first so that leaves = T / k_first is a power of
// two with leaves >= c_max. c_max must itself be a power of two.
ReductionPlan plan_blocks(std::int64_t K, const BlockConfig& cfg,
                          std::int64_t c_max);

// Leaf semantics: ascending-k fused multiply-add from 0. Inputs are widened
// to f32 before arithmetic; zero padding of a ragged tail contributes no
// operations, which leaves bit patterns of finite values intact.
float leaf_dot(const float* a, const float* b, std::int64_t n);

// C = A x B with the tree reduction over K. Output is always f32-stored.
// Output tiles are independent and run in parallel; results are bit-equal
// for any worker count.
Matrix tree_matmul(const Matrix& a, const Matrix& b, const BlockConfig& cfg);

}  // namespace tbik
