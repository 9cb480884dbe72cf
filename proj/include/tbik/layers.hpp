#pragma once

// Column- and row-parallel linear layers over a DeviceGroup. Row-parallel
// forward shards K by whole leaf groups so every rank owns a contiguous,
// power-of-two count of leaves; the per-rank tree kernel plus the tree
// all-reduce then walk the same global reduction tree for every tp size.

#include <cstdint>
#include <vector>

#include "tbik/collective.hpp"
#include "tbik/matmul.hpp"
#include "tbik/matrix.hpp"

namespace tbik {

struct ShardPlan {
  enum class Mode { Column, Row };

  Mode mode;
  int tp_size;
  // Per-rank [begin, end) over the sharded dimension (N for Column, K for
  // Row).
  std::vector<std::pair<std::int64_t, std::int64_t>> bounds;
};

ShardPlan make_column_shard_plan(std::int64_t n, int tp_size);

// Row shards must align to whole leaf groups (k_first * block_k elements of
// K); the leaf count must divide evenly across ranks.
ShardPlan make_row_shard_plan(std::int64_t k, const BlockConfig& cfg,
                              int tp_size, std::int64_t c_max);

// Each rank computes x times its weight column block; output is the
// rank-ordered concatenation. No cross-shard arithmetic.
Matrix column_parallel_forward(const Matrix& x, const Matrix& w,
                               const DeviceGroup& group,
                               const BlockConfig& cfg);

// Each rank runs the tree kernel over its contiguous leaf range with the
// globally planned k_first, then partials meet in the tree all-reduce.
// Bit-identical to the single-rank result for every feasible tp size.
Matrix row_parallel_forward(const Matrix& x, const Matrix& w,
                            const DeviceGroup& group, const BlockConfig& cfg,
                            std::int64_t c_max = 8);

// Status-quo model: per-rank sequential-K GEMM plus the ring reduction.
Matrix baseline_row_parallel_forward(const Matrix& x, const Matrix& w,
                                     const DeviceGroup& group);

// Same sharding as column_parallel_forward but with the sequential kernel;
// concatenation keeps it tp-invariant regardless.
Matrix baseline_column_parallel_forward(const Matrix& x, const Matrix& w,
                                        const DeviceGroup& group);

}  // namespace tbik
