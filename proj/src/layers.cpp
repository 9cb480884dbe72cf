#include "tbik/layers.hpp"

#include "tbik/errors.hpp"
#include "tbik/oracle.hpp"
#include "tbik/threading.hpp"

namespace tbik {

ShardPlan make_column_shard_plan(std::int64_t n, int tp_size) {
  if (tp_size < 1 || n % tp_size != 0) {
    fail(ErrorCode::ShardError, "column shard: N=" + std::to_string(n) +
                                    " not divisible by tp=" +
                                    std::to_string(tp_size));
  }
  ShardPlan plan{ShardPlan::Mode::Column, tp_size, {}};
  const std::int64_t width = n / tp_size;
  for (int r = 0; r < tp_size; ++r) {
    plan.bounds.emplace_back(r * width, (r + 1) * width);
  }
  return plan;
}

ShardPlan make_row_shard_plan(std::int64_t k, const BlockConfig& cfg,
                              int tp_size, std::int64_t c_max) {
  if (tp_size > c_max) {
    fail(ErrorCode::ShardError,
         "row shard: tp=" + std::to_string(tp_size) + " exceeds c_max=" +
             std::to_string(c_max));
  }
  const ReductionPlan plan = plan_blocks(k, cfg, c_max);
  if (plan.leaves % tp_size != 0) {
    fail(ErrorCode::ShardError,
         "row shard: " + std::to_string(plan.leaves) +
             " leaves not divisible by tp=" + std::to_string(tp_size));
  }
  const std::int64_t group_elems = plan.k_first * cfg.block_k;
  const std::int64_t leaves_per_rank = plan.leaves / tp_size;
  ShardPlan shard{ShardPlan::Mode::Row, tp_size, {}};
  for (int r = 0; r < tp_size; ++r) {
    std::int64_t begin = r * leaves_per_rank * group_elems;
    std::int64_t end = (r + 1) * leaves_per_rank * group_elems;
    if (end > k) end = k;  // ragged tail tiles live on the last rank
    shard.bounds.emplace_back(begin, end);
  }
  return shard;
}

Matrix column_parallel_forward(const Matrix& x, const Matrix& w,
                               const DeviceGroup& group,
                               const BlockConfig& cfg) {
  const int C = group.world_size();
  const ShardPlan plan = make_column_shard_plan(w.cols(), C);

  std::vector<Matrix> outputs(static_cast<std::size_t>(C));
  parallel_for(C, [&](std::int64_t rank) {
    const auto [begin, end] = plan.bounds[static_cast<std::size_t>(rank)];
    outputs[static_cast<std::size_t>(rank)] =
        tree_matmul(x, w.slice_cols(begin, end), cfg);
  });

  Matrix out(x.rows(), w.cols(), Dtype::F32);
  for (int r = 0; r < C; ++r) {
    const auto [begin, end] = plan.bounds[static_cast<std::size_t>(r)];
    const Matrix& part = outputs[static_cast<std::size_t>(r)];
    for (std::int64_t i = 0; i < out.rows(); ++i) {
      for (std::int64_t j = begin; j < end; ++j) {
        out.set(i, j, part.at(i, j - begin));
      }
    }
  }
  return out;
}

Matrix row_parallel_forward(const Matrix& x, const Matrix& w,
                            const DeviceGroup& group, const BlockConfig& cfg,
                            std::int64_t c_max) {
  if (x.cols() != w.rows()) {
    fail(ErrorCode::ShapeMismatch,
         "row_parallel_forward: inner dimensions differ");
  }
  const int C = group.world_size();
  const ShardPlan shard = make_row_shard_plan(x.cols(), cfg, C, c_max);
  const ReductionPlan global_plan = plan_blocks(x.cols(), cfg, c_max);

  // Every rank must use the globally planned k_first so that its local
  // reduction is exactly the matching subtree of the single-rank tree.
  BlockConfig local_cfg = cfg;
  local_cfg.k_first = global_plan.k_first;

  std::vector<Matrix> partials(static_cast<std::size_t>(C));
  parallel_for(C, [&](std::int64_t rank) {
    const auto [begin, end] = shard.bounds[static_cast<std::size_t>(rank)];
    partials[static_cast<std::size_t>(rank)] = tree_matmul(
        x.slice_cols(begin, end), w.slice_rows(begin, end), local_cfg);
  });

  return tree_all_reduce(group, partials);
}

Matrix baseline_row_parallel_forward(const Matrix& x, const Matrix& w,
                                     const DeviceGroup& group) {
  if (x.cols() != w.rows()) {
    fail(ErrorCode::ShapeMismatch,
         "baseline_row_parallel_forward: inner dimensions differ");
  }
  const int C = group.world_size();
  if (x.cols() % C != 0) {
    fail(ErrorCode::ShardError, "baseline row shard: K=" +
                                    std::to_string(x.cols()) +
                                    " not divisible by tp=" +
                                    std::to_string(C));
  }
  const std::int64_t width = x.cols() / C;
  std::vector<Matrix> partials(static_cast<std::size_t>(C));
  parallel_for(C, [&](std::int64_t rank) {
    const std::int64_t begin = rank * width;
    partials[static_cast<std::size_t>(rank)] = oracle::sequential_matmul_f32(
        x.slice_cols(begin, begin + width), w.slice_rows(begin, begin + width));
  });
  return ring_reduce_baseline(group, partials);
}

Matrix baseline_column_parallel_forward(const Matrix& x, const Matrix& w,
                                        const DeviceGroup& group) {
  const int C = group.world_size();
  const ShardPlan plan = make_column_shard_plan(w.cols(), C);

  std::vector<Matrix> outputs(static_cast<std::size_t>(C));
  parallel_for(C, [&](std::int64_t rank) {
    const auto [begin, end] = plan.bounds[static_cast<std::size_t>(rank)];
    outputs[static_cast<std::size_t>(rank)] =
        oracle::sequential_matmul_f32(x, w.slice_cols(begin, end));
  });

  Matrix out(x.rows(), w.cols(), Dtype::F32);
  for (int r = 0; r < C; ++r) {
    const auto [begin, end] = plan.bounds[static_cast<std::size_t>(r)];
    const Matrix& part = outputs[static_cast<std::size_t>(r)];
    for (std::int64_t i = 0; i < out.rows(); ++i) {
      for (std::int64_t j = begin; j < end; ++j) {
        out.set(i, j, part.at(i, j - begin));
      }
    }
  }
  return out;
}

}  // namespace tbik
