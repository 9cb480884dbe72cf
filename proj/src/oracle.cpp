#include "tbik/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tbik/errors.hpp"

namespace tbik::oracle {

float tree_reduce(std::span<const float> leaves) {
  if (!is_power_of_two(static_cast<std::int64_t>(leaves.size()))) {
    fail(ErrorCode::BadArgument, "tree_reduce requires a power-of-two length, got " +
                                     std::to_string(leaves.size()));
  }
  if (leaves.size() == 1) return leaves[0];
  std::size_t half = leaves.size() / 2;
  return add_f32(tree_reduce(leaves.subspan(0, half)),
                 tree_reduce(leaves.subspan(half)));
}

bool check_theorem1(std::span<const float> leaves, std::int64_t tp_size) {
  std::int64_t n = static_cast<std::int64_t>(leaves.size());
  if (!is_power_of_two(tp_size) || tp_size > n || n % tp_size != 0) {
    fail(ErrorCode::BadArgument,
         "invalid tp_size " + std::to_string(tp_size) + " for " +
             std::to_string(n) + " leaves");
  }
  std::int64_t per_rank = n / tp_size;
  std::vector<float> partials(static_cast<std::size_t>(tp_size));
  for (std::int64_t d = 0; d < tp_size; ++d) {
    partials[static_cast<std::size_t>(d)] =
        tree_reduce(leaves.subspan(static_cast<std::size_t>(d * per_rank),
                                   static_cast<std::size_t>(per_rank)));
  }
  float hierarchical = tree_reduce(partials);
  float global = tree_reduce(leaves);
  return f32_bit_equal(hierarchical, global);
}

bool check_partition(std::span<const float> leaves,
                     const std::vector<std::vector<std::int64_t>>& parts) {
  std::vector<float> partials;
  partials.reserve(parts.size());
  for (const auto& part : parts) {
    std::vector<float> vals;
    vals.reserve(part.size());
    for (std::int64_t idx : part) {
      vals.push_back(leaves[static_cast<std::size_t>(idx)]);
    }
    partials.push_back(tree_reduce(vals));
  }
  return f32_bit_equal(tree_reduce(partials), tree_reduce(leaves));
}

namespace {

void require_conformable(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorCode::ShapeMismatch,
         "matmul: inner dimensions differ, " + std::to_string(a.cols()) +
             " vs " + std::to_string(b.rows()));
  }
}

}  // namespace

Matrix sequential_matmul_f32(const Matrix& a, const Matrix& b) {
  require_conformable(a, b);
  const std::int64_t M = a.rows(), K = a.cols(), N = b.cols();
  const std::vector<float> aw = a.widened();
  const std::vector<float> bw = b.widened();
  Matrix out(M, N, Dtype::F32);
  std::vector<float>& ow = out.f32_data();
  for (std::int64_t i = 0; i < M; ++i) {
    for (std::int64_t j = 0; j < N; ++j) {
      float p = 0.0f;
      for (std::int64_t k = 0; k < K; ++k) {
        p = fma_f32(aw[i * K + k], bw[k * N + j], p);
      }
      ow[i * N + j] = p;
    }
  }
  return out;
}

std::vector<double> matmul_f64(const Matrix& a, const Matrix& b) {
  require_conformable(a, b);
  const std::int64_t M = a.rows(), K = a.cols(), N = b.cols();
  const std::vector<float> aw = a.widened();
  const std::vector<float> bw = b.widened();
  std::vector<double> out(static_cast<std::size_t>(M * N), 0.0);
  for (std::int64_t i = 0; i < M; ++i) {
    for (std::int64_t j = 0; j < N; ++j) {
      double p = 0.0;
      for (std::int64_t k = 0; k < K; ++k) {
        p = std::fma(static_cast<double>(aw[i * K + k]),
                     static_cast<double>(bw[k * N + j]), p);
      }
      out[static_cast<std::size_t>(i * N + j)] = p;
    }
  }
  return out;
}

Matrix global_tree_matmul(const Matrix& a, const Matrix& b,
                          const BlockConfig& cfg, std::int64_t c_max) {
  require_conformable(a, b);
  const std::int64_t M = a.rows(), K = a.cols(), N = b.cols();
  const ReductionPlan plan = plan_blocks(K, cfg, c_max);
  const std::vector<float> aw = a.widened();
  const std::vector<float> bw = b.widened();

  Matrix out(M, N, Dtype::F32);
  std::vector<float>& ow = out.f32_data();
  std::vector<float> groups(static_cast<std::size_t>(plan.leaves));

  for (std::int64_t i = 0; i < M; ++i) {
    for (std::int64_t j = 0; j < N; ++j) {
      for (std::int64_t leaf = 0; leaf < plan.leaves; ++leaf) {
        float group = 0.0f;
        for (std::int64_t t = leaf * plan.k_first;
             t < (leaf + 1) * plan.k_first; ++t) {
          const std::int64_t k0 = t * cfg.block_k;
          const std::int64_t kh =
              (k0 + cfg.block_k <= K ? cfg.block_k : K - k0);
          float p = 0.0f;
          for (std::int64_t k = 0; k < kh; ++k) {
            p = fma_f32(aw[i * K + k0 + k], bw[(k0 + k) * N + j], p);
          }
          group = add_f32(group, p);
        }
        groups[static_cast<std::size_t>(leaf)] = group;
      }
      ow[i * N + j] = tree_reduce(groups);
    }
  }
  return out;
}

std::int64_t unique_output_count(
    const std::vector<std::vector<std::int32_t>>& outputs) {
  if (outputs.empty()) {
    fail(ErrorCode::BadArgument, "unique_output_count requires >= 1 outputs");
  }
  std::set<std::vector<std::int32_t>> distinct(outputs.begin(), outputs.end());
  return static_cast<std::int64_t>(distinct.size());
}

float max_prob_divergence(const std::vector<std::vector<TopKProbs>>& runs) {
  if (runs.empty()) {
    fail(ErrorCode::BadArgument, "max_prob_divergence requires >= 1 runs");
  }
  const std::size_t positions = runs[0].size();
  for (const auto& run : runs) {
    if (run.size() != positions) {
      fail(ErrorCode::ShapeMismatch,
           "max_prob_divergence: runs cover different position counts");
    }
  }
  if (positions == 0) return 0.0f;

  double total = 0.0;
  for (std::size_t pos = 0; pos < positions; ++pos) {
    // min/max per token over runs; absent tokens count as probability 0.
    std::map<std::int32_t, std::pair<double, double>> spread;
    for (const auto& run : runs) {
      for (const auto& [token, prob] : run[pos]) {
        auto it = spread.find(token);
        if (it == spread.end()) {
          spread.emplace(token, std::pair<double, double>(prob, prob));
        } else {
          it->second.first = std::min(it->second.first, double{prob});
          it->second.second = std::max(it->second.second, double{prob});
        }
      }
    }
    double delta = 0.0;
    for (auto& [token, mm] : spread) {
      for (const auto& run : runs) {
        bool present = false;
        for (const auto& [tok, prob] : run[pos]) {
          if (tok == token) {
            present = true;
            break;
          }
        }
        if (!present) mm.first = 0.0;
      }
      delta = std::max(delta, mm.second - mm.first);
    }
    total += delta;
  }
  return static_cast<float>(total / static_cast<double>(positions));
}

}  // namespace tbik::oracle
