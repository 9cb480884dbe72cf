#include "tbik/matmul.hpp"

#include <cassert>
#include <cstring>

#include "tbik/errors.hpp"
#include "tbik/threading.hpp"

namespace tbik {

BlockConfig default_block_config(Dtype dtype) {
  if (dtype == Dtype::Bf16) return BlockConfig{64, 256, 128, 0};
  return BlockConfig{32, 128, 64, 0};
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::int64_t log2_exact(std::int64_t v) {
  std::int64_t l = 0;
  while ((std::int64_t{1} << l) < v) ++l;
  return l;
}

ReductionPlan plan_blocks(std::int64_t K, const BlockConfig& cfg,
                          std::int64_t c_max) {
  if (K < 1 || cfg.block_k < 1) {
    fail(ErrorCode::BadArgument, "plan_blocks requires K >= 1 and block_k >= 1");
  }
  if (!is_power_of_two(c_max)) {
    fail(ErrorCode::BadArgument,
         "c_max must be a power of two, got " + std::to_string(c_max));
  }
  std::int64_t tiles = (K + cfg.block_k - 1) / cfg.block_k;

  auto feasible = [&](std::int64_t k_first) {
    return k_first >= 1 && tiles % k_first == 0 &&
           is_power_of_two(tiles / k_first) && tiles / k_first >= c_max;
  };

  std::int64_t k_first = cfg.k_first;
  if (k_first == 0) {
    for (std::int64_t cand = 1; cand <= tiles; ++cand) {
      if (feasible(cand)) {
        k_first = cand;
        break;
      }
    }
    if (k_first == 0) {
      fail(ErrorCode::PlanInfeasible,
           "no feasible k_first for K=" + std::to_string(K) +
               ", block_k=" + std::to_string(cfg.block_k) +
               ", c_max=" + std::to_string(c_max));
    }
  } else if (!feasible(k_first)) {
    fail(ErrorCode::PlanInfeasible,
         "k_first=" + std::to_string(k_first) + " infeasible for K=" +
             std::to_string(K) + ", block_k=" + std::to_string(cfg.block_k) +
             ", c_max=" + std::to_string(c_max));
  }

  ReductionPlan plan;
  plan.tiles_total = tiles;
  plan.k_first = k_first;
  plan.leaves = tiles / k_first;
  plan.depth = log2_exact(plan.leaves) + 1;
  return plan;
}

float leaf_dot(const float* a, const float* b, std::int64_t n) {
  float p = 0.0f;
  for (std::int64_t k = 0; k < n; ++k) {
    p = fma_f32(a[k], b[k], p);
  }
  return p;
}

namespace {

// Per-output-tile state for the binary-counter carry discipline. Buffers are
// block_m x block_n panels; all adds below are element-wise f32.
struct TileReducer {
  std::int64_t elems;
  std::int64_t depth;
  std::vector<float> acc;
  std::vector<float> scratch;  // depth panels
  std::vector<std::int64_t> count;

  TileReducer(std::int64_t elems_, std::int64_t depth_)
      : elems(elems_),
        depth(depth_),
        acc(static_cast<std::size_t>(elems_), 0.0f),
        scratch(static_cast<std::size_t>(elems_ * depth_), 0.0f),
        count(static_cast<std::size_t>(depth_), 0) {}

  float* level(std::int64_t l) { return scratch.data() + l * elems; }

  // acc += P_t, then carry: a level that reaches its merge threshold folds
  // its stored panel into acc and the carry ascends; otherwise acc is parked
  // at that level and cleared.
  void push(const float* partial, std::int64_t k_first) {
    for (std::int64_t i = 0; i < elems; ++i) {
      acc[i] = add_f32(acc[i], partial[i]);
    }
    std::int64_t l = 0;
    while (l < depth) {
      std::int64_t threshold = l == 0 ? k_first : 2;
      float* s = level(l);
      if (count[l] + 1 == threshold) {
        for (std::int64_t i = 0; i < elems; ++i) {
          acc[i] = add_f32(acc[i], s[i]);
        }
        std::memset(s, 0, static_cast<std::size_t>(elems) * sizeof(float));
        count[l] = 0;
        ++l;
      } else {
        for (std::int64_t i = 0; i < elems; ++i) {
          s[i] = add_f32(s[i], acc[i]);
        }
        count[l] += 1;
        std::memset(acc.data(), 0,
                    static_cast<std::size_t>(elems) * sizeof(float));
        return;
      }
    }
  }

  // Holds after the last tile: every level merged and cleared.
  bool drained() const {
    for (std::int64_t l = 0; l < depth; ++l) {
      if (count[l] != 0) return false;
    }
#ifndef NDEBUG
    for (float v : scratch) {
      if (f32_bits(v) != 0) return false;
    }
#endif
    return true;
  }
};

}  // namespace

Matrix tree_matmul(const Matrix& a, const Matrix& b, const BlockConfig& cfg) {
  if (a.cols() != b.rows()) {
    fail(ErrorCode::ShapeMismatch,
         "tree_matmul: inner dimensions differ, " + std::to_string(a.cols()) +
             " vs " + std::to_string(b.rows()));
  }
  if (cfg.block_m < 1 || cfg.block_n < 1 || cfg.block_k < 1) {
    fail(ErrorCode::BadArgument, "block sizes must be >= 1");
  }
  const std::int64_t M = a.rows(), K = a.cols(), N = b.cols();
  const ReductionPlan plan = plan_blocks(K, cfg, 1);

  const std::vector<float> aw = a.widened();
  const std::vector<float> bw = b.widened();

  Matrix out(M, N, Dtype::F32);
  std::vector<float>& ow = out.f32_data();

  const std::int64_t bm = cfg.block_m, bk = cfg.block_k, bn = cfg.block_n;
  const std::int64_t grid_m = (M + bm - 1) / bm;
  const std::int64_t grid_n = (N + bn - 1) / bn;

  parallel_for(grid_m * grid_n, [&](std::int64_t tile_idx) {
    const std::int64_t tm = tile_idx / grid_n;
    const std::int64_t tn = tile_idx % grid_n;
    const std::int64_t m0 = tm * bm;
    const std::int64_t n0 = tn * bn;
    const std::int64_t mh = (m0 + bm <= M ? bm : M - m0);
    const std::int64_t nh = (n0 + bn <= N ? bn : N - n0);

    TileReducer red(mh * nh, plan.depth);
    std::vector<float> partial(static_cast<std::size_t>(mh * nh));

    for (std::int64_t t = 0; t < plan.tiles_total; ++t) {
      const std::int64_t k0 = t * bk;
      const std::int64_t kh = (k0 + bk <= K ? bk : K - k0);

      // Leaf partial product, ascending k, fma from zero. k outermost keeps
      // each element's chain in tile order while the j loop vectorizes.
      std::memset(partial.data(), 0,
                  static_cast<std::size_t>(mh * nh) * sizeof(float));
      for (std::int64_t k = 0; k < kh; ++k) {
        const float* brow = &bw[(k0 + k) * N + n0];
        for (std::int64_t i = 0; i < mh; ++i) {
          const float av = aw[(m0 + i) * K + k0 + k];
          float* prow = &partial[i * nh];
          for (std::int64_t j = 0; j < nh; ++j) {
            prow[j] = fma_f32(av, brow[j], prow[j]);
          }
        }
      }
      red.push(partial.data(), plan.k_first);
    }

    assert(red.drained());
    for (std::int64_t i = 0; i < mh; ++i) {
      std::memcpy(&ow[(m0 + i) * N + n0], &red.acc[i * nh],
                  static_cast<std::size_t>(nh) * sizeof(float));
    }
  });

  return out;
}

}  // namespace tbik
