#pragma once

// Toy autoregressive network exercising both shard modes end to end:
// gate/up projections column-parallel, down projection row-parallel (the one
// all-reduce on the path), lm head column-parallel, RMSNorm unsharded.
// Greedy decoding only; traces feed the reproducibility metrics.

#include <cstdint>
#include <vector>

#include "tbik/collective.hpp"
#include "tbik/matmul.hpp"
#include "tbik/matrix.hpp"
#include "tbik/oracle.hpp"

namespace tbik {

enum class KernelKind {
  Tree,      // tree matmul + tree all-reduce
  Baseline,  // sequential-K matmul + ring reduce
};

struct DemoConfig {
  std::int64_t hidden = 96;
  std::int64_t intermediate = 192;
  std::int64_t vocab = 64;
  int layers = 2;
  int steps = 8;
  std::uint64_t seed = 42;
  int tp_size = 1;
  int batch = 8;
  Dtype dtype = Dtype::Bf16;
  BlockConfig blocks{16, 4, 16, 0};
  std::int64_t c_max = 8;
  KernelKind kernel = KernelKind::Tree;
  float rms_eps = 1e-5f;
  int top_k = 5;
  // Scale knobs. At small weight_std the gated-product block attenuates its
  // output faster than its Jacobian, which (with a small embedding scale)
  // makes the step map expansive; the baseline divergence search runs in
  // that regime so rounding splits surface within a few decode steps.
  float weight_std = 0.05f;
  float embed_std = 1.0f;
};

struct TokenTrace {
  std::vector<std::int32_t> tokens;           // one per decode step
  std::vector<oracle::TopKProbs> step_probs;  // one top-k list per step
};

// Per row: mean of squares by ascending sequential f32 accumulation, then
// y = x * gamma / sqrt(ms + eps). Row-independent by construction.
Matrix rmsnorm(const Matrix& x, const std::vector<float>& gamma, float eps);

// z / (1 + exp(-z)) element-wise in f32.
Matrix silu(const Matrix& x);

struct FfnWeights {
  Matrix gamma_as_row;  // 1 x hidden, stored f32
  Matrix w_gate;        // hidden x intermediate
  Matrix w_up;          // hidden x intermediate
  Matrix w_down;        // intermediate x hidden
};

struct DemoWeights {
  Matrix embedding;  // vocab x hidden
  std::vector<FfnWeights> blocks;
  Matrix w_lm;  // hidden x vocab
};

// Weights are generated from fixed-stream PRNGs of cfg.seed and are
// independent of tp size and batch; they are sharded after generation.
DemoWeights make_demo_weights(const DemoConfig& cfg);

// out = row_parallel(silu(col_parallel(x, w_gate)) * col_parallel(x, w_up),
//                    w_down), with activations rounded to the storage dtype
// at each matmul input.
Matrix ffn_block(const Matrix& x, const FfnWeights& weights,
                 const DeviceGroup& group, const DemoConfig& cfg);

// Runs cfg.batch independent chains batched as rows of one matrix.
// Chain i's trace depends only on (cfg.seed, i); batch size cannot move it.
std::vector<TokenTrace> greedy_generate(const DemoConfig& cfg,
                                        const DeviceGroup& group);

}  // namespace tbik
