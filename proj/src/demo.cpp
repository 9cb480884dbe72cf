#include "tbik/demo.hpp"

#include <algorithm>
#include <cmath>

#include "tbik/errors.hpp"
#include "tbik/layers.hpp"

namespace tbik {

Matrix rmsnorm(const Matrix& x, const std::vector<float>& gamma, float eps) {
  if (static_cast<std::int64_t>(gamma.size()) != x.cols()) {
    fail(ErrorCode::ShapeMismatch, "rmsnorm: gamma length " +
                                       std::to_string(gamma.size()) +
                                       " != cols " + std::to_string(x.cols()));
  }
  const std::int64_t rows = x.rows(), cols = x.cols();
  Matrix out(rows, cols, Dtype::F32);
  std::vector<float>& ow = out.f32_data();
  const std::vector<float> xw = x.widened();
  for (std::int64_t i = 0; i < rows; ++i) {
    float sum_sq = 0.0f;
    for (std::int64_t j = 0; j < cols; ++j) {
      const float v = xw[i * cols + j];
      sum_sq = fma_f32(v, v, sum_sq);
    }
    const float ms = sum_sq / static_cast<float>(cols);
    const float denom = std::sqrt(add_f32(ms, eps));
    for (std::int64_t j = 0; j < cols; ++j) {
      ow[i * cols + j] = mul_f32(xw[i * cols + j], gamma[j]) / denom;
    }
  }
  return out;
}

Matrix silu(const Matrix& x) {
  Matrix out(x.rows(), x.cols(), Dtype::F32);
  std::vector<float>& ow = out.f32_data();
  const std::vector<float> xw = x.widened();
  for (std::size_t i = 0; i < xw.size(); ++i) {
    const float z = xw[i];
    ow[i] = z / (1.0f + std::exp(-z));
  }
  return out;
}

namespace {

// Fixed stream ids so each tensor draws an independent, reproducible
// sequence from the same seed.
enum Stream : std::uint64_t {
  kEmbedding = 1,
  kLmHead = 2,
  kBlockBase = 16,  // blocks use kBlockBase + 4*layer + {0..3}
};

Matrix storage_cast(const Matrix& m, Dtype dtype) {
  return dtype == Dtype::Bf16 ? cast_to_bf16(m) : m;
}

Matrix elementwise_mul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols(), Dtype::F32);
  std::vector<float>& ow = out.f32_data();
  const std::vector<float> aw = a.widened();
  const std::vector<float> bw = b.widened();
  for (std::size_t i = 0; i < aw.size(); ++i) {
    ow[i] = mul_f32(aw[i], bw[i]);
  }
  return out;
}

Matrix elementwise_add(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols(), Dtype::F32);
  std::vector<float>& ow = out.f32_data();
  const std::vector<float> aw = a.widened();
  const std::vector<float> bw = b.widened();
  for (std::size_t i = 0; i < aw.size(); ++i) {
    ow[i] = add_f32(aw[i], bw[i]);
  }
  return out;
}

// Sequential max, exp, sequential sum, divide; all f32.
void softmax_row(const float* logits, std::int64_t n, float* probs) {
  float max_v = logits[0];
  for (std::int64_t j = 1; j < n; ++j) {
    if (logits[j] > max_v) max_v = logits[j];
  }
  float sum = 0.0f;
  for (std::int64_t j = 0; j < n; ++j) {
    probs[j] = std::exp(logits[j] - max_v);
    sum = add_f32(sum, probs[j]);
  }
  for (std::int64_t j = 0; j < n; ++j) {
    probs[j] = probs[j] / sum;
  }
}

std::int32_t argmax_row(const float* probs, std::int64_t n) {
  std::int32_t best = 0;
  for (std::int64_t j = 1; j < n; ++j) {
    if (probs[j] > probs[best]) best = static_cast<std::int32_t>(j);
  }
  return best;
}

oracle::TopKProbs top_k_row(const float* probs, std::int64_t n, int k) {
  oracle::TopKProbs all;
  all.reserve(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j) {
    all.emplace_back(static_cast<std::int32_t>(j), probs[j]);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  all.resize(static_cast<std::size_t>(std::min<std::int64_t>(k, n)));
  return all;
}

}  // namespace

DemoWeights make_demo_weights(const DemoConfig& cfg) {
  const float w_std = cfg.weight_std;
  DemoWeights weights;
  {
    Rng rng(cfg.seed, kEmbedding);
    weights.embedding = matrix_random_normal(rng, cfg.vocab, cfg.hidden,
                                             cfg.dtype, 0.0f, cfg.embed_std);
  }
  for (int layer = 0; layer < cfg.layers; ++layer) {
    const std::uint64_t base = kBlockBase + 4 * static_cast<std::uint64_t>(layer);
    FfnWeights block;
    {
      Rng rng(cfg.seed, base + 0);
      Matrix g = matrix_random_normal(rng, 1, cfg.hidden, Dtype::F32, 1.0f, 0.02f);
      block.gamma_as_row = std::move(g);
    }
    {
      Rng rng(cfg.seed, base + 1);
      block.w_gate = matrix_random_normal(rng, cfg.hidden, cfg.intermediate,
                                          cfg.dtype, 0.0f, w_std);
    }
    {
      Rng rng(cfg.seed, base + 2);
      block.w_up = matrix_random_normal(rng, cfg.hidden, cfg.intermediate,
                                        cfg.dtype, 0.0f, w_std);
    }
    {
      Rng rng(cfg.seed, base + 3);
      block.w_down = matrix_random_normal(rng, cfg.intermediate, cfg.hidden,
                                          cfg.dtype, 0.0f, w_std);
    }
    weights.blocks.push_back(std::move(block));
  }
  {
    Rng rng(cfg.seed, kLmHead);
    weights.w_lm = matrix_random_normal(rng, cfg.hidden, cfg.vocab, cfg.dtype,
                                        0.0f, w_std);
  }
  return weights;
}

Matrix ffn_block(const Matrix& x, const FfnWeights& weights,
                 const DeviceGroup& group, const DemoConfig& cfg) {
  const Matrix xb = storage_cast(x, cfg.dtype);
  Matrix gate, up;
  if (cfg.kernel == KernelKind::Tree) {
    gate = column_parallel_forward(xb, weights.w_gate, group, cfg.blocks);
    up = column_parallel_forward(xb, weights.w_up, group, cfg.blocks);
  } else {
    gate = baseline_column_parallel_forward(xb, weights.w_gate, group);
    up = baseline_column_parallel_forward(xb, weights.w_up, group);
  }
  const Matrix act = storage_cast(elementwise_mul(silu(gate), up), cfg.dtype);
  if (cfg.kernel == KernelKind::Tree) {
    return row_parallel_forward(act, weights.w_down, group, cfg.blocks,
                                cfg.c_max);
  }
  return baseline_row_parallel_forward(act, weights.w_down, group);
}

std::vector<TokenTrace> greedy_generate(const DemoConfig& cfg,
                                        const DeviceGroup& group) {
  if (cfg.steps < 1 || cfg.batch < 1) {
    fail(ErrorCode::BadArgument, "greedy_generate requires steps, batch >= 1");
  }
  const DemoWeights weights = make_demo_weights(cfg);
  const std::int64_t B = cfg.batch, H = cfg.hidden, V = cfg.vocab;

  // Seeded prompt per chain; independent of batch size by construction.
  std::vector<std::int32_t> prompt(static_cast<std::size_t>(B));
  for (std::int64_t i = 0; i < B; ++i) {
    prompt[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(
        Rng::mix64(cfg.seed ^ Rng::mix64(static_cast<std::uint64_t>(i))) %
        static_cast<std::uint64_t>(V));
  }

  Matrix h(B, H, Dtype::F32);
  for (std::int64_t i = 0; i < B; ++i) {
    for (std::int64_t j = 0; j < H; ++j) {
      h.set(i, j, weights.embedding.at(prompt[static_cast<std::size_t>(i)], j));
    }
  }

  std::vector<TokenTrace> traces(static_cast<std::size_t>(B));
  std::vector<float> probs(static_cast<std::size_t>(V));

  for (int step = 0; step < cfg.steps; ++step) {
    for (int layer = 0; layer < cfg.layers; ++layer) {
      const FfnWeights& block = weights.blocks[static_cast<std::size_t>(layer)];
      const Matrix normed =
          rmsnorm(h, block.gamma_as_row.f32_data(), cfg.rms_eps);
      const Matrix f = ffn_block(normed, block, group, cfg);
      // Residual add in f32, then round-trip through the storage dtype.
      h = cast_to_f32(storage_cast(elementwise_add(h, f), cfg.dtype));
    }

    Matrix logits;
    const Matrix hb = storage_cast(h, cfg.dtype);
    if (cfg.kernel == KernelKind::Tree) {
      logits = column_parallel_forward(hb, weights.w_lm, group, cfg.blocks);
    } else {
      logits = baseline_column_parallel_forward(hb, weights.w_lm, group);
    }

    Matrix emb_next(B, H, Dtype::F32);
    for (std::int64_t i = 0; i < B; ++i) {
      softmax_row(&logits.f32_data()[i * V], V, probs.data());
      const std::int32_t token = argmax_row(probs.data(), V);
      auto& trace = traces[static_cast<std::size_t>(i)];
      trace.tokens.push_back(token);
      trace.step_probs.push_back(top_k_row(probs.data(), V, cfg.top_k));
      for (std::int64_t j = 0; j < H; ++j) {
        emb_next.set(i, j, weights.embedding.at(token, j));
      }
    }
    h = cast_to_f32(storage_cast(elementwise_add(h, emb_next), cfg.dtype));
  }
  return traces;
}

}  // namespace tbik
