#include "tbik/witness.hpp"

#include "tbik/errors.hpp"
#include "tbik/layers.hpp"
#include "tbik/matmul.hpp"
#include "tbik/oracle.hpp"

namespace tbik {

NonassocWitness find_nonassoc_witness() {
  NonassocWitness w{};
  // Scan the 1e8 family: a magnitude whose f32 spacing exceeds the small
  // addend, so grouping decides whether the addend survives.
  const float big = 1e8f;
  for (int s = 1; s < 64; ++s) {
    const float small = static_cast<float>(s);
    const float left = add_f32(add_f32(small, big), -big);
    const float right = add_f32(small, add_f32(big, -big));
    if (!f32_bit_equal(left, right)) {
      w.a = small;
      w.b = big;
      w.c = -big;
      w.left_first = left;
      w.right_first = right;
      break;
    }
  }
  w.vec = {1e8f, 1.0f, -1e8f, 1.0f};
  float seq = 0.0f;
  for (float v : w.vec) seq = add_f32(seq, v);
  w.sequential = seq;
  w.tree = oracle::tree_reduce(w.vec);
  return w;
}

FmaWitness find_fma_witness() {
  // Mantissa sweep near 1.0: the double-length product keeps a low bit that
  // the separate multiply rounds away.
  for (int ma = 1; ma < 256; ++ma) {
    for (int mb = 1; mb < 256; ++mb) {
      const float a = 1.0f + static_cast<float>(ma) * 0x1.0p-12f;
      const float b = 1.0f + static_cast<float>(mb) * 0x1.0p-12f;
      const float c = -mul_f32(a, b);
      const float fused = fma_f32(a, b, c);
      const float two_step = add_f32(mul_f32(a, b), c);
      if (!f32_bit_equal(fused, two_step)) {
        return FmaWitness{a, b, c, fused, two_step};
      }
    }
  }
  fail(ErrorCode::BadArgument, "fma witness search exhausted without a hit");
}

LeafOrderWitness find_leaf_order_witness() {
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng rng(seed, 7);
    std::vector<float> a(8), b(8);
    for (auto& v : a) v = static_cast<float>(rng.next_normal());
    for (auto& v : b) v = static_cast<float>(rng.next_normal());
    const float asc = leaf_dot(a.data(), b.data(), 8);
    float desc = 0.0f;
    for (int k = 7; k >= 0; --k) {
      desc = fma_f32(a[static_cast<std::size_t>(k)],
                     b[static_cast<std::size_t>(k)], desc);
    }
    if (!f32_bit_equal(asc, desc)) {
      return LeafOrderWitness{seed, std::move(a), std::move(b), asc, desc};
    }
  }
  fail(ErrorCode::BadArgument, "leaf order search exhausted without a hit");
}

DemoConfig divergence_demo_config(std::uint64_t seed, int tp_size) {
  DemoConfig cfg;
  cfg.hidden = 256;
  cfg.intermediate = 512;
  cfg.vocab = 64;
  cfg.layers = 4;
  cfg.steps = 64;
  cfg.seed = seed;
  cfg.tp_size = tp_size;
  cfg.batch = 1;
  cfg.dtype = Dtype::F32;
  cfg.blocks = BlockConfig{16, 16, 16, 0};
  cfg.kernel = KernelKind::Baseline;
  cfg.weight_std = 0.02f;
  cfg.embed_std = 0.05f;
  return cfg;
}

DivergenceSeeds find_divergence_seeds() {
  DivergenceSeeds out;
  const std::vector<int> tp_set = {1, 2, 4, 8};

  bool kernel_found = false;
  for (std::uint64_t seed = 1; seed <= 64 && !kernel_found; ++seed) {
    Rng ra(seed, 1), rb(seed, 2);
    const Matrix a = matrix_random_normal(ra, 4, 4096, Dtype::F32, 0.0f, 1.0f);
    const Matrix b = matrix_random_normal(rb, 4096, 8, Dtype::F32, 0.0f, 1.0f);
    std::vector<std::uint64_t> prints;
    for (int tp : tp_set) {
      DeviceGroup group(tp);
      prints.push_back(
          bit_fingerprint(baseline_row_parallel_forward(a, b, group)));
    }
    for (std::size_t i = 1; i < prints.size(); ++i) {
      if (prints[i] != prints[0]) {
        out.kernel_seed = seed;
        out.kernel_fingerprints = prints;
        kernel_found = true;
        break;
      }
    }
  }
  if (!kernel_found) {
    fail(ErrorCode::BadArgument, "kernel divergence search found no seed");
  }

  for (std::uint64_t seed = 1; seed <= 64; ++seed) {
    std::vector<std::vector<std::int32_t>> token_runs;
    for (int tp : tp_set) {
      DeviceGroup group(tp);
      auto traces = greedy_generate(divergence_demo_config(seed, tp), group);
      token_runs.push_back(traces[0].tokens);
    }
    const std::int64_t unique = oracle::unique_output_count(token_runs);
    if (unique >= 2) {
      out.demo_seed = seed;
      out.demo_unique_outputs = unique;
      return out;
    }
  }
  fail(ErrorCode::BadArgument, "demo divergence search found no seed");
}

}  // namespace tbik
