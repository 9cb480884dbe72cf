#pragma once

// Deterministic searches that produce the regression fixtures: concrete
// inputs demonstrating floating-point order sensitivity. Every search scans
// candidates in a fixed order, so repeated runs yield identical fixtures.

#include <cstdint>
#include <vector>

#include "tbik/demo.hpp"
#include "tbik/matrix.hpp"

namespace tbik {

// (a + b) + c != a + (b + c) in f32.
struct NonassocWitness {
  float a, b, c;
  float left_first;   // (a + b) + c
  float right_first;  // a + (b + c)
  std::vector<float> vec;  // 4-leaf example
  float sequential;        // left-to-right fold of vec
  float tree;              // pairwise tree over vec
};
NonassocWitness find_nonassoc_witness();

// fma(a, b, c) != add(mul(a, b), c): one rounding vs two.
struct FmaWitness {
  float a, b, c;
  float fused;
  float two_step;
};
FmaWitness find_fma_witness();

// 8-element tile where ascending-k and descending-k fma accumulation differ.
struct LeafOrderWitness {
  std::uint64_t seed;
  std::vector<float> a, b;  // length 8 each
  float ascending;
  float descending;
};
LeafOrderWitness find_leaf_order_witness();

// Seeds for which the sequential-K + ring baseline visibly diverges across
// tp sizes {1, 2, 4, 8}.
struct DivergenceSeeds {
  std::uint64_t kernel_seed = 0;
  std::vector<std::uint64_t> kernel_fingerprints;  // one per tp size
  std::uint64_t demo_seed = 0;
  std::int64_t demo_unique_outputs = 0;
};
DivergenceSeeds find_divergence_seeds();

// Demo configuration used by the baseline divergence search and by the
// checks that replay the recorded seed.
DemoConfig divergence_demo_config(std::uint64_t seed, int tp_size);

}  // namespace tbik
