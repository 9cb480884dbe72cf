#pragma once

// Drivers behind the CLI subcommands and the acceptance suite: each check
// builds a CheckResult, and the run_* entry points assemble reports.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbik/demo.hpp"
#include "tbik/matmul.hpp"
#include "tbik/report.hpp"

namespace tbik {

struct VerifyOptions {
  std::vector<Dtype> dtypes = {Dtype::Bf16};
  std::vector<int> tp_set = {1, 2, 4, 8};
  std::vector<int> batch_set = {8, 16, 32};
  int seeds = 5;
  std::optional<BlockConfig> blocks;  // unset: per-dtype defaults
  std::int64_t k_first = 0;
  bool baseline = false;
  std::int64_t gemm_m = 64, gemm_k = 4096, gemm_n = 128;
  int demo_steps = 8;
  int demo_prompt_seeds = 2;
  std::string fixture_dir;  // enables fixture-replay checks when set
};

struct BenchOptions {
  std::vector<std::int64_t> m_list = {1, 16, 64};
  std::int64_t k = 4096;
  std::int64_t n = 128;
  int repeats = 3;
  Dtype dtype = Dtype::Bf16;
};

struct OracleOptions {
  std::string which;  // nonassoc | theorem1 | fixtures
  std::string out_dir = "fixtures";
};

RunReport run_verify(const VerifyOptions& opts);
RunReport run_bench(const BenchOptions& opts);
RunReport run_oracle(const OracleOptions& opts);

// ---- individual checks ----

CheckResult check_kernel_tp_invariance(Dtype dtype, const BlockConfig& blocks,
                                       const std::vector<int>& tp_set,
                                       int seeds, std::int64_t m,
                                       std::int64_t k, std::int64_t n);

CheckResult check_theorem1_exhaustive(int max_t, int vectors_per_case);

CheckResult check_collective_symmetry(const std::vector<int>& world_sizes,
                                      int vectors, std::int64_t elems);

CheckResult check_demo_metrics(const DemoConfig& base,
                               const std::vector<int>& tp_set,
                               const std::vector<int>& batch_set,
                               int prompt_seeds);

CheckResult check_baseline_kernel_divergence(std::uint64_t seed,
                                             const std::vector<int>& tp_set);

CheckResult check_baseline_demo_divergence(std::uint64_t seed,
                                           const std::vector<int>& tp_set);

CheckResult check_accuracy_sanity(int seeds);

CheckResult check_bf16_exhaustive();

// Regenerates every fixture into a scratch directory and byte-compares with
// the committed copies under fixture_dir.
CheckResult check_fixture_regeneration(const std::string& fixture_dir);

}  // namespace tbik
