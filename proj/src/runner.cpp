#include "tbik/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "tbik/collective.hpp"
#include "tbik/errors.hpp"
#include "tbik/layers.hpp"
#include "tbik/oracle.hpp"
#include "tbik/threading.hpp"
#include "tbik/witness.hpp"

namespace tbik {

namespace {

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "0x%016llX", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::uint64_t> seed_list(int n, std::uint64_t base = 1) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) seeds[static_cast<std::size_t>(i)] = base + i;
  return seeds;
}

}  // namespace

CheckResult check_kernel_tp_invariance(Dtype dtype, const BlockConfig& blocks,
                                       const std::vector<int>& tp_set,
                                       int seeds, std::int64_t m,
                                       std::int64_t k, std::int64_t n) {
  Stopwatch timer;
  CheckResult result;
  result.name = std::string("kernel_tp_invariance_") + dtype_name(dtype);
  result.seeds = seed_list(seeds);
  result.pass = true;

  std::int64_t c_max = 1;
  for (int tp : tp_set) c_max = std::max<std::int64_t>(c_max, tp);

  for (std::uint64_t seed : result.seeds) {
    Rng ra(seed, 1), rb(seed, 2);
    const Matrix a = matrix_random_normal(ra, m, k, dtype, 0.0f, 1.0f);
    const Matrix b = matrix_random_normal(rb, k, n, dtype, 0.0f, 1.0f);

    Matrix reference;
    for (std::size_t i = 0; i < tp_set.size(); ++i) {
      DeviceGroup group(tp_set[i]);
      Matrix out = row_parallel_forward(a, b, group, blocks, c_max);
      if (i == 0) {
        reference = std::move(out);
      } else {
        const std::uint64_t diffs = bit_diff_count(reference, out);
        result.bit_diff_count += diffs;
        if (diffs != 0) result.pass = false;
      }
    }
  }
  result.detail = "m=" + std::to_string(m) + " k=" + std::to_string(k) +
                  " n=" + std::to_string(n) + " blocks=" +
                  std::to_string(blocks.block_m) + "x" +
                  std::to_string(blocks.block_k) + "x" +
                  std::to_string(blocks.block_n);
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_theorem1_exhaustive(int max_t, int vectors_per_case) {
  Stopwatch timer;
  CheckResult result;
  result.name = "theorem1_exhaustive";
  result.pass = true;
  result.seeds = seed_list(vectors_per_case);

  std::int64_t cases = 0, failures = 0;
  for (int t = 0; t <= max_t; ++t) {
    const std::int64_t leaf_count = std::int64_t{1} << t;
    for (int j = 0; (std::int64_t{1} << j) <= leaf_count; ++j) {
      const std::int64_t tp = std::int64_t{1} << j;
      for (std::uint64_t seed : result.seeds) {
        Rng rng(seed, static_cast<std::uint64_t>(t * 64 + j));
        std::vector<float> leaves(static_cast<std::size_t>(leaf_count));
        for (auto& v : leaves) {
          // Spread exponents so the check stresses cancellation, not just
          // same-magnitude sums.
          const int scale = static_cast<int>(rng.next_u64() % 41) - 20;
          v = static_cast<float>(rng.next_normal() * std::pow(2.0, scale));
        }
        ++cases;
        if (!oracle::check_theorem1(leaves, tp)) {
          ++failures;
          result.pass = false;
        }
      }
    }
  }
  result.bit_diff_count = static_cast<std::uint64_t>(failures);
  result.detail = "cases=" + std::to_string(cases) +
                  " failures=" + std::to_string(failures);
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_collective_symmetry(const std::vector<int>& world_sizes,
                                      int vectors, std::int64_t elems) {
  Stopwatch timer;
  CheckResult result;
  result.name = "collective_rank_symmetry";
  result.pass = true;
  result.seeds = seed_list(vectors);

  for (int w : world_sizes) {
    DeviceGroup group(w);
    for (std::uint64_t seed : result.seeds) {
      std::vector<Matrix> contributions;
      contributions.reserve(static_cast<std::size_t>(w));
      for (int r = 0; r < w; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r) + 1000 * w);
        contributions.push_back(
            matrix_random_normal(rng, 1, elems, Dtype::F32, 0.0f, 1.0f));
      }
      // tree_all_reduce_per_rank raises on rank divergence internally.
      const std::vector<Matrix> per_rank =
          tree_all_reduce_per_rank(group, contributions);

      // Element-wise agreement with the recursive tree operator.
      std::vector<float> leaves(static_cast<std::size_t>(w));
      for (std::int64_t e = 0; e < elems; ++e) {
        for (int r = 0; r < w; ++r) {
          leaves[static_cast<std::size_t>(r)] = contributions[r].at(0, e);
        }
        const float expected = oracle::tree_reduce(leaves);
        if (!f32_bit_equal(expected, per_rank[0].at(0, e))) {
          result.pass = false;
          ++result.bit_diff_count;
        }
      }
    }
  }
  result.detail = "world_sizes=" + std::to_string(world_sizes.size()) +
                  " vectors=" + std::to_string(vectors) +
                  " elems=" + std::to_string(elems);
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_demo_metrics(const DemoConfig& base,
                               const std::vector<int>& tp_set,
                               const std::vector<int>& batch_set,
                               int prompt_seeds) {
  Stopwatch timer;
  CheckResult result;
  result.name = "demo_metrics";
  result.pass = true;
  result.seeds = seed_list(prompt_seeds, base.seed);

  std::int64_t worst_unique = 1;
  double worst_divergence = 0.0;

  for (std::uint64_t seed : result.seeds) {
    std::vector<std::vector<std::int32_t>> token_runs;
    std::vector<std::vector<oracle::TopKProbs>> prob_runs;
    for (int tp : tp_set) {
      for (int batch : batch_set) {
        DemoConfig cfg = base;
        cfg.seed = seed;
        cfg.tp_size = tp;
        cfg.batch = batch;
        DeviceGroup group(tp);
        auto traces = greedy_generate(cfg, group);
        token_runs.push_back(traces[0].tokens);
        prob_runs.push_back(traces[0].step_probs);
      }
    }
    const std::int64_t unique = oracle::unique_output_count(token_runs);
    const float divergence = oracle::max_prob_divergence(prob_runs);
    worst_unique = std::max(worst_unique, unique);
    worst_divergence = std::max(worst_divergence, double{divergence});
    if (unique != 1 || divergence != 0.0f) result.pass = false;
  }

  result.unique_outputs = worst_unique;
  result.max_prob_divergence = worst_divergence;
  result.detail = "configs=" +
                  std::to_string(tp_set.size() * batch_set.size()) +
                  " steps=" + std::to_string(base.steps);
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_baseline_kernel_divergence(std::uint64_t seed,
                                             const std::vector<int>& tp_set) {
  Stopwatch timer;
  CheckResult result;
  result.name = "baseline_kernel_divergence";
  result.seeds = {seed};

  Rng ra(seed, 1), rb(seed, 2);
  const Matrix a = matrix_random_normal(ra, 4, 4096, Dtype::F32, 0.0f, 1.0f);
  const Matrix b = matrix_random_normal(rb, 4096, 8, Dtype::F32, 0.0f, 1.0f);

  std::set<std::uint64_t> prints;
  for (int tp : tp_set) {
    DeviceGroup group(tp);
    prints.insert(bit_fingerprint(baseline_row_parallel_forward(a, b, group)));
  }
  result.unique_outputs = static_cast<std::int64_t>(prints.size());
  result.pass = prints.size() >= 2;
  result.detail = "distinct_bit_patterns=" + std::to_string(prints.size());
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_baseline_demo_divergence(std::uint64_t seed,
                                           const std::vector<int>& tp_set) {
  Stopwatch timer;
  CheckResult result;
  result.name = "baseline_demo_divergence";
  result.seeds = {seed};

  std::vector<std::vector<std::int32_t>> token_runs;
  for (int tp : tp_set) {
    DeviceGroup group(tp);
    auto traces = greedy_generate(divergence_demo_config(seed, tp), group);
    token_runs.push_back(traces[0].tokens);
  }
  const std::int64_t unique = oracle::unique_output_count(token_runs);
  result.unique_outputs = unique;
  result.pass = unique >= 2;
  result.detail = "unique_outputs=" + std::to_string(unique);
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_accuracy_sanity(int seeds) {
  Stopwatch timer;
  CheckResult result;
  result.name = "accuracy_sanity";
  result.pass = true;
  result.seeds = seed_list(seeds);

  const std::int64_t dim = 256;
  // Small block_k so the tree actually has depth at K=256.
  const BlockConfig blocks{32, 16, 32, 0};
  double worst_ratio = 0.0;

  for (std::uint64_t seed : result.seeds) {
    Rng ra(seed, 1), rb(seed, 2);
    const Matrix a = matrix_random_normal(ra, dim, dim, Dtype::Bf16, 0.0f, 1.0f);
    const Matrix b = matrix_random_normal(rb, dim, dim, Dtype::Bf16, 0.0f, 1.0f);

    const std::vector<double> ref = oracle::matmul_f64(a, b);
    const Matrix tree = tree_matmul(a, b, blocks);
    const Matrix seq = oracle::sequential_matmul_f32(a, b);

    // Relative error with the denominator floored well below the typical
    // |result| ~ sqrt(K); keeps near-cancelled elements from dominating.
    auto max_rel_err = [&](const Matrix& m) {
      double worst = 0.0;
      const auto& data = m.f32_data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double denom = std::max(std::abs(ref[i]), 1e-2);
        worst = std::max(worst, std::abs(data[i] - ref[i]) / denom);
      }
      return worst;
    };

    const double tree_err = max_rel_err(tree);
    const double seq_err = max_rel_err(seq);
    const double ratio = tree_err / seq_err;
    worst_ratio = std::max(worst_ratio, ratio);
    if (tree_err > 4.0 * seq_err) result.pass = false;
  }
  result.detail = "worst_error_ratio=" + std::to_string(worst_ratio);
  result.elapsed_ms = timer.ms();
  return result;
}

CheckResult check_bf16_exhaustive() {
  Stopwatch timer;
  CheckResult result;
  result.name = "bf16_roundtrip_exhaustive";
  result.pass = true;

  std::int64_t checked = 0;
  for (std::uint32_t bits = 0; bits <= 0xFFFF; ++bits) {
    const Bf16 v{static_cast<std::uint16_t>(bits)};
    const bool is_nan =
        (bits & 0x7F80u) == 0x7F80u && (bits & 0x007Fu) != 0;
    if (is_nan) continue;
    ++checked;
    if (bf16_round(bf16_to_f32(v)).bits != v.bits) {
      result.pass = false;
      ++result.bit_diff_count;
    }
  }
  result.detail = "patterns_checked=" + std::to_string(checked);
  result.elapsed_ms = timer.ms();
  return result;
}

// ---- fixture generation ----

namespace {

nlohmann::ordered_json nonassoc_json(const NonassocWitness& w) {
  nlohmann::ordered_json j;
  j["triple"] = {{"a", w.a},
                 {"b", w.b},
                 {"c", w.c},
                 {"left_first", w.left_first},
                 {"left_first_bits", hex32(f32_bits(w.left_first))},
                 {"right_first", w.right_first},
                 {"right_first_bits", hex32(f32_bits(w.right_first))}};
  nlohmann::ordered_json vec = nlohmann::ordered_json::array();
  for (float v : w.vec) vec.push_back(v);
  j["vector"] = std::move(vec);
  j["sequential"] = w.sequential;
  j["sequential_bits"] = hex32(f32_bits(w.sequential));
  j["tree"] = w.tree;
  j["tree_bits"] = hex32(f32_bits(w.tree));
  return j;
}

nlohmann::ordered_json fma_json(const FmaWitness& w) {
  nlohmann::ordered_json j;
  j["a_bits"] = hex32(f32_bits(w.a));
  j["b_bits"] = hex32(f32_bits(w.b));
  j["c_bits"] = hex32(f32_bits(w.c));
  j["fused"] = w.fused;
  j["fused_bits"] = hex32(f32_bits(w.fused));
  j["two_step"] = w.two_step;
  j["two_step_bits"] = hex32(f32_bits(w.two_step));
  return j;
}

nlohmann::ordered_json leaf_order_json(const LeafOrderWitness& w) {
  nlohmann::ordered_json j;
  j["seed"] = w.seed;
  j["ascending_bits"] = hex32(f32_bits(w.ascending));
  j["descending_bits"] = hex32(f32_bits(w.descending));
  return j;
}

nlohmann::ordered_json divergence_json(const DivergenceSeeds& d) {
  nlohmann::ordered_json j;
  j["tp_set"] = {1, 2, 4, 8};
  j["kernel_seed"] = d.kernel_seed;
  nlohmann::ordered_json prints = nlohmann::ordered_json::array();
  for (std::uint64_t p : d.kernel_fingerprints) prints.push_back(hex64(p));
  j["kernel_fingerprints"] = std::move(prints);
  j["demo_seed"] = d.demo_seed;
  j["demo_unique_outputs"] = d.demo_unique_outputs;
  return j;
}

Matrix leaf_order_tile_matrix(const LeafOrderWitness& w) {
  std::vector<float> data = w.a;
  data.insert(data.end(), w.b.begin(), w.b.end());
  return Matrix::from_f32(2, 8, std::move(data));
}

void write_fixture_files(const std::string& dir) {
  std::filesystem::create_directories(dir);
  const NonassocWitness na = find_nonassoc_witness();
  write_text_file(dir + "/nonassoc.json", nonassoc_json(na).dump(2) + "\n");
  const FmaWitness fw = find_fma_witness();
  write_text_file(dir + "/fma_witness.json", fma_json(fw).dump(2) + "\n");
  const LeafOrderWitness lo = find_leaf_order_witness();
  write_text_file(dir + "/leaf_order.json", leaf_order_json(lo).dump(2) + "\n");
  matrix_write(dir + "/leaf_order_tile.tbik", leaf_order_tile_matrix(lo));
  const DivergenceSeeds ds = find_divergence_seeds();
  write_text_file(dir + "/divergence_seeds.json",
                  divergence_json(ds).dump(2) + "\n");
}

}  // namespace

CheckResult check_fixture_regeneration(const std::string& fixture_dir) {
  Stopwatch timer;
  CheckResult result;
  result.name = "fixture_regeneration";
  result.pass = true;

  const std::string scratch =
      (std::filesystem::temp_directory_path() / "tbik_fixture_regen").string();
  write_fixture_files(scratch);

  const char* files[] = {"nonassoc.json", "fma_witness.json",
                         "leaf_order.json", "leaf_order_tile.tbik",
                         "divergence_seeds.json"};
  std::string mismatches;
  for (const char* f : files) {
    const std::string regenerated = read_text_file(scratch + "/" + f);
    const std::string committed = read_text_file(fixture_dir + "/" + f);
    if (regenerated != committed) {
      result.pass = false;
      ++result.bit_diff_count;
      mismatches += std::string(f) + " ";
    }
  }
  result.detail = result.pass ? "all fixtures byte-identical"
                              : "mismatch: " + mismatches;
  result.elapsed_ms = timer.ms();
  return result;
}

// ---- report assembly ----

RunReport run_verify(const VerifyOptions& opts) {
  RunReport report;
  report.command = "verify";

  nlohmann::ordered_json cfg;
  {
    nlohmann::ordered_json dtypes = nlohmann::ordered_json::array();
    for (Dtype d : opts.dtypes) dtypes.push_back(dtype_name(d));
    cfg["dtypes"] = std::move(dtypes);
    cfg["tp_set"] = opts.tp_set;
    cfg["batch_set"] = opts.batch_set;
    cfg["seeds"] = opts.seeds;
    if (opts.blocks) {
      cfg["blocks"] = {opts.blocks->block_m, opts.blocks->block_k,
                       opts.blocks->block_n};
    }
    cfg["k_first"] = opts.k_first;
    cfg["baseline"] = opts.baseline;
    cfg["gemm"] = {opts.gemm_m, opts.gemm_k, opts.gemm_n};
    cfg["demo_steps"] = opts.demo_steps;
    cfg["workers"] = worker_count();
  }
  report.config = std::move(cfg);

  for (Dtype dtype : opts.dtypes) {
    BlockConfig blocks = opts.blocks ? *opts.blocks : default_block_config(dtype);
    if (opts.k_first > 0) blocks.k_first = opts.k_first;
    report.add(check_kernel_tp_invariance(dtype, blocks, opts.tp_set,
                                          opts.seeds, opts.gemm_m, opts.gemm_k,
                                          opts.gemm_n));
  }

  report.add(check_theorem1_exhaustive(6, 100));
  report.add(check_collective_symmetry(opts.tp_set, std::max(opts.seeds, 8), 8));

  {
    DemoConfig demo;
    demo.steps = opts.demo_steps;
    demo.dtype = opts.dtypes.front();
    report.add(check_demo_metrics(demo, opts.tp_set, opts.batch_set,
                                  opts.demo_prompt_seeds));
  }

  if (opts.baseline) {
    const DivergenceSeeds seeds =
        opts.fixture_dir.empty()
            ? find_divergence_seeds()
            : [&] {
                const auto j = nlohmann::json::parse(
                    read_text_file(opts.fixture_dir + "/divergence_seeds.json"));
                DivergenceSeeds d;
                d.kernel_seed = j.at("kernel_seed").get<std::uint64_t>();
                d.demo_seed = j.at("demo_seed").get<std::uint64_t>();
                return d;
              }();
    report.add(check_baseline_kernel_divergence(seeds.kernel_seed, opts.tp_set));
    report.add(check_baseline_demo_divergence(seeds.demo_seed, opts.tp_set));
  }

  return report;
}

RunReport run_bench(const BenchOptions& opts) {
  if (opts.repeats < 1) {
    fail(ErrorCode::BadArgument, "bench requires repeats >= 1");
  }
  RunReport report;
  report.command = "bench";
  report.config = {{"m_list", opts.m_list},
                   {"k", opts.k},
                   {"n", opts.n},
                   {"repeats", opts.repeats},
                   {"dtype", dtype_name(opts.dtype)},
                   {"workers", worker_count()}};

  const BlockConfig blocks = default_block_config(opts.dtype);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();

  for (std::int64_t m : opts.m_list) {
    Rng ra(1, 1), rb(1, 2);
    const Matrix a =
        matrix_random_normal(ra, m, opts.k, opts.dtype, 0.0f, 1.0f);
    const Matrix b =
        matrix_random_normal(rb, opts.k, opts.n, opts.dtype, 0.0f, 1.0f);

    auto time_best = [&](auto&& fn) {
      double best = 1e300;
      for (int r = 0; r < opts.repeats; ++r) {
        Stopwatch t;
        fn();
        best = std::min(best, t.ms());
      }
      return best;
    };

    Matrix tree_out, seq_out;
    const double tree_ms = time_best([&] { tree_out = tree_matmul(a, b, blocks); });
    const double seq_ms =
        time_best([&] { seq_out = oracle::sequential_matmul_f32(a, b); });

    DeviceGroup group(8);
    std::vector<Matrix> contributions;
    for (int r = 0; r < 8; ++r) {
      Rng rng(2, static_cast<std::uint64_t>(r));
      contributions.push_back(
          matrix_random_normal(rng, m, opts.n, Dtype::F32, 0.0f, 1.0f));
    }
    Matrix tree_red, ring_red;
    const double tree_red_ms =
        time_best([&] { tree_red = tree_all_reduce(group, contributions); });
    const double ring_red_ms = time_best(
        [&] { ring_red = ring_reduce_baseline(group, contributions); });

    const std::string key = "m=" + std::to_string(m);
    report.timings_ms[key + "/tree_matmul"] = tree_ms;
    report.timings_ms[key + "/sequential_matmul"] = seq_ms;
    report.timings_ms[key + "/tree_all_reduce"] = tree_red_ms;
    report.timings_ms[key + "/ring_reduce"] = ring_red_ms;

    nlohmann::ordered_json row;
    row["m"] = m;
    row["tree_matmul_fingerprint"] = hex64(bit_fingerprint(tree_out));
    row["sequential_fingerprint"] = hex64(bit_fingerprint(seq_out));
    row["tree_all_reduce_fingerprint"] = hex64(bit_fingerprint(tree_red));
    row["ring_reduce_fingerprint"] = hex64(bit_fingerprint(ring_red));
    rows.push_back(std::move(row));
  }

  report.extra = {{"rows", std::move(rows)}};
  return report;
}

RunReport run_oracle(const OracleOptions& opts) {
  RunReport report;
  report.command = "oracle";
  report.config = {{"case", opts.which}, {"out_dir", opts.out_dir}};

  if (opts.which == "nonassoc") {
    std::filesystem::create_directories(opts.out_dir);
    const NonassocWitness w = find_nonassoc_witness();
    write_text_file(opts.out_dir + "/nonassoc.json",
                    nonassoc_json(w).dump(2) + "\n");
    CheckResult check;
    check.name = "nonassoc_witness";
    check.pass = !f32_bit_equal(w.left_first, w.right_first) &&
                 !f32_bit_equal(w.sequential, w.tree);
    check.detail = "sequential=" + hex32(f32_bits(w.sequential)) +
                   " tree=" + hex32(f32_bits(w.tree));
    report.add(std::move(check));
  } else if (opts.which == "theorem1") {
    std::filesystem::create_directories(opts.out_dir);
    CheckResult check = check_theorem1_exhaustive(6, 100);
    nlohmann::ordered_json j;
    j["max_t"] = 6;
    j["vectors_per_case"] = 100;
    j["failures"] = check.bit_diff_count;
    j["detail"] = check.detail;
    write_text_file(opts.out_dir + "/theorem1.json", j.dump(2) + "\n");
    report.add(std::move(check));
  } else if (opts.which == "fixtures") {
    write_fixture_files(opts.out_dir);
    CheckResult check;
    check.name = "fixtures_written";
    check.pass = true;
    check.detail = "nonassoc.json fma_witness.json leaf_order.json "
                   "leaf_order_tile.tbik divergence_seeds.json";
    report.add(std::move(check));
  } else {
    fail(ErrorCode::BadArgument, "unknown oracle case: " + opts.which);
  }
  return report;
}

}  // namespace tbik
