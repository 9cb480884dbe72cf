// tbik: verification suites, divergence demos, benchmarks, and fixture
// generation for the tree-reduction kernels. Exit codes: 0 all checks pass,
// 1 check failure, 2 usage/configuration error.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tbik/errors.hpp"
#include "tbik/matmul.hpp"
#include "tbik/report.hpp"
#include "tbik/runner.hpp"

namespace {

int parse_dtype(const std::string& name, tbik::Dtype& out) {
  if (name == "bf16") {
    out = tbik::Dtype::Bf16;
    return 0;
  }
  if (name == "f32") {
    out = tbik::Dtype::F32;
    return 0;
  }
  std::fprintf(stderr, "error: unknown dtype '%s' (expected bf16 or f32)\n",
               name.c_str());
  return 2;
}

int validate_power_of_two_set(const std::vector<int>& values,
                              const char* flag) {
  for (int v : values) {
    if (!tbik::is_power_of_two(v)) {
      std::fprintf(stderr, "error: %s entries must be powers of two, got %d\n",
                   flag, v);
      return 2;
    }
  }
  return 0;
}

bool parse_blocks(const std::string& spec, tbik::BlockConfig& blocks) {
  std::int64_t m = 0, k = 0, n = 0;
  if (std::sscanf(spec.c_str(), "%ldx%ldx%ld", &m, &k, &n) != 3 || m < 1 ||
      k < 1 || n < 1) {
    return false;
  }
  blocks.block_m = m;
  blocks.block_k = k;
  blocks.block_n = n;
  return true;
}

void emit(const tbik::RunReport& report, const std::string& out_path) {
  const std::string text = report.to_string();
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    tbik::write_text_file(out_path, text);
    std::printf("report written to %s\n", out_path.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic tensor-parallel kernel laboratory"};
  app.require_subcommand(1);

  // verify
  auto* verify = app.add_subcommand(
      "verify", "run tp-invariance, collective, and demo-model suites");
  std::string dtype_flag = "bf16";
  std::vector<int> tp_set = {1, 2, 4, 8};
  std::vector<int> batch_set = {8, 16, 32};
  int seeds = 5;
  std::string blocks_flag;
  std::int64_t k_first = 0;
  bool baseline = false;
  std::string out_path;
  verify->add_option("--dtype", dtype_flag, "input dtype: bf16 or f32");
  verify->add_option("--tp-set", tp_set, "tensor-parallel sizes")->delimiter(',');
  verify->add_option("--batch-set", batch_set, "batch sizes")->delimiter(',');
  verify->add_option("--seeds", seeds, "random seeds per check");
  verify->add_option("--blocks", blocks_flag, "block sizes as MxKxN");
  verify->add_option("--k-first", k_first, "tiles merged before first carry");
  verify->add_flag("--baseline", baseline,
                   "also run the divergence checks for the baseline kernels");
  verify->add_option("--out", out_path, "write the JSON report here");

  // bench
  auto* bench = app.add_subcommand(
      "bench", "relative timings: tree vs sequential kernels and reductions");
  std::vector<std::int64_t> m_list = {1, 16, 64};
  std::int64_t bench_k = 4096, bench_n = 128;
  int repeats = 3;
  std::string bench_dtype = "bf16";
  std::string bench_out;
  bench->add_option("--m-list", m_list, "output row counts")->delimiter(',');
  bench->add_option("--k", bench_k, "reduction dimension");
  bench->add_option("--n", bench_n, "output columns");
  bench->add_option("--repeats", repeats, "timing repeats (best-of)");
  bench->add_option("--dtype", bench_dtype, "input dtype: bf16 or f32");
  bench->add_option("--out", bench_out, "write the JSON report here");

  // oracle
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "regenerate derived witnesses and fixture files");
  std::string which;
  std::string out_dir = "fixtures";
  oracle_cmd->add_option("--case", which, "nonassoc | theorem1 | fixtures")
      ->required();
  oracle_cmd->add_option("--out-dir", out_dir, "fixture output directory");
  std::string oracle_out;
  oracle_cmd->add_option("--out", oracle_out, "write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*verify) {
      tbik::Dtype dtype;
      if (int rc = parse_dtype(dtype_flag, dtype)) return rc;
      if (int rc = validate_power_of_two_set(tp_set, "--tp-set")) return rc;
      if (seeds < 1) {
        std::fprintf(stderr, "error: --seeds must be >= 1\n");
        return 2;
      }
      for (int b : batch_set) {
        if (b < 1) {
          std::fprintf(stderr, "error: --batch-set entries must be >= 1\n");
          return 2;
        }
      }
      tbik::VerifyOptions opts;
      opts.dtypes = {dtype};
      opts.tp_set = tp_set;
      opts.batch_set = batch_set;
      opts.seeds = seeds;
      opts.k_first = k_first;
      opts.baseline = baseline;
      if (!blocks_flag.empty()) {
        tbik::BlockConfig blocks{};
        if (!parse_blocks(blocks_flag, blocks)) {
          std::fprintf(stderr, "error: --blocks expects MxKxN, got '%s'\n",
                       blocks_flag.c_str());
          return 2;
        }
        blocks.k_first = k_first;
        opts.blocks = blocks;
      }
      const tbik::RunReport report = tbik::run_verify(opts);
      emit(report, out_path);
      return report.all_passed() ? 0 : 1;
    }

    if (*bench) {
      tbik::Dtype dtype;
      if (int rc = parse_dtype(bench_dtype, dtype)) return rc;
      if (repeats < 1) {
        std::fprintf(stderr, "error: --repeats must be >= 1\n");
        return 2;
      }
      for (std::int64_t m : m_list) {
        if (m < 1) {
          std::fprintf(stderr, "error: --m-list entries must be >= 1\n");
          return 2;
        }
      }
      tbik::BenchOptions opts;
      opts.m_list = m_list;
      opts.k = bench_k;
      opts.n = bench_n;
      opts.repeats = repeats;
      opts.dtype = dtype;
      const tbik::RunReport report = tbik::run_bench(opts);
      emit(report, bench_out);
      return 0;
    }

    if (*oracle_cmd) {
      if (which != "nonassoc" && which != "theorem1" && which != "fixtures") {
        std::fprintf(stderr, "error: unknown --case '%s'\n", which.c_str());
        return 2;
      }
      tbik::OracleOptions opts;
      opts.which = which;
      opts.out_dir = out_dir;
      const tbik::RunReport report = tbik::run_oracle(opts);
      emit(report, oracle_out);
      return report.all_passed() ? 0 : 1;
    }
  } catch (const tbik::TbikError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
