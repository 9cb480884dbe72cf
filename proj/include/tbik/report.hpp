#pragma once

// Machine-readable run reports. Reports with the same flags are
// byte-identical across runs except for the timings section, which is kept
// in its own object so CI can diff everything else.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tbik {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct CheckResult {
  std::string name;
  bool pass = false;
  std::uint64_t bit_diff_count = 0;
  std::optional<std::int64_t> unique_outputs;     // U, demo runs
  std::optional<double> max_prob_divergence;      // D, demo runs
  std::vector<std::uint64_t> seeds;
  std::string detail;
  double elapsed_ms = 0.0;
};

struct RunReport {
  std::string command;
  nlohmann::ordered_json config;
  std::vector<CheckResult> checks;       // serialized sorted by name
  nlohmann::ordered_json extra;          // command-specific payload
  std::map<std::string, double> timings_ms;

  bool all_passed() const;
  void add(CheckResult check);

  // include_timings=false yields the stable portion used for byte-identity
  // comparisons.
  nlohmann::ordered_json to_json(bool include_timings = true) const;
  std::string to_string(bool include_timings = true) const;
};

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace tbik
