#include "tbik/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tbik/errors.hpp"

namespace tbik {

bool RunReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

void RunReport::add(CheckResult check) {
  timings_ms[check.name] = check.elapsed_ms;
  checks.push_back(std::move(check));
}

nlohmann::ordered_json RunReport::to_json(bool include_timings) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config;

  std::vector<const CheckResult*> ordered;
  ordered.reserve(checks.size());
  for (const auto& c : checks) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const CheckResult* a, const CheckResult* b) {
              return a->name < b->name;
            });

  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const CheckResult* c : ordered) {
    nlohmann::ordered_json jc;
    jc["name"] = c->name;
    jc["pass"] = c->pass;
    jc["bit_diff_count"] = c->bit_diff_count;
    if (c->unique_outputs) jc["unique_outputs"] = *c->unique_outputs;
    if (c->max_prob_divergence) {
      jc["max_prob_divergence"] = *c->max_prob_divergence;
    }
    jc["seeds"] = c->seeds;
    if (!c->detail.empty()) jc["detail"] = c->detail;
    arr.push_back(std::move(jc));
  }
  j["checks"] = std::move(arr);
  j["passed"] = all_passed();
  if (!extra.is_null()) j["extra"] = extra;
  if (include_timings) j["timings_ms"] = timings_ms;
  return j;
}

std::string RunReport::to_string(bool include_timings) const {
  return to_json(include_timings).dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open for writing: " + path);
  out << contents;
  if (!out) fail(ErrorCode::Io, "short write: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tbik
