#pragma once

// Suite configuration and orchestration: one verification report per
// registered inequality, plus the summary and the echoed configuration.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rieszlab/harness.hpp"

namespace rieszlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxNodesPerAxis = 129;
inline constexpr int kMaxTimeNodes = 256;

struct SuiteInfo {
  const char* id;
  const char* description;
};

const std::vector<SuiteInfo>& registered_suites();
bool is_registered(std::string_view id);

struct SuiteConfig {
  std::uint64_t seed = 0;
  std::vector<std::string> ids;
  int scale_count = 3;
  nlohmann::ordered_json thresholds;
  std::string output_dir;
  std::vector<std::string> formats;
  nlohmann::ordered_json suites;  // id -> {grid, slab?, params}, fully resolved
  nlohmann::ordered_json echo;    // every resolved setting
  std::string config_hash;        // FNV-1a of the echo without output_dir

  double threshold(const std::string& key) const { return thresholds.at(key).get<double>(); }
};

// Empty text means the default configuration. Throws ConfigError on unknown
// IDs or keys, malformed values and grids beyond the desk-scale caps.
SuiteConfig parse_config(std::string_view text);

struct SuiteOutput {
  VerificationReport report;
  // Extra data files (name, contents) written next to the report.
  std::vector<std::pair<std::string, std::string>> extra_files;
};

// Runs one registered suite; failures inside the suite become a failing
// report whose reason is the error message.
SuiteOutput run_one(const SuiteConfig& config, const std::string& id);

struct RunResult {
  std::vector<VerificationReport> reports;
  int exit_status = 0;  // 0 iff every report passes
};

// Runs every selected suite, writes <id>.json / <id>.csv (per the formats),
// extra files, config.echo.json and summary.json (last). I/O errors throw.
RunResult run_suite(const SuiteConfig& config);

}  // namespace rieszlab
