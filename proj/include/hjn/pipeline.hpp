#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hjn/config.hpp"

namespace hjn {

struct RunOptions {
  std::filesystem::path out_dir;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;  ///< overrides run.seed
};

enum class ClaimStatus { Pass, Fail, Info };
const char* to_string(ClaimStatus s);

struct Claim {
  std::string name;
  ClaimStatus status = ClaimStatus::Info;
  std::string detail;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  std::vector<Claim> claims;
  std::vector<StageTiming> timings;
  std::vector<std::string> files;  ///< relative to the output directory, manifest excluded
  std::filesystem::path out_dir;

  bool all_pass() const;
  /// 0 when every counted claim passed, 2 otherwise.
  int exit_code() const { return all_pass() ? 0 : 2; }
};

/// Runs the whole pipeline for one scenario and writes tables, verdict.txt
/// and manifest.json into `options.out_dir`. Configuration problems
/// (ConfigError, ObliquenessViolated, CflViolation) propagate as Error; a
/// numerical stage that throws is recorded as a failed claim instead.
PipelineResult run_pipeline(const ScenarioConfig& config, const RunOptions& options);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace hjn
