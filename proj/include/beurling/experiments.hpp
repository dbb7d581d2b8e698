#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "beurling/step_function.hpp"

namespace beurling {

enum class Experiment { kDensity, kDiamond, kRandomExample, kCounterexample, kSmooth, kVerify, kOscillate };

std::string to_string(Experiment e);
// Accepts DENSITY / density / random-example / RANDOM_EXAMPLE and so on.
Experiment experiment_from_string(const std::string& s);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitAssertion = 2, kExitCapacity = 3 };

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  int threads = 1;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  json report;
  std::vector<std::filesystem::path> files;  // written outputs, report.json last
};

// Default output directory: $BEURLING_OUT_DIR or ./beurling_out.
std::filesystem::path default_out_dir();

// Validates the config and throws ConfigError naming the offending field.
void validate_config(const json& config);

// Runs one configured experiment. Writes report.json plus plot-ready CSVs to
// options.out_dir. Never throws for configuration, capacity or gate
// failures; those map to the exit codes above.
RunResult run(const json& config, const RunOptions& options);

}  // namespace beurling
