#pragma once

// Command-line front end: config parsing, the subcommands, and exit codes.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srw/reinforce.hpp"
#include "srw/step_distribution.hpp"

namespace srw::cli {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { exit_pass = 0, exit_test_failure = 1, exit_usage = 2 };

/// Bad flags, bad config values, or arguments outside a command's domain.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raw `key = value` settings; flags are merged over the config file.
using Settings = std::map<std::string, std::string>;

/// Parses flat `key = value` lines; `#` starts a comment. Keys may be written
/// with or without leading dashes. Throws UsageError on malformed lines.
Settings parse_config(std::istream& in);

struct RunConfig {
  std::string command;
  std::string dist = "rademacher";
  std::optional<double> p;
  std::optional<double> q;
  std::vector<double> grid;
  std::vector<std::uint64_t> checkpoints;  // also the index list for exact/enumerate
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> paths;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out;  // empty = stdout
  std::string format;
  double alpha = 0.005;
  bool variance_limit = false;
  bool classical = false;

  /// Everything except workers and output location, which cannot change results.
  nlohmann::json echo() const;
};

/// Typed, validated view of merged settings. Throws UsageError.
RunConfig make_run_config(const std::string& command, const Settings& settings);

struct CommandResult {
  int exit_code = exit_pass;
  std::string output;       // the report or CSV body
  std::string diagnostics;  // human-readable summary for stderr
};

CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_fluct(const RunConfig& cfg);
CommandResult cmd_bridge(const RunConfig& cfg);
CommandResult cmd_exact(const RunConfig& cfg);
CommandResult cmd_enumerate(const RunConfig& cfg);
CommandResult cmd_equivalence(const RunConfig& cfg);

struct EnumerationCheck {
  Vector mean;
  Matrix covariance;
  Matrix exact_covariance;  // a_n^2 m_n Sigma
  double max_error = 0.0;   // largest entrywise and mean discrepancy
  bool pass = false;
};

/// Compares a pmf's mean and covariance with n E X and a_n^2 m_n Sigma.
EnumerationCheck enumeration_cross_check(const ExactPmf& pmf, const StepDistribution& d, double p,
                                         std::uint64_t n, double tolerance = 1e-10);

/// Removes the "timing" member recursively, for reproducibility comparisons.
nlohmann::json strip_timing(nlohmann::json report);

/// Full entry point: parses argv, runs the command, writes output to --out or
/// `out`, diagnostics to `err`, and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace srw::cli
