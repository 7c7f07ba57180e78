#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cardpath::experiment {

/// Exit statuses of the runner.
enum class Status : int { ok = 0, validation_error = 2, numerical_failure = 3 };

/// Bad configuration or arguments; the message names the offending field.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind { propagator_convergence, interference, concentration_scan, mapping_demo };

/// Fully resolved experiment parameters. Every field has a documented
/// default; `validate` enforces the ranges.
struct ExperimentConfig {
  Kind experiment = Kind::propagator_convergence;
  // physics
  std::string potential = "free";  // free | harmonic | linear
  double mass = 1.0;
  double omega = 1.0;
  double force = 1.0;  // g in V = g r
  double duration = 1.0;
  double a = 0.0;
  double b = 0.0;
  // numerics
  int k = 200;
  int sites = 401;
  double half_width_factor = 6.0;
  double hbar = 1.0;
  std::vector<double> hbar_sweep{1.0, 0.5, 0.25, 0.125, 0.0625};
  double delta = 0.2;
  std::string method = "transfer_matrix";  // transfer_matrix | enumeration | monte_carlo
  std::string step_rule = "band_limited";  // band_limited | sampled
  int samples = 10000;
  double proposal_scale = 1.0;
  double slit_separation = 4.0;
  // mapping demo
  int points = 1000;
  std::string distribution = "uniform";  // uniform | point
  double dist_lo = 0.0;
  double dist_hi = 1.0;
  double dist_at = 0.5;
  // run
  std::uint64_t seed = 0;
  std::string output_path;  // file stem; defaults to the experiment name

  void validate() const;
  std::string stem() const;
};

const char* to_string(Kind kind) noexcept;

/// Parses the line-oriented `key = value` format ('#' starts a comment).
/// Unknown keys, duplicates and malformed values raise ValidationError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Ordered key/value view of a resolved config, embedded in every record.
std::map<std::string, std::string> describe(const ExperimentConfig& cfg);

struct RunOutput {
  std::vector<std::filesystem::path> files;
  std::string summary;
};

/// Runs one experiment, writing JSON and CSV into out_dir. Library errors
/// propagate as cardpath::Error; bad parameters as ValidationError.
RunOutput run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct CommandLine {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

/// Loads, validates and runs; maps failures onto exit statuses and prints
/// diagnostics to err.
Status execute(const CommandLine& cli, std::ostream& out, std::ostream& err);

}  // namespace cardpath::experiment
