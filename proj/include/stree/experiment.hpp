#ifndef STREE_EXPERIMENT_HPP
#define STREE_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stree/report.hpp"

namespace stree {

enum class Experiment { KernelTable, Envelope, Repartition, ExitTime, Poisson, Selftest };
enum class Format { Csv, Json };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& s);

/// Names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline constexpr const char* kOutputDirEnv = "STREE_OUTPUT_DIR";

struct ExperimentConfig {
  int q = 2;
  double alpha = 1.0;
  Experiment experiment = Experiment::Selftest;
  std::vector<double> t{1.0};
  int nmax = 15;
  std::vector<int> r{4};
  double A1 = 0.5;
  double A2 = 2.0;
  double beta_exponent = 0.0;  ///< 0 means 2/alpha
  double K = 1.0;
  double M = 1.0;
  long n_samples = 100000;
  std::uint64_t seed = 1;
  int N = 400;
  std::string output;          ///< empty: $STREE_OUTPUT_DIR/<experiment>.<ext>
  Format format = Format::Csv;
  unsigned threads = 0;

  ConfigEcho echo() const;
  double effective_beta_exponent() const { return beta_exponent > 0.0 ? beta_exponent : 2.0 / alpha; }
};

/// Keys accepted in config files and as flags.
const std::vector<std::string>& config_keys();

/// "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
std::vector<double> parse_grid(const std::string& field, const std::string& text);

/// Sets one field from text. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Range checks for the selected experiment.
void validate(const ExperimentConfig& cfg);

struct CheckResult {
  std::string name;
  bool pass = false;
  bool numerical = false;  ///< a tolerance failure rather than a property violation
  std::string detail;
};

struct RunResult {
  int exit_code = 0;  ///< 0 pass, 1 check failure, 3 numerical-tolerance failure
  std::vector<CheckResult> checks;
  std::vector<std::string> files;
};

/// Table with fixed columns written as CSV (after the header block) or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os, Format format, const ConfigEcho& echo) const;
};

/// Runs the configured experiment, writes its artifacts and a check summary to `log`.
RunResult run(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace stree

#endif  // STREE_EXPERIMENT_HPP
