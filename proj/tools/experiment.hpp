#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qrflow/integrate.hpp"
#include "qrflow/problems.hpp"

namespace CLI {
class App;
}

namespace qrflow::tools {

struct ExperimentConfig {
  std::string problem = "example1";
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> epsilon;
  bool random_q0 = false;
  std::uint64_t seed = 1;
  std::optional<Index> n;
  std::optional<Index> p;

  Method method = Method::theta;
  PairKind pair = PairKind::dp5;
  std::optional<StepMode> mode;
  std::optional<double> h;
  std::optional<double> tol;
  std::optional<double> t0;
  std::optional<double> tf;

  std::string csv_path;
};

/// Builds the problem and integration config; throws BadConfig on any
/// inconsistency (unknown label, h/tol not matching the mode, ...).
ProblemSpec make_problem(const ExperimentConfig& cfg);
IntegrationConfig make_integration_config(const ExperimentConfig& cfg,
                                          const ProblemSpec& problem);

/// Code name in the usual style: [v]{u,v,w,t}{rk38,dp5}, or proj-<pair>.
std::string code_name(const ExperimentConfig& cfg);

/// Registers the per-experiment flags on `app`, bound to `cfg`.
void add_experiment_options(CLI::App& app, ExperimentConfig& cfg);

/// Parses the experiment flags (same spelling as the command line, without
/// the program name). Throws BadConfig with CLI11's message on failure.
ExperimentConfig parse_experiment(const std::vector<std::string>& args);

struct ExperimentResult {
  ExperimentConfig config;
  std::string name;
  StepMode mode = StepMode::adaptive;
  bool ok = false;
  RunStats stats;
  std::string failure;  // message, with time/column, when !ok
  double errd = std::numeric_limits<double>::quiet_NaN();
  double cpu = std::numeric_limits<double>::quiet_NaN();  // suite-normalized
};

/// Runs one experiment; integration failures are captured in the result,
/// configuration errors propagate as BadConfig. Writes the trajectory CSV when
/// cfg.csv_path is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Manifest: one experiment per line in command-line syntax; blank lines and
/// lines starting with '#' are skipped.
std::vector<ExperimentConfig> read_manifest(std::istream& in);

std::vector<ExperimentResult> run_suite(const std::vector<ExperimentConfig>& configs);

void print_table(std::ostream& out, const std::vector<ExperimentResult>& results);
void write_summary_csv(std::ostream& out,
                       const std::vector<ExperimentResult>& results);

}  // namespace qrflow::tools
