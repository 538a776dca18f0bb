#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "experiment.hpp"

using namespace qrflow;
using namespace qrflow::tools;

namespace {

constexpr int kExitFailure = 2;
constexpr int kExitBadConfig = 3;

int run_single(const ExperimentConfig& cfg) {
  const auto results = run_suite({cfg});
  const ExperimentResult& r = results.front();
  print_table(std::cout, results);
  if (!r.ok) {
    std::cerr << "qrflow: " << r.name << " failed: " << r.failure << '\n';
    return kExitFailure;
  }
  return 0;
}

int run_manifest(const std::string& path, const std::string& summary_path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadConfig, "cannot open manifest " + path);
  const auto configs = read_manifest(in);
  const auto results = run_suite(configs);
  print_table(std::cout, results);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    if (!out) throw Error(ErrorKind::BadConfig, "cannot open " + summary_path);
    write_summary_csv(out, results);
  } else {
    std::cout << '\n';
    write_summary_csv(std::cout, results);
  }
  int code = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      std::cerr << "qrflow: " << r.name << " (" << r.config.problem
                << ") failed: " << r.failure << '\n';
      code = kExitFailure;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrate the QR flow with Householder/Givens coordinates"};
  ExperimentConfig cfg;
  add_experiment_options(app, cfg);
  std::string suite;
  app.add_option("--suite", suite,
                 "manifest of experiments, one per line; --csv then names the "
                 "summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadConfig;
  }

  try {
    if (!suite.empty()) return run_manifest(suite, cfg.csv_path);
    return run_single(cfg);
  } catch (const Error& e) {
    std::cerr << "qrflow: " << e.what() << '\n';
    return e.kind() == ErrorKind::BadConfig ? kExitBadConfig : kExitFailure;
  }
}
