#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "experiment.hpp"

using namespace qrflow;
using namespace qrflow::tools;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "qrflow_cli_test";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QRFLOW_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::NonFinite;
}

}  // namespace

TEST_CASE("parsing experiment flags") {
  const auto cfg = parse_experiment({"--problem", "example4", "--method", "w", "--pair",
                                     "rk38", "--tol", "1e-6", "--tf", "5"});
  CHECK(cfg.problem == "example4");
  CHECK(cfg.method == Method::w);
  CHECK(cfg.pair == PairKind::rk38);
  CHECK(cfg.tol == std::optional<double>(1e-6));
  CHECK(cfg.tf == std::optional<double>(5.0));
  CHECK(code_name(cfg) == "vwrk38");

  const auto fixed = parse_experiment({"--problem", "example1", "--method", "theta",
                                       "--h", "1e-3"});
  CHECK(code_name(fixed) == "tdp5");
  const ProblemSpec p = make_problem(fixed);
  CHECK(make_integration_config(fixed, p).mode == StepMode::fixed);
  CHECK(make_integration_config(fixed, p).tf == 10.0);

  CHECK(code_name(parse_experiment({"--method", "projected", "--tol", "1e-8"})) ==
        "proj-dp5");
}

TEST_CASE("inconsistent configurations are rejected") {
  CHECK(kind_of([] { parse_experiment({"--method", "z"}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([] { parse_experiment({"--problem", "example9"}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([] { parse_experiment({"--bogus"}); }) == ErrorKind::BadConfig);
  auto build = [](std::vector<std::string> args) {
    const auto cfg = parse_experiment(args);
    make_integration_config(cfg, make_problem(cfg));
  };
  CHECK(kind_of([&] { build({"--h", "0.1", "--tol", "1e-6"}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([&] { build({"--mode", "fixed", "--tol", "1e-6"}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([&] { build({"--mode", "adaptive"}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([&] { build({}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([&] { build({"--h", "-1"}); }) == ErrorKind::BadConfig);
  CHECK(kind_of([&] { build({"--problem", "example3", "--epsilon", "0", "--h", "0.1"}); }) ==
        ErrorKind::BadConfig);
}

TEST_CASE("table rows for the fast rotation") {
  auto cfg = parse_experiment({"--problem", "example1", "--method", "theta", "--h", "1e-3"});
  auto r = run_experiment(cfg);
  CHECK(r.ok);
  CHECK(r.stats.err <= 1e-9);
  CHECK(r.stats.reimbeddings == 0);

  cfg.method = Method::v;
  r = run_experiment(cfg);
  CHECK(r.ok);
  CHECK(r.stats.reimbeddings == 318);

  cfg = parse_experiment({"--problem", "example1", "--method", "u", "--tol", "1e-8"});
  r = run_experiment(cfg);
  CHECK_FALSE(r.ok);
  CHECK(r.failure.find("t=") != std::string::npos);
  std::ostringstream table;
  print_table(table, {r});
  CHECK(table.str().find("vudp5") != std::string::npos);
  CHECK(table.str().find(" - ") != std::string::npos);
}

TEST_CASE("manifests") {
  std::istringstream empty("");
  CHECK(read_manifest(empty).empty());
  CHECK(run_suite({}).empty());

  std::istringstream text(
      "# fast rotation\n"
      "\n"
      "--problem example1 --method theta --h 1e-3\n"
      "   # indented comment\n"
      "--problem zero --method w --pair rk38 --h 0.25\n");
  const auto configs = read_manifest(text);
  REQUIRE(configs.size() == 2);
  CHECK(configs[1].problem == "zero");
  CHECK(configs[1].pair == PairKind::rk38);

  std::istringstream broken("--problem zero --h 0.1\n--method nope\n");
  try {
    read_manifest(broken);
    FAIL("expected BadConfig");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BadConfig);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("suite runs keep going past failures") {
  std::vector<ExperimentConfig> configs;
  for (const char* m : {"u", "v", "w", "theta"}) {
    for (const char* pair : {"rk38", "dp5"}) {
      configs.push_back(parse_experiment(
          {"--problem", "example1", "--method", m, "--pair", pair, "--tol", "1e-8"}));
    }
  }
  const auto results = run_suite(configs);
  REQUIRE(results.size() == 8);
  int failed = 0;
  double fastest = 1e300;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failed;
      CHECK(r.config.method == Method::u);
    } else {
      fastest = std::min(fastest, r.cpu);
    }
  }
  CHECK(failed == 2);
  CHECK(fastest == doctest::Approx(1.0));

  std::ostringstream csv;
  write_summary_csv(csv, results);
  std::istringstream lines(csv.str());
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 9);
}

TEST_CASE("smoke problem on a fixed grid") {
  const auto results =
      run_suite({parse_experiment({"--problem", "zero", "--method", "theta", "--h", "0.125"})});
  REQUIRE(results.size() == 1);
  CHECK(results[0].ok);
  CHECK(results[0].stats.err == 0.0);
  CHECK(results[0].stats.steps == 8);
}

TEST_CASE("trajectory CSV") {
  const fs::path path = scratch_dir() / "ex5.csv";
  auto cfg = parse_experiment({"--problem", "example5", "--random-q0", "--seed", "3",
                               "--method", "w", "--tol", "1e-6", "--tf", "20", "--csv",
                               path.string()});
  REQUIRE(run_experiment(cfg).ok);
  const auto rows = read_csv(path);
  REQUIRE(rows.size() > 3);
  const std::vector<std::string> header{"t",      "h",      "err_1",  "err_2",
                                        "err_3",  "err_4",  "diag_1", "diag_2",
                                        "diag_3", "diag_4", "log10_defect"};
  CHECK(rows[0] == header);
  double last = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == header.size());
    const double t = std::stod(rows[i][0]);
    CHECK(t > last);
    last = t;
  }
  CHECK(last == 20.0);

  // same seed, same numbers
  const fs::path again = scratch_dir() / "ex5_again.csv";
  cfg.csv_path = again.string();
  REQUIRE(run_experiment(cfg).ok);
  CHECK(read_csv(again) == rows);

  std::ifstream raw(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(raw)), {});
  CHECK(content.find('\r') == std::string::npos);
}

TEST_CASE("exit codes of the command-line tool") {
  CHECK(run_cli("--problem example1 --method theta --h 1e-3") == 0);
  CHECK(run_cli("--problem example1 --method u --tol 1e-8") == 2);
  CHECK(run_cli("--problem example1 --method theta --h 1e-3 --tol 1e-8") == 3);
  CHECK(run_cli("--method sideways --h 1e-3") == 3);
  CHECK(run_cli("--suite /nonexistent/manifest.txt") == 3);

  const fs::path dir = scratch_dir();
  {
    std::ofstream m(dir / "ok.txt");
    m << "# two quick runs\n--problem zero --method w --h 0.5\n"
         "--problem zero --method theta --tol 1e-6\n";
  }
  {
    std::ofstream m(dir / "mixed.txt");
    m << "--problem zero --method w --h 0.5\n--problem example1 --method u --tol 1e-8\n";
  }
  {
    std::ofstream m(dir / "empty.txt");
  }
  const fs::path summary = dir / "summary.csv";
  CHECK(run_cli("--suite " + (dir / "ok.txt").string() + " --csv " + summary.string()) == 0);
  const auto rows = read_csv(summary);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == "code");
  CHECK(rows[1][5] == "ok");
  CHECK(run_cli("--suite " + (dir / "mixed.txt").string()) == 2);
  CHECK(run_cli("--suite " + (dir / "empty.txt").string()) == 0);
}
