#include "experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qrflow/flows.hpp"

namespace qrflow::tools {

namespace {

const std::map<std::string, Method> kMethods = {
    {"u", Method::u},         {"v", Method::v},
    {"w", Method::w},         {"theta", Method::theta},
    {"projected", Method::projected}};
const std::map<std::string, PairKind> kPairs = {{"rk38", PairKind::rk38},
                                                {"dp5", PairKind::dp5}};
const std::map<std::string, StepMode> kModes = {{"fixed", StepMode::fixed},
                                                {"adaptive", StepMode::adaptive}};

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorKind::BadConfig, what);
}

std::string sci(double x, int digits) {
  if (std::isnan(x)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*E", digits, x);
  return buf;
}

std::string fixed2(double x) {
  if (std::isnan(x)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Defect of diag(A~) against the known limit, for the problems that have one.
double diag_defect(const ExperimentConfig& cfg, const ProblemSpec& problem,
                   const Vector& diag, double t) {
  if (problem.reference_diag) {
    return (problem.reference_diag(t).head(diag.size()) - diag)
        .cwiseAbs()
        .maxCoeff();
  }
  if (cfg.problem == "example6" && problem.n == 25) {
    const auto& eig = frank25_eigenvalues();
    double d = 0.0;
    for (Index i = 0; i < std::min<Index>(diag.size(), 13); ++i) {
      d = std::max(d, std::abs(diag(i) - eig[i]));
    }
    return d;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void add_experiment_options(CLI::App& app, ExperimentConfig& cfg) {
  // --h is the step size, so help is long-form only
  app.set_help_flag("--help", "Print this help message and exit");
  app.add_option("--problem", cfg.problem,
                 "example1..example6 or zero")
      ->check(CLI::IsMember({"example1", "example2", "example3", "example4",
                             "example5", "example6", "zero"}));
  app.add_option_function<std::string>(
         "--method", [&cfg](const std::string& v) { cfg.method = kMethods.at(v); },
         "u, v, w, theta or projected")
      ->check(CLI::IsMember(kMethods));
  app.add_option_function<std::string>(
         "--pair", [&cfg](const std::string& v) { cfg.pair = kPairs.at(v); },
         "rk38 or dp5")
      ->check(CLI::IsMember(kPairs));
  app.add_option_function<std::string>(
         "--mode", [&cfg](const std::string& v) { cfg.mode = kModes.at(v); },
         "fixed or adaptive")
      ->check(CLI::IsMember(kModes));
  app.add_option("--h", cfg.h, "step size (fixed mode)");
  app.add_option("--tol", cfg.tol, "tolerance (adaptive mode)");
  app.add_option("--t0", cfg.t0, "start time (default: problem's)");
  app.add_option("--tf", cfg.tf, "end time (default: problem's)");
  app.add_option("--n", cfg.n, "example6/zero dimension");
  app.add_option("--p", cfg.p, "example6/zero column count");
  app.add_option("--seed", cfg.seed, "seed for random initial data");
  app.add_flag("--random-q0", cfg.random_q0, "example5: random orthogonal Q(0)");
  app.add_option("--alpha", cfg.alpha, "example1/2/4 parameter");
  app.add_option("--beta", cfg.beta, "example1/4 parameter");
  app.add_option("--epsilon", cfg.epsilon, "example3 parameter");
  app.add_option("--csv", cfg.csv_path, "trajectory CSV path");
}

ExperimentConfig parse_experiment(const std::vector<std::string>& args) {
  ExperimentConfig cfg;
  CLI::App app{"experiment"};
  add_experiment_options(app, cfg);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    bad(std::string("cannot parse experiment: ") + e.what());
  }
  return cfg;
}

ProblemSpec make_problem(const ExperimentConfig& cfg) {
  const std::string& p = cfg.problem;
  if (p == "example1") return example1(cfg.alpha.value_or(100.0), cfg.beta.value_or(100.0));
  if (p == "example2") return example2(cfg.alpha.value_or(100.0));
  if (p == "example3") {
    const double eps = cfg.epsilon.value_or(1e-2);
    if (!(eps > 0.0)) bad("epsilon must be positive");
    return example3(eps);
  }
  if (p == "example4") {
    return example4(cfg.alpha.value_or(1.0), cfg.beta.value_or(std::sqrt(2.0)));
  }
  if (p == "example5") return example5(cfg.random_q0, cfg.seed);
  if (p == "example6") return example6(cfg.n.value_or(25), cfg.p.value_or(13));
  if (p == "zero") return zero_problem(cfg.n.value_or(3), cfg.p.value_or(2));
  bad("unknown problem '" + p + "'");
}

IntegrationConfig make_integration_config(const ExperimentConfig& cfg,
                                          const ProblemSpec& problem) {
  IntegrationConfig c;
  c.method = cfg.method;
  c.pair = cfg.pair;
  if (cfg.h && cfg.tol) bad("give exactly one of --h and --tol");
  StepMode mode;
  if (cfg.mode) {
    mode = *cfg.mode;
  } else if (cfg.h) {
    mode = StepMode::fixed;
  } else if (cfg.tol) {
    mode = StepMode::adaptive;
  } else {
    bad("give --h (fixed mode) or --tol (adaptive mode)");
  }
  if (mode == StepMode::fixed && !cfg.h) bad("fixed mode needs --h");
  if (mode == StepMode::adaptive && !cfg.tol) bad("adaptive mode needs --tol");
  c.mode = mode;
  if (cfg.h) c.h = *cfg.h;
  if (cfg.tol) c.tol = *cfg.tol;
  c.t0 = cfg.t0.value_or(problem.t0);
  c.tf = cfg.tf.value_or(problem.tf);
  validate(c);
  return c;
}

std::string code_name(const ExperimentConfig& cfg) {
  const std::string pair(to_string(cfg.pair));
  if (cfg.method == Method::projected) return "proj-" + pair;
  const bool variable = cfg.mode ? *cfg.mode == StepMode::adaptive : !cfg.h;
  std::string letter = cfg.method == Method::theta
                           ? "t"
                           : std::string(to_string(cfg.method));
  return (variable ? "v" : "") + letter + pair;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ProblemSpec problem = make_problem(cfg);
  const IntegrationConfig icfg = make_integration_config(cfg, problem);

  ExperimentResult result;
  result.config = cfg;
  result.name = code_name(cfg);
  result.mode = icfg.mode;

  std::ofstream csv;
  Observer obs;
  const bool defect_column = static_cast<bool>(problem.reference_diag);
  if (!cfg.csv_path.empty()) {
    csv.open(cfg.csv_path);
    if (!csv) bad("cannot open " + cfg.csv_path);
    csv << "t,h";
    for (Index i = 1; i <= problem.p; ++i) csv << ",err_" << i;
    for (Index i = 1; i <= problem.p; ++i) csv << ",diag_" << i;
    if (defect_column) csv << ",log10_defect";
    csv << '\n';
    obs.on_step = [&](const StepRecord& r) {
      csv << full(r.t) << ',' << full(r.h);
      for (Index i = 0; i < r.column_errors.size(); ++i) csv << ',' << full(r.column_errors(i));
      for (Index i = 0; i < r.diag.size(); ++i) csv << ',' << full(r.diag(i));
      if (defect_column) {
        const double d = (problem.reference_diag(r.t) - r.diag).cwiseAbs().maxCoeff();
        csv << ',' << full(std::log10(d));
      }
      csv << '\n';
    };
  }

  try {
    const IntegrationResult run = integrate(problem, icfg, obs);
    result.ok = true;
    result.stats = run.stats;
    try {
      const Vector diag = transformed_diag(run.frames, problem.coeff(icfg.tf));
      result.errd = diag_defect(cfg, problem, diag, icfg.tf);
    } catch (const Error&) {
      // chart unusable at tf for rate evaluation; leave errd unset
    }
  } catch (const IntegrationError& e) {
    result.ok = false;
    result.stats = e.stats();
    std::ostringstream msg;
    msg << e.what() << " (t=" << full(e.time());
    if (e.column() != Error::kNoColumn) msg << ", column " << e.column() + 1;
    msg << ")";
    result.failure = msg.str();
  }
  return result;
}

std::vector<ExperimentConfig> read_manifest(std::istream& in) {
  std::vector<ExperimentConfig> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream words(line);
    std::vector<std::string> args;
    for (std::string w; words >> w;) args.push_back(w);
    try {
      out.push_back(parse_experiment(args));
    } catch (const Error& e) {
      bad("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<ExperimentResult> run_suite(const std::vector<ExperimentConfig>& configs) {
  std::vector<ExperimentResult> results;
  results.reserve(configs.size());
  for (const auto& cfg : configs) results.push_back(run_experiment(cfg));
  double fastest = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    if (r.ok) fastest = std::min(fastest, r.stats.wall_seconds);
  }
  for (auto& r : results) {
    if (r.ok) r.cpu = r.stats.wall_seconds / std::max(fastest, 1e-9);
  }
  return results;
}

void print_table(std::ostream& out, const std::vector<ExperimentResult>& results) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %-9s %-9s %6s %-13s %8s %9s %-9s\n",
                "code", "problem", "err", "reimb", "rejs/first", "cpu",
                "nsteps", "errd");
  out << buf;
  for (const auto& r : results) {
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "%-10s %-9s %-9s %6s %-13s %8s %9s %-9s  %s\n",
                    r.name.c_str(), r.config.problem.c_str(), "-", "-", "-", "-",
                    "-", "-", r.failure.c_str());
      out << buf;
      continue;
    }
    const auto& s = r.stats;
    const std::string rejs =
        std::to_string(s.rejections) + "/" +
        std::to_string(s.rejections_per_column.empty() ? 0 : s.rejections_per_column[0]);
    std::snprintf(buf, sizeof buf, "%-10s %-9s %-9s %6lld %-13s %8s %9lld %-9s\n",
                  r.name.c_str(), r.config.problem.c_str(), sci(s.err, 1).c_str(),
                  static_cast<long long>(s.reimbeddings), rejs.c_str(),
                  fixed2(r.cpu).c_str(), static_cast<long long>(s.steps),
                  sci(r.errd, 1).c_str());
    out << buf;
  }
}

void write_summary_csv(std::ostream& out,
                       const std::vector<ExperimentResult>& results) {
  out << "code,problem,method,pair,mode,status,err,reimb,rejs,rejs_first,"
         "rejs_per_column,nsteps,wall_seconds,cpu,errd,failure\n";
  for (const auto& r : results) {
    const auto& s = r.stats;
    std::string per_col;
    for (std::size_t i = 0; i < s.rejections_per_column.size(); ++i) {
      if (i) per_col += ' ';
      per_col += std::to_string(s.rejections_per_column[i]);
    }
    std::string failure = r.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    out << r.name << ',' << r.config.problem << ',' << to_string(r.config.method) << ','
        << to_string(r.config.pair) << ',' << to_string(r.mode) << ','
        << (r.ok ? "ok" : "failed") << ',' << full(s.err) << ',' << s.reimbeddings << ','
        << s.rejections << ','
        << (s.rejections_per_column.empty() ? 0 : s.rejections_per_column[0]) << ','
        << per_col << ',' << s.steps << ',' << full(s.wall_seconds) << ','
        << full(r.cpu) << ',' << full(r.errd) << ',' << failure << '\n';
  }
}

}  // namespace qrflow::tools
