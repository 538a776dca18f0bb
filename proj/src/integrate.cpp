#include "qrflow/integrate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "qrflow/flows.hpp"

namespace qrflow {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::u: return "u";
    case Method::v: return "v";
    case Method::w: return "w";
    case Method::theta: return "theta";
    case Method::projected: return "projected";
  }
  return "?";
}

std::string_view to_string(PairKind p) {
  return p == PairKind::rk38 ? "rk38" : "dp5";
}

std::string_view to_string(StepMode m) {
  return m == StepMode::fixed ? "fixed" : "adaptive";
}

void validate(const IntegrationConfig& c) {
  auto bad = [](const std::string& what) {
    throw Error(ErrorKind::BadConfig, what);
  };
  if (!std::isfinite(c.t0) || !std::isfinite(c.tf) || !(c.t0 < c.tf)) {
    bad("need finite t0 < tf");
  }
  if (c.mode == StepMode::fixed && !(c.h > 0.0 && std::isfinite(c.h))) {
    bad("fixed mode needs h > 0");
  }
  if (c.mode == StepMode::adaptive && !(c.tol > 0.0 && std::isfinite(c.tol))) {
    bad("adaptive mode needs tol > 0");
  }
  if (!(c.safety > 0.0 && c.safety <= 1.0) || !(c.growth >= 1.0) ||
      !(c.shrink > 0.0 && c.shrink <= 1.0)) {
    bad("controller factors out of range");
  }
  if (c.h_min < 0.0 || c.max_steps < 1) bad("h_min/max_steps out of range");
}

double controller_next_h(double h, double err, int q, bool accepted,
                         double h_min, double safety, double growth,
                         double shrink) {
  const double cap = accepted ? growth : 1.0;
  double factor;
  if (!(err >= 0.0) || std::isinf(err)) {
    factor = shrink;
  } else if (err == 0.0) {
    factor = cap;
  } else {
    factor = safety * std::pow(1.0 / err, 1.0 / (q + 1));
  }
  factor = std::clamp(factor, shrink, cap);
  const double next = h * factor;
  if (next < h_min) {
    throw Error(ErrorKind::StepsizeUnderflow,
                "step size " + std::to_string(next) + " fell below h_min");
  }
  return next;
}

double scaled_error(const Vector& y0, const Vector& y1, const Vector& yhat,
                    double tol) {
  double err = 0.0;
  for (Index k = 0; k < y1.size(); ++k) {
    const double sc = tol * (1.0 + std::max(std::abs(y0(k)), std::abs(y1(k))));
    const double e = std::abs(y1(k) - yhat(k)) / sc;
    if (!(e <= err)) err = e;  // NaN sticks
  }
  return err;
}

void LyapunovAccumulator::add(double h, const Vector& b,
                              const Matrix& stage_diag) {
  sum_ += h * (stage_diag * b);
}

Vector LyapunovAccumulator::exponents(double elapsed) const {
  return sum_ / elapsed;
}

Frames initial_frames(const Matrix& x0, Method method) {
  switch (method) {
    case Method::u: return init_householder(x0, ReflectorVariant::u);
    case Method::v: return init_householder(x0, ReflectorVariant::v);
    case Method::w: return init_householder(x0, ReflectorVariant::w);
    case Method::theta: return init_givens(x0);
    case Method::projected: return ProjectedFrames{mgs_orthonormalize(x0)};
  }
  return {};
}

namespace {

using Clock = std::chrono::steady_clock;

struct StepOutcome {
  bool accepted = false;
  Index failed_column = Error::kNoColumn;
  double failed_err = 0.0;
  double max_err = 0.0;
  Vector column_err;
  std::optional<Error> abort;  // DivisionHazard / NonFinite inside a stage
};

struct StepControl {
  const ButcherPair* pair;
  bool adaptive;
  double tol;
};

bool is_step_abort(const Error& e) {
  return e.kind() == ErrorKind::DivisionHazard ||
         e.kind() == ErrorKind::NonFinite;
}

double column_error(const StepControl& ctl, const Vector& y0,
                    const StageSolution& sol) {
  if (ctl.adaptive) return scaled_error(y0, sol.y1, sol.yhat, ctl.tol);
  if (sol.y1.size() == 0) return 0.0;
  return (sol.y1 - sol.yhat).cwiseAbs().maxCoeff();
}

std::vector<Vector>& states(HouseholderFrames& f) { return f.coords; }
std::vector<Vector>& states(GivensFrames& f) { return f.angles; }

void post_step(HouseholderFrames& f) { renormalize(f); }
void post_step(GivensFrames& f) { wrap_angles(f); }

HouseholderFrames reimbed(const HouseholderFrames& f, double t, Index from) {
  return reimbed_householder(f, t, from);
}
GivensFrames reimbed(const GivensFrames& f, double t, Index from) {
  return reimbed_givens(f, t, from);
}

// Householder or Givens coordinates, stepped one column at a time. Column i
// sees, at every stage, the block A(t + c_s h) updated by the stage values
// and rates of columns 0..i-1.
template <typename F>
class CoordinateEngine {
 public:
  explicit CoordinateEngine(F frames) : frames_(std::move(frames)) {}

  Index p() const { return frames_.p; }

  void health(double t, RunStats& stats) {
    const Index first = first_unhealthy(frames_);
    if (first < frames_.p) {
      frames_ = reimbed(frames_, t, first);
      ++stats.reimbeddings;
    }
  }

  StepOutcome attempt(const StepControl& ctl, std::vector<Matrix> blocks,
                      double h, std::vector<std::int64_t>& rhs_count) {
    const ButcherPair& pair = *ctl.pair;
    const Index p = frames_.p;
    StepOutcome out;
    out.column_err = Vector::Zero(p);
    next_.assign(p, Vector());
    stage_values_.assign(p, {});
    stage_diag_.resize(p, pair.stages);
    for (Index i = 0; i < p; ++i) {
      const Vector& y0 = states(frames_)[i];
      StageSolution sol;
      try {
        sol = rk_stages(pair, y0, h, [&](Index s, const Vector& y) {
          ++rhs_count[i];
          return column_rhs(frames_, i, y, blocks[s]);
        });
        if (!sol.y1.allFinite() || !sol.yhat.allFinite()) {
          throw Error(ErrorKind::NonFinite, "column update is not finite");
        }
      } catch (const Error& e) {
        if (!is_step_abort(e)) throw;
        out.abort = e.with_context(std::numeric_limits<double>::quiet_NaN(), i);
        out.failed_column = i;
        return out;
      }
      const double err = column_error(ctl, y0, sol);
      out.column_err(i) = err;
      out.max_err = std::max(out.max_err, err);
      if (ctl.adaptive && !(err <= 1.0)) {
        out.failed_column = i;
        out.failed_err = err;
        return out;
      }
      for (Index s = 0; s < pair.stages; ++s) {
        column_update(frames_, i, sol.values[s], sol.rates[s], blocks[s]);
        stage_diag_(i, s) = blocks[s](0, 0);
        if (i + 1 < p) {
          Matrix trailing = blocks[s].bottomRightCorner(blocks[s].rows() - 1,
                                                        blocks[s].cols() - 1);
          blocks[s] = std::move(trailing);
        }
      }
      next_[i] = std::move(sol.y1);
      stage_values_[i] = std::move(sol.values);
    }
    out.accepted = true;
    return out;
  }

  void emit_stages(const Observer& obs, double t, double h,
                   const ButcherPair& pair) const {
    for (Index s = 0; s < pair.stages; ++s) {
      F stage = frames_;
      for (Index i = 0; i < frames_.p; ++i) {
        states(stage)[i] = stage_values_[i][s];
      }
      const Frames view = std::move(stage);
      obs.on_stage(StageRecord{t + pair.c(s) * h, &view});
    }
  }

  void commit() {
    for (Index i = 0; i < frames_.p; ++i) states(frames_)[i] = next_[i];
    post_step(frames_);
  }

  // Both pairs end on a c = 1 stage evaluated at the new solution.
  Vector mesh_diag(const Matrix&) const {
    return stage_diag_.col(stage_diag_.cols() - 1);
  }
  Vector initial_diag(const Matrix& a) const { return transformed_diag(frames_, a); }

  const Matrix& stage_diag() const { return stage_diag_; }
  Frames frames() const { return frames_; }

 private:
  F frames_;
  std::vector<Vector> next_;
  std::vector<std::vector<Vector>> stage_values_;
  Matrix stage_diag_;
};

// Projected baseline. Column j of Q' only involves columns 0..j, so the same
// column-sequential stepping (and early rejection) applies.
class ProjectedEngine {
 public:
  explicit ProjectedEngine(Matrix q) : q_(std::move(q)) {}

  Index p() const { return q_.cols(); }

  void health(double, RunStats&) {}

  StepOutcome attempt(const StepControl& ctl, const std::vector<Matrix>& stage_a,
                      double h, std::vector<std::int64_t>& rhs_count) {
    const ButcherPair& pair = *ctl.pair;
    const Index p = q_.cols();
    const Index n = q_.rows();
    StepOutcome out;
    out.column_err = Vector::Zero(p);
    next_ = q_;
    stage_diag_.resize(p, pair.stages);
    // Stage values and A * stage values of the columns done so far.
    std::vector<Matrix> y(pair.stages, Matrix(n, p));
    std::vector<Matrix> ay(pair.stages, Matrix(n, p));
    for (Index j = 0; j < p; ++j) {
      const Vector y0 = q_.col(j);
      StageSolution sol;
      try {
        sol = rk_stages(pair, y0, h, [&](Index s, const Vector& col) {
          ++rhs_count[j];
          const Vector acol = stage_a[s] * col;
          Vector rate = acol - col.dot(acol) * col;
          for (Index i = 0; i < j; ++i) {
            const double mij = y[s].col(i).dot(acol) + col.dot(ay[s].col(i));
            rate -= mij * y[s].col(i);
          }
          y[s].col(j) = col;
          ay[s].col(j) = acol;
          stage_diag_(j, s) = col.dot(acol);
          return rate;
        });
        if (!sol.y1.allFinite() || !sol.yhat.allFinite()) {
          throw Error(ErrorKind::NonFinite, "column update is not finite");
        }
      } catch (const Error& e) {
        if (!is_step_abort(e)) throw;
        out.abort = e.with_context(std::numeric_limits<double>::quiet_NaN(), j);
        out.failed_column = j;
        return out;
      }
      const double err = column_error(ctl, y0, sol);
      out.column_err(j) = err;
      out.max_err = std::max(out.max_err, err);
      if (ctl.adaptive && !(err <= 1.0)) {
        out.failed_column = j;
        out.failed_err = err;
        return out;
      }
      next_.col(j) = sol.y1;
    }
    out.accepted = true;
    return out;
  }

  // Unprojected stage values are not orthonormal; nothing to show.
  void emit_stages(const Observer&, double, double, const ButcherPair&) const {}

  void commit() { q_ = mgs_orthonormalize(next_); }

  Vector mesh_diag(const Matrix& a) const {
    return transformed_diag(ProjectedFrames{q_}, a);
  }
  Vector initial_diag(const Matrix& a) const { return mesh_diag(a); }

  const Matrix& stage_diag() const { return stage_diag_; }
  Frames frames() const { return ProjectedFrames{q_}; }

 private:
  Matrix q_;
  Matrix next_;
  Matrix stage_diag_;
};

Matrix checked_coeff(const ProblemSpec& problem, double t) {
  Matrix a = problem.coeff(t);
  if (a.rows() != problem.n || a.cols() != problem.n) {
    throw Error(ErrorKind::DimensionMismatch, "A(t) has the wrong shape", t);
  }
  if (!a.allFinite()) {
    throw Error(ErrorKind::NonFinite, "A(t) has non-finite entries", t);
  }
  return a;
}

template <typename Engine>
IntegrationResult drive(Engine& engine, const ProblemSpec& problem,
                        const IntegrationConfig& cfg, const Observer& obs) {
  const auto start = Clock::now();
  const ButcherPair& pair = pair_for(cfg.pair);
  const bool adaptive = cfg.mode == StepMode::adaptive;
  const StepControl ctl{&pair, adaptive, cfg.tol};
  const int q = pair.embedded;
  const Index p = engine.p();
  const double span = cfg.tf - cfg.t0;
  const double h_min = cfg.h_min > 0.0 ? cfg.h_min : 1e-14 * span;

  RunStats stats;
  stats.rejections_per_column.assign(p, 0);
  stats.rhs_evaluations_per_column.assign(p, 0);
  stats.seed = problem.seed;
  LyapunovAccumulator lyap(p);

  double t = cfg.t0;
  double h = adaptive ? std::min(std::pow(cfg.tol, 1.0 / (q + 1)), span / 2)
                      : cfg.h;
  const std::int64_t fixed_steps =
      adaptive ? 0
               : std::max<std::int64_t>(
                     1, static_cast<std::int64_t>(std::ceil(span / cfg.h - 1e-9)));

  // A at the current mesh point, reused by retries and by the next step.
  Matrix a_now;
  bool check_health = true;
  std::int64_t attempts = 0;

  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  try {
    a_now = checked_coeff(problem, t);
    if (obs.on_step) {
      const Frames f = engine.frames();
      obs.on_step(StepRecord{t, 0.0, Vector::Zero(p), engine.initial_diag(a_now), &f});
    }
    while (t < cfg.tf) {
      if (check_health) {
        engine.health(t, stats);
        check_health = false;
      }
      double t_next;
      if (adaptive) {
        t_next = t + h >= cfg.tf ? cfg.tf : t + h;
      } else {
        t_next = stats.steps + 1 >= fixed_steps
                     ? cfg.tf
                     : cfg.t0 + static_cast<double>(stats.steps + 1) * cfg.h;
      }
      const double h_try = t_next - t;

      if (++attempts > cfg.max_steps) {
        throw Error(ErrorKind::TooManySteps, "step budget exhausted", t);
      }

      std::vector<Matrix> stage_a(pair.stages);
      for (Index s = 0; s < pair.stages; ++s) {
        const double c = pair.c(s);
        Index same = -1;
        for (Index r = 0; r < s; ++r) {
          if (pair.c(r) == c) same = r;
        }
        if (c == 0.0) {
          stage_a[s] = a_now;
        } else if (same >= 0) {
          stage_a[s] = stage_a[same];
        } else {
          stage_a[s] = checked_coeff(problem, c == 1.0 ? t_next : t + c * h_try);
        }
      }

      StepOutcome out = engine.attempt(ctl, stage_a, h_try,
                                       stats.rhs_evaluations_per_column);
      if (!out.accepted) {
        if (!adaptive) {
          throw out.abort->with_context(t, out.failed_column);
        }
        ++stats.rejections;
        ++stats.rejections_per_column[out.failed_column];
        if (out.abort) {
          h = h_try / 2;
          if (h < h_min) {
            throw Error(ErrorKind::StepsizeUnderflow,
                        std::string("step size fell below h_min after repeated ") +
                            "aborts (" + out.abort->what() + ")",
                        t, out.failed_column);
          }
        } else {
          try {
            h = controller_next_h(h_try, out.failed_err, q, false, h_min,
                                  cfg.safety, cfg.growth, cfg.shrink);
          } catch (const Error& e) {
            throw e.with_context(t, out.failed_column);
          }
        }
        continue;
      }

      lyap.add(h_try, pair.b, engine.stage_diag());
      if (obs.on_stage) engine.emit_stages(obs, t, h_try, pair);
      engine.commit();
      ++stats.steps;
      t = t_next;
      check_health = true;
      a_now = pair.c(pair.stages - 1) == 1.0 ? stage_a.back()
                                              : checked_coeff(problem, t);
      if (obs.on_step) {
        const Frames f = engine.frames();
        obs.on_step(StepRecord{t, h_try, out.column_err, engine.mesh_diag(a_now), &f});
      }
      if (adaptive && t < cfg.tf) {
        try {
          h = controller_next_h(h_try, out.max_err, q, true, h_min, cfg.safety,
                                cfg.growth, cfg.shrink);
        } catch (const Error& e) {
          throw e.with_context(t, Error::kNoColumn);
        }
      }
    }
  } catch (const IntegrationError&) {
    throw;
  } catch (const Error& e) {
    stats.wall_seconds = elapsed();
    stats.t_end = t;
    throw IntegrationError(e.with_context(t, Error::kNoColumn), std::move(stats));
  }

  IntegrationResult result{engine.frames(), std::move(stats)};
  RunStats& rs = result.stats;
  rs.t_end = cfg.tf;
  rs.lyapunov = lyap.exponents(span);
  if (problem.has_exact()) {
    rs.err = q_error(form_q(result.frames), problem.exact_q(cfg.tf).leftCols(p));
  }
  rs.wall_seconds = elapsed();
  return result;
}

void check_problem(const ProblemSpec& problem) {
  if (!problem.coeff) {
    throw Error(ErrorKind::BadConfig, "problem has no coefficient function");
  }
  if (problem.x0.rows() != problem.n || problem.x0.cols() != problem.p) {
    throw Error(ErrorKind::DimensionMismatch, "X0 does not match n x p");
  }
}

}  // namespace

IntegrationResult integrate_from(const ProblemSpec& problem, Frames start,
                                 const IntegrationConfig& config,
                                 const Observer& observer) {
  validate(config);
  check_problem(problem);
  return std::visit(
      [&](auto&& f) -> IntegrationResult {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ProjectedFrames>) {
          ProjectedEngine engine(std::move(f.q));
          return drive(engine, problem, config, observer);
        } else {
          if (f.n != problem.n) {
            throw Error(ErrorKind::DimensionMismatch, "frames do not match n");
          }
          CoordinateEngine<F> engine(std::move(f));
          return drive(engine, problem, config, observer);
        }
      },
      std::move(start));
}

IntegrationResult integrate(const ProblemSpec& problem,
                            const IntegrationConfig& config,
                            const Observer& observer) {
  validate(config);
  check_problem(problem);
  Frames start;
  try {
    start = initial_frames(problem.x0, config.method);
  } catch (const Error& e) {
    RunStats stats;
    stats.t_end = config.t0;
    throw IntegrationError(e.with_context(config.t0, Error::kNoColumn), stats);
  }
  return integrate_from(problem, std::move(start), config, observer);
}

IntegrationResult integrate_projected(const ProblemSpec& problem,
                                      const IntegrationConfig& config,
                                      const Observer& observer) {
  if (config.method != Method::projected) {
    throw Error(ErrorKind::BadConfig, "integrate_projected needs method=projected");
  }
  return integrate(problem, config, observer);
}

}  // namespace qrflow
