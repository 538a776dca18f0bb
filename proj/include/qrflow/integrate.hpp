#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "qrflow/butcher.hpp"
#include "qrflow/frames.hpp"
#include "qrflow/problems.hpp"

namespace qrflow {

enum class Method { u, v, w, theta, projected };
enum class StepMode { fixed, adaptive };

std::string_view to_string(Method m);
std::string_view to_string(PairKind p);
std::string_view to_string(StepMode m);

struct IntegrationConfig {
  Method method = Method::theta;
  PairKind pair = PairKind::dp5;
  StepMode mode = StepMode::adaptive;
  double h = 1e-3;    // fixed mode
  double tol = 1e-8;  // adaptive mode
  double t0 = 0.0;
  double tf = 1.0;
  double safety = 0.8;
  double growth = 4.0;
  double shrink = 0.1;
  double h_min = 0.0;  // 0 selects 1e-14 * (tf - t0)
  std::int64_t max_steps = 50'000'000;  // accepted plus rejected attempts
};

/// Throws BadConfig on an inconsistent configuration.
void validate(const IntegrationConfig& config);

struct RunStats {
  double err = std::numeric_limits<double>::quiet_NaN();
  std::int64_t reimbeddings = 0;
  std::int64_t rejections = 0;
  std::vector<std::int64_t> rejections_per_column;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
  std::vector<std::int64_t> rhs_evaluations_per_column;
  Vector lyapunov;  // b-weighted time averages of diag(A~) over accepted steps
  double t_end = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::uint64_t> seed;
};

/// Failure of a run; carries the counters accumulated up to the failure.
class IntegrationError : public Error {
 public:
  IntegrationError(const Error& cause, RunStats stats)
      : Error(cause), stats_(std::move(stats)) {}
  const RunStats& stats() const { return stats_; }

 private:
  RunStats stats_;
};

/// Accepted-step record handed to observers. `frames` is the state at t.
struct StepRecord {
  double t = 0.0;
  double h = 0.0;
  Vector column_errors;  // scaled estimates (adaptive) or raw max |delta| (fixed)
  Vector diag;           // diag(A~) at t
  const Frames* frames = nullptr;
};

/// Frames assembled from the stage values of an accepted step.
struct StageRecord {
  double t = 0.0;
  const Frames* frames = nullptr;
};

struct Observer {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const StageRecord&)> on_stage;
};

struct IntegrationResult {
  Frames frames;
  RunStats stats;
};

/// h * clamp(safety * err^(-1/(q+1)), shrink, growth), growth replaced by 1
/// after a rejection. Throws StepsizeUnderflow when the result drops below
/// h_min.
double controller_next_h(double h, double err, int q, bool accepted,
                         double h_min = 0.0, double safety = 0.8,
                         double growth = 4.0, double shrink = 0.1);

/// Mixed absolute/relative error: max_k |y1_k - yhat_k| / (tol (1 + max(|y0_k|, |y1_k|))).
double scaled_error(const Vector& y0, const Vector& y1, const Vector& yhat,
                    double tol);

struct StageSolution {
  Vector y1;
  Vector yhat;
  std::vector<Vector> values;
  std::vector<Vector> rates;
};

/// One explicit step of a pair on a vector state. `rhs(s, y)` returns the
/// rate at stage s for stage value y; stage abscissas are the caller's
/// business. Shared by every column stepper.
template <typename Rhs>
StageSolution rk_stages(const ButcherPair& pair, const Vector& y0, double h,
                        Rhs&& rhs) {
  StageSolution out;
  out.values.reserve(pair.stages);
  out.rates.reserve(pair.stages);
  for (Index s = 0; s < pair.stages; ++s) {
    Vector y = y0;
    for (Index j = 0; j < s; ++j) {
      if (pair.a(s, j) != 0.0) y += (h * pair.a(s, j)) * out.rates[j];
    }
    out.rates.push_back(rhs(s, y));
    out.values.push_back(std::move(y));
  }
  out.y1 = y0;
  out.yhat = y0;
  for (Index s = 0; s < pair.stages; ++s) {
    if (pair.b(s) != 0.0) out.y1 += (h * pair.b(s)) * out.rates[s];
    if (pair.bhat(s) != 0.0) out.yhat += (h * pair.bhat(s)) * out.rates[s];
  }
  return out;
}

/// Running b-weighted quadrature of stage diagonals.
class LyapunovAccumulator {
 public:
  explicit LyapunovAccumulator(Index p = 0) : sum_(Vector::Zero(p)) {}
  /// stage_diag(i, s) = diag(A~)_i at abscissa t + c_s h.
  void add(double h, const Vector& b, const Matrix& stage_diag);
  Vector exponents(double elapsed) const;
  const Vector& integral() const { return sum_; }

 private:
  Vector sum_;
};

/// Column-sequential integration of the Householder/Givens coordinates, or
/// the projected baseline when config.method == projected. err is filled in
/// when the problem has an exact solution.
IntegrationResult integrate(const ProblemSpec& problem,
                            const IntegrationConfig& config,
                            const Observer& observer = {});

/// Same, starting from explicit frames at config.t0 (no re-factorization of X0).
IntegrationResult integrate_from(const ProblemSpec& problem, Frames start,
                                 const IntegrationConfig& config,
                                 const Observer& observer = {});

/// The projected baseline: the pair applied to Q' = F(A, Q) column by column,
/// error control on the unprojected values, MGS after every accepted step.
/// Requires config.method == projected.
IntegrationResult integrate_projected(const ProblemSpec& problem,
                                      const IntegrationConfig& config,
                                      const Observer& observer = {});

/// Initial frames of the method for data X0.
Frames initial_frames(const Matrix& x0, Method method);

}  // namespace qrflow
