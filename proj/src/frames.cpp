#include "qrflow/frames.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace qrflow {

namespace {

void check_initial_data(const Matrix& x0) {
  if (x0.rows() < 1 || x0.cols() < 1 || x0.cols() > x0.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "initial data must be n x p with 1 <= p <= n");
  }
  if (!x0.allFinite()) {
    throw Error(ErrorKind::NonFinite, "initial data has non-finite entries");
  }
}

// Householder state for a unit column y (the i-th column direction in the
// current chart) with prescribed sign. `scale` is ||x_i|| (u variant only).
Vector householder_state(ReflectorVariant variant, const Vector& y, int sigma,
                         double scale, double v_sign) {
  Vector u = y;
  u(0) -= sigma;
  const double unorm = u.norm();
  switch (variant) {
    case ReflectorVariant::u: {
      Vector state(y.size() + 1);
      state.head(y.size()) = scale * u;
      state(y.size()) = sigma * scale;
      return state;
    }
    case ReflectorVariant::v: {
      if (!(unorm > 0.0)) {
        throw Error(ErrorKind::DegenerateReflector,
                    "column already aligned with the reflected axis");
      }
      Vector v = u / unorm;
      if ((v(0) < 0.0) != (v_sign < 0.0)) v = -v;
      return v;
    }
    case ReflectorVariant::w: {
      if (!(std::abs(u(0)) > 0.0)) {
        throw Error(ErrorKind::DegenerateReflector,
                    "reflector vector has a zero leading entry");
      }
      return (u / u(0)).tail(y.size() - 1);
    }
  }
  return {};
}

// Leading column of the reflector, P e1 = e1 - 2 t t(0) / t^T t.
Vector reflector_first_column(const Vector& t) {
  Vector col = (-2.0 * t(0) / t.squaredNorm()) * t;
  col(0) += 1.0;
  return col;
}

template <typename Derived>
void apply_givens(const Vector& angles, const std::vector<Index>& order,
                  const Eigen::MatrixBase<Derived>& m, RotatorSide side) {
  const Index count = angles.size();
  // G = R(order[1]) ... R(order[count]); G M applies the last factor first.
  if (side == RotatorSide::left) {
    for (Index k = count; k >= 1; --k) {
      rotate_in_place(std::cos(angles(k - 1)), std::sin(angles(k - 1)),
                      order[k], m, side);
    }
  } else {
    for (Index k = 1; k <= count; ++k) {
      rotate_in_place(std::cos(angles(k - 1)), std::sin(angles(k - 1)),
                      order[k], m, side);
    }
  }
}

// Angles bringing y to ||y|| e1 in the given order, leading entry kept
// positive after every rotation.
Vector triangularizing_angles(Vector y, const std::vector<Index>& order) {
  const Index count = static_cast<Index>(order.size()) - 1;
  Vector angles(count);
  for (Index k = 1; k <= count; ++k) {
    const Index j = order[k];
    angles(k - 1) = std::atan2(y(j), y(0));
    y(0) = std::hypot(y(0), y(j));
    y(j) = 0.0;
  }
  return angles;
}

void check_order(const std::vector<Index>& order, Index m) {
  if (static_cast<Index>(order.size()) != m || order.empty() || order[0] != 0) {
    throw Error(ErrorKind::DimensionMismatch,
                "rotator order must have length m and start at 0");
  }
  std::vector<bool> seen(m, false);
  for (Index j : order) {
    if (j < 0 || j >= m || seen[j]) {
      throw Error(ErrorKind::DimensionMismatch,
                  "rotator order must be a permutation");
    }
    seen[j] = true;
  }
}

}  // namespace

Vector reflector_vector(ReflectorVariant variant, const Vector& state) {
  switch (variant) {
    case ReflectorVariant::u:
      return state.head(state.size() - 1);
    case ReflectorVariant::v:
      return state;
    case ReflectorVariant::w: {
      Vector t(state.size() + 1);
      t(0) = 1.0;
      t.tail(state.size()) = state;
      return t;
    }
  }
  return {};
}

Vector reflector_rate(ReflectorVariant variant, const Vector& rate) {
  switch (variant) {
    case ReflectorVariant::u:
      return rate.head(rate.size() - 1);
    case ReflectorVariant::v:
      return rate;
    case ReflectorVariant::w: {
      Vector t(rate.size() + 1);
      t(0) = 0.0;
      t.tail(rate.size()) = rate;
      return t;
    }
  }
  return {};
}

HouseholderFrames init_householder(const Matrix& x0, ReflectorVariant variant) {
  return init_householder(x0, variant, std::span<const int>{});
}

HouseholderFrames init_householder(const Matrix& x0, ReflectorVariant variant,
                                   std::span<const int> sigma) {
  check_initial_data(x0);
  const Index n = x0.rows();
  const Index p = x0.cols();
  if (!sigma.empty() && static_cast<Index>(sigma.size()) != p) {
    throw Error(ErrorKind::DimensionMismatch, "one sign per column expected");
  }
  HouseholderFrames frames;
  frames.variant = variant;
  frames.n = n;
  frames.p = p;
  Matrix x = x0;
  for (Index i = 0; i < p; ++i) {
    const Index m = n - i;
    const Vector col = x.col(i).tail(m);
    const double norm = col.norm();
    if (!(norm > 0.0)) {
      throw Error(ErrorKind::ZeroColumn, "initial column is rank deficient",
                  std::numeric_limits<double>::quiet_NaN(), i);
    }
    const int s = sigma.empty() ? (col(0) >= 0.0 ? -1 : 1) : sigma[i];
    const Vector y = col / norm;
    Vector state;
    try {
      state = householder_state(variant, y, s, norm, y(0) - s);
    } catch (const Error& e) {
      throw e.with_context(std::numeric_limits<double>::quiet_NaN(), i);
    }
    frames.coords.push_back(state);
    frames.sigma.push_back(s);
    reflect_in_place(reflector_vector(variant, state),
                     x.bottomRightCorner(m, p - i), Side::left);
  }
  return frames;
}

std::vector<Index> rotator_order_for(const Vector& x) {
  const Index m = x.size();
  std::vector<Index> order;
  order.reserve(m);
  order.push_back(0);
  if (m <= 1) return order;
  Index l = 1;
  for (Index j = 2; j < m; ++j) {
    if (std::abs(x(j)) > std::abs(x(l))) l = j;
  }
  order.push_back(l);
  for (Index j = 1; j < m; ++j) {
    if (j != l) order.push_back(j);
  }
  return order;
}

GivensFrames init_givens(const Matrix& x0) {
  return init_givens(x0, {});
}

GivensFrames init_givens(const Matrix& x0,
                         const std::vector<std::vector<Index>>& order) {
  check_initial_data(x0);
  const Index n = x0.rows();
  const Index p = x0.cols();
  if (!order.empty() && static_cast<Index>(order.size()) != p) {
    throw Error(ErrorKind::DimensionMismatch, "one ordering per column expected");
  }
  GivensFrames frames;
  frames.n = n;
  frames.p = p;
  Matrix x = x0;
  for (Index i = 0; i < p; ++i) {
    const Index m = n - i;
    const Vector col = x.col(i).tail(m);
    if (!(col.norm() > 0.0)) {
      throw Error(ErrorKind::ZeroColumn, "initial column is rank deficient",
                  std::numeric_limits<double>::quiet_NaN(), i);
    }
    std::vector<Index> pi = order.empty() ? rotator_order_for(col) : order[i];
    check_order(pi, m);
    Vector angles = triangularizing_angles(col, pi);
    apply_givens(angles, pi, x.bottomRightCorner(m, p - i),
                 RotatorSide::left_transpose);
    frames.angles.push_back(std::move(angles));
    frames.order.push_back(std::move(pi));
  }
  return frames;
}

bool column_healthy(const HouseholderFrames& frames, Index col) {
  const Vector& state = frames.coords[col];
  switch (frames.variant) {
    case ReflectorVariant::u: {
      const Index m = state.size() - 1;
      const double rho = state(m);
      return frames.sigma[col] * (state(0) + rho) < 0.0;
    }
    case ReflectorVariant::v: {
      const double lead = state(0) * state(0);
      return lead >= state.tail(state.size() - 1).squaredNorm();
    }
    case ReflectorVariant::w:
      return 1.0 - state.squaredNorm() >= 0.0;
  }
  return false;
}

bool column_healthy(const GivensFrames& frames, Index col) {
  const Vector& angles = frames.angles[col];
  double cos_product = 1.0;
  // Positions 2..m-1 of the ordering; angles(k-1) belongs to position k.
  for (Index k = 2; k <= angles.size(); ++k) {
    const double c = std::cos(angles(k - 1));
    const double s = std::sin(angles(k - 1));
    cos_product *= c * c;
    if (cos_product < s * s) return false;
  }
  return true;
}

std::vector<bool> frame_health(const HouseholderFrames& frames) {
  std::vector<bool> out(frames.p);
  for (Index i = 0; i < frames.p; ++i) out[i] = column_healthy(frames, i);
  return out;
}

std::vector<bool> frame_health(const GivensFrames& frames) {
  std::vector<bool> out(frames.p);
  for (Index i = 0; i < frames.p; ++i) out[i] = column_healthy(frames, i);
  return out;
}

Index first_unhealthy(const HouseholderFrames& frames) {
  for (Index i = 0; i < frames.p; ++i) {
    if (!column_healthy(frames, i)) return i;
  }
  return frames.p;
}

Index first_unhealthy(const GivensFrames& frames) {
  for (Index i = 0; i < frames.p; ++i) {
    if (!column_healthy(frames, i)) return i;
  }
  return frames.p;
}

HouseholderFrames reimbed_householder(const HouseholderFrames& frames, double t,
                                      Index from_column) {
  HouseholderFrames out = frames;
  const Index n = frames.n;
  Matrix k = Matrix::Identity(n - from_column, n - from_column);
  for (Index i = from_column; i < frames.p; ++i) {
    const Index m = n - i;
    const Vector& old_state = frames.coords[i];
    const int old_sigma = frames.sigma[i];
    const Vector t_old = reflector_vector(frames.variant, old_state);

    const Vector y = old_sigma * (k * reflector_first_column(t_old));
    const double ynorm = y.norm();
    if (!std::isfinite(ynorm) || std::abs(ynorm - 1.0) > 1e-8) {
      throw Error(ErrorKind::DegenerateReflector,
                  "column direction lost unit length (norm " +
                      std::to_string(ynorm) + ")",
                  t, i);
    }
    const int new_sigma = y(0) >= 0.0 ? -1 : 1;
    const double scale = frames.variant == ReflectorVariant::u
                             ? std::abs(old_state(m))
                             : 1.0;
    Vector state;
    try {
      state = householder_state(frames.variant, y, new_sigma, scale,
                                t_old(0) >= 0.0 ? 1.0 : -1.0);
    } catch (const Error& e) {
      throw e.with_context(t, i);
    }
    out.coords[i] = state;
    out.sigma[i] = new_sigma;

    if (i + 1 < frames.p) {
      // Q_new K Q_old = diag(sigma_old*sigma_new, K_next)
      reflect_in_place(t_old, k, Side::right);
      reflect_in_place(reflector_vector(frames.variant, state), k, Side::left);
      Matrix next = k.bottomRightCorner(m - 1, m - 1);
      k = std::move(next);
    }
  }
  return out;
}

GivensFrames reimbed_givens(const GivensFrames& frames, double t,
                            Index from_column) {
  GivensFrames out = frames;
  const Index n = frames.n;
  Matrix k = Matrix::Identity(n - from_column, n - from_column);
  for (Index i = from_column; i < frames.p; ++i) {
    const Index m = n - i;
    Vector probe = Vector::Zero(m);
    probe(0) = 1.0;
    apply_givens(frames.angles[i], frames.order[i], probe,
                 RotatorSide::left);
    probe = k * probe;
    const double pnorm = probe.norm();
    if (!std::isfinite(pnorm) || std::abs(pnorm - 1.0) > 1e-8) {
      throw Error(ErrorKind::DegenerateProbe,
                  "probe lost unit length (norm " + std::to_string(pnorm) + ")",
                  t, i);
    }
    std::vector<Index> order = rotator_order_for(probe);
    Vector angles = triangularizing_angles(probe, order);

    if (i + 1 < frames.p) {
      // G_new^T K G_old = diag(1, K_next)
      apply_givens(frames.angles[i], frames.order[i], k, RotatorSide::right);
      apply_givens(angles, order, k, RotatorSide::left_transpose);
      Matrix next = k.bottomRightCorner(m - 1, m - 1);
      k = std::move(next);
    }
    out.angles[i] = std::move(angles);
    out.order[i] = std::move(order);
  }
  return out;
}

Matrix form_q(const HouseholderFrames& frames, Index cols) {
  const Index n = frames.n;
  Matrix q = Matrix::Identity(n, cols);
  for (Index i = std::min(cols, frames.p) - 1; i >= 0; --i) {
    const Index m = n - i;
    reflect_in_place(reflector_vector(frames.variant, frames.coords[i]),
                     q.bottomRows(m), Side::left);
  }
  return q;
}

Matrix form_q(const GivensFrames& frames, Index cols) {
  const Index n = frames.n;
  Matrix q = Matrix::Identity(n, cols);
  for (Index i = std::min(cols, frames.p) - 1; i >= 0; --i) {
    const Index m = n - i;
    apply_givens(frames.angles[i], frames.order[i], q.bottomRows(m),
                 RotatorSide::left);
  }
  return q;
}

Matrix form_q(const ProjectedFrames& frames, Index cols) {
  return frames.q.leftCols(cols);
}

Matrix form_q(const Frames& frames) {
  return std::visit(
      [](const auto& f) -> Matrix {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, ProjectedFrames>) {
          return f.q;
        } else {
          return form_q(f, f.p);
        }
      },
      frames);
}

void renormalize(HouseholderFrames& frames) {
  if (frames.variant != ReflectorVariant::v) return;
  for (Vector& v : frames.coords) v /= v.norm();
}

void wrap_angles(GivensFrames& frames) {
  for (Vector& a : frames.angles) {
    for (Index k = 0; k < a.size(); ++k) {
      a(k) = std::atan2(std::sin(a(k)), std::cos(a(k)));
    }
  }
}

}  // namespace qrflow
