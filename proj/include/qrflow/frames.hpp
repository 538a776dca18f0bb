#pragma once

#include <span>
#include <variant>
#include <vector>

#include "qrflow/linalg.hpp"

namespace qrflow {

/// Q = P_1 ... P_p [I_p; 0] with P_i = diag(I_i, I - 2 t t^T / t^T t).
///
/// Column i (0-based) acts on a trailing block of size m = n - i. Its state
/// vector depends on the variant:
///   u: [u (m entries); rho] with rho = sigma * ||x_i||
///   v: v (m entries, unit norm at accepted steps)
///   w: the m-1 trailing entries of w; the leading 1 is implicit
struct HouseholderFrames {
  ReflectorVariant variant = ReflectorVariant::w;
  Index n = 0;
  Index p = 0;
  std::vector<Vector> coords;
  std::vector<int> sigma;

  Index block_size(Index col) const { return n - col; }
};

/// Q = Q_1 ... Q_p [I_p; 0] with Q_i = diag(I_i, G_i) and
/// G_i = R(order[1]) R(order[2]) ... R(order[m-1]), R(j) the rotation in the
/// (0, j) plane of the trailing block. angles[i](k-1) belongs to R(order[k]).
struct GivensFrames {
  Index n = 0;
  Index p = 0;
  std::vector<Vector> angles;
  std::vector<std::vector<Index>> order;

  Index block_size(Index col) const { return n - col; }
};

/// Unstructured n x p iterate used by the projected baseline.
struct ProjectedFrames {
  Matrix q;
};

using Frames = std::variant<HouseholderFrames, GivensFrames, ProjectedFrames>;

/// Full reflector vector t (length m) for a Householder column state.
Vector reflector_vector(ReflectorVariant variant, const Vector& state);

/// Rate of the full reflector vector for a given state rate.
Vector reflector_rate(ReflectorVariant variant, const Vector& rate);

/// Triangularizes X0 with the cancellation-free sign rule.
HouseholderFrames init_householder(const Matrix& x0, ReflectorVariant variant);

/// Same, but with prescribed signs sigma (each +-1), which need not be the
/// cancellation-free ones. Used to build deliberately ill-posed charts.
HouseholderFrames init_householder(const Matrix& x0, ReflectorVariant variant,
                                   std::span<const int> sigma);

/// Triangularizes X0 with rotators, annihilating the largest trailing entry
/// first and keeping every partially rotated column's leading entry positive.
GivensFrames init_givens(const Matrix& x0);

/// Same, with prescribed rotator orderings (each order[i] must be a
/// permutation of 0..m-1 with order[i][0] == 0).
GivensFrames init_givens(const Matrix& x0,
                         const std::vector<std::vector<Index>>& order);

/// Index array [0, l, 1, ..., l-1, l+1, ..., m-1] with l the position of the
/// largest |x(1:)| entry (smallest index wins ties).
std::vector<Index> rotator_order_for(const Vector& x);

bool column_healthy(const HouseholderFrames& frames, Index col);
bool column_healthy(const GivensFrames& frames, Index col);
std::vector<bool> frame_health(const HouseholderFrames& frames);
std::vector<bool> frame_health(const GivensFrames& frames);

/// First unhealthy column, or p when every column passes.
Index first_unhealthy(const HouseholderFrames& frames);
Index first_unhealthy(const GivensFrames& frames);

/// Chart change at a mesh point. Columns before `from_column` are kept as is;
/// from there on every column is re-derived through the K recursion so that
/// the represented Q is unchanged (up to the sign flips sigma_old*sigma_new
/// for Householder columns).
HouseholderFrames reimbed_householder(const HouseholderFrames& frames, double t,
                                      Index from_column = 0);
GivensFrames reimbed_givens(const GivensFrames& frames, double t,
                            Index from_column = 0);

Matrix form_q(const HouseholderFrames& frames, Index cols);
Matrix form_q(const GivensFrames& frames, Index cols);
Matrix form_q(const ProjectedFrames& frames, Index cols);
Matrix form_q(const Frames& frames);

/// v columns are divided by their norm; other variants are left alone.
void renormalize(HouseholderFrames& frames);

/// Angles mapped to [-pi, pi] via atan2(sin, cos).
void wrap_angles(GivensFrames& frames);

}  // namespace qrflow
