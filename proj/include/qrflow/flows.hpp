#pragma once

#include <cmath>
#include <vector>

#include "qrflow/frames.hpp"
#include "qrflow/linalg.hpp"

namespace qrflow {

// Right-hand sides of the coordinate ODEs. `a` is always the working block
// A(i:n, i:n) after the updates of columns 0..i-1.

/// d/dt [u; rho] for the unscaled Householder vector and rho = sigma*||x||.
template <typename SDerived, typename ADerived>
Vec<typename ADerived::Scalar> rhs_u(const Eigen::MatrixBase<SDerived>& state,
                                     const Eigen::MatrixBase<ADerived>& a) {
  using Scalar = typename ADerived::Scalar;
  const Index m = a.rows();
  if (state.size() != m + 1 || a.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "u state must have m+1 entries");
  }
  const Scalar rho = state(m);
  if (!(std::abs(rho) >= Scalar(1e-30))) {
    throw Error(ErrorKind::DivisionHazard, "|sigma*||x||| fell below 1e-30");
  }
  const auto u = state.head(m);
  const Vec<Scalar> au = a * u;
  // e1^T A_s
  const Vec<Scalar> sym_row = (a.row(0).transpose() + a.col(0)) / Scalar(2);
  const Scalar quad = u.dot(au) / rho;  // u^T A_s u / rho

  Vec<Scalar> out(m + 1);
  out.head(m) = au + rho * a.col(0);
  out(0) -= Scalar(2) * sym_row.dot(u) + rho * a(0, 0) + quad;
  out(m) = Scalar(2) * sym_row.dot(u) + a(0, 0) * rho + quad;
  return out;
}

/// dv/dt for the unit Householder vector. Tangent to the sphere.
template <typename VDerived, typename ADerived>
Vec<typename ADerived::Scalar> rhs_v(const Eigen::MatrixBase<VDerived>& v,
                                     const Eigen::MatrixBase<ADerived>& a) {
  using Scalar = typename ADerived::Scalar;
  const Index m = a.rows();
  if (v.size() != m || a.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "v state must have m entries");
  }
  const Scalar v1 = v(0);
  if (!(std::abs(v1) >= Scalar(1e-8))) {
    throw Error(ErrorKind::DivisionHazard, "|e1^T v| fell below 1e-8");
  }
  if (m == 1) return Vec<Scalar>::Zero(1);
  const Index k = m - 1;
  const auto vh = v.tail(k);
  const auto col = a.col(0).tail(k);
  const auto row = a.row(0).tail(k).transpose();
  const auto blk = a.bottomRightCorner(k, k);

  // Antisymmetric part enters with the first-column orientation.
  const Vec<Scalar> skew_col = (col - row) / Scalar(2);
  const Vec<Scalar> sym_col = (col + row) / Scalar(2);
  const Vec<Scalar> blk_v = blk * vh;
  const Vec<Scalar> blk_sym_v = (blk_v + blk.transpose() * vh) / Scalar(2);

  const Scalar g = Scalar(2) * v1 * v1 - Scalar(1);
  const Vec<Scalar> b = (g / Scalar(2)) * col + v1 * blk_v;
  const Scalar alpha = (a(0, 0) * v1 + sym_col.dot(vh)) * g +
                       Scalar(2) * v1 * vh.dot(sym_col * v1 + blk_sym_v);
  const Scalar c_scale = -skew_col.dot(vh) + alpha;
  const Vec<Scalar> s_vec = (g / (Scalar(2) * v1)) * col + blk_v;
  const Vec<Scalar> b_minus_c = b - c_scale * vh;

  Vec<Scalar> out(m);
  out(0) = -b_minus_c.dot(vh);
  // (S - S^T) vh with S = s_vec vh^T
  out.tail(k) = v1 * b_minus_c + vh.squaredNorm() * s_vec - s_vec.dot(vh) * vh;
  return out;
}

/// d(what)/dt for w = [1; what].
template <typename WDerived, typename ADerived>
Vec<typename ADerived::Scalar> rhs_w(const Eigen::MatrixBase<WDerived>& what,
                                     const Eigen::MatrixBase<ADerived>& a) {
  using Scalar = typename ADerived::Scalar;
  const Index m = a.rows();
  const Index k = m - 1;
  if (what.size() != k || a.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch, "w state must have m-1 entries");
  }
  if (k == 0) return Vec<Scalar>(0);
  const auto col = a.col(0).tail(k);
  const auto row = a.row(0).tail(k).transpose();
  const Vec<Scalar> blk_w = a.bottomRightCorner(k, k) * what;
  const Scalar ww = Scalar(1) + what.squaredNorm();
  const Scalar col_w = what.dot(col);
  const Scalar waw = a(0, 0) + row.dot(what) + col_w + what.dot(blk_w);
  return (a(0, 0) + col_w - Scalar(2) * waw / ww) * what +
         (Scalar(1) - ww / Scalar(2)) * col + blk_w;
}

/// Angle rates for a Givens column. angles(k-1) and the result entry k-1
/// belong to the rotator in plane (0, order[k]).
template <typename ADerived>
Vec<typename ADerived::Scalar> rhs_theta(const Vec<typename ADerived::Scalar>& angles,
                                         const std::vector<Index>& order,
                                         const Eigen::MatrixBase<ADerived>& a) {
  using Scalar = typename ADerived::Scalar;
  const Index m = a.rows();
  const Index count = m - 1;
  if (angles.size() != count || static_cast<Index>(order.size()) != m) {
    throw Error(ErrorKind::DimensionMismatch, "theta state must have m-1 angles");
  }
  if (count == 0) return Vec<Scalar>(0);
  Vec<Scalar> cs(count), sn(count);
  for (Index k = 0; k < count; ++k) {
    cs(k) = std::cos(angles(k));
    sn(k) = std::sin(angles(k));
  }
  Vec<Scalar> q = Vec<Scalar>::Zero(m);
  q(0) = Scalar(1);
  for (Index k = count; k >= 1; --k) {
    rotate_in_place(cs(k - 1), sn(k - 1), order[k], q, RotatorSide::left);
  }
  Vec<Scalar> z = a * q;
  for (Index k = 1; k <= count; ++k) {
    rotate_in_place(cs(k - 1), sn(k - 1), order[k], z,
                    RotatorSide::left_transpose);
  }
  Vec<Scalar> rates(count);
  Scalar cos_product(1);
  for (Index k = count; k >= 1; --k) {
    if (!(std::abs(cos_product) >= Scalar(1e-8))) {
      throw Error(ErrorKind::DivisionHazard, "cosine product fell below 1e-8");
    }
    rates(k - 1) = z(order[k]) / cos_product;
    cos_product *= cs(k - 1);
  }
  return rates;
}

/// In place A <- P A P - P dP/dt for P = I - 2 t t^T / t^T t, given the full
/// reflector vector t and its rate. Rank-2 arithmetic only.
template <typename ADerived, typename TDerived, typename RDerived>
void householder_update(const Eigen::MatrixBase<ADerived>& a_,
                        const Eigen::MatrixBase<TDerived>& t,
                        const Eigen::MatrixBase<RDerived>& rate) {
  using Scalar = typename ADerived::Scalar;
  auto& a = const_cast<Eigen::MatrixBase<ADerived>&>(a_);
  const Index m = a.rows();
  if (t.size() != m || rate.size() != m || a.cols() != m) {
    throw Error(ErrorKind::DimensionMismatch,
                "reflector and block dimensions differ");
  }
  const Scalar beta = Scalar(2) / t.squaredNorm();
  const Vec<Scalar> at = a * t;
  const Vec<Scalar> ta = a.transpose() * t;
  const Scalar tat = t.dot(at);
  const Vec<Scalar> left = -beta * ta + (beta * beta * tat) * t - beta * rate;
  const Vec<Scalar> right = -beta * at + beta * rate;
  a.noalias() += t * left.transpose();
  a.noalias() += right * t.transpose();
}

/// In place A <- G^T A G - G^T dG/dt for a Givens column.
template <typename ADerived>
void givens_update(const Eigen::MatrixBase<ADerived>& a_,
                   const Vec<typename ADerived::Scalar>& angles,
                   const Vec<typename ADerived::Scalar>& rates,
                   const std::vector<Index>& order) {
  auto& a = const_cast<Eigen::MatrixBase<ADerived>&>(a_);
  const Index count = angles.size();
  if (a.rows() != count + 1 || rates.size() != count) {
    throw Error(ErrorKind::DimensionMismatch, "angle and block dimensions differ");
  }
  for (Index k = 1; k <= count; ++k) {
    const auto c = std::cos(angles(k - 1));
    const auto s = std::sin(angles(k - 1));
    const Index j = order[k];
    rotate_in_place(c, s, j, a, RotatorSide::left_transpose);
    rotate_in_place(c, s, j, a, RotatorSide::right);
    a(j, 0) -= rates(k - 1);
    a(0, j) += rates(k - 1);
  }
}

/// Q' = AQ - Q Q^T A Q + Q S with S the skew completion of the strictly lower
/// part of Q^T A Q.
template <typename QDerived, typename ADerived>
Mat<typename QDerived::Scalar> rhs_qrflow(const Eigen::MatrixBase<QDerived>& q,
                                          const Eigen::MatrixBase<ADerived>& a) {
  using Scalar = typename QDerived::Scalar;
  const Mat<Scalar> aq = a * q;
  const Mat<Scalar> m = q.transpose() * aq;
  Mat<Scalar> s = Mat<Scalar>::Zero(m.rows(), m.cols());
  s.template triangularView<Eigen::StrictlyLower>() = m;
  s.template triangularView<Eigen::StrictlyUpper>() = -m.transpose();
  return aq - q * (m - s);
}

// Column-level dispatch used by the integrators.

Vector column_rhs(const HouseholderFrames& frames, Index col,
                  const Vector& state, const Matrix& block);
Vector column_rhs(const GivensFrames& frames, Index col, const Vector& state,
                  const Matrix& block);

/// Block <- updated block for column `col` at the given (state, rate) pair.
/// The full m x m block is updated; the caller restricts to the trailing part.
void column_update(const HouseholderFrames& frames, Index col,
                   const Vector& state, const Vector& rate, Matrix& block);
void column_update(const GivensFrames& frames, Index col, const Vector& state,
                   const Vector& rate, Matrix& block);

/// Diagonal of A~ = Q^T A Q - Q^T Q' (first p entries), with Q' implied by the
/// coordinate right-hand sides at the given frames.
Vector transformed_diag(const HouseholderFrames& frames, const Matrix& a);
Vector transformed_diag(const GivensFrames& frames, const Matrix& a);
Vector transformed_diag(const ProjectedFrames& frames, const Matrix& a);
Vector transformed_diag(const Frames& frames, const Matrix& a);

}  // namespace qrflow
