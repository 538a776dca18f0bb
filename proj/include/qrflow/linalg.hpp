#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "qrflow/errors.hpp"

namespace qrflow {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Mat<double>;
using Vector = Vec<double>;

/// Storage form of a Householder vector. All three describe the same
/// reflector I - 2 t t^T / t^T t; they differ in normalization:
/// `u` is unscaled, `v` has unit norm, `w` has first entry exactly 1.
enum class ReflectorVariant { u, v, w };

enum class Side { left, right };

/// Plane rotation application: G M, G^T M, or M G.
enum class RotatorSide { left, left_transpose, right };

template <typename Scalar>
struct HouseholderVector {
  Vec<Scalar> u;
  int sigma = -1;
};

/// Reflector mapping x to sigma*||x||*e1 with the cancellation-free sign:
/// sigma = -1 when x(0) >= 0, +1 otherwise.
template <typename Derived>
HouseholderVector<typename Derived::Scalar> householder_vector_from(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = x.norm();
  if (!(norm > Scalar(0))) {
    throw Error(ErrorKind::ZeroColumn, "cannot reflect a zero column");
  }
  HouseholderVector<Scalar> out;
  out.sigma = x(0) >= Scalar(0) ? -1 : 1;
  out.u = x;
  out.u(0) -= Scalar(out.sigma) * norm;
  return out;
}

namespace detail {

template <typename Derived>
void check_reflector_vector(const Eigen::MatrixBase<Derived>& vec,
                            ReflectorVariant variant) {
  using Scalar = typename Derived::Scalar;
  if (vec.size() == 0) {
    throw Error(ErrorKind::DimensionMismatch, "empty reflector vector");
  }
  if (variant == ReflectorVariant::w && vec(0) != Scalar(1)) {
    throw Error(ErrorKind::DimensionMismatch,
                "w-variant reflector must have leading entry 1");
  }
  if (variant == ReflectorVariant::v &&
      std::abs(vec.norm() - Scalar(1)) > Scalar(1e-8)) {
    throw Error(ErrorKind::DimensionMismatch,
                "v-variant reflector must have unit norm");
  }
}

}  // namespace detail

/// In-place P M or M P with P = I - 2 t t^T / t^T t. One inner product and one
/// rank-1 update per application; P is never formed.
template <typename VDerived, typename MDerived>
void reflect_in_place(const Eigen::MatrixBase<VDerived>& vec,
                      const Eigen::MatrixBase<MDerived>& m_, Side side) {
  using Scalar = typename MDerived::Scalar;
  auto& m = const_cast<Eigen::MatrixBase<MDerived>&>(m_);
  const Index dim = side == Side::left ? m.rows() : m.cols();
  if (vec.size() != dim) {
    throw Error(ErrorKind::DimensionMismatch,
                "reflector length does not match the acted dimension");
  }
  const Scalar tt = vec.squaredNorm();
  if (!(tt > Scalar(0))) return;
  const Scalar beta = Scalar(2) / tt;
  if (side == Side::left) {
    const Vec<Scalar> row = (vec.transpose() * m).transpose();
    m.noalias() -= (beta * vec) * row.transpose();
  } else {
    const Vec<Scalar> col = m * vec;
    m.noalias() -= col * (beta * vec).transpose();
  }
}

template <typename VDerived, typename MDerived>
Mat<typename MDerived::Scalar> apply_reflector(
    const Eigen::MatrixBase<VDerived>& vec, ReflectorVariant variant,
    const Eigen::MatrixBase<MDerived>& m, Side side) {
  detail::check_reflector_vector(vec, variant);
  Mat<typename MDerived::Scalar> out = m;
  reflect_in_place(vec, out, side);
  return out;
}

/// Rotation acting on coordinates (0, j) of the acted dimension, with
/// G(0,0)=G(j,j)=c, G(0,j)=-s, G(j,0)=s. Only rows/cols 0 and j are touched.
template <typename MDerived>
void rotate_in_place(typename MDerived::Scalar c, typename MDerived::Scalar s,
                     Index j, const Eigen::MatrixBase<MDerived>& m_,
                     RotatorSide side) {
  using Scalar = typename MDerived::Scalar;
  auto& m = const_cast<Eigen::MatrixBase<MDerived>&>(m_);
  const Index dim = side == RotatorSide::right ? m.cols() : m.rows();
  if (j < 1 || j >= dim) {
    throw Error(ErrorKind::DimensionMismatch, "rotator index out of range");
  }
  if (side == RotatorSide::right) {
    for (Index r = 0; r < m.rows(); ++r) {
      const Scalar a = m(r, 0);
      const Scalar b = m(r, j);
      m(r, 0) = c * a + s * b;
      m(r, j) = -s * a + c * b;
    }
    return;
  }
  const Scalar sg = side == RotatorSide::left ? -s : s;
  for (Index k = 0; k < m.cols(); ++k) {
    const Scalar a = m(0, k);
    const Scalar b = m(j, k);
    m(0, k) = c * a + sg * b;
    m(j, k) = -sg * a + c * b;
  }
}

template <typename MDerived>
Mat<typename MDerived::Scalar> apply_rotator(typename MDerived::Scalar theta,
                                             Index j,
                                             const Eigen::MatrixBase<MDerived>& m,
                                             RotatorSide side) {
  Mat<typename MDerived::Scalar> out = m;
  rotate_in_place(std::cos(theta), std::sin(theta), j, out, side);
  return out;
}

/// Modified Gram-Schmidt, columns processed left to right.
template <typename Derived>
Mat<typename Derived::Scalar> mgs_orthonormalize(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> q = m;
  const Scalar scale = m.cwiseAbs().maxCoeff();
  for (Index k = 0; k < q.cols(); ++k) {
    for (Index j = 0; j < k; ++j) {
      q.col(k) -= q.col(j).dot(q.col(k)) * q.col(j);
    }
    const Scalar nrm = q.col(k).norm();
    if (!(nrm > Scalar(1e-14) * scale)) {
      throw Error(ErrorKind::RankDeficient,
                  "column norm collapsed during Gram-Schmidt",
                  std::numeric_limits<double>::quiet_NaN(), k);
    }
    q.col(k) /= nrm;
  }
  return q;
}

/// Induced infinity norm of Q^T Q - I.
template <typename Derived>
typename Derived::Scalar orthonormality_defect(
    const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  const Mat<Scalar> g = q.transpose() * q;
  return (g - Mat<Scalar>::Identity(g.rows(), g.cols()))
      .cwiseAbs()
      .rowwise()
      .sum()
      .maxCoeff();
}

}  // namespace qrflow
