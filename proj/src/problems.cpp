#include "qrflow/problems.hpp"

#include <cmath>
#include <random>

namespace qrflow {

namespace {

Matrix rot(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix r(2, 2);
  r << c, s, -s, c;
  return r;
}

Matrix rot_rate(double angle, double speed) {
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix r(2, 2);
  r << -s, c, -c, -s;
  return speed * r;
}

struct Example4Q {
  Matrix q;
  Matrix qdot;
};

Example4Q example4_q(double alpha, double beta, double t) {
  Matrix b = Matrix::Identity(4, 4), bdot = Matrix::Zero(4, 4);
  b.block(1, 1, 2, 2) = rot(beta * t);
  bdot.block(1, 1, 2, 2) = rot_rate(beta * t, beta);
  Matrix c = Matrix::Zero(4, 4), cdot = Matrix::Zero(4, 4);
  c.block(0, 0, 2, 2) = rot(alpha * t);
  c.block(2, 2, 2, 2) = rot(alpha * t);
  cdot.block(0, 0, 2, 2) = rot_rate(alpha * t, alpha);
  cdot.block(2, 2, 2, 2) = rot_rate(alpha * t, alpha);
  return {b * c, bdot * c + b * cdot};
}

}  // namespace

ProblemSpec example1(double alpha, double beta) {
  ProblemSpec p;
  p.label = "example1";
  p.n = 2;
  p.p = 2;
  p.coeff = [alpha, beta](double t) {
    const double c2 = std::cos(2 * alpha * t), s2 = std::sin(2 * alpha * t);
    Matrix a(2, 2);
    a << beta * c2, -alpha + beta * s2, alpha + beta * s2, -beta * c2;
    return a;
  };
  p.x0 = Matrix::Identity(2, 2);
  // Q factor with positive diagonal in R: the rotation by alpha*t.
  p.exact_q = [alpha](double t) {
    const double c = std::cos(alpha * t), s = std::sin(alpha * t);
    Matrix q(2, 2);
    q << c, -s, s, c;
    return q;
  };
  p.t0 = 0.0;
  p.tf = 10.0;
  return p;
}

ProblemSpec example2(double alpha) {
  ProblemSpec p;
  p.label = "example2";
  p.n = 2;
  p.p = 2;
  auto theta = [alpha](double t) {
    return alpha / (1 + alpha * alpha) *
           (std::exp(-alpha * t) + alpha * std::sin(t) - std::cos(t));
  };
  p.coeff = [alpha, theta](double t) {
    const double k = alpha * (theta(t) - std::sin(t));
    Matrix a(2, 2);
    a << 0, k, -k, 0;
    return a;
  };
  p.x0 = Matrix::Identity(2, 2);
  // A = -theta' J, so X(t) is the counterclockwise rotation by theta(t).
  p.exact_q = [theta](double t) {
    const double c = std::cos(theta(t)), s = std::sin(theta(t));
    Matrix q(2, 2);
    q << c, -s, s, c;
    return q;
  };
  p.t0 = 0.0;
  p.tf = 10.0;
  return p;
}

ProblemSpec example3(double epsilon) {
  ProblemSpec p;
  p.label = "example3";
  p.n = 4;
  p.p = 4;
  p.coeff = [epsilon](double t) {
    Matrix a = Matrix::Zero(4, 4);
    a(0, 2) = 1;
    a(1, 0) = t / (2 * epsilon);
    a(1, 2) = 1;
    a(1, 3) = 0.5;
    a(2, 0) = 1 / epsilon;
    a(3, 1) = 1 / epsilon;
    a(3, 2) = 1 / epsilon;
    a(3, 3) = -t / (2 * epsilon);
    return a;
  };
  p.x0 = Matrix::Identity(4, 4);
  p.t0 = -1.0;
  p.tf = 1.0;
  return p;
}

ProblemSpec example4(double alpha, double beta) {
  ProblemSpec p;
  p.label = "example4";
  p.n = 4;
  p.p = 4;
  p.coeff = [alpha, beta](double t) {
    const Example4Q q = example4_q(alpha, beta, t);
    Vector d(4);
    d << 1, std::cos(t), -1 / (2 * std::sqrt(t + 1)), -10;
    return Matrix(q.q * d.asDiagonal() * q.q.transpose() +
                  q.qdot * q.q.transpose());
  };
  p.x0 = Matrix::Identity(4, 4);
  p.exact_q = [alpha, beta](double t) { return example4_q(alpha, beta, t).q; };
  p.t0 = 0.0;
  p.tf = 100.0;
  return p;
}

ProblemSpec example5(bool random_q0, std::uint64_t seed) {
  ProblemSpec p;
  p.label = "example5";
  p.n = 4;
  p.p = 4;
  p.coeff = [](double t) {
    Vector d(4);
    d << -1 / (2 * std::sqrt(t + 1)), -10, std::cos(t), 1;
    return Matrix(d.asDiagonal());
  };
  p.reference_diag = [](double t) {
    Vector d(4);
    d << 1, std::cos(t), -1 / (2 * std::sqrt(t + 1)), -10;
    return d;
  };
  if (random_q0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Matrix m(4, 4);
    for (Index j = 0; j < 4; ++j) {
      for (Index i = 0; i < 4; ++i) m(i, j) = unif(rng);
    }
    p.x0 = mgs_orthonormalize(m);
    p.seed = seed;
  } else {
    p.x0 = Matrix::Identity(4, 4);
    p.exact_q = [](double) { return Matrix(Matrix::Identity(4, 4)); };
  }
  p.t0 = 0.0;
  p.tf = 100.0;
  return p;
}

Matrix frank_matrix(Index n) {
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = std::max<Index>(0, i - 1); j < n; ++j) {
      a(i, j) = static_cast<double>(n - std::max(i, j));
    }
  }
  return a;
}

ProblemSpec example6(Index n, Index p_cols) {
  if (n < 1 || p_cols < 1 || p_cols > n) {
    throw Error(ErrorKind::BadConfig, "example6 needs 1 <= p <= n");
  }
  ProblemSpec p;
  p.label = "example6";
  p.n = n;
  p.p = p_cols;
  const Matrix a = frank_matrix(n);
  p.coeff = [a](double) { return a; };
  p.x0 = Matrix::Identity(n, p_cols);
  p.t0 = 0.0;
  p.tf = 100.0;
  return p;
}

ProblemSpec zero_problem(Index n, Index p_cols, double tf) {
  if (n < 1 || p_cols < 1 || p_cols > n) {
    throw Error(ErrorKind::BadConfig, "zero problem needs 1 <= p <= n");
  }
  ProblemSpec p;
  p.label = "zero";
  p.n = n;
  p.p = p_cols;
  p.coeff = [n](double) { return Matrix(Matrix::Zero(n, n)); };
  p.x0 = Matrix::Identity(n, p_cols);
  p.exact_q = [n, p_cols](double) { return Matrix(Matrix::Identity(n, p_cols)); };
  p.t0 = 0.0;
  p.tf = tf;
  return p;
}

const std::array<double, 13>& frank25_eigenvalues() {
  static const std::array<double, 13> values = {
      77.9837, 60.5984, 47.7777, 37.5667, 29.2021, 22.2856, 16.5772,
      11.9193, 8.2006,  5.3359,  3.2479,  1.8495,  1.1841};
  return values;
}

double q_error(const Matrix& qc, const Matrix& qe) {
  if (qc.rows() != qe.rows() || qc.cols() != qe.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "q_error needs equal shapes");
  }
  double err = 0.0;
  for (Index j = 0; j < qc.cols(); ++j) {
    const double minus = (qc.col(j) - qe.col(j)).cwiseAbs().maxCoeff();
    const double plus = (qc.col(j) + qe.col(j)).cwiseAbs().maxCoeff();
    err = std::max(err, std::min(minus, plus));
  }
  return err;
}

}  // namespace qrflow
