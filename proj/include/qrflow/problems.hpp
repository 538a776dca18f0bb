#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "qrflow/linalg.hpp"

namespace qrflow {

using MatrixFn = std::function<Matrix(double)>;
using VectorFn = std::function<Vector(double)>;

struct ProblemSpec {
  std::string label;
  Index n = 0;
  Index p = 0;
  MatrixFn coeff;
  Matrix x0;
  MatrixFn exact_q;        // empty when no closed form is known
  VectorFn reference_diag; // limit of diag(A~) when known (Example 5)
  double t0 = 0.0;
  double tf = 1.0;
  std::optional<std::uint64_t> seed;

  bool has_exact() const { return static_cast<bool>(exact_q); }
};

/// Dichotomic, fast-rotating 2x2 problem on [0, 10].
ProblemSpec example1(double alpha = 100.0, double beta = 100.0);

/// Skew 2x2 problem with a boundary layer at t = 0, on [0, 10].
ProblemSpec example2(double alpha = 100.0);

/// Stiff 4x4 boundary-value coefficient matrix on [-1, 1].
ProblemSpec example3(double epsilon = 1e-2);

/// A = Q D Q^T + Q' Q^T with block rotations Q(t), on [0, 100].
ProblemSpec example4(double alpha = 1.0, double beta = 1.4142135623730951);

/// Diagonal A(t) = diag(-1/(2 sqrt(t+1)), -10, cos t, 1) on [0, 100]; X0 = I
/// or an orthonormalized seeded uniform[-1, 1] matrix.
ProblemSpec example5(bool random_q0 = false, std::uint64_t seed = 1);

/// Constant upper Hessenberg Frank matrix, X0 = [I_p; 0], on [0, 100].
ProblemSpec example6(Index n = 25, Index p = 13);

/// A = 0, X0 = [I_p; 0]; Q stays put.
ProblemSpec zero_problem(Index n = 3, Index p = 2, double tf = 1.0);

/// Frank matrix of order n: A(i, j) = n + 1 - max(i, j) (1-based) for j >= i-1.
Matrix frank_matrix(Index n);

/// Leading real eigenvalue parts of the order-25 Frank matrix, four digits.
const std::array<double, 13>& frank25_eigenvalues();

/// max_j min(||qc_j - qe_j||_inf, ||qc_j + qe_j||_inf).
double q_error(const Matrix& qc, const Matrix& qe);

}  // namespace qrflow
