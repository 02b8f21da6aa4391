#pragma once

// Dense linear algebra and seeded sampling shared by every module.

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace ricl {

// Row-major so that a matrix's storage order matches the prefix block layout
// and the vec() convention below.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

bool all_finite(const Matrix& a);
bool all_finite(const Vector& v);

/// splitmix64 finaliser; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic random source identified by (seed, stream_id).
///
/// The engine is std::mt19937_64 (its output sequence is fixed by the C++
/// standard) seeded with mix64(seed ^ mix64(stream_id)). Uniforms take the top
/// 53 bits of one engine draw; normals use the Marsaglia polar method and
/// cache the second variate. Changing any of this changes every dataset, so
/// treat it as frozen.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on [0, 1).
  double uniform();
  double normal();

  /// A child stream whose id is derived from this stream's id and `salt`.
  RngStream derive(std::uint64_t salt) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// rows x cols matrix of i.i.d. standard normals, filled in row-major order.
Matrix gauss_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng);
Vector gauss_vector(Eigen::Index len, RngStream& rng);

/// argmin_x ||Ax - b||^2 + ridge * ||x||^2.
///
/// Solved by a column-pivoted QR of A (or of [A; sqrt(ridge) I]); no explicit
/// inverse is formed. With ridge == 0 a condition estimate of A^T A above
/// 1/eps throws ErrorKind::kSingularSystem.
Vector least_squares(const Matrix& a, const Vector& b, double ridge = 0.0);

/// Factorisation of the (ridge-regularised) normal matrix M = A^T A + ridge I,
/// kept so that solves against M can be repeated, e.g. for derivatives of the
/// least-squares solution.
class LeastSquaresFactor {
 public:
  LeastSquaresFactor(const Matrix& a, double ridge);

  /// argmin ||Ax - b||^2 + ridge ||x||^2.
  Vector solve(const Vector& b) const;
  /// M^{-1} g.
  Vector solve_normal(const Vector& g) const;

  Eigen::Index cols() const { return cols_; }
  double condition_estimate() const { return cond_; }

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  double ridge_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  double cond_ = 0.0;
};

/// Standard Kronecker product, shape (r1*r2) x (c1*c2).
Matrix kron(const Matrix& a1, const Matrix& a2);

/// Row-major flattening: vec(X)[i * cols + j] = X(i, j).
///
/// With this convention ||A1 X A2^T - B||_F == ||kron(A1, A2) vec(X) - vec(B)||_2.
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Largest singular value via power iteration on A^T A, relative tolerance tol.
double operator_norm(const Matrix& a, double tol = 1e-10);

}  // namespace ricl
