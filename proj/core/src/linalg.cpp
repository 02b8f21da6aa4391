#include "ricl/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ricl/error.hpp"

namespace ricl {

bool all_finite(const Matrix& a) { return a.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(mix64(seed ^ mix64(stream_id))) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

RngStream RngStream::derive(std::uint64_t salt) const {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(salt + 0x632be59bd9b4e019ULL)));
}

Matrix gauss_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  require(rows >= 1 && cols >= 1, ErrorKind::kPreconditionViolation,
          "gauss_matrix: rows and cols must be >= 1");
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
  return out;
}

Vector gauss_vector(Eigen::Index len, RngStream& rng) {
  require(len >= 1, ErrorKind::kPreconditionViolation, "gauss_vector: len must be >= 1");
  Vector out(len);
  for (Eigen::Index i = 0; i < len; ++i) out(i) = rng.normal();
  return out;
}

LeastSquaresFactor::LeastSquaresFactor(const Matrix& a, double ridge)
    : rows_(a.rows()), cols_(a.cols()), ridge_(ridge) {
  require(ridge >= 0.0 && std::isfinite(ridge), ErrorKind::kPreconditionViolation,
          "least_squares: ridge must be finite and >= 0");
  require(a.cols() >= 1, ErrorKind::kShapeMismatch, "least_squares: A has no columns");
  if (ridge > 0.0) {
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(rows_ + cols_, cols_);
    aug.topRows(rows_) = a;
    aug.bottomRows(cols_).diagonal().setConstant(std::sqrt(ridge));
    qr_.compute(aug);
  } else {
    qr_.compute(Eigen::MatrixXd(a));
  }

  const Eigen::Index k = std::min(qr_.rows(), qr_.cols());
  const auto& r = qr_.matrixQR();
  const double r_max = k > 0 ? std::abs(r(0, 0)) : 0.0;
  const double r_min = (k == cols_) ? std::abs(r(k - 1, k - 1)) : 0.0;
  cond_ = (r_min > 0.0) ? r_max / r_min : std::numeric_limits<double>::infinity();

  if (ridge == 0.0) {
    // cond(A^T A) = cond(A)^2.
    const double eps = std::numeric_limits<double>::epsilon();
    const bool singular = !(r_min > 0.0) || cond_ * cond_ > 1.0 / eps;
    require(!singular, ErrorKind::kSingularSystem,
            "least_squares: A^T A is numerically singular (cond estimate " +
                std::to_string(cond_ * cond_) + ")");
  }
}

Vector LeastSquaresFactor::solve(const Vector& b) const {
  require(b.size() == rows_, ErrorKind::kShapeMismatch,
          "least_squares: A.rows (" + std::to_string(rows_) + ") != b.len (" +
              std::to_string(b.size()) + ")");
  if (ridge_ > 0.0) {
    Eigen::VectorXd aug = Eigen::VectorXd::Zero(rows_ + cols_);
    aug.head(rows_) = b;
    return qr_.solve(aug);
  }
  return qr_.solve(b);
}

Vector LeastSquaresFactor::solve_normal(const Vector& g) const {
  require(g.size() == cols_, ErrorKind::kShapeMismatch, "solve_normal: length mismatch");
  // A P = Q R  =>  M = P R^T R P^T.
  const auto r = qr_.matrixQR().topLeftCorner(cols_, cols_).triangularView<Eigen::Upper>();
  Eigen::VectorXd y = qr_.colsPermutation().transpose() * g;
  r.transpose().solveInPlace(y);
  r.solveInPlace(y);
  return qr_.colsPermutation() * y;
}

Vector least_squares(const Matrix& a, const Vector& b, double ridge) {
  require(a.rows() == b.size(), ErrorKind::kShapeMismatch,
          "least_squares: A.rows != b.len");
  return LeastSquaresFactor(a, ridge).solve(b);
}

Matrix kron(const Matrix& a1, const Matrix& a2) {
  Matrix out(a1.rows() * a2.rows(), a1.cols() * a2.cols());
  for (Eigen::Index i = 0; i < a1.rows(); ++i)
    for (Eigen::Index j = 0; j < a1.cols(); ++j)
      out.block(i * a2.rows(), j * a2.cols(), a2.rows(), a2.cols()) = a1(i, j) * a2;
  return out;
}

Vector vec(const Matrix& x) {
  // Row-major storage already is the flattening.
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  require(v.size() == rows * cols, ErrorKind::kShapeMismatch, "unvec: length mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

double operator_norm(const Matrix& a, double tol) {
  require(tol > 0.0, ErrorKind::kPreconditionViolation, "operator_norm: tol must be > 0");
  if (a.size() == 0 || a.isZero(0.0)) return 0.0;

  // Fixed start vector keeps the result a pure function of A.
  RngStream rng(0x70776572ULL, 0);
  Vector v = gauss_vector(a.cols(), rng);
  v.normalize();

  double lambda = 0.0;
  constexpr int kMaxIter = 100000;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector w = a.transpose() * (a * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    // Stop an order of magnitude past tol; the Rayleigh estimate below
    // converges twice as fast as the iterate.
    if (it > 2 && std::abs(next - lambda) <= 0.1 * tol * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return (a * v).norm();
}

}  // namespace ricl
