#pragma once

// Dense symmetric linear algebra, chi-square / normal tail probabilities and
// seeded random streams. The matrix routines accept any Eigen expression and
// return plain matrices of the same scalar type.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "fr/errors.hpp"

namespace fr {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

template <typename Derived>
void require_symmetric(const Eigen::MatrixBase<Derived>& a, const char* who) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ConfigError(std::string(who) + ": matrix must be square and non-empty");
  }
  const Scalar scale = a.cwiseAbs().maxCoeff();
  const Scalar asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(1e-12) * scale) {
    throw NotPositiveDefinite(std::string(who) + ": matrix is not symmetric");
  }
}

// Pivots at or below 1e-12 * trace / n are treated as singular.
template <typename Derived>
typename Derived::Scalar pivot_floor(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1e-12) * a.trace() / Scalar(a.rows());
}

}  // namespace detail

/// Lower-triangular L with L L' = A. Throws NotPositiveDefinite.
template <typename Derived>
Mat<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_symmetric(a, "cholesky");
  const Mat<Scalar> sym = a;
  const Scalar floor = detail::pivot_floor(sym);
  Eigen::LLT<Mat<Scalar>> llt(sym);
  if (llt.info() != Eigen::Success || !(floor > Scalar(0))) {
    throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  }
  Mat<Scalar> l = llt.matrixL();
  const Scalar min_pivot = l.diagonal().cwiseAbs2().minCoeff();
  if (!(min_pivot > floor)) {
    throw NotPositiveDefinite("cholesky: pivot below 1e-12*trace/n");
  }
  return l;
}

template <typename Derived>
Mat<typename Derived::Scalar> inverse_spd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Mat<Scalar> l = cholesky(a);
  const Index n = a.rows();
  Mat<Scalar> inv = Mat<Scalar>::Identity(n, n);
  l.template triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().template triangularView<Eigen::Upper>().solveInPlace(inv);
  return (inv + inv.transpose()) / Scalar(2);
}

/// Symmetric inverse square root R (R A R = I) via eigendecomposition.
template <typename Derived>
Mat<typename Derived::Scalar> inv_sqrt_spd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  detail::require_symmetric(a, "inv_sqrt_spd");
  const Mat<Scalar> sym = a;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NotPositiveDefinite("inv_sqrt_spd: eigendecomposition failed");
  }
  const Scalar floor = detail::pivot_floor(sym);
  if (!(floor > Scalar(0)) || !(eig.eigenvalues().minCoeff() > floor)) {
    throw NotPositiveDefinite("inv_sqrt_spd: matrix is not positive definite");
  }
  const Mat<Scalar>& q = eig.eigenvectors();
  Mat<Scalar> r = q * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  return (r + r.transpose()) / Scalar(2);
}

/// Quadratic form x' A^-1 x for SPD A, via a Cholesky solve.
template <typename DerivedA, typename DerivedX>
typename DerivedA::Scalar inv_quad_form(const Eigen::MatrixBase<DerivedA>& a,
                                        const Eigen::MatrixBase<DerivedX>& x) {
  using Scalar = typename DerivedA::Scalar;
  const Mat<Scalar> l = cholesky(a);
  const Vec<Scalar> y = l.template triangularView<Eigen::Lower>().solve(x);
  return y.squaredNorm();
}

/// P(chi2_k > x), regularized upper incomplete gamma Q(k/2, x/2).
double chi2_sf(double x, int k);

/// 2 (1 - Phi(|t|)).
double normal_two_sided_p(double t);

/// Regularized lower / upper incomplete gamma functions.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// Reproducible random stream keyed by (seed, stream id). Copies continue
/// independently from the copied state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal draw (Marsaglia polar method).
  double normal();

  VectorXd normal_vector(Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One draw from N(mean, cov).
VectorXd mvn_sample(const VectorXd& mean, const MatrixXd& cov, RngStream& rng);

/// n draws from N(mean, cov), one per row.
MatrixXd mvn_sample_rows(const VectorXd& mean, const MatrixXd& cov, Index n, RngStream& rng);

}  // namespace fr
