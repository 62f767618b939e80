#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "tgp/error.hpp"
#include "tgp/rng.hpp"

namespace tgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative jitter steps tried in order, each multiplied by mean(diag(A)).
inline constexpr std::array<double, 5> kJitterLadder = {0.0, 1e-10, 1e-8, 1e-6, 1e-4};

struct JitterPolicy {
  std::span<const double> ladder = kJitterLadder;
  double symmetry_tolerance = 1e-12;
};

/// Cholesky factor L with A + jitter*I = L L^T.
class SpdFactor {
 public:
  SpdFactor() = default;
  SpdFactor(Matrix lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

  const Matrix& lower() const noexcept { return lower_; }
  double jitter_used() const noexcept { return jitter_; }
  Eigen::Index dimension() const noexcept { return lower_.rows(); }

  double log_det() const {
    return 2.0 * lower_.diagonal().array().log().sum();
  }

  Matrix reconstruct() const { return lower_ * lower_.transpose(); }

 private:
  Matrix lower_;
  double jitter_ = 0.0;
};

inline bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Factorizes a symmetric matrix, escalating jitter along the ladder until
/// the factorization succeeds.
inline SpdFactor cholesky(const Matrix& a, const JitterPolicy& policy = {}) {
  require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "cholesky: matrix is not square");
  require(a.allFinite(), ErrorCode::NonFiniteInput, "cholesky: non-finite entry");
  require(is_symmetric(a, policy.symmetry_tolerance), ErrorCode::NotSymmetric,
          "cholesky: matrix is not symmetric");
  const Eigen::Index n = a.rows();
  if (n == 0) return SpdFactor(Matrix(0, 0), 0.0);

  const double mean_diag = a.diagonal().mean();
  for (double step : policy.ladder) {
    const double jitter = step * mean_diag;
    if (!(jitter >= 0.0)) continue;
    Matrix jittered = a;
    jittered.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(jittered);
    if (llt.info() != Eigen::Success) continue;
    Matrix lower = llt.matrixL();
    if (!lower.allFinite() || (lower.diagonal().array() <= 0.0).any()) continue;
    return SpdFactor(std::move(lower), jitter);
  }
  throw Error(ErrorCode::NotPositiveDefinite,
              "cholesky: factorization failed at the largest jitter (n = " + std::to_string(n) + ")");
}

/// Solves (A + jitter I) X = rhs with two triangular solves.
inline Matrix solve_spd(const SpdFactor& factor, const Matrix& rhs) {
  require(rhs.rows() == factor.dimension(), ErrorCode::DimensionMismatch,
          "solve_spd: rhs has " + std::to_string(rhs.rows()) + " rows, factor has dimension " +
              std::to_string(factor.dimension()));
  const auto lower = factor.lower().triangularView<Eigen::Lower>();
  Matrix y = lower.solve(rhs);
  return lower.transpose().solve(y);
}

inline Vector solve_spd(const SpdFactor& factor, const Vector& rhs) {
  return solve_spd(factor, Matrix(rhs)).col(0);
}

/// Returns L^{-1} rhs (one triangular solve), useful for quadratic forms.
inline Matrix solve_lower(const SpdFactor& factor, const Matrix& rhs) {
  require(rhs.rows() == factor.dimension(), ErrorCode::DimensionMismatch, "solve_lower: row mismatch");
  return factor.lower().triangularView<Eigen::Lower>().solve(rhs);
}

inline double mvn_logpdf(const Vector& x, const Vector& mean, const SpdFactor& factor) {
  require(x.size() == mean.size() && x.size() == factor.dimension(), ErrorCode::DimensionMismatch,
          "mvn_logpdf: dimension mismatch");
  const Vector white = factor.lower().triangularView<Eigen::Lower>().solve(x - mean);
  const double n = static_cast<double>(x.size());
  return -0.5 * white.squaredNorm() - 0.5 * factor.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

inline Vector standard_normal_vector(Eigen::Index n, RngStream& rng) {
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  return z;
}

/// mean + L z with z ~ N(0, I) drawn from rng.
inline Vector mvn_sample(const Vector& mean, const SpdFactor& factor, RngStream& rng) {
  require(mean.size() == factor.dimension(), ErrorCode::DimensionMismatch, "mvn_sample: dimension mismatch");
  const Vector z = standard_normal_vector(mean.size(), rng);
  return mean + factor.lower().triangularView<Eigen::Lower>() * z;
}

template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  require(v.size() > 0, ErrorCode::EmptyInput, "log_sum_exp: empty input");
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::exp(v.derived().coeff(i) - top);
  return top + std::log(acc);
}

inline double log_sum_exp(std::span<const double> v) {
  return log_sum_exp(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace tgp
