#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "tgp/error.hpp"
#include "tgp/linalg.hpp"

namespace tgp {

enum class KernelFamily { Rbf, Nngp };

/// Covariance function with an overall multiplier.
///
/// NNGP fields describe a fully connected rectifier network with `depth`
/// hidden layers whose weights have variance sigma_w2 / fan_in and biases
/// variance sigma_b2. The defaults sit on the critical line for ReLU.
struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double rbf_lengthscale = 1.0;
  double rbf_variance = 1.0;
  int depth = 2;
  double sigma_w2 = 2.0;
  double sigma_b2 = 0.0;
  double scale = 1.0;

  static KernelSpec rbf(double lengthscale = 1.0, double variance = 1.0, double scale = 1.0) {
    KernelSpec k;
    k.family = KernelFamily::Rbf;
    k.rbf_lengthscale = lengthscale;
    k.rbf_variance = variance;
    k.scale = scale;
    return k;
  }

  static KernelSpec nngp(int depth = 2, double sigma_w2 = 2.0, double sigma_b2 = 0.0, double scale = 1.0) {
    KernelSpec k;
    k.family = KernelFamily::Nngp;
    k.depth = depth;
    k.sigma_w2 = sigma_w2;
    k.sigma_b2 = sigma_b2;
    k.scale = scale;
    return k;
  }

  void validate() const {
    require(scale > 0.0 && std::isfinite(scale), ErrorCode::NonPositiveScale, "kernel scale must be > 0");
    if (family == KernelFamily::Rbf) {
      require(rbf_lengthscale > 0.0, ErrorCode::InvalidArgument, "rbf_lengthscale must be > 0");
      require(rbf_variance > 0.0, ErrorCode::InvalidArgument, "rbf_variance must be > 0");
    } else {
      require(depth >= 1, ErrorCode::InvalidArgument, "nngp depth must be >= 1");
      require(sigma_w2 > 0.0, ErrorCode::InvalidArgument, "sigma_w2 must be > 0");
      require(sigma_b2 >= 0.0, ErrorCode::InvalidArgument, "sigma_b2 must be >= 0");
    }
  }
};

inline std::string to_string(KernelFamily f) { return f == KernelFamily::Rbf ? "rbf" : "nngp"; }

namespace detail {

/// One ReLU layer of the arc-cosine recursion. `cross` is the previous-layer
/// covariance between x and x', `var_a`/`var_b` the previous diagonals.
inline double relu_layer(double cross, double var_a, double var_b, double sigma_w2, double sigma_b2) {
  const double q = std::sqrt(var_a * var_b);
  if (q <= 0.0) return sigma_b2;
  const double rho = std::clamp(cross / q, -1.0, 1.0);
  const double theta = std::acos(rho);
  return sigma_b2 + sigma_w2 / (2.0 * std::numbers::pi) * q *
                        (std::sin(theta) + (std::numbers::pi - theta) * std::cos(theta));
}

template <typename A, typename B>
double nngp_unscaled(const KernelSpec& spec, const A& x, const B& y) {
  const double d = static_cast<double>(x.size());
  double cross = spec.sigma_b2 + spec.sigma_w2 * x.dot(y) / d;
  double var_x = spec.sigma_b2 + spec.sigma_w2 * x.squaredNorm() / d;
  double var_y = spec.sigma_b2 + spec.sigma_w2 * y.squaredNorm() / d;
  for (int layer = 0; layer < spec.depth; ++layer) {
    const double next_cross = relu_layer(cross, var_x, var_y, spec.sigma_w2, spec.sigma_b2);
    // theta = 0 on the diagonal: K = sigma_b2 + sigma_w2 * K_prev / 2.
    var_x = spec.sigma_b2 + 0.5 * spec.sigma_w2 * var_x;
    var_y = spec.sigma_b2 + 0.5 * spec.sigma_w2 * var_y;
    cross = next_cross;
  }
  return cross;
}

}  // namespace detail

template <typename A, typename B>
double kernel_eval(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  require(x.size() == y.size() && x.size() >= 1, ErrorCode::DimensionMismatch, "kernel_eval: dimension mismatch");
  require(x.allFinite() && y.allFinite(), ErrorCode::NonFiniteInput, "kernel_eval: non-finite input");
  if (spec.family == KernelFamily::Rbf) {
    const double r2 = (x - y).squaredNorm();
    return spec.scale * spec.rbf_variance * std::exp(-r2 / (2.0 * spec.rbf_lengthscale * spec.rbf_lengthscale));
  }
  return spec.scale * detail::nngp_unscaled(spec, x, y);
}

/// Per-layer NNGP covariances (index 0 is the input layer, index depth the
/// output). Exposed for layer-wise property checks.
template <typename A, typename B>
std::vector<std::array<double, 3>> nngp_layers(const KernelSpec& spec, const Eigen::MatrixBase<A>& x,
                                               const Eigen::MatrixBase<B>& y) {
  require(x.size() == y.size() && x.size() >= 1, ErrorCode::DimensionMismatch, "nngp_layers: dimension mismatch");
  const double d = static_cast<double>(x.size());
  std::array<double, 3> cur = {spec.sigma_b2 + spec.sigma_w2 * x.dot(y) / d,
                               spec.sigma_b2 + spec.sigma_w2 * x.squaredNorm() / d,
                               spec.sigma_b2 + spec.sigma_w2 * y.squaredNorm() / d};
  std::vector<std::array<double, 3>> out{cur};
  for (int layer = 0; layer < spec.depth; ++layer) {
    cur = {detail::relu_layer(cur[0], cur[1], cur[2], spec.sigma_w2, spec.sigma_b2),
           spec.sigma_b2 + 0.5 * spec.sigma_w2 * cur[1], spec.sigma_b2 + 0.5 * spec.sigma_w2 * cur[2]};
    out.push_back(cur);
  }
  return out;
}

/// Symmetric Gram matrix of `a` with itself; the upper triangle is mirrored.
inline Matrix gram(const KernelSpec& spec, const Matrix& a) {
  spec.validate();
  Matrix out(a.rows(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(spec, a.row(i), a.row(j));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

/// Gram matrix between the rows of `a` and the rows of `b`.
inline Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorCode::DimensionMismatch, "gram: input dimensions differ");
  if (&a == &b) return gram(spec, a);
  spec.validate();
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = kernel_eval(spec, a.row(i), b.row(j));
  return out;
}

/// Diagonal k(a_i, a_i) without forming the full Gram.
inline Vector gram_diagonal(const KernelSpec& spec, const Matrix& a) {
  Vector out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[i] = kernel_eval(spec, a.row(i), a.row(i));
  return out;
}

inline KernelSpec scale_kernel(KernelSpec spec, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::NonPositiveScale, "scale_kernel: factor must be > 0");
  spec.scale *= t;
  return spec;
}

}  // namespace tgp
