#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tgp/kernels.hpp"
#include "tgp/rng.hpp"

using namespace tgp;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix random_points(int n, int d, RngStream& rng, double scale = 1.0) {
  Matrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace

TEST(KernelEval, RbfExamples) {
  const auto k = KernelSpec::rbf(1.0, 1.0);
  EXPECT_DOUBLE_EQ(kernel_eval(k, vec({0.3, -1.0}), vec({0.3, -1.0})), 1.0);
  const double r = std::sqrt(2.0 * std::log(2.0));
  EXPECT_NEAR(kernel_eval(k, vec({0.0}), vec({r})), 0.5, 1e-15);
}

TEST(KernelEval, NngpDepthOneByHand) {
  const auto k = KernelSpec::nngp(1, 2.0, 0.0);
  // Unit-norm input in d = 1: K0 = 2 on the diagonal, theta = 0.
  EXPECT_NEAR(kernel_eval(k, vec({1.0}), vec({1.0})), 2.0, 1e-14);
  // Orthogonal unit-norm inputs in d = 2 scaled so K0(x,x) = 2: q = 2, theta = pi/2.
  const double s = std::sqrt(2.0);
  EXPECT_NEAR(kernel_eval(k, vec({s, 0.0}), vec({0.0, s})), 2.0 / std::numbers::pi, 1e-14);
}

TEST(KernelEval, Errors) {
  const auto k = KernelSpec::rbf();
  try {
    kernel_eval(k, vec({1.0}), vec({1.0, 2.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  try {
    kernel_eval(k, vec({NAN}), vec({1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteInput);
  }
}

TEST(KernelEval, ExactlySymmetric) {
  RngStream rng(11, 0);
  for (const auto& k : {KernelSpec::rbf(0.7, 1.3), KernelSpec::nngp(3, 1.6, 0.2)}) {
    for (int t = 0; t < 100; ++t) {
      const Vector a = random_points(1, 5, rng).row(0), b = random_points(1, 5, rng).row(0);
      EXPECT_EQ(kernel_eval(k, a, b), kernel_eval(k, b, a));
    }
  }
}

TEST(Nngp, DiagonalPositiveAndCauchySchwarzPerLayer) {
  RngStream rng(12, 0);
  for (const auto& k : {KernelSpec::nngp(2), KernelSpec::nngp(5, 1.5, 0.1), KernelSpec::nngp(3, 2.5, 0.0)}) {
    for (int t = 0; t < 200; ++t) {
      const Vector a = random_points(1, 7, rng, 2.0).row(0), b = random_points(1, 7, rng, 2.0).row(0);
      for (const auto& [cross, va, vb] : nngp_layers(k, a, b)) {
        EXPECT_GT(va, 0.0);
        EXPECT_GT(vb, 0.0);
        EXPECT_LE(std::abs(cross), std::sqrt(va * vb) + 1e-12);
      }
    }
  }
}

TEST(Nngp, LayerDiagonalMatchesKernelEval) {
  const auto k = KernelSpec::nngp(2);
  const Vector a = vec({0.2, -0.4, 1.1});
  const auto layers = nngp_layers(k, a, a);
  EXPECT_NEAR(layers.back()[0], kernel_eval(k, a, a), 1e-14);
  EXPECT_NEAR(layers.back()[1], kernel_eval(k, a, a), 1e-14);
}

TEST(Gram, SinglePointAndTransposeSymmetry) {
  const auto k = KernelSpec::nngp();
  Matrix one(1, 3);
  one << 0.1, 0.2, 0.3;
  const Matrix g = gram(k, one, one);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_EQ(g(0, 0), kernel_eval(k, one.row(0), one.row(0)));

  RngStream rng(13, 0);
  const Matrix a = random_points(7, 3, rng), b = random_points(4, 3, rng);
  for (const auto& spec : {KernelSpec::rbf(), KernelSpec::nngp()}) {
    const Matrix ab = gram(spec, a, b), ba = gram(spec, b, a);
    EXPECT_EQ(ab, Matrix(ba.transpose()));
    const Matrix aa = gram(spec, a);
    EXPECT_EQ(aa, Matrix(aa.transpose()));
  }
  try {
    gram(k, a, Matrix::Zero(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Gram, RandomRbfIsPsdWithSmallJitter) {
  RngStream rng(14, 0);
  const Matrix x = random_points(50, 3, rng);
  const auto f = cholesky(gram(KernelSpec::rbf(), x));
  EXPECT_LE(f.jitter_used(), 1e-8 * 1.0);
}

TEST(Gram, WellSeparatedRbfNeedsNoJitter) {
  Matrix x(200, 1);
  for (int i = 0; i < 200; ++i) x(i, 0) = 2.0 * i;
  EXPECT_EQ(cholesky(gram(KernelSpec::rbf(), x)).jitter_used(), 0.0);
}

TEST(Gram, NngpOnDistinctInputsFactorizes) {
  RngStream rng(15, 0);
  const Matrix x = random_points(60, 10, rng);
  EXPECT_NO_THROW(cholesky(gram(KernelSpec::nngp(), x)));
}

TEST(ScaleKernel, MultipliesEvaluations) {
  RngStream rng(16, 0);
  const Vector a = random_points(1, 4, rng).row(0), b = random_points(1, 4, rng).row(0);
  for (const auto& k : {KernelSpec::rbf(0.8, 2.0), KernelSpec::nngp()}) {
    EXPECT_EQ(kernel_eval(scale_kernel(k, 1.0), a, b), kernel_eval(k, a, b));
    EXPECT_NEAR(kernel_eval(scale_kernel(k, 3.5), a, b), 3.5 * kernel_eval(k, a, b), 1e-14);
    EXPECT_NEAR(kernel_eval(scale_kernel(scale_kernel(k, 0.3), 7.0), a, b),
                kernel_eval(scale_kernel(k, 2.1), a, b), 1e-14);
  }
  EXPECT_DOUBLE_EQ(kernel_eval(scale_kernel(KernelSpec::rbf(), 0.25), a, a), 0.25);
  try {
    scale_kernel(KernelSpec::rbf(), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveScale);
  }
}
