#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "specgeo/kernel.hpp"
#include "specgeo/numerics/quadrature.hpp"
#include "specgeo/numerics/rng.hpp"

using namespace specgeo;

TEST(KernelEval, GaussianAtZeroDistance) {
  EXPECT_NEAR(Kernel::gaussian(1.0)(0.3, 0.3), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(Kernel::gaussian(1.0)(0.3, 0.3), 0.398942, 1e-6);
}

TEST(KernelEval, BoxOutsideSupport) {
  EXPECT_EQ(Kernel::uniform_box(0.05)(0.0, 0.1), 0.0);
  EXPECT_EQ(Kernel::uniform_box(0.05)(0.0, 0.04), 10.0);
}

TEST(KernelEval, GaussianBandwidthTwo) {
  const double expected = std::exp(-0.5) / (2.0 * std::sqrt(2.0 * std::numbers::pi));
  EXPECT_NEAR(Kernel::gaussian(2.0)(1.0, 3.0), expected, 1e-15);
}

TEST(KernelEval, OffsetAddsConstant) {
  const Kernel base = Kernel::uniform_box(0.5);
  const Kernel reg = Kernel::regularized(base, 0.05);
  EXPECT_TRUE(reg.is_regularized());
  EXPECT_DOUBLE_EQ(reg(0.0, 3.0), 0.05);
  EXPECT_DOUBLE_EQ(reg(0.0, 0.2), 1.05);
}

TEST(KernelEval, RejectsBadParameters) {
  EXPECT_THROW(Kernel::gaussian(0.0), Error);
  EXPECT_THROW(Kernel::gaussian(-1.0), Error);
  EXPECT_THROW(Kernel::uniform_box(1.0, -0.1), Error);
}

TEST(KernelEval, SymmetricOnSamples) {
  Rng rng(3);
  for (const Kernel& k : {Kernel::gaussian(0.7), Kernel::uniform_box(0.4), Kernel::regularized(Kernel::gaussian(2.0), 0.1),
                          Kernel::linear()})
    for (int i = 0; i < 1000; ++i) {
      const double x = 4.0 * rng.gaussian(), y = 4.0 * rng.gaussian();
      ASSERT_EQ(k(x, y), k(y, x));
    }
}

TEST(KernelEval, GaussianIntegratesToOne) {
  for (double nu : {0.15, 1.0, 2.5}) {
    const Kernel k = Kernel::gaussian(nu);
    const QuadratureGrid g = make_grid({-0.4 - 12.0 * nu, -0.4 + 12.0 * nu}, 2001, QuadratureRule::simpson);
    EXPECT_NEAR(g.integrate([&](double y) { return k(-0.4, y); }), 1.0, 1e-9) << "nu " << nu;
  }
}

TEST(KernelMatrix, ConstantKernelTwoPoints) {
  // The box kernel is constant on points closer than its bandwidth.
  const Kernel k = Kernel::uniform_box(1.0);
  const double c = k(0.0, 0.5);
  const double pts[] = {0.0, 0.5};
  const Matrix a = kernel_matrix(k, pts);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(a(i, j), c / 2.0);
}

TEST(KernelMatrix, SinglePoint) {
  const Kernel k = Kernel::gaussian(1.3);
  const double pts[] = {2.0};
  const Matrix a = kernel_matrix(k, pts);
  ASSERT_EQ(a.rows(), 1);
  EXPECT_DOUBLE_EQ(a(0, 0), k(2.0, 2.0));
}

TEST(KernelMatrix, ThreePointsGaussian) {
  const Kernel k = Kernel::gaussian(1.0);
  const double pts[] = {0.0, 1.0, 2.0};
  const Matrix a = kernel_matrix(k, pts);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(a(i, i), 0.398942 / 3.0, 1e-6);
  EXPECT_EQ((a - a.transpose()).norm(), 0.0);
  EXPECT_NEAR(a(0, 1), std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi) / 3.0, 1e-15);
}

TEST(KernelMatrix, EntriesAreKernelOverN) {
  Rng rng(4);
  std::vector<double> pts(17);
  for (double& x : pts) x = rng.gaussian();
  const Kernel k = Kernel::regularized(Kernel::gaussian(0.8), 0.02);
  const Matrix a = kernel_matrix(k, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      ASSERT_EQ(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), k(pts[i], pts[j]) * (1.0 / 17.0));
}

TEST(KernelMatrix, TwoDimensionalProductGaussian) {
  Matrix pts(2, 2);
  pts << 0.0, 0.0, 1.0, 1.0;
  const Kernel k = Kernel::gaussian(1.0);
  const Matrix a = kernel_matrix(k, pts);
  const double diag = 1.0 / (2.0 * std::numbers::pi);
  EXPECT_NEAR(a(0, 0), diag / 2.0, 1e-15);
  EXPECT_NEAR(a(0, 1), diag * std::exp(-1.0) / 2.0, 1e-15);
}

TEST(PsdCheck, GaussianOnRandomPoints) {
  Rng rng(5);
  std::vector<double> pts(50);
  for (double& x : pts) x = 3.0 * rng.uniform();
  EXPECT_TRUE(psd_check(Kernel::gaussian(0.5), pts, 1e-10).psd);
  EXPECT_TRUE(psd_check(Kernel::regularized(Kernel::gaussian(0.5), 0.1), pts, 1e-10).psd);
}

TEST(PsdCheck, BoxKernelIsIndefinite) {
  std::vector<double> pts(50);
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = static_cast<double>(i) / 49.0;
  const PsdReport r = psd_check(Kernel::uniform_box(0.3), pts, 1e-10);
  EXPECT_FALSE(r.psd);
  EXPECT_LT(r.min_eigenvalue, -1e-3);
}

TEST(PsdCheck, NeedsTwoPoints) {
  const double pts[] = {1.0};
  EXPECT_THROW(psd_check(Kernel::gaussian(1.0), pts, 0.0), Error);
}
