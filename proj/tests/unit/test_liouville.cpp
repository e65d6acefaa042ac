#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mtlab/error.hpp"
#include "mtlab/liouville.hpp"

using namespace mtlab;

namespace {

// Plain composite Simpson in u = r/(1+r) on [0,1), used as a quadrature oracle.
double simpson_plane_radial(const std::function<double(double)>& g, int n) {
  auto h = [&](double u) {
    if (u >= 1.0) return 0.0;
    double r = u / (1.0 - u);
    return g(r) * r / ((1.0 - u) * (1.0 - u));
  };
  double s = h(0.0) + h(1.0);
  double du = 1.0 / n;
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * h(i * du);
  return s * du / 3.0;
}

double fd_laplacian(KernelLabel k, const Vec2& x, double h) {
  double c = kernel_value(k, x);
  return (kernel_value(k, x + Vec2(h, 0)) + kernel_value(k, x - Vec2(h, 0)) + kernel_value(k, x + Vec2(0, h)) +
          kernel_value(k, x - Vec2(0, h)) - 4 * c) /
         (h * h);
}

}  // namespace

TEST(Bubble, ValuesAtOriginAndRadiusTwo) {
  EXPECT_DOUBLE_EQ(bubble_U(Vec2(0, 0)), 0.0);
  EXPECT_NEAR(bubble_U(Vec2(0, 2)), -std::log(2.0), 1e-15);
  EXPECT_NEAR(bubble_e2U(Vec2(1.3, -0.4)), std::exp(2 * bubble_U(Vec2(1.3, -0.4))), 1e-15);
}

TEST(Bubble, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int i = 0; i < 50; ++i) {
    Vec2 x(d(rng), d(rng));
    double h = 1e-6;
    Vec2 fd((bubble_U(x + Vec2(h, 0)) - bubble_U(x - Vec2(h, 0))) / (2 * h),
            (bubble_U(x + Vec2(0, h)) - bubble_U(x - Vec2(0, h))) / (2 * h));
    EXPECT_LT((fd - bubble_grad(x)).norm(), 1e-8);
  }
}

TEST(Bubble, LiouvilleEquationHolds) {
  // -ΔU = e^{2U}
  for (double r : {0.1, 0.7, 2.0, 9.0}) {
    Vec2 x(r * 0.6, r * 0.8);
    double h = 1e-4;
    double lap = (bubble_U(x + Vec2(h, 0)) + bubble_U(x - Vec2(h, 0)) + bubble_U(x + Vec2(0, h)) +
                  bubble_U(x - Vec2(0, h)) - 4 * bubble_U(x)) /
                 (h * h);
    EXPECT_NEAR(-lap, bubble_e2U(x), 1e-6);
  }
}

TEST(Kernel, ResidualOnGridBelowTolerance) {
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 20; ++j) {
      Vec2 x(-12 + 24.0 * i / 24, -9 + 18.0 * j / 19);
      for (auto k : {KernelLabel::Phi0, KernelLabel::Phi1, KernelLabel::Phi2}) {
        double lap = kernel_hessian(k, x).trace();
        worst = std::max(worst, std::abs(lap + 2 * bubble_e2U(x) * kernel_value(k, x)));
      }
    }
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Kernel, HessianMatchesFiniteDifferences) {
  for (auto k : {KernelLabel::Phi0, KernelLabel::Phi1, KernelLabel::Phi2}) {
    for (Vec2 x : {Vec2(0.3, -0.2), Vec2(1.5, 2.5), Vec2(-3, 0.5)}) {
      EXPECT_NEAR(kernel_hessian(k, x).trace(), fd_laplacian(k, x, 1e-4), 1e-6);
      double h = 1e-6;
      Vec2 fd((kernel_value(k, x + Vec2(h, 0)) - kernel_value(k, x - Vec2(h, 0))) / (2 * h),
              (kernel_value(k, x + Vec2(0, h)) - kernel_value(k, x - Vec2(0, h))) / (2 * h));
      EXPECT_LT((fd - kernel_grad(k, x)).norm(), 1e-8);
    }
  }
}

TEST(Moments, CatalogMatchesClosedForms) {
  for (auto tag : moment_catalog()) {
    BubbleMoment m = moment(tag, 1e-10);
    EXPECT_NEAR(m.value, moment_exact(tag), 1e-8) << m.name;
    EXPECT_LE(m.error, 1e-10) << m.name;
  }
}

TEST(Moments, SimpsonOracleAgreesOnRadialEntries) {
  // Independent route: Simpson after a rational map of the half line.
  double mass = 2 * kPi * simpson_plane_radial([](double r) { return bubble_e2U_radial(r); }, 200000);
  EXPECT_NEAR(mass, moment(MomentTag::Mass, 1e-10).value, 1e-7);
  auto g = [](double r) {
    double u = bubble_U_radial(r);
    return u * u * bubble_e2U_radial(r) * (4 - r * r) / (4 + r * r);
  };
  EXPECT_NEAR(2 * kPi * simpson_plane_radial(g, 200000), moment(MomentTag::U2MassPhi0, 1e-10).value, 1e-7);
}

TEST(Moments, SubstitutionAndTruncationAgree) {
  const double tol = 1e-8;
  for (auto tag : moment_catalog()) {
    BubbleMoment a = moment(tag, tol);
    BubbleMoment b = moment_truncated(tag, tol);
    EXPECT_LT(std::abs(a.value - b.value), 10 * tol) << a.name;
  }
}

TEST(Moments, WeightedOrthogonality) {
  EXPECT_NEAR(moment(MomentTag::MassPhi1Phi2, 1e-9).value, 0.0, 1e-9);
  EXPECT_NEAR(moment(MomentTag::MassPhi0Phi1, 1e-9).value, 0.0, 1e-9);
}

TEST(Moments, RejectsTooTightTolerance) {
  EXPECT_THROW(moment(MomentTag::Mass, 1e-13), Error);
}

TEST(QuarterIntegrals, LogAndLogSquared) {
  EXPECT_NEAR(scalar_integral_quarter(QuarterKind::Log), 0.25, 1e-10);
  EXPECT_NEAR(scalar_integral_quarter(QuarterKind::LogSquared), 0.75, 1e-10);
  EXPECT_EQ(scalar_integral_quarter(QuarterKind::Log, 0.0), 0.0);
}
