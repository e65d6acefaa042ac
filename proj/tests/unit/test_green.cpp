#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mtlab/error.hpp"
#include "mtlab/green.hpp"

using namespace mtlab;

namespace {

// Direct image sum for the rectangle [0,a]x[0,b]: charges at ±w and ±conj(w) on the lattice 2aZ+2ibZ.
// Pairs of +/- images are summed together so the truncated series converges.
double rectangle_green_images(double a, double b, Vec2 z, Vec2 w, int n) {
  double s = 0.0;
  for (int i = -n; i <= n; ++i) {
    for (int j = -n; j <= n; ++j) {
      Vec2 shift(2 * a * i, 2 * b * j);
      auto lg = [&](Vec2 c) { return std::log((z - c - shift).norm()); };
      s += lg(w) + lg(-w) - lg(Vec2(w[0], -w[1])) - lg(Vec2(-w[0], w[1]));
    }
  }
  return -s / (2 * kPi);
}

Vec2 random_in_disk(std::mt19937& rng, double rmax) {
  std::uniform_real_distribution<double> u(0, 1);
  double r = rmax * std::sqrt(u(rng)), a = 2 * kPi * u(rng);
  return Vec2(r * std::cos(a), r * std::sin(a));
}

}  // namespace

TEST(GreenDisk, ExampleValues) {
  GreenOracle g(Domain::unit_disk(), GreenMethod::ClosedFormDisk);
  EXPECT_NEAR(g.green(Vec2(0, 0), Vec2(0.5, 0)), -std::log(0.5) / (2 * kPi), 1e-15);
  EXPECT_NEAR(g.green(Vec2(0, 0), Vec2(0.5, 0)), 0.110318, 1e-6);
  EXPECT_NEAR(g.green(Vec2(0.3, 0), Vec2(0, 0.4)), g.green(Vec2(0, 0.4), Vec2(0.3, 0)), 1e-10);
  EXPECT_NEAR(g.green(Vec2(0.2, 0.1), Vec2(std::cos(1.0), std::sin(1.0))), 0.0, 1e-14);
  EXPECT_NEAR(g.robin(Vec2(0, 0)), 0.0, 1e-15);
  EXPECT_LT(g.robin_grad(Vec2(0, 0)).norm(), 1e-15);
  EXPECT_LT((g.robin_hess(Vec2(0, 0)) - Mat2::Identity() / kPi).norm(), 1e-14);
  EXPECT_NEAR(g.robin_hess(Vec2(0, 0))(0, 0), 0.318310, 1e-6);
}

TEST(GreenDisk, ErrorsAreReported) {
  GreenOracle g(Domain::unit_disk(), GreenMethod::ClosedFormDisk);
  try {
    g.green(Vec2(0.1, 0), Vec2(0.1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CoincidentPoints);
  }
  try {
    g.green(Vec2(1.2, 0), Vec2(0.1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideDomain);
  }
  try {
    g.robin_grad(Vec2(1 - 1e-5, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooCloseToBoundary);
  }
  EXPECT_THROW(GreenOracle(Domain::rectangle(1, 1), GreenMethod::ClosedFormDisk), Error);
}

TEST(GreenDisk, RobinDerivativesMatchImagesFormula) {
  GreenOracle g(Domain::unit_disk(), GreenMethod::ClosedFormDisk);
  auto r = [](Vec2 x) { return -std::log(1 - x.squaredNorm()) / (2 * kPi); };
  std::mt19937 rng(1);
  for (int i = 0; i < 20; ++i) {
    Vec2 x = random_in_disk(rng, 0.8);
    EXPECT_NEAR(g.robin(x), r(x), 1e-14);
    double h = 1e-4;
    Vec2 fd((r(x + Vec2(h, 0)) - r(x - Vec2(h, 0))) / (2 * h), (r(x + Vec2(0, h)) - r(x - Vec2(0, h))) / (2 * h));
    EXPECT_LT((fd - g.robin_grad(x)).norm(), 1e-7);
    double lap = (r(x + Vec2(h, 0)) + r(x - Vec2(h, 0)) + r(x + Vec2(0, h)) + r(x - Vec2(0, h)) - 4 * r(x)) / (h * h);
    EXPECT_NEAR(g.robin_hess(x).trace(), lap, 1e-5);
  }
}

TEST(GreenRectangle, ThetaFormMatchesImageSum) {
  Domain d = Domain::rectangle(2.0, 1.0, Vec2(1.0, 0.5));
  GreenOracle g(d, GreenMethod::MethodOfImagesComposite);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ux(0.05, 1.95), uy(0.05, 0.95);
  for (int i = 0; i < 20; ++i) {
    Vec2 z(ux(rng), uy(rng)), w(ux(rng), uy(rng));
    // square truncation error decays like 1/n^2, so extrapolate
    double g40 = rectangle_green_images(2.0, 1.0, z, w, 40), g80 = rectangle_green_images(2.0, 1.0, z, w, 80);
    EXPECT_NEAR(g.green(z, w), g80 + (g80 - g40) / 3, 1e-7);
  }
}

TEST(GreenRectangle, BoundaryZeroSymmetryAndGradients) {
  for (auto d : {Domain::rectangle(2, 2), Domain::rectangle(3, 1, Vec2(0.2, -0.1)), Domain::rectangle(1, 3)}) {
    GreenOracle g(d, GreenMethod::MethodOfImagesComposite);
    Vec2 c = d.rect_center();
    Vec2 x = c + Vec2(0.11 * d.width(), -0.07 * d.height());
    Vec2 y = c + Vec2(-0.2 * d.width(), 0.3 * d.height());
    EXPECT_NEAR(g.green(x, y), g.green(y, x), 1e-12);
    EXPECT_NEAR(g.green(x, c + Vec2(d.width() / 2, 0.1)), 0.0, 1e-12);
    EXPECT_NEAR(g.green(x, c + Vec2(0.1, -d.height() / 2)), 0.0, 1e-12);
    double h = 1e-6;
    Vec2 fd((g.green(x, y + Vec2(h, 0)) - g.green(x, y - Vec2(h, 0))) / (2 * h),
            (g.green(x, y + Vec2(0, h)) - g.green(x, y - Vec2(0, h))) / (2 * h));
    EXPECT_LT((fd - g.green_grad_y(x, y)).norm(), 1e-8);
    Vec2 fr((g.robin(x + Vec2(h, 0)) - g.robin(x - Vec2(h, 0))) / (2 * h),
            (g.robin(x + Vec2(0, h)) - g.robin(x - Vec2(0, h))) / (2 * h));
    EXPECT_LT((fr - g.robin_grad(x)).norm(), 1e-8);
  }
}

TEST(GreenRectangle, SquareRobinIsCriticalAtCenter) {
  GreenOracle g(Domain::rectangle(2, 2), GreenMethod::MethodOfImagesComposite);
  EXPECT_LT(g.robin_grad(Vec2(0, 0)).norm(), 1e-14);
  Mat2 h = g.robin_hess(Vec2(0, 0));
  EXPECT_NEAR(h(0, 0), h(1, 1), 1e-8);
  EXPECT_GT(h(0, 0), 0.0);
}

TEST(GreenPunctured, BoundaryConditionsAndSymmetry) {
  Domain d = Domain::punctured(Domain::unit_disk(), Vec2(0.3, 0), 0.05);
  GreenOracle g(d, GreenMethod::MethodOfImagesComposite);
  Vec2 x(-0.2, 0.3), y(0.5, -0.2);
  for (int k = 0; k < 7; ++k) {
    double a = 0.37 + k;
    EXPECT_NEAR(g.green(x, Vec2(0.3, 0) + 0.05 * Vec2(std::cos(a), std::sin(a))), 0.0, 1e-10);
    EXPECT_NEAR(g.green(x, Vec2(std::cos(a), std::sin(a))), 0.0, 1e-12);
  }
  EXPECT_NEAR(g.regular(x, y), g.regular(y, x), 1e-10);
  double h = 1e-5;
  for (Vec2 p : {Vec2(-0.3, 0.1), Vec2(0.3, 0.2), Vec2(0.45, 0.0)}) {
    Vec2 fd((g.robin(p + Vec2(h, 0)) - g.robin(p - Vec2(h, 0))) / (2 * h),
            (g.robin(p + Vec2(0, h)) - g.robin(p - Vec2(0, h))) / (2 * h));
    EXPECT_LT((fd - g.robin_grad(p)).norm(), 1e-7 * (1 + fd.norm()));
  }
}

TEST(GreenFem, ConvergesToClosedFormOnDisk) {
  Domain disk = Domain::unit_disk();
  GreenOracle exact(disk, GreenMethod::ClosedFormDisk);
  std::vector<double> errs;
  for (double h : {0.2, 0.1}) {
    GreenOptions o;
    o.fem_h = h;
    GreenOracle fem(disk, GreenMethod::HarmonicFem, o);
    std::mt19937 rng(11);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      Vec2 x = random_in_disk(rng, 0.7), y = random_in_disk(rng, 0.7);
      if ((x - y).norm() < 1e-3) continue;
      worst = std::max(worst, std::abs(fem.green(x, y) - exact.green(x, y)));
    }
    errs.push_back(worst);
  }
  EXPECT_LT(errs[1], 5e-3);
  EXPECT_GT(errs[0] / errs[1], 3.0);  // second order in the mesh step
}

TEST(GreenFem, RobinHessianNearImagesValue) {
  GreenOptions o;
  o.fem_h = 0.05;
  GreenOracle fem(Domain::unit_disk(), GreenMethod::HarmonicFem, o);
  EXPECT_NEAR(fem.robin(Vec2(0, 0)), 0.0, 1e-3);
  Mat2 h = fem.robin_hess(Vec2(0, 0));
  EXPECT_NEAR(h(0, 0), 1 / kPi, 5e-3);
  EXPECT_NEAR(h(1, 1), 1 / kPi, 5e-3);
  EXPECT_NEAR(h(0, 1), 0.0, 5e-3);
  EXPECT_NEAR(fem.regular(Vec2(0.2, 0.1), Vec2(-0.3, 0.4)), fem.regular(Vec2(-0.3, 0.4), Vec2(0.2, 0.1)), 1e-4);
}
