#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mtlab/error.hpp"
#include "mtlab/green.hpp"
#include "mtlab/pohozaev.hpp"
#include "mtlab/radial.hpp"

using namespace mtlab;

namespace {

// Closed-form disk Green function, written out here independently of the library.
Vec2 reflect(const Vec2& x) { return x / x.squaredNorm(); }

double disk_green(const Vec2& x, const Vec2& y) {
  double image = x.squaredNorm() > 0 ? std::log(x.norm() * (y - reflect(x)).norm()) : 0.0;
  return (image - std::log((y - x).norm())) / (2 * kPi);
}
Vec2 disk_green_grad_y(const Vec2& x, const Vec2& y) {
  Vec2 a = y - x;
  Vec2 g = -a / a.squaredNorm() / (2 * kPi);
  if (x.squaredNorm() > 0) {
    Vec2 b = y - reflect(x);
    g += b / b.squaredNorm() / (2 * kPi);
  }
  return g;
}
// G = -(1/2π)log|x-y| - H, so R(x) = H(x,x) = -(1/2π) log(1-|x|²)
Vec2 disk_robin_grad(const Vec2& x) { return x / (kPi * (1 - x.squaredNorm())); }

FieldFn green_field(const Vec2& x0) {
  return {[x0](const Vec2& y) { return disk_green(x0, y); },
          [x0](const Vec2& y) { return disk_green_grad_y(x0, y); }};
}

// y ↦ ∂G(x,y)/∂x_h by a fourth-order difference in the source point
FieldFn source_derivative(const Vec2& x0, int axis) {
  const double s = 1e-3;
  auto diff = [=](auto&& f) {
    Vec2 e = Vec2::Zero();
    e[axis] = s;
    decltype(f(x0)) r = (-f(x0 + 2 * e) + 8 * f(x0 + e) - 8 * f(x0 - e) + f(x0 - 2 * e)) / (12 * s);
    return r;
  };
  return {[=](const Vec2& y) { return diff([&](const Vec2& x) { return disk_green(x, y); }); },
          [=](const Vec2& y) -> Vec2 {
            return diff([&](const Vec2& x) -> Vec2 { return disk_green_grad_y(x, y); });
          }};
}

FieldFn linear(double a, double b) {
  return {[=](const Vec2& x) { return a * x[0] + b * x[1]; }, [=](const Vec2&) { return Vec2(a, b); }};
}

}  // namespace

TEST(PohozaevForms, GreenSelfPairing) {
  Domain disk = Domain::unit_disk();
  for (Vec2 x0 : {Vec2(0, 0), Vec2(0.3, 0.1), Vec2(-0.2, 0.35)}) {
    FieldFn G = green_field(x0);
    EXPECT_NEAR(p_form(G, G, x0, 0.1, disk).value, -1 / (2 * kPi), 1e-6);
    Vec2 dR = disk_robin_grad(x0);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(q_form(G, G, x0, 0.1, i, disk).value, -dR[i], 1e-5);
  }
}

TEST(PohozaevForms, GreenAgainstSourceDerivative) {
  Domain disk = Domain::unit_disk();
  Vec2 x0(0.25, -0.15);
  FieldFn G = green_field(x0);
  Vec2 dR = disk_robin_grad(x0);
  for (int h = 0; h < 2; ++h) {
    FieldFn dG = source_derivative(x0, h);
    for (double d : {0.05, 0.1, 0.15})
      EXPECT_NEAR(p_form(G, dG, x0, d, disk).value, -0.5 * dR[h], 1e-6);
  }
}

TEST(PohozaevForms, SquareGreenFromImageConstruction) {
  Domain sq = Domain::rectangle(2, 2);
  GreenOracle green = GreenOracle::for_domain(sq);
  Vec2 x0(0.3, -0.2);
  FieldFn G{[&](const Vec2& y) { return green.green(x0, y); },
            [&](const Vec2& y) { return green.green_grad_y(x0, y); }};
  EXPECT_NEAR(p_form(G, G, x0, 0.1, sq).value, -1 / (2 * kPi), 1e-6);
  Vec2 dR = green.robin_grad(x0);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(q_form(G, G, x0, 0.1, i, sq).value, -dR[i], 1e-5);
}

TEST(PohozaevForms, RadiusIndependenceForHarmonicPairs) {
  Domain disk = Domain::unit_disk();
  Vec2 x0(0.2, 0.1);
  FieldFn G = green_field(x0);
  EXPECT_LE(radius_independence_check(G, G, x0, {0.05, 0.1, 0.2}, disk), 1e-8);
  EXPECT_LE(radius_independence_check(G, source_derivative(x0, 1), x0, {0.05, 0.1, 0.2}, disk), 1e-8);
  FieldFn x1 = linear(1, 0), x2 = linear(0, 1);
  EXPECT_LE(radius_independence_check(x1, x2, x0, {0.1, 0.3}, disk), 1e-8);
  // for smooth harmonic fields the forms scale out: P = O(d²)·const, Q_i(x1,x2) = 0
  EXPECT_NEAR(q_form(x1, x2, x0, 0.3, 0, disk).value, 0.0, 1e-12);
  EXPECT_NEAR(q_form(x1, x2, x0, 0.3, 1, disk).value, 0.0, 1e-12);
}

TEST(PohozaevForms, ConstantFieldGivesZero) {
  Domain disk = Domain::unit_disk();
  FieldFn c{[](const Vec2&) { return 3.0; }, [](const Vec2&) { return Vec2(Vec2::Zero()); }};
  FieldFn G = green_field(Vec2(0.1, 0.1));
  EXPECT_EQ(p_form(c, G, Vec2(0.1, 0.1), 0.2, disk).value, 0.0);
  EXPECT_EQ(q_form(G, c, Vec2(0.1, 0.1), 0.2, 1, disk).value, 0.0);
}

TEST(PohozaevForms, RefinementAndBilinearity) {
  Domain disk = Domain::unit_disk();
  Vec2 x0(-0.1, 0.2);
  FieldFn G = green_field(x0);
  double a = p_form(G, G, x0, 0.15, disk, 1024).value, b = p_form(G, G, x0, 0.15, disk, 2048).value;
  EXPECT_LE(std::abs(a - b), 1e-9);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  FieldFn f = green_field(Vec2(0.5, 0.5)), g = source_derivative(Vec2(-0.5, 0.3), 0);
  for (int trial = 0; trial < 5; ++trial) {
    double s = U(rng), t = U(rng);
    FieldFn comb{[=](const Vec2& y) { return s * f.value(y) + t * g.value(y); },
                 [=](const Vec2& y) -> Vec2 { return s * f.grad(y) + t * g.grad(y); }};
    double lhs = p_form(comb, G, x0, 0.1, disk).value;
    double rhs = s * p_form(f, G, x0, 0.1, disk).value + t * p_form(g, G, x0, 0.1, disk).value;
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(lhs)));
    double ql = q_form(G, comb, x0, 0.1, 0, disk).value;
    double qr = s * q_form(G, f, x0, 0.1, 0, disk).value + t * q_form(G, g, x0, 0.1, 0, disk).value;
    EXPECT_NEAR(ql, qr, 1e-12 * (1 + std::abs(ql)));
    EXPECT_NEAR(p_form(comb, G, x0, 0.1, disk).value, p_form(G, comb, x0, 0.1, disk).value, 1e-14);
  }
}

TEST(PohozaevForms, Errors) {
  Domain disk = Domain::unit_disk();
  FieldFn G = green_field(Vec2(0.6, 0));
  try {
    p_form(G, G, Vec2(0.6, 0), 0.25, disk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BallNotContained);
  }
  FieldFn bowl{[](const Vec2& x) { return x.squaredNorm(); }, [](const Vec2& x) { return Vec2(2 * x); }};
  try {
    radius_independence_check(bowl, linear(1, 0), Vec2::Zero(), {0.1, 0.2}, disk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotHarmonic);
  }
  EXPECT_THROW(q_form(G, G, Vec2::Zero(), 0.1, 2, disk), Error);
  EXPECT_THROW(p_form(G, G, Vec2::Zero(), 0.1, disk, 4), Error);
}

TEST(SolutionIdentities, RadialSolution) {
  auto bp = solve_branch_point(5.0);
  auto id = solution_identity_check(bp, 0.3);
  EXPECT_LE(id.p.gap, 1e-6);
  // by symmetry both sides of the translation identity vanish
  EXPECT_LE(std::abs(id.q[0].lhs), 1e-10);
  EXPECT_LE(std::abs(id.q[0].rhs), 1e-10);
  EXPECT_LE(std::abs(id.q[1].lhs), 1e-10);
  EXPECT_LE(std::abs(id.q[1].rhs), 1e-10);
  EXPECT_THROW(solution_identity_check(bp, 0.6), Error);
}
