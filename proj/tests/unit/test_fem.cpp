#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mtlab/error.hpp"
#include "mtlab/fem.hpp"
#include "mtlab/parallel.hpp"
#include "mtlab/pohozaev.hpp"
#include "mtlab/radial.hpp"

using namespace mtlab;

namespace {

const FemState& cached(const Domain& d, const std::string& key, double gamma, double h) {
  static std::map<std::string, FemState> cache;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  FemOptions o;
  o.h = h;
  auto states = solve_2d_branch(d, gamma, 1, o);
  return cache.emplace(key, states.back()).first->second;
}

const FemState& square4(double h = 0.05) {
  return cached(Domain::rectangle(2, 2), "square4_" + std::to_string(h), 4.0, h);
}
const FemState& disk4(double h) { return cached(Domain::unit_disk(), "disk4_" + std::to_string(h), 4.0, h); }

}  // namespace

TEST(FemBranch, DiskLambdaMatchesRadialOracle) {
  double radial = solve_branch_point(4.0).lambda;
  double coarse = disk4(0.05).lambda, fine = disk4(0.025).lambda;
  EXPECT_NEAR(richardson(coarse, fine) / radial, 1.0, 1e-4);
  // the raw levels approach the oracle from one side at second order
  double e1 = coarse - radial, e2 = fine - radial;
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(FemBranch, ConvergedStateInvariants) {
  for (const FemState* s : {&square4(), &disk4(0.05)}) {
    EXPECT_LE(s->residual_norm, s->tol);
    EXPECT_NEAR(s->u[s->peak_node], 4.0, 1e-12);
    EXPECT_GE(s->u.minCoeff(), -1e-10);
    for (int b : s->mesh->boundary) EXPECT_EQ(s->u[b], 0.0);
    EXPECT_NEAR(s->energy / (4 * kPi), 1.0, 0.10);
    EXPECT_EQ(s->u.maxCoeff(), s->u[s->peak_node]);
  }
}

TEST(FemBranch, SquarePeakAtCenter) {
  const FemState& s = square4();
  double diam = 0;
  for (std::size_t e = 0; e < s.mesh->elements.size(); ++e) {
    const auto& t = s.mesh->elements[e];
    if (t[0] == s.peak_node || t[1] == s.peak_node || t[2] == s.peak_node)
      diam = std::max(diam, s.mesh->element_diameter(int(e)));
  }
  EXPECT_LE(s.x_lambda.norm(), diam);
}

TEST(FemBranch, SquareReflectionSymmetry) {
  const FemState& s = square4();
  const auto& nodes = s.mesh->nodes;
  std::map<std::pair<long long, long long>, int> index;
  auto key = [](const Vec2& x) { return std::make_pair(std::llround(x[0] * 1e10), std::llround(x[1] * 1e10)); };
  for (std::size_t i = 0; i < nodes.size(); ++i) index[key(nodes[i])] = int(i);
  double worst = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto it = index.find(key(Vec2(-nodes[i][0], nodes[i][1])));
    if (it == index.end()) continue;
    ++matched;
    worst = std::max(worst, std::abs(s.u[i] - s.u[it->second]));
  }
  EXPECT_EQ(matched, nodes.size());
  FemOptions o;
  EXPECT_LE(worst, 10 * o.newton_tol * s.gamma);
}

TEST(FemBranch, LambdaConvergesAtSecondOrder) {
  Domain sq = Domain::rectangle(2, 2);
  double lam[3];
  double hs[3] = {0.1, 0.05, 0.025};
  for (int k = 0; k < 3; ++k) lam[k] = cached(sq, "square3_" + std::to_string(hs[k]), 3.0, hs[k]).lambda;
  double order = std::log2((lam[0] - lam[1]) / (lam[1] - lam[2]));
  EXPECT_GE(order, 1.8);
  double C = std::abs(lam[1] - lam[2]) / (hs[2] * hs[2]);
  EXPECT_LE(std::abs(lam[0] - lam[1]), 1.5 * C * hs[1] * hs[1] * 4);
}

TEST(FemBranch, ContinuationReachesDirectSolve) {
  FemOptions o;
  o.h = 0.1;
  auto path = solve_2d_branch(Domain::unit_disk(), 4.0, 3, o);
  ASSERT_EQ(path.size(), 3u);
  EXPECT_NEAR(path[0].gamma, 3.0, 1e-14);
  EXPECT_NEAR(path[1].gamma, 3.5, 1e-14);
  auto direct = solve_2d_branch(Domain::unit_disk(), 4.0, 1, o);
  EXPECT_NEAR(path.back().lambda / direct.back().lambda, 1.0, 1e-9);
}

TEST(FemBranch, ThreadedAssemblyIsDeterministic) {
  FemOptions o;
  o.h = 0.1;
  set_thread_count(3);
  auto a = solve_2d_branch(Domain::unit_disk(), 3.0, 1, o).back();
  auto b = solve_2d_branch(Domain::unit_disk(), 3.0, 1, o).back();
  set_thread_count(1);
  auto c = solve_2d_branch(Domain::unit_disk(), 3.0, 1, o).back();
  set_thread_count(0);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ((a.u - b.u).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(a.lambda / c.lambda, 1.0, 1e-12);
}

TEST(FemBranch, Errors) {
  FemOptions o;
  o.h = 0.1;
  o.inner_scale_factor = 5.0;
  try {
    solve_2d_branch(Domain::unit_disk(), 4.0, 1, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MeshUnderresolved);
  }
  FemOptions one;
  one.h = 0.1;
  one.max_newton = 2;
  try {
    solve_2d_branch(Domain::unit_disk(), 4.0, 1, one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NewtonDiverged);
  }
  EXPECT_THROW(solve_2d_branch(Domain::unit_disk(), 4.0, 0, o), Error);
}

TEST(FemSpectrum, SquareMorseIndexIsOne) {
  auto rep = spectrum_2d(square4(), 6);
  EXPECT_EQ(rep.morse_index, 1);
  for (std::size_t i = 1; i < rep.entries.size(); ++i) EXPECT_LE(rep.entries[i - 1].mu, rep.entries[i].mu);
  EXPECT_GT(rep.entries[0].mu, 0.0);
}

TEST(FemSpectrum, DiskRotationalPairAndRadialAgreement) {
  const FemState& s = disk4(0.05);
  auto rep = spectrum_2d(s, 6);
  EXPECT_NEAR(rep.entries[1].mu / rep.entries[2].mu, 1.0, 1e-3);
  auto radial = mode_eigenvalues(solve_branch_point(4.0), 0, 1);
  EXPECT_NEAR(rep.entries[0].mu / radial[0].mu, 1.0, 1e-3);
  EXPECT_THROW(spectrum_2d(s, 9), Error);
}

TEST(FemSpectrum, DiskFirstEigenvalueUpperBound) {
  double g = 4.0;
  auto rep = spectrum_2d(disk4(0.05), 2);
  EXPECT_GT(rep.entries[0].mu, 0.0);
  EXPECT_LE(rep.entries[0].mu, 1.1 / (2 * g * g));
}

TEST(FemFarField, RatioMatchesConcentrationMass) {
  const FemState& s = disk4(0.05);
  GreenOracle green(Domain::unit_disk(), GreenMethod::ClosedFormDisk);
  auto ff = far_field_ratio(s, {Vec2(0.7, 0.0)}, green);
  EXPECT_NEAR(ff.ratio / ff.c_lambda, 1.0, 0.05);
  EXPECT_NEAR(ff.ratio * s.gamma / (4 * kPi), 1.0, 0.10);
  try {
    far_field_ratio(s, {Vec2(0.3, 0.0)}, green);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleTooClose);
  }
}

TEST(FemFarField, BallIntegralMatchesRadialMass) {
  // the inner mass of the radial solution over B_{1/2}
  const FemState& s = disk4(0.025);
  double fem = ball_integral(s, Vec2::Zero(), 0.5, [](double u) { return u * std::exp(u * u); });
  EXPECT_NEAR(fem / solve_branch_point(4.0).c_lambda, 1.0, 2e-3);
}

TEST(SolutionIdentities, SquareFem) {
  auto id = solution_identity_check(square4(), 0.25);
  EXPECT_LE(id.p.gap, 1e-3);
  EXPECT_LE(id.q[0].gap, 1e-3);
  EXPECT_LE(id.q[1].gap, 1e-3);
}
