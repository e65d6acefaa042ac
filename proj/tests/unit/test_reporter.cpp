#include <gtest/gtest.h>

#include <cmath>

#include "mtlab/error.hpp"
#include "mtlab/reporter.hpp"

using namespace mtlab;

namespace {

ExpansionConstants fake_constants(double B1, double B2, double B3) {
  ExpansionConstants k;
  k.B[0] = B1;
  k.B[1] = B2;
  k.B[2] = B3;
  return k;
}

SpectrumReport spectrum(double mu1, double mu4, double mu2, double err = 1e-15) {
  SpectrumReport r;
  r.entries.push_back({0, 0, mu1, err, 1, mu1 - 1, false});
  r.entries.push_back({1, 0, mu2, err, 2, mu2 - 1, false});
  r.entries.push_back({0, 1, mu4, err, 1, mu4 - 1, false});
  return r;
}

}  // namespace

TEST(LeastSquares, RecoversPolynomialAndStandardErrors) {
  Eigen::MatrixXd X(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X.row(i) << 1.0, double(i);
    y[i] = 2.0 + 3.0 * i;
  }
  auto ls = least_squares(X, y);
  EXPECT_NEAR(ls.beta[0], 2.0, 1e-13);
  EXPECT_NEAR(ls.beta[1], 3.0, 1e-13);
  EXPECT_NEAR(ls.rss, 0.0, 1e-24);
  // with noise ±e alternating the slope standard error follows σ²/Σ(x-x̄)²
  Eigen::VectorXd noisy = y;
  for (int i = 0; i < 5; ++i) noisy[i] += (i % 2 ? 0.1 : -0.1);
  auto ln = least_squares(X, noisy);
  double sigma2 = ln.rss / 3.0;
  EXPECT_NEAR(ln.std_error[1], std::sqrt(sigma2 / 10.0), 1e-12);
  EXPECT_THROW(least_squares(X.topRows(1), y.head(1)), Error);
}

TEST(FitLambdaGamma, ExactModelRoundTrip) {
  auto k = fake_constants(0.4, 0.3, -2.0);
  double b0 = std::exp(0.2), b1 = 0.15 * std::exp(-0.2), b2 = (4 * -2.0 - 3 * 0.09) / 8 * std::exp(-0.6);
  std::vector<BranchSample> br;
  for (double g = 4; g <= 10; g += 1) {
    // any λ values work for the round trip; spread them like a real branch
    double lam = 1.4 / (g * g);
    double sg = b0 + b1 * lam + b2 * lam * lam;
    br.push_back({sg / std::sqrt(lam), lam, 0});
  }
  auto r = fit_lambda_gamma(br, k);
  ASSERT_EQ(r.coefficients.size(), 3u);
  EXPECT_NEAR(r.coefficients[0].value, b0, 1e-10);
  EXPECT_NEAR(r.coefficients[1].value, b1, 1e-10);
  EXPECT_NEAR(r.coefficients[2].value, b2, 1e-10);
  for (const auto& c : r.coefficients) EXPECT_LE(c.rel_error, 1e-8);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(FitLambdaGamma, WindowAndPointCount) {
  auto k = fake_constants(0.4, 0.3, -2.0);
  std::vector<BranchSample> br;
  for (double g : {2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 11.0, 12.0}) br.push_back({g, 1.4 / (g * g), 4 * kPi / g});
  try {
    fit_lambda_gamma(br, k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPoints);
  }
  EXPECT_THROW(fit_c_lambda(br), Error);
}

TEST(FitCLambda, ExactModelAndNestedComparison) {
  std::vector<BranchSample> br;
  for (double g = 4; g <= 10; g += 1) br.push_back({g, 0, 4 * kPi / g + 4 * kPi / (g * g * g)});
  auto r = fit_c_lambda(br);
  EXPECT_NEAR(r.coefficients[0].value, 4 * kPi, 1e-10);
  EXPECT_NEAR(r.coefficients[1].value, 4 * kPi, 1e-10);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_TRUE(r.nested_supported);
  EXPECT_GE(r.rss_nested, 10 * r.rss_full);

  // with a tiny 1/γ² term the reduced model is not rejected
  std::vector<BranchSample> flat;
  for (double g = 4; g <= 10; g += 1) flat.push_back({g, 0, (4 * kPi + 1e-3 * std::sin(g)) / g});
  auto f = fit_c_lambda(flat);
  EXPECT_FALSE(f.nested_supported);
  EXPECT_EQ(f.verdict, Verdict::Fail);
}

TEST(EigenvalueTrends, VerdictsFromSyntheticSpectra) {
  std::vector<TrendSample> ts;
  for (double g = 3; g <= 8; g += 0.5) {
    double theta = std::exp(-g * g / 2);
    double mu1 = 1.0 / (2 * g * g);
    double mu4 = 1 + 3 / std::pow(g, 4) * (1 + 1 / (g * g));
    double mu2 = 1 + 12 * theta * theta * (1 + 2 / (g * g));
    ts.push_back({g, theta, spectrum(mu1, mu4, mu2)});
  }
  auto r = eigenvalue_trends(ts);
  ASSERT_GE(r.coefficients.size(), 3u);
  EXPECT_EQ(r.coefficients[0].verdict, Verdict::Pass);
  EXPECT_NEAR(r.coefficients[0].value, 1.0, 1e-12);
  EXPECT_EQ(r.coefficients[1].verdict, Verdict::Pass);
  EXPECT_NEAR(r.coefficients[1].value, 3 * (1 + 1 / 64.0), 1e-9);
  // the limit extrapolates through the 1/γ² correction
  EXPECT_EQ(r.coefficients[2].name, "gamma4_mu4_minus_1_limit");
  EXPECT_NEAR(r.coefficients[2].value, 3.0, 1e-6);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(EigenvalueTrends, BelowNoiseIsSkippedNotFailed) {
  std::vector<TrendSample> ts;
  for (double g : {3.0, 4.0, 8.0}) {
    double theta = std::exp(-g * g / 2);
    // μ2 - 1 far off the prediction but under 100x the eigensolve tolerance
    ts.push_back({g, theta, spectrum(0.5 / (g * g), 1 + 3 / std::pow(g, 4), 1 + 1e-13, 1e-14)});
  }
  auto r = eigenvalue_trends(ts);
  bool seen = false;
  for (const auto& c : r.coefficients)
    if (c.name == "mu2_minus_1_over_theta2_at_gamma") {
      seen = true;
      EXPECT_EQ(c.verdict, Verdict::Skipped);
      EXPECT_NE(c.note.find("SIGNAL_BELOW_NOISE"), std::string::npos);
    }
  EXPECT_TRUE(seen);
  EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(EigenvalueTrends, BoundViolationFails) {
  std::vector<TrendSample> ts;
  for (double g : {4.0, 5.0, 8.0})
    ts.push_back({g, std::exp(-g * g / 2), spectrum(0.6 / (g * g), 1 + 3 / std::pow(g, 4), 1.5)});
  auto r = eigenvalue_trends(ts);
  EXPECT_EQ(r.coefficients[0].verdict, Verdict::Fail);
  EXPECT_NEAR(r.coefficients[0].value, 1.2, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::Fail);
  // deterministic
  auto again = eigenvalue_trends(ts);
  for (std::size_t i = 0; i < r.coefficients.size(); ++i)
    EXPECT_EQ(r.coefficients[i].value, again.coefficients[i].value);
  EXPECT_THROW(eigenvalue_trends({}), Error);
}
