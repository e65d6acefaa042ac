#pragma once

#include <string>
#include <vector>

#include "mtlab/hierarchy.hpp"
#include "mtlab/radial.hpp"

namespace mtlab {

enum class Verdict { Pass, Fail, Skipped, Info };
const char* to_string(Verdict v);

struct FitCoefficient {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
  double predicted = 0.0;
  double rel_error = 0.0;  // |value - predicted| / |predicted|
  double tolerance = 0.0;  // 0: reported only
  Verdict verdict = Verdict::Info;
  std::string note;
};

struct FitReport {
  std::string id;
  std::vector<FitCoefficient> coefficients;
  double rss_full = 0.0;
  double rss_nested = 0.0;  // with the next-order term dropped
  bool nested_supported = true;
  Verdict verdict = Verdict::Pass;
};

// Ordinary least squares y ≈ X β with standard errors from σ² (XᵀX)⁻¹.
struct LeastSquares {
  Eigen::VectorXd beta, std_error;
  double rss = 0.0;
};
LeastSquares least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// One branch sample as used by the fits.
struct BranchSample {
  double gamma = 0.0, lambda = 0.0, c_lambda = 0.0;
};
std::vector<BranchSample> branch_samples(const std::vector<BranchPoint>& branch);

// √λγ = β0 + β1 λ + β2 λ² against the B constants; needs ≥ 6 points with γ in [4, 10].
FitReport fit_lambda_gamma(const std::vector<BranchSample>& branch, const ExpansionConstants& constants);
// C_λ γ = a + b/γ², a and b against 4π.
FitReport fit_c_lambda(const std::vector<BranchSample>& branch);

struct TrendSample {
  double gamma = 0.0;
  double theta = 0.0;
  SpectrumReport spectrum;  // radial modes 0 and 1 at least
};
struct TrendOptions {
  double robin_hessian_trace_half = 1.0 / kPi;  // Λ, the disk value by default
  double eig_tol = 1e-13;                       // eigensolve tolerance floor
  double mu1_bound = 1.1;
  double gamma_mu4 = 8.0, gamma_mu2 = 3.0;
};
// Checks μ1·2γ² ≤ 1.1 (γ ≥ 4), γ⁴(μ4-1) at gamma_mu4 against 3, (μ2-1)/θ² at gamma_mu2 against 12πΛ,
// plus the 1/γ² extrapolated limits of the last two as reported-only entries.
FitReport eigenvalue_trends(const std::vector<TrendSample>& samples, const TrendOptions& options = {});

}  // namespace mtlab
