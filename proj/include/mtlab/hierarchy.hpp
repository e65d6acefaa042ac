#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "mtlab/types.hpp"

namespace mtlab {

// Gauss-Legendre panels of equal width in t = log r on [r_min, r_max].
class PanelGrid {
 public:
  static std::shared_ptr<const PanelGrid> make(double r_min = 1e-12, double r_max = 1e10,
                                               int nodes_per_panel = 16, double ratio = 2.0);

  int panels() const { return panels_; }
  int nodes_per_panel() const { return n_; }
  std::size_t size() const { return t_.size(); }
  const std::vector<double>& t() const { return t_; }
  const std::vector<double>& r() const { return r_; }
  double t_min() const { return t0_; }
  double t_max() const { return t0_ + panels_ * dt_; }
  double panel_start(int p) const { return t0_ + p * dt_; }

  // ∫ g dt over the whole grid.
  double total(const std::vector<double>& g) const;
  // ∫_{T_p}^{t_k} g dt for every node k, T_p the left end of panel p (negative side handled by reverse sums).
  std::vector<double> integral_from(const std::vector<double>& g, int p) const;
  // ∫_{t_k}^{t_max} g dt.
  std::vector<double> integral_to_end(const std::vector<double>& g) const;
  // d/dt of the piecewise interpolant at the nodes.
  std::vector<double> derivative(const std::vector<double>& g) const;
  // Piecewise polynomial interpolation at t.
  double interpolate(const std::vector<double>& g, double t) const;
  // Sum over panels with a lower-order rule: interpolates g to m Gauss nodes per panel.
  double total_low_order(const std::vector<double>& g, int m) const;
  // Smallest node index with r >= r0.
  std::size_t lower_index(double r0) const;

 private:
  int n_ = 0, panels_ = 0;
  double t0_ = 0, dt_ = 0;
  std::vector<double> t_, r_, x_, w_, bary_;
  Eigen::MatrixXd left_, right_, diff_;
};

struct RadialProfile {
  std::shared_ptr<const PanelGrid> grid;
  int mode = 0;
  double value_at_zero = 0.0;
  std::vector<double> values;  // at grid nodes
  std::vector<double> derivs;  // dv/dr at grid nodes
  double farfield_log_coeff = 0.0;
  double farfield_const = 0.0;
  double derivative_asymptote = 0.0;  // r dv/dr at the last node

  // Radii with the origin prepended; values_with_origin matches.
  std::vector<double> radii() const;
  std::vector<double> values_with_origin() const;
  double value(double r) const;
  double deriv(double r) const;
};

// u0 = (4-r²)/(4+r²), u1 = ((4-r²)log r + 8)/(4+r²), and their r-derivatives.
std::pair<double, double> fundamental_solutions(double r);
std::pair<double, double> fundamental_derivatives(double r);

// Solves -v'' - v'/r + m²v/r² - 2e^{2U}v = f, regular at 0.
// m = 0: v(0) = value_at_zero, v'(0) = 0; far-field a + b log r extracted over the last two decades.
RadialProfile solve_inhomogeneous_radial(std::shared_ptr<const PanelGrid> grid,
                                         const std::vector<double>& forcing, int mode,
                                         double value_at_zero = 0.0);
RadialProfile solve_inhomogeneous_radial(std::shared_ptr<const PanelGrid> grid,
                                         const std::function<double(double)>& forcing, int mode,
                                         double value_at_zero = 0.0);

// Right-hand sides of the hierarchy as functions of pointwise values.
double forcing_v0(double U);
double forcing_k0(double U, double v0);
double forcing_s0(double U, double v0, double k0);

struct Hierarchy {
  RadialProfile v0, k0, s0;
};
Hierarchy hierarchy_profiles(std::shared_ptr<const PanelGrid> grid = PanelGrid::make());

// ∫₀^∞ s u0(s) f(s) ds by adaptive quadrature: the predicted log coefficient for m = 0.
double predicted_log_coeff(const std::function<double(double)>& forcing, double tol = 1e-12);

// max over nodes r <= r_max of |(-Δ - 2e^{2U})v - f|·(1+r)², derivatives by spectral differentiation of values.
double ode_residual(const RadialProfile& profile, const std::vector<double>& forcing, double r_max = 1e3);

struct GrowthBound {
  double tau = 0.5;
  double constant = 0.0;   // sup |v|/(1+r)^tau over [0, r_hi/10]
  double exponent = 0.0;   // slope of log|v| vs log(1+r) over the last decade [r_hi/10, r_hi]
  bool holds = false;      // |v| <= C (1+r)^tau on [r_lo, r_hi], C < 1e3, exponent <= tau
};
GrowthBound growth_bound(const RadialProfile& profile, double tau = 0.5, double r_lo = 10.0,
                         double r_hi = 1e4);

// Fit of |r v'(r) - b| ≈ C log²r / r^p over [r_lo, r_hi] with b the far-field coefficient.
struct DecayFit {
  double exponent = 0.0;
  double constant = 0.0;
  double plain_slope = 0.0;  // exponent without the log² factor
};
DecayFit derivative_decay_fit(const RadialProfile& profile, double target, double r_lo = 1e2,
                              double r_hi = 1e6);

struct ExpansionConstants {
  double A[6] = {0, 0, 0, 0, 0, 0};
  double B[3] = {0, 0, 0};
  double c0 = 0.0;
  double A_err[6] = {0, 0, 0, 0, 0, 0};
  double B_err[3] = {0, 0, 0};
  double c0_err = 0.0;
  double robin_at_peak = 0.0;
};
// B's from the A's with the peak Robin value.
void assemble_b(ExpansionConstants& c);
ExpansionConstants expansion_constants(double robin_at_peak, const Hierarchy& h);
// Builds the hierarchy on two grids; errors are the differences.
ExpansionConstants expansion_constants(double robin_at_peak);

// 2-D residuals of the closed-form pieces entering k0 (translation and second-derivative terms of U),
// with L = -Δ - 2e^{2U} applied by a fourth-order finite-difference Laplacian.
struct IdentityResiduals {
  double translation = 0.0;  // L(Σ cᵢ∂ᵢv̄) identity
  double mixed = 0.0;        // L(c1c2 ∂₁₂U)
  double diagonal = 0.0;     // L(Σ cᵢ²/2 ∂ᵢᵢU)
};
IdentityResiduals decomposition_identity_residuals(const RadialProfile& v0, const Vec2& c,
                                                   const std::vector<Vec2>& points, double h = 5e-3);

}  // namespace mtlab
