#pragma once

#include <vector>

#include "mtlab/hierarchy.hpp"

namespace mtlab {

// One radial solution on the unit disk with peak value gamma.
// Stored in the scaled variables w(y) = γ(u(θy) - γ), y = ρ/θ, sampled uniformly in t = log y.
struct BranchPoint {
  double gamma = 0.0;
  double lambda = 0.0;
  double theta = 0.0;
  double residual_norm = 0.0;  // relative, scaled variables
  double energy = 0.0;         // ∫|∇u|²
  double J_value = 0.0;        // ½∫|∇u|² - (λ/2)∫e^{u²}
  double mass_gamma = 0.0;     // γ λ ∫_Ω u e^{u²}
  double c_lambda = 0.0;       // λ ∫_{B_{1/2}} u e^{u²}, by quadrature
  double c_lambda_flux = 0.0;  // same from the boundary flux at ρ = 1/2
  double tol = 0.0;
  std::vector<double> t, w, p;  // p = y w'(y)

  double t_end() const { return t.back(); }
  double y_end() const;  // = 1/θ
  double w_at(double y) const;
  double dw_at(double y) const;  // dw/dy
  double u_at(double rho) const;
  double du_at(double rho) const;
};

BranchPoint solve_branch_point(double gamma, double tol = 1e-12);

// w, v = γ²(w - U), k = γ²(v - v0) on [1e-6, radius] in y.
struct RescaledProfiles {
  RadialProfile w, v, k;
};
RescaledProfiles rescaled_profiles(const BranchPoint& bp, double radius, const RadialProfile& v0,
                                   double d0 = 0.5);

// sup over 10 <= y <= d0/θ of w(y) - (2-eps) log(1/y): the smallest admissible C_eps.
double decay_bound_constant(const BranchPoint& bp, double eps = 0.5, double y_lo = 10.0,
                            double d0 = 0.5);

struct ModeEigenvalue {
  double mu = 0.0;
  double error = 0.0;  // difference to a looser-tolerance solve
};
// Smallest count eigenvalues of -v'' - v'/r + m²v/r² = μ λ(1+2u²)e^{u²} v on (0,1), v(1) = 0.
std::vector<ModeEigenvalue> mode_eigenvalues(const BranchPoint& bp, int mode, int count);
// Cross-check: fourth-order differences in log radius, dense symmetric-definite pencil.
std::vector<double> mode_eigenvalues_fd(const BranchPoint& bp, int mode, int count, int nodes = 800);

struct SpectrumEntry {
  int mode = 0;
  int index = 0;  // within the mode, from 0
  double mu = 0.0;
  double error = 0.0;
  int multiplicity = 1;  // 2 for m >= 1 (cos and sin)
  double distance_to_one = 0.0;
  bool near_one = false;  // |μ-1| below the gap tolerance; informational only
};
struct SpectrumReport {
  std::vector<SpectrumEntry> entries;  // ascending in mu
  int morse_index = 0;                 // μ + error < 1, with multiplicity
};
SpectrumReport radial_spectrum(const BranchPoint& bp, int max_mode, int count_per_mode,
                               double gap_tol = 1e-10);

}  // namespace mtlab
