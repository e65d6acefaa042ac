#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mtlab/geometry.hpp"
#include "mtlab/green.hpp"
#include "mtlab/p1.hpp"
#include "mtlab/radial.hpp"

namespace mtlab {

struct FemOptions {
  double h = 0.1;                   // log-polar mesh step
  std::optional<Vec2> peak_center;  // Robin critical point; default: domain interior center
  double inner_scale_factor = 1e-2; // first ring radius / θ̂(gamma_target)
  double gamma_start = 0.0;         // 0: gamma_target - 0.5 (steps - 1), at least 1
  double newton_tol = 1e-10;        // relative size of the last full Newton update
  double residual_tol = 1e-8;       // sup-norm residual relative to sup|λ ∫u e^{u²} φ_i|
  int max_newton = 40;
  int min_core_layers = 8;
};

struct FemState {
  std::shared_ptr<const Domain> domain;
  std::shared_ptr<const Mesh> mesh;
  Eigen::VectorXd u;  // nodal values
  double lambda = 0.0;
  double gamma = 0.0;
  int peak_node = 0;
  Vec2 x_lambda = Vec2::Zero();  // quadratic fit over the 1-ring of the max node
  double residual_norm = 0.0;
  double tol = 0.0;
  int newton_iterations = 0;
  double energy = 0.0;   // ∫|∇u_h|²
  double J_value = 0.0;  // ½∫|∇u|² - (λ/2)∫e^{u²}
  double mesh_h = 0.0;

  P1Field field() const;
};

// Amplitude continuation: steps values of γ ending at gamma_target, bordered Newton on (u, λ)
// with u(peak node) = γ_k. Step 0 starts from the scaled bubble patched to the Green function.
std::vector<FemState> solve_2d_branch(const Domain& domain, double gamma_target, int steps,
                                      const FemOptions& options = {});

// Smallest count eigenvalues of K v = μ λ N(u) v, N the (1+2u²)e^{u²}-weighted mass matrix.
SpectrumReport spectrum_2d(const FemState& state, int count, double gap_tol = 1e-10);

struct FarFieldRatio {
  double ratio = 0.0;     // mean of u(x)/G(x_λ, x) over the samples
  double c_lambda = 0.0;  // λ ∫_{B_d(x_λ)} u e^{u²}
  double d = 0.0;         // 0.25 · inradius
  std::vector<double> ratios;
};
FarFieldRatio far_field_ratio(const FemState& state, const std::vector<Vec2>& samples,
                              const GreenOracle& green);

// λ ∫_{B_d(center)} g(u) over the FEM solution; cut elements are subdivided.
double ball_integral(const FemState& state, const Vec2& center, double d, double (*g)(double));

// Richardson extrapolation of an O(h^order) quantity from steps h and h/ratio.
double richardson(double coarse, double fine, double ratio = 2.0, double order = 2.0);

}  // namespace mtlab
