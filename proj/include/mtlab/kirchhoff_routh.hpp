#pragma once

#include <cstdint>
#include <vector>

#include "mtlab/green.hpp"

namespace mtlab {

// Φ(y, α) = Σα_i²R(y_i) - Σ_{i≠j} α_iα_j G(y_i,y_j) + ½Σ(α_i² - α_i² ln α_i)
struct KrValue {
  double value = 0.0;
  // ordered as y_1x, y_1y, ..., y_kx, y_ky, α_1, ..., α_k
  Eigen::VectorXd gradient;
};
KrValue kr_phi(const std::vector<Vec2>& points, const std::vector<double>& alphas, const GreenOracle& green);

struct CriticalPoint {
  std::vector<Vec2> points;
  std::vector<double> alphas;
  double value = 0.0;
  double gradient_norm = 0.0;
  Eigen::VectorXd hessian_eigenvalues;  // over the free variables, ascending
};

struct CriticalPointSet {
  std::vector<CriticalPoint> points;
  int k = 1;
  int seeds = 0;
  std::uint64_t rng_seed = 0;
  double dedup_radius = 1e-4;
  int converged_seeds = 0;
};

struct KrSearchOptions {
  std::uint64_t rng_seed = 20240901;
  double boundary_margin = 0.02;  // fraction of the inradius
  double gradient_tol = 1e-10;    // Newton target; reported points must reach 1e-8
  int max_iter = 100;
  double alpha_min = 0.05, alpha_max = 20.0;
};

// k = 1 searches Robin critical points (α fixed to 1); k = 2 also varies the weights.
CriticalPointSet find_critical_points(const GreenOracle& green, int k, int seeds,
                                      const KrSearchOptions& options = {});

}  // namespace mtlab
