#pragma once

#include <functional>
#include <vector>

namespace mtlab {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a,b]; b may be +infinity.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tol, unsigned max_depth = 30);

// Double-exponential rule for [a, +inf).
QuadResult integrate_half_line(const std::function<double(double)>& f, double a, double tol);

// Gauss-Legendre nodes and weights on [-1,1], ascending.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

}  // namespace mtlab
