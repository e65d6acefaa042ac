#pragma once

#include <functional>
#include <vector>

#include "mtlab/fem.hpp"
#include "mtlab/geometry.hpp"
#include "mtlab/radial.hpp"

namespace mtlab {

// A field known through its value and gradient.
struct FieldFn {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> grad;
};

struct FormSample {
  Vec2 center = Vec2::Zero();
  double d = 0.0;
  double value = 0.0;
  int nodes = 0;
};

// -2d∮⟨∇u,ν⟩⟨∇v,ν⟩ + d∮⟨∇u,∇v⟩ over ∂B_d(center), trapezoidal rule.
FormSample p_form(const FieldFn& u, const FieldFn& v, const Vec2& center, double d, const Domain& domain,
                  int nodes = 2048);
// -∮∂_νv ∂_iu - ∮∂_νu ∂_iv + ∮⟨∇u,∇v⟩ν_i over ∂B_d(center).
FormSample q_form(const FieldFn& u, const FieldFn& v, const Vec2& center, double d, int axis,
                  const Domain& domain, int nodes = 2048);

// max over radius pairs of |P(d1)-P(d2)| and |Q_i(d1)-Q_i(d2)| (both axes).
// Throws NotHarmonic if r²|Δu| or r²|Δv| exceeds 1e-6 at sampled annulus points.
double radius_independence_check(const FieldFn& u, const FieldFn& v, const Vec2& center,
                                 const std::vector<double>& radii, const Domain& domain);

struct IdentityGap {
  double lhs = 0.0, rhs = 0.0;
  double scale = 0.0;  // max(|lhs|+|rhs|, sum of absolute term integrals)
  double gap = 0.0;    // |lhs-rhs| / scale
};
struct SolutionIdentities {
  double d = 0.0;
  IdentityGap p;        // P(u,u) vs dλ∮e^{u²} - 2λ∫_{B_d} e^{u²}
  IdentityGap q[2];     // Q_i(u,u) vs λ∮e^{u²}ν_i
};
SolutionIdentities solution_identity_check(const FemState& state, double d, int nodes = 2048);
SolutionIdentities solution_identity_check(const BranchPoint& bp, double d, int nodes = 2048);

}  // namespace mtlab
