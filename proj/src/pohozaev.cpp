#include "mtlab/pohozaev.hpp"

#include <algorithm>
#include <cmath>

#include "mtlab/error.hpp"
#include "mtlab/quadrature.hpp"

namespace mtlab {

namespace {

void check_ball(const Vec2& center, double d, const Domain& domain) {
  if (!(d > 0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
  if (!domain.contains(center) || domain.distance_to_boundary(center) <= 2 * d)
    throw Error(ErrorCode::BallNotContained, "B_2d(center) not inside the domain");
}

template <class F>
void circle_sum(const Vec2& center, double d, int nodes, F&& f) {
  if (nodes < 8) throw Error(ErrorCode::InvalidArgument, "too few boundary nodes");
  for (int k = 0; k < nodes; ++k) {
    double a = 2 * kPi * k / nodes;
    Vec2 nu(std::cos(a), std::sin(a));
    f(center + d * nu, nu, 2 * kPi * d / nodes);
  }
}

double p_value(const FieldFn& u, const FieldFn& v, const Vec2& c, double d, int nodes) {
  double acc = 0;
  circle_sum(c, d, nodes, [&](const Vec2& x, const Vec2& nu, double ds) {
    Vec2 gu = u.grad(x), gv = v.grad(x);
    acc += ds * (-2 * d * gu.dot(nu) * gv.dot(nu) + d * gu.dot(gv));
  });
  return acc;
}

double q_value(const FieldFn& u, const FieldFn& v, const Vec2& c, double d, int i, int nodes) {
  double acc = 0;
  circle_sum(c, d, nodes, [&](const Vec2& x, const Vec2& nu, double ds) {
    Vec2 gu = u.grad(x), gv = v.grad(x);
    acc += ds * (-gv.dot(nu) * gu[i] - gu.dot(nu) * gv[i] + gu.dot(gv) * nu[i]);
  });
  return acc;
}

// Fourth-order five-point Laplacian per axis.
double laplacian(const FieldFn& f, const Vec2& x, double h) {
  double acc = 0;
  for (int a = 0; a < 2; ++a) {
    Vec2 e = Vec2::Zero();
    e[a] = h;
    acc += (-f.value(x + 2 * e) + 16 * f.value(x + e) - 30 * f.value(x) + 16 * f.value(x - e) -
            f.value(x - 2 * e)) / (12 * h * h);
  }
  return acc;
}

IdentityGap make_gap(double lhs, double rhs, double magnitude) {
  IdentityGap g;
  g.lhs = lhs;
  g.rhs = rhs;
  g.scale = std::max(std::abs(lhs) + std::abs(rhs), magnitude);
  g.gap = g.scale > 0 ? std::abs(lhs - rhs) / g.scale : 0.0;
  return g;
}

// Boundary pieces shared by the FEM and radial checks; volume = λ∫_{B_d} e^{u²}.
SolutionIdentities identities(const FieldFn& u, double lambda, const Vec2& c, double d, int nodes,
                              double volume) {
  SolutionIdentities out;
  out.d = d;
  double p_lhs = 0, p_mag = 0, bnd = 0;
  double q_lhs[2] = {0, 0}, q_rhs[2] = {0, 0}, q_mag[2] = {0, 0};
  circle_sum(c, d, nodes, [&](const Vec2& x, const Vec2& nu, double ds) {
    Vec2 g = u.grad(x);
    double gn = g.dot(nu), val = u.value(x), ex = lambda * std::exp(val * val);
    p_lhs += ds * (-2 * d * gn * gn + d * g.squaredNorm());
    p_mag += ds * d * (2 * gn * gn + g.squaredNorm() + ex);
    bnd += ds * ex;
    for (int i = 0; i < 2; ++i) {
      q_lhs[i] += ds * (-2 * gn * g[i] + g.squaredNorm() * nu[i]);
      q_rhs[i] += ds * ex * nu[i];
      q_mag[i] += ds * (2 * std::abs(gn * g[i]) + (g.squaredNorm() + ex) * std::abs(nu[i]));
    }
  });
  out.p = make_gap(p_lhs, d * bnd - 2 * volume, p_mag + 2 * volume);
  for (int i = 0; i < 2; ++i) out.q[i] = make_gap(q_lhs[i], q_rhs[i], q_mag[i]);
  return out;
}

}  // namespace

FormSample p_form(const FieldFn& u, const FieldFn& v, const Vec2& center, double d, const Domain& domain,
                  int nodes) {
  check_ball(center, d, domain);
  return {center, d, p_value(u, v, center, d, nodes), nodes};
}

FormSample q_form(const FieldFn& u, const FieldFn& v, const Vec2& center, double d, int axis,
                  const Domain& domain, int nodes) {
  if (axis != 0 && axis != 1) throw Error(ErrorCode::InvalidArgument, "axis must be 0 or 1");
  check_ball(center, d, domain);
  return {center, d, q_value(u, v, center, d, axis, nodes), nodes};
}

double radius_independence_check(const FieldFn& u, const FieldFn& v, const Vec2& center,
                                 const std::vector<double>& radii, const Domain& domain) {
  if (radii.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two radii");
  double rmin = *std::min_element(radii.begin(), radii.end());
  double rmax = *std::max_element(radii.begin(), radii.end());
  check_ball(center, rmax, domain);
  // harmonicity sampled on three circles spanning the radii
  double h = 0.01 * rmin;
  for (double r : {rmin, 0.5 * (rmin + rmax), rmax}) {
    for (int k = 0; k < 16; ++k) {
      double a = 2 * kPi * (k + 0.5) / 16;
      Vec2 x = center + r * Vec2(std::cos(a), std::sin(a));
      for (const FieldFn* f : {&u, &v})
        if (r * r * std::abs(laplacian(*f, x, h)) > 1e-6)
          throw Error(ErrorCode::NotHarmonic, "sampled Laplacian residual above 1e-6");
    }
  }
  std::vector<double> p, q0, q1;
  for (double r : radii) {
    p.push_back(p_value(u, v, center, r, 2048));
    q0.push_back(q_value(u, v, center, r, 0, 2048));
    q1.push_back(q_value(u, v, center, r, 1, 2048));
  }
  double worst = 0;
  for (std::size_t a = 0; a < radii.size(); ++a)
    for (std::size_t b = a + 1; b < radii.size(); ++b)
      worst = std::max({worst, std::abs(p[a] - p[b]), std::abs(q0[a] - q0[b]), std::abs(q1[a] - q1[b])});
  return worst;
}

SolutionIdentities solution_identity_check(const FemState& state, double d, int nodes) {
  check_ball(state.x_lambda, d, *state.domain);
  auto field = std::make_shared<P1Field>(state.field());
  FieldFn u{[field](const Vec2& x) { return field->value(x); },
            [field](const Vec2& x) { return field->gradient(x); }};
  double volume = ball_integral(state, state.x_lambda, d, [](double s) { return std::exp(s * s); });
  return identities(u, state.lambda, state.x_lambda, d, nodes, volume);
}

SolutionIdentities solution_identity_check(const BranchPoint& bp, double d, int nodes) {
  if (!(d > 0 && 2 * d < 1)) throw Error(ErrorCode::BallNotContained, "B_2d(0) not inside the unit disk");
  FieldFn u{[&bp](const Vec2& x) { return bp.u_at(x.norm()); },
            [&bp](const Vec2& x) {
              double r = x.norm();
              return r > 0 ? Vec2(bp.du_at(r) * x / r) : Vec2(Vec2::Zero());
            }};
  // λ∫_{B_d} e^{u²} = (2π/γ²)∫ y² e^{2w+w²/γ²} dt in the scaled variables
  double g2 = bp.gamma * bp.gamma, t0 = bp.t.front(), t1 = std::log(d / bp.theta);
  auto f = [&](double t) {
    double y = std::exp(t), w = bp.w_at(y);
    return y * y * std::exp(2 * w + w * w / g2);
  };
  double y0 = std::exp(t0);
  double inner = y0 * y0 / 2;  // e^{...} ≈ 1 below the first sample
  double volume = 2 * kPi / g2 * (inner + integrate_adaptive(f, t0, t1, 1e-13).value);
  return identities(u, bp.lambda, Vec2::Zero(), d, nodes, volume);
}

}  // namespace mtlab
