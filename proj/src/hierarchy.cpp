#include "mtlab/hierarchy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "mtlab/error.hpp"
#include "mtlab/liouville.hpp"
#include "mtlab/quadrature.hpp"

namespace mtlab {

namespace {

// Legendre P_0..P_n at x.
std::vector<double> legendre_values(int n, double x) {
  std::vector<double> p(n + 1);
  p[0] = 1.0;
  if (n >= 1) p[1] = x;
  for (int j = 1; j < n; ++j) p[j + 1] = ((2 * j + 1) * x * p[j] - j * p[j - 1]) / (j + 1);
  return p;
}

// Least-squares line y = a + b x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {(sy - b * sx) / n, b};
}

}  // namespace

std::shared_ptr<const PanelGrid> PanelGrid::make(double r_min, double r_max, int nodes_per_panel,
                                                 double ratio) {
  if (!(r_min > 0 && r_max > r_min && ratio > 1))
    throw Error(ErrorCode::InvalidArgument, "bad panel grid bounds");
  auto g = std::make_shared<PanelGrid>();
  const GaussRule& rule = gauss_legendre(nodes_per_panel);
  int n = nodes_per_panel;
  g->n_ = n;
  g->t0_ = std::log(r_min);
  g->dt_ = std::log(ratio);
  g->panels_ = int(std::ceil((std::log(r_max) - g->t0_) / g->dt_ - 1e-9));
  g->x_ = rule.nodes;
  g->w_ = rule.weights;
  for (int p = 0; p < g->panels_; ++p) {
    for (int k = 0; k < n; ++k) {
      double t = g->t0_ + (p + 0.5 * (g->x_[k] + 1.0)) * g->dt_;
      g->t_.push_back(t);
      g->r_.push_back(std::exp(t));
    }
  }
  // values -> Legendre coefficients -> running integral
  Eigen::MatrixXd to_coef(n, n), run(n, n);
  for (int i = 0; i < n; ++i) {
    auto p = legendre_values(n, g->x_[i]);
    for (int j = 0; j < n; ++j) to_coef(j, i) = 0.5 * (2 * j + 1) * g->w_[i] * p[j];
  }
  for (int k = 0; k < n; ++k) {
    auto p = legendre_values(n, g->x_[k]);
    run(k, 0) = g->x_[k] + 1.0;
    for (int j = 1; j < n; ++j) run(k, j) = (p[j + 1] - p[j - 1]) / (2 * j + 1);
  }
  g->left_ = run * to_coef;
  g->right_.resize(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) g->right_(k, i) = g->w_[i] - g->left_(k, i);
  g->bary_.resize(n);
  for (int j = 0; j < n; ++j)
    g->bary_[j] = ((j % 2) ? -1.0 : 1.0) * std::sqrt((1 - g->x_[j] * g->x_[j]) * g->w_[j]);
  g->diff_ = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      g->diff_(k, j) = (g->bary_[j] / g->bary_[k]) / (g->x_[k] - g->x_[j]);
      s += g->diff_(k, j);
    }
    g->diff_(k, k) = -s;
  }
  return g;
}

double PanelGrid::total(const std::vector<double>& g) const {
  double s = 0;
  for (int p = 0; p < panels_; ++p) {
    double ps = 0;
    for (int k = 0; k < n_; ++k) ps += w_[k] * g[p * n_ + k];
    s += ps;
  }
  return 0.5 * dt_ * s;
}

std::vector<double> PanelGrid::integral_from(const std::vector<double>& g, int p0) const {
  std::vector<double> out(size());
  Eigen::Map<const Eigen::VectorXd> gv(g.data(), Eigen::Index(g.size()));
  double acc = 0;
  for (int p = p0; p < panels_; ++p) {
    Eigen::VectorXd part = 0.5 * dt_ * left_ * gv.segment(p * n_, n_);
    double tot = 0;
    for (int k = 0; k < n_; ++k) tot += w_[k] * g[p * n_ + k];
    for (int k = 0; k < n_; ++k) out[p * n_ + k] = acc + part[k];
    acc += 0.5 * dt_ * tot;
  }
  acc = 0;
  for (int p = p0 - 1; p >= 0; --p) {
    Eigen::VectorXd part = 0.5 * dt_ * right_ * gv.segment(p * n_, n_);
    double tot = 0;
    for (int k = 0; k < n_; ++k) tot += w_[k] * g[p * n_ + k];
    for (int k = 0; k < n_; ++k) out[p * n_ + k] = -(acc + part[k]);
    acc += 0.5 * dt_ * tot;
  }
  return out;
}

std::vector<double> PanelGrid::integral_to_end(const std::vector<double>& g) const {
  std::vector<double> out = integral_from(g, panels_);
  for (double& v : out) v = -v;
  return out;
}

std::vector<double> PanelGrid::derivative(const std::vector<double>& g) const {
  std::vector<double> out(size());
  Eigen::Map<const Eigen::VectorXd> gv(g.data(), Eigen::Index(g.size()));
  for (int p = 0; p < panels_; ++p) {
    Eigen::VectorXd d = (2.0 / dt_) * diff_ * gv.segment(p * n_, n_);
    for (int k = 0; k < n_; ++k) out[p * n_ + k] = d[k];
  }
  return out;
}

double PanelGrid::interpolate(const std::vector<double>& g, double t) const {
  int p = int(std::floor((t - t0_) / dt_));
  p = std::clamp(p, 0, panels_ - 1);
  double x = 2.0 * (t - t0_ - p * dt_) / dt_ - 1.0;
  double num = 0, den = 0;
  for (int j = 0; j < n_; ++j) {
    double d = x - x_[j];
    if (d == 0.0) return g[p * n_ + j];
    double c = bary_[j] / d;
    num += c * g[p * n_ + j];
    den += c;
  }
  return num / den;
}

double PanelGrid::total_low_order(const std::vector<double>& g, int m) const {
  const GaussRule& low = gauss_legendre(m);
  double s = 0;
  for (int p = 0; p < panels_; ++p)
    for (int i = 0; i < m; ++i) {
      double t = t0_ + (p + 0.5 * (low.nodes[i] + 1.0)) * dt_;
      s += low.weights[i] * interpolate(g, t);
    }
  return 0.5 * dt_ * s;
}

std::size_t PanelGrid::lower_index(double r0) const {
  return std::size_t(std::lower_bound(r_.begin(), r_.end(), r0) - r_.begin());
}

std::vector<double> RadialProfile::radii() const {
  std::vector<double> out{0.0};
  out.insert(out.end(), grid->r().begin(), grid->r().end());
  return out;
}

std::vector<double> RadialProfile::values_with_origin() const {
  std::vector<double> out{value_at_zero};
  out.insert(out.end(), values.begin(), values.end());
  return out;
}

double RadialProfile::value(double r) const {
  double r0 = grid->r().front();
  if (r <= 0) return value_at_zero;
  if (r < r0) {
    double power = mode == 0 ? 2.0 : double(mode);
    return value_at_zero + (values.front() - value_at_zero) * std::pow(r / r0, power);
  }
  if (r > grid->r().back()) {
    if (mode == 0) return farfield_const + farfield_log_coeff * std::log(r);
    return values.back();
  }
  return grid->interpolate(values, std::log(r));
}

double RadialProfile::deriv(double r) const {
  double r0 = grid->r().front();
  if (r <= 0) return 0.0;
  if (r < r0) return derivs.front() * std::pow(r / r0, mode == 0 ? 1.0 : double(std::max(mode - 1, 0)));
  if (r > grid->r().back()) return (mode == 0 ? farfield_log_coeff : derivative_asymptote) / r;
  return grid->interpolate(derivs, std::log(r));
}

std::pair<double, double> fundamental_solutions(double r) {
  if (!(r >= 1e-300)) throw Error(ErrorCode::NonpositiveRadius, "u1 needs r > 0");
  double r2 = r * r;
  return {(4 - r2) / (4 + r2), ((4 - r2) * std::log(r) + 8) / (4 + r2)};
}

std::pair<double, double> fundamental_derivatives(double r) {
  if (!(r >= 1e-300)) throw Error(ErrorCode::NonpositiveRadius, "u1 needs r > 0");
  double r2 = r * r, d = (4 + r2) * (4 + r2);
  double du0 = -16 * r / d;
  double du1 = (-16 * r * std::log(r) + (16 - r2 * r2) / r - 16 * r) / d;
  return {du0, du1};
}

namespace {

void extract_far_field(RadialProfile& prof) {
  const auto& g = *prof.grid;
  double r_end = g.r().back();
  auto fit_range = [&](double lo, double hi) {
    std::vector<double> x, y;
    for (std::size_t i = g.lower_index(lo); i < g.size() && g.r()[i] <= hi; ++i) {
      x.push_back(g.t()[i]);
      y.push_back(prof.values[i]);
    }
    return fit_line(x, y);
  };
  auto [a, b] = fit_range(r_end / 100, r_end);
  prof.farfield_const = a;
  prof.farfield_log_coeff = b;
  double b1 = fit_range(r_end / 100, r_end / 10).second;
  double b2 = fit_range(r_end / 10, r_end).second;
  if (std::abs(b1 - b2) > 1e-4 * std::max(std::abs(b), 1e-8))
    throw Error(ErrorCode::GridTooShort, "far-field coefficient drifts over the last decade");
}

// Regular solution of the homogeneous mode-m equation, by outward integration in t.
void regular_solution(const PanelGrid& g, int m, std::vector<double>& y, std::vector<double>& dy) {
  y.assign(g.size(), 0.0);
  dy.assign(g.size(), 0.0);
  if (m == 1) {  // outward integration is unstable here since this solution decays
    for (std::size_t i = 0; i < g.size(); ++i) {
      double r = g.r()[i], d = 4 + r * r;
      y[i] = 4 * r / d;
      dy[i] = 4 * (4 - r * r) / (d * d);
    }
    return;
  }
  using State = std::array<double, 2>;
  auto rhs = [m](const State& s, State& ds, double t) {
    double r = std::exp(t);
    ds[0] = s[1];
    ds[1] = (m * m - 2 * r * r * bubble_e2U_radial(r)) * s[0];
  };
  double t0 = g.t_min(), r0 = std::exp(t0);
  double c = 1.0 / (2.0 * (m + 1));
  State s{std::pow(r0, m) * (1 - c * r0 * r0), std::pow(r0, m) * (m - c * (m + 2) * r0 * r0)};
  std::vector<double> times{t0};
  times.insert(times.end(), g.t().begin(), g.t().end());
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(1e-300, 1e-15, ode::runge_kutta_dopri5<State>());
  std::size_t idx = 0;
  ode::integrate_times(stepper, rhs, s, times.begin(), times.end(), 1e-3,
                       [&](const State& st, double) {
                         if (idx > 0) {
                           y[idx - 1] = st[0];
                           dy[idx - 1] = st[1] / g.r()[idx - 1];
                         }
                         ++idx;
                       });
}

}  // namespace

RadialProfile solve_inhomogeneous_radial(std::shared_ptr<const PanelGrid> grid,
                                         const std::vector<double>& f, int mode,
                                         double value_at_zero) {
  const PanelGrid& g = *grid;
  if (f.size() != g.size()) throw Error(ErrorCode::InvalidArgument, "forcing size mismatch");
  if (mode < 0) throw Error(ErrorCode::InvalidArgument, "negative mode");
  if (mode > 0 && value_at_zero != 0.0)
    throw Error(ErrorCode::InvalidArgument, "modes m >= 1 vanish at the origin");
  std::size_t n = g.size();
  const auto& r = g.r();
  RadialProfile prof;
  prof.grid = grid;
  prof.mode = mode;
  prof.value_at_zero = value_at_zero;
  prof.values.resize(n);
  prof.derivs.resize(n);

  // ∫ s|log s||f| must be finite: the last decade may only carry a negligible share
  std::vector<double> moment(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(f[i])) throw Error(ErrorCode::NonintegrableForcing, "forcing not finite");
    moment[i] = r[i] * r[i] * std::abs(g.t()[i]) * std::abs(f[i]);
  }
  // compare the last two decades: an integrable tail shrinks by orders of magnitude per decade
  auto tail = g.integral_to_end(moment);
  double last = tail[g.lower_index(r.back() / 10)];
  double prev = tail[g.lower_index(r.back() / 100)] - last;
  if (last > 0.5 * prev && last > 1e-14 * g.total(moment))
    throw Error(ErrorCode::NonintegrableForcing, "forcing decays too slowly");

  if (mode == 0) {
    std::vector<double> g0(n), g1(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto [u0, u1] = fundamental_solutions(r[i]);
      g0[i] = r[i] * r[i] * u0 * f[i];
      g1[i] = r[i] * r[i] * u1 * f[i];
    }
    auto i0 = g.integral_from(g0, 0), i1 = g.integral_from(g1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto [u0, u1] = fundamental_solutions(r[i]);
      auto [d0, d1] = fundamental_derivatives(r[i]);
      prof.values[i] = u0 * i1[i] - u1 * i0[i] + value_at_zero * u0;
      prof.derivs[i] = d0 * i1[i] - d1 * i0[i] + value_at_zero * d0;
    }
    extract_far_field(prof);
  } else {
    std::vector<double> y1, dy1;
    regular_solution(g, mode, y1, dy1);
    std::vector<double> inv(n), y2(n), dy2(n);
    for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / (y1[i] * y1[i]);
    if (mode == 1) {
      // second solution referenced at r ≈ 1, growing like r at infinity
      int ref = std::clamp(int(std::round(-g.t_min() / (g.t_max() - g.t_min()) * g.panels())), 0,
                           g.panels());
      auto k = g.integral_from(inv, ref);
      for (std::size_t i = 0; i < n; ++i) {
        y2[i] = y1[i] * k[i];
        dy2[i] = dy1[i] * k[i] + 1.0 / (r[i] * y1[i]);
      }
    } else {
      // decaying second solution
      auto j = g.integral_to_end(inv);
      double tail_j = 1.0 / (2.0 * mode * y1.back() * y1.back());
      for (std::size_t i = 0; i < n; ++i) {
        double ji = j[i] + tail_j;
        y2[i] = -y1[i] * ji;
        dy2[i] = -dy1[i] * ji + 1.0 / (r[i] * y1[i]);
      }
    }
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = r[i] * r[i] * y2[i] * f[i];
      b[i] = r[i] * r[i] * y1[i] * f[i];
    }
    auto ib = g.integral_from(b, 0);
    std::vector<double> ia = mode == 1 ? g.integral_from(a, 0) : g.integral_to_end(a);
    if (mode >= 2)
      for (double& v : ia) v = -v;
    for (std::size_t i = 0; i < n; ++i) {
      prof.values[i] = y1[i] * ia[i] - y2[i] * ib[i];
      prof.derivs[i] = dy1[i] * ia[i] - dy2[i] * ib[i];
    }
  }
  prof.derivative_asymptote = r.back() * prof.derivs.back();
  return prof;
}

RadialProfile solve_inhomogeneous_radial(std::shared_ptr<const PanelGrid> grid,
                                         const std::function<double(double)>& forcing, int mode,
                                         double value_at_zero) {
  std::vector<double> f(grid->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = forcing(grid->r()[i]);
  return solve_inhomogeneous_radial(grid, f, mode, value_at_zero);
}

double forcing_v0(double U) { return std::exp(2 * U) * (U * U + U); }

double forcing_k0(double U, double v) {
  double U2 = U * U;
  return std::exp(2 * U) * (0.5 * U2 * U2 + 2 * v * v + U2 * U + v * (2 * U2 + 4 * U + 1));
}

double forcing_s0(double U, double v, double k) {
  double U2 = U * U, U3 = U2 * U, U4 = U3 * U;
  return std::exp(2 * U) * (0.5 * U4 * U + U4 * U2 / 6 + (U4 + 4 * U3 + 3 * U2) * v +
                            (2 * U2 + 6 * U + 3) * v * v + 4.0 / 3.0 * v * v * v +
                            (4 * v + 2 * U2 + 4 * U + 1) * k);
}

Hierarchy hierarchy_profiles(std::shared_ptr<const PanelGrid> grid) {
  std::size_t n = grid->size();
  std::vector<double> U(n), f(n);
  for (std::size_t i = 0; i < n; ++i) U[i] = bubble_U_radial(grid->r()[i]);
  Hierarchy h;
  for (std::size_t i = 0; i < n; ++i) f[i] = forcing_v0(U[i]);
  h.v0 = solve_inhomogeneous_radial(grid, f, 0);
  for (std::size_t i = 0; i < n; ++i) f[i] = forcing_k0(U[i], h.v0.values[i]);
  h.k0 = solve_inhomogeneous_radial(grid, f, 0);
  for (std::size_t i = 0; i < n; ++i) f[i] = forcing_s0(U[i], h.v0.values[i], h.k0.values[i]);
  h.s0 = solve_inhomogeneous_radial(grid, f, 0);
  return h;
}

double predicted_log_coeff(const std::function<double(double)>& forcing, double tol) {
  auto integrand = [&](double s) { return s * (4 - s * s) / (4 + s * s) * forcing(s); };
  return integrate_adaptive(integrand, 0.0, 10.0, tol).value +
         integrate_adaptive(integrand, 10.0, std::numeric_limits<double>::infinity(), tol).value;
}

double ode_residual(const RadialProfile& prof, const std::vector<double>& f, double r_max) {
  const PanelGrid& g = *prof.grid;
  auto vt = g.derivative(prof.values);
  auto vtt = g.derivative(vt);
  double worst = 0;
  int m2 = prof.mode * prof.mode;
  for (std::size_t i = 0; i < g.size() && g.r()[i] <= r_max; ++i) {
    double r = g.r()[i];
    double lhs = -(vtt[i] - m2 * prof.values[i]) / (r * r) - 2 * bubble_e2U_radial(r) * prof.values[i];
    worst = std::max(worst, std::abs(lhs - f[i]) * (1 + r) * (1 + r));
  }
  return worst;
}

GrowthBound growth_bound(const RadialProfile& prof, double tau, double r_lo, double r_hi) {
  GrowthBound gb;
  gb.tau = tau;
  const PanelGrid& g = *prof.grid;
  // constant from everything below the last decade, then checked on [r_lo, r_hi]
  gb.constant = std::abs(prof.value_at_zero);
  for (std::size_t i = 0; i < g.size() && g.r()[i] <= r_hi / 10; ++i)
    gb.constant = std::max(gb.constant, std::abs(prof.values[i]) / std::pow(1 + g.r()[i], tau));
  bool inside = true;
  std::vector<double> x, y;
  for (std::size_t i = g.lower_index(r_lo); i < g.size() && g.r()[i] <= r_hi; ++i) {
    double r = g.r()[i], v = std::abs(prof.values[i]);
    if (v > gb.constant * std::pow(1 + r, tau)) inside = false;
    if (r >= r_hi / 10 && v > 0) {
      x.push_back(std::log(1 + r));
      y.push_back(std::log(v));
    }
  }
  gb.exponent = x.size() >= 2 ? fit_line(x, y).second : 0.0;
  gb.holds = inside && gb.constant < 1e3 && gb.exponent <= tau;
  return gb;
}

DecayFit derivative_decay_fit(const RadialProfile& prof, double target, double r_lo, double r_hi) {
  const PanelGrid& g = *prof.grid;
  std::vector<double> x, y, ylog;
  for (std::size_t i = g.lower_index(r_lo); i < g.size() && g.r()[i] <= r_hi; ++i) {
    double r = g.r()[i];
    double e = std::abs(r * prof.derivs[i] - target);
    if (e <= 0) continue;
    double lr = std::log(r);
    x.push_back(lr);
    y.push_back(std::log(e));
    ylog.push_back(std::log(e) - 2 * std::log(lr));
  }
  if (x.size() < 4) throw Error(ErrorCode::InsufficientPoints, "decay fit needs more samples");
  DecayFit out;
  auto [c, p] = fit_line(x, ylog);
  out.exponent = -p;
  out.constant = std::exp(c);
  out.plain_slope = -fit_line(x, y).second;
  return out;
}

void assemble_b(ExpansionConstants& c) {
  const double* A = c.A;
  double R = c.robin_at_peak;
  double d1 = A[0] - 4 * kPi * R - A[3];
  double d2 = A[1] - 4 * kPi * A[0] * R - A[4];
  double d3 = A[2] - 4 * kPi * A[1] * R - A[5];
  c.B[0] = -d1;
  c.B[1] = A[0] * d1 - d2;
  c.B[2] = A[0] * d2 + (A[1] - A[0] * A[0]) * d1 - d3;
}

ExpansionConstants expansion_constants(double robin_at_peak, const Hierarchy& h) {
  const PanelGrid& g = *h.v0.grid;
  std::size_t n = g.size();
  std::vector<std::vector<double>> dens(6, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double r = g.r()[i], t = g.t()[i];
    double U = bubble_U_radial(r), e = std::exp(2 * U), w = 2 * kPi * r * r * e;
    double v = h.v0.values[i], k = h.k0.values[i], s = h.s0.values[i];
    double U2 = U * U, U3 = U2 * U, U4 = U3 * U;
    double first = U + U2 + 2 * v;
    double second = 2 * k + v + 4 * U * v + U3 + 2 * v * v + 2 * v * U2 + 0.5 * U4;
    double third = 2 * s + k + 3 * v * v + 4 * U * k + 4 * v * k + 6 * v * v * U + 2 * k * U2 +
                   4 * U3 * v + 2 * v * v * U2 + v * U4 + 3 * v * U2 + 4.0 / 3.0 * v * v * v +
                   U4 * U2 / 6 + 0.5 * U4 * U;
    dens[0][i] = w * first / (4 * kPi);
    dens[1][i] = w * second / (4 * kPi);
    dens[2][i] = w * third / (4 * kPi);
    dens[3][i] = w * t / (2 * kPi);
    dens[4][i] = w * t * first / (2 * kPi);
    dens[5][i] = w * t * second / (2 * kPi);
  }
  ExpansionConstants c;
  c.robin_at_peak = robin_at_peak;
  for (int j = 0; j < 6; ++j) {
    c.A[j] = g.total(dens[j]);
    c.A_err[j] = std::abs(c.A[j] - g.total_low_order(dens[j], g.nodes_per_panel() / 2 + 2));
  }
  assemble_b(c);
  c.c0 = -2 * kPi * h.v0.derivative_asymptote;
  return c;
}

ExpansionConstants expansion_constants(double robin_at_peak) {
  ExpansionConstants fine = expansion_constants(robin_at_peak, hierarchy_profiles(PanelGrid::make()));
  ExpansionConstants coarse =
      expansion_constants(robin_at_peak, hierarchy_profiles(PanelGrid::make(1e-12, 1e10, 12)));
  for (int j = 0; j < 6; ++j) fine.A_err[j] = std::abs(fine.A[j] - coarse.A[j]);
  for (int j = 0; j < 3; ++j) fine.B_err[j] = std::abs(fine.B[j] - coarse.B[j]);
  fine.c0_err = std::abs(fine.c0 - coarse.c0);
  return fine;
}

IdentityResiduals decomposition_identity_residuals(const RadialProfile& v0, const Vec2& c,
                                                   const std::vector<Vec2>& points, double h) {
  auto grad_u = [](const Vec2& x) { return bubble_grad(x); };
  auto lap4 = [h](const std::function<double(const Vec2&)>& f, const Vec2& x) {
    double s = -60.0 * f(x);
    for (int a = 0; a < 2; ++a) {
      Vec2 e = Vec2::Zero();
      e[a] = h;
      s += 16.0 * (f(x + e) + f(x - e)) - (f(x + 2 * e) + f(x - 2 * e));
    }
    return s / (12.0 * h * h);
  };
  auto translation = [&](const Vec2& x) {
    double r = x.norm();
    return v0.deriv(r) * c.dot(x) / r;
  };
  auto mixed = [&](const Vec2& x) {
    double d = 4 + x.squaredNorm();
    return c[0] * c[1] * 4 * x[0] * x[1] / (d * d);
  };
  auto diagonal = [&](const Vec2& x) {
    double d = 4 + x.squaredNorm(), s = 0;
    for (int a = 0; a < 2; ++a) s += 0.5 * c[a] * c[a] * (-2.0 / d + 4 * x[a] * x[a] / (d * d));
    return s;
  };
  IdentityResiduals res;
  for (const Vec2& x : points) {
    double e = bubble_e2U(x), U = bubble_U(x);
    Vec2 gu = grad_u(x);
    double cg = c.dot(gu);
    double lt = -lap4(translation, x) - 2 * e * translation(x);
    double rt = e * (2 * U * U + 4 * U + 1) * cg + 4 * e * v0.value(x.norm()) * cg;
    double lm = -lap4(mixed, x) - 2 * e * mixed(x);
    double rm = 4 * e * c[0] * c[1] * gu[0] * gu[1];
    double ld = -lap4(diagonal, x) - 2 * e * diagonal(x);
    double rd = 2 * e * (c[0] * c[0] * gu[0] * gu[0] + c[1] * c[1] * gu[1] * gu[1]);
    res.translation = std::max(res.translation, std::abs(lt - rt));
    res.mixed = std::max(res.mixed, std::abs(lm - rm));
    res.diagonal = std::max(res.diagonal, std::abs(ld - rd));
  }
  return res;
}

}  // namespace mtlab
