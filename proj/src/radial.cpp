#include "mtlab/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "mtlab/error.hpp"
#include "mtlab/liouville.hpp"

namespace mtlab {

namespace ode = boost::numeric::odeint;

namespace {

constexpr double kStartRadius = 1e-6;
constexpr double kSampleStep = 0.01;

using Ivp = std::array<double, 5>;  // w, p, mass, ∫e^{u²}, ∫p²

struct ScaledRhs {
  double eps;
  void operator()(const Ivp& s, Ivp& ds, double t) const {
    double r2 = std::exp(2 * t), w = s[0];
    double e = std::exp(2 * w + eps * w * w);
    ds[0] = s[1];
    ds[1] = -r2 * (1 + eps * w) * e;
    ds[2] = r2 * (1 + eps * w) * e;
    ds[3] = r2 * e;
    ds[4] = s[1] * s[1];
  }
};

template <class State>
void check_finite(const State& s) {
  for (double v : s)
    if (!std::isfinite(v)) throw Error(ErrorCode::Stiffness, "non-finite state");
}

template <class State, class Rhs>
void advance(const Rhs& rhs, State& s, double t0, double t1, double tol, bool low_order = false) {
  try {
    if (low_order) {
      auto stepper = ode::make_controlled(tol * 1e-2, tol, ode::runge_kutta_dopri5<State>());
      ode::integrate_adaptive(stepper, rhs, s, t0, t1, (t1 - t0) / 4);
    } else {
      auto stepper = ode::make_controlled(tol * 1e-2, tol, ode::runge_kutta_fehlberg78<State>());
      ode::integrate_adaptive(stepper, rhs, s, t0, t1, (t1 - t0) / 4);
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Stiffness, e.what());
  }
  check_finite(s);
}


// Quintic Hermite on [0,1] with value, first and second derivatives at both ends.
double hermite5(double s, double h, const double a[3], const double b[3], int deriv) {
  double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  if (deriv == 0) {
    double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    double h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    double g0 = 10 * s3 - 15 * s4 + 6 * s5, g1 = -4 * s3 + 7 * s4 - 3 * s5;
    double g2 = 0.5 * (s3 - 2 * s4 + s5);
    return a[0] * h0 + h * a[1] * h1 + h * h * a[2] * h2 + b[0] * g0 + h * b[1] * g1 + h * h * b[2] * g2;
  }
  double h0 = -30 * s2 + 60 * s3 - 30 * s4, h1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
  double h2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4);
  double g0 = 30 * s2 - 60 * s3 + 30 * s4, g1 = -12 * s2 + 28 * s3 - 15 * s4;
  double g2 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);
  return (a[0] * h0 + h * a[1] * h1 + h * h * a[2] * h2 + b[0] * g0 + h * b[1] * g1 + h * h * b[2] * g2) / h;
}

}  // namespace

double BranchPoint::y_end() const { return std::exp(t.back()); }

namespace {

// value or t-derivative of w at log radius tt
double sample_w(const BranchPoint& bp, double tt, int deriv) {
  double eps = 1.0 / (bp.gamma * bp.gamma);
  auto second = [&](std::size_t i) {
    double w = bp.w[i];
    return -std::exp(2 * bp.t[i]) * (1 + eps * w) * std::exp(2 * w + eps * w * w);
  };
  std::size_t n = bp.t.size();
  std::size_t i = std::size_t(std::upper_bound(bp.t.begin(), bp.t.end(), tt) - bp.t.begin());
  i = std::clamp<std::size_t>(i, 1, n - 1);
  double h = bp.t[i] - bp.t[i - 1];
  double a[3] = {bp.w[i - 1], bp.p[i - 1], second(i - 1)};
  double b[3] = {bp.w[i], bp.p[i], second(i)};
  return hermite5((tt - bp.t[i - 1]) / h, h, a, b, deriv);
}

}  // namespace

double BranchPoint::w_at(double y) const {
  if (y < 0 || y > y_end() * (1 + 1e-12)) throw Error(ErrorCode::Range, "outside the disk");
  double y0 = std::exp(t.front());
  if (y <= y0) {
    double eps = 1.0 / (gamma * gamma), y2 = y * y;
    return -y2 / 4 + (2 + eps) * y2 * y2 / 64;
  }
  return sample_w(*this, std::log(y), 0);
}

double BranchPoint::dw_at(double y) const {
  if (y < 0 || y > y_end() * (1 + 1e-12)) throw Error(ErrorCode::Range, "outside the disk");
  double y0 = std::exp(t.front());
  if (y <= y0) {
    double eps = 1.0 / (gamma * gamma);
    return -y / 2 + (2 + eps) * y * y * y / 16;
  }
  return sample_w(*this, std::log(y), 1) / y;
}

double BranchPoint::u_at(double rho) const { return gamma + w_at(rho / theta) / gamma; }

double BranchPoint::du_at(double rho) const { return dw_at(rho / theta) / (gamma * theta); }

BranchPoint solve_branch_point(double gamma, double tol) {
  if (!(gamma >= 0.5 && gamma <= 12.0)) throw Error(ErrorCode::InvalidArgument, "gamma outside [0.5, 12]");
  if (!(tol >= 1e-12)) throw Error(ErrorCode::InvalidArgument, "tolerance below 1e-12");
  BranchPoint bp;
  bp.gamma = gamma;
  bp.tol = tol;
  double eps = 1.0 / (gamma * gamma), g2 = gamma * gamma;
  ScaledRhs rhs{eps};
  double t = std::log(kStartRadius), r2 = kStartRadius * kStartRadius;
  Ivp s{-r2 / 4 + (2 + eps) * r2 * r2 / 64, -r2 / 2 + (2 + eps) * r2 * r2 / 16, r2 / 2, r2 / 2,
        r2 * r2 / 16};
  std::vector<Ivp> states{s};
  bp.t.push_back(t);
  double t_limit = t + 50.0 + 2 * g2;
  // march until w drops below -γ², then pin the crossing
  while (true) {
    if (t > t_limit) throw Error(ErrorCode::NoBracket, "no boundary crossing found");
    Ivp next = s;
    advance(rhs, next, t, t + kSampleStep, tol);
    if (next[0] + g2 <= 0) {
      auto f = [&](double tau) {
        Ivp tmp = s;
        if (tau > t) advance(rhs, tmp, t, tau, tol);
        return tmp[0] + g2;
      };
      boost::uintmax_t iters = 100;
      auto [a, b] = boost::math::tools::toms748_solve(f, t, t + kSampleStep, s[0] + g2, next[0] + g2,
                                                      boost::math::tools::eps_tolerance<double>(52), iters);
      double te = 0.5 * (a + b);
      Ivp last = s;
      advance(rhs, last, t, te, tol);
      bp.t.push_back(te);
      states.push_back(last);
      break;
    }
    t += kSampleStep;
    s = next;
    bp.t.push_back(t);
    states.push_back(s);
  }
  for (const Ivp& st : states) {
    bp.w.push_back(st[0]);
    bp.p.push_back(st[1]);
  }
  double te = bp.t.back(), R = std::exp(te);
  bp.theta = 1.0 / R;
  bp.lambda = R * R / (g2 * std::exp(g2));
  if (!(bp.lambda >= 1e-12 && bp.lambda <= 1e2)) throw Error(ErrorCode::NoBracket, "lambda outside [1e-12, 1e2]");
  const Ivp& fin = states.back();
  bp.mass_gamma = 2 * kPi * fin[2];
  bp.energy = 2 * kPi * fin[4] / g2;
  bp.J_value = 0.5 * bp.energy - 0.5 * 2 * kPi * fin[3] / g2;

  // C_λ over B_{1/2}: quadrature state and flux at y = R/2
  double th = te + std::log(0.5);
  std::size_t k = std::size_t(std::upper_bound(bp.t.begin(), bp.t.end(), th) - bp.t.begin()) - 1;
  Ivp mid = states[k];
  advance(rhs, mid, bp.t[k], th, tol);
  bp.c_lambda = 2 * kPi * mid[2] / gamma;
  bp.c_lambda_flux = -2 * kPi * mid[1] / gamma;

  // residual of p_t = -y² f(w) with eighth-order differences of the samples
  static const double c8[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  double worst = 0, scale = 0;
  std::size_t n = bp.t.size();
  for (std::size_t i = 4; i + 5 < n; ++i) {
    double d = 0;
    for (int j = 0; j < 4; ++j) d += c8[j] * (bp.p[i + j + 1] - bp.p[i - j - 1]);
    d /= kSampleStep;
    double w = bp.w[i];
    double f = std::exp(2 * bp.t[i]) * (1 + eps * w) * std::exp(2 * w + eps * w * w);
    worst = std::max(worst, std::abs(d + f));
    scale = std::max(scale, f);
  }
  bp.residual_norm = worst / scale;
  for (std::size_t i = 1; i < n; ++i)
    if (!(bp.p[i] < 0)) throw Error(ErrorCode::NoConvergence, "profile not strictly decreasing");
  return bp;
}

RescaledProfiles rescaled_profiles(const BranchPoint& bp, double radius, const RadialProfile& v0,
                                   double d0) {
  if (radius > d0 / bp.theta) throw Error(ErrorCode::Range, "radius beyond d0/theta");
  // whole panels ending exactly at radius
  double r_min = radius / std::pow(2.0, std::ceil(std::log2(radius / 1e-6)));
  auto grid = PanelGrid::make(r_min, radius, 16, 2.0);
  RescaledProfiles out;
  double g2 = bp.gamma * bp.gamma;
  for (RadialProfile* p : {&out.w, &out.v, &out.k}) {
    p->grid = grid;
    p->values.resize(grid->size());
    p->derivs.resize(grid->size());
  }
  for (std::size_t i = 0; i < grid->size(); ++i) {
    double y = grid->r()[i];
    double w = bp.w_at(y), dw = bp.dw_at(y);
    double U = bubble_U_radial(y), dU = -2 * y / (4 + y * y);
    out.w.values[i] = w;
    out.w.derivs[i] = dw;
    out.v.values[i] = g2 * (w - U);
    out.v.derivs[i] = g2 * (dw - dU);
    out.k.values[i] = g2 * (out.v.values[i] - v0.value(y));
    out.k.derivs[i] = g2 * (out.v.derivs[i] - v0.deriv(y));
  }
  for (RadialProfile* p : {&out.w, &out.v, &out.k}) p->derivative_asymptote = radius * p->derivs.back();
  return out;
}

double decay_bound_constant(const BranchPoint& bp, double eps, double y_lo, double d0) {
  double y_hi = d0 / bp.theta;
  if (y_hi <= y_lo) throw Error(ErrorCode::Range, "empty decay window");
  double best = -1e300;
  for (std::size_t i = 0; i < bp.t.size(); ++i) {
    double y = std::exp(bp.t[i]);
    if (y < y_lo || y > y_hi) continue;
    best = std::max(best, bp.w[i] - (2 - eps) * std::log(1 / y));
  }
  return best;
}

namespace {

using Shot = std::array<double, 4>;  // w, p, v, q = y v'

struct ShootRhs {
  double eps, mu;
  int m;
  void operator()(const Shot& s, Shot& ds, double t) const {
    double r2 = std::exp(2 * t), w = s[0];
    double e = std::exp(2 * w + eps * w * w);
    double weight = (eps + 2 * (1 + eps * w) * (1 + eps * w)) * e;
    ds[0] = s[1];
    ds[1] = -r2 * (1 + eps * w) * e;
    ds[2] = s[3];
    ds[3] = (m * m - mu * r2 * weight) * s[2];
  }
};

struct ShotResult {
  double end_value;
  int zeros;  // sign changes on (0, R]
};

ShotResult shoot(const BranchPoint& bp, int m, double mu, double tol, bool low_order) {
  double eps = 1.0 / (bp.gamma * bp.gamma);
  ShootRhs rhs{eps, mu, m};
  double t0 = bp.t.front(), r0 = std::exp(t0), r2 = r0 * r0;
  double a = -mu * (eps + 2) / (4.0 * (m + 1));
  // v normalized to 1 at the start; linear so the scale is irrelevant
  Shot s{bp.w.front(), bp.p.front(), 1 + a * r2, m + (m + 2) * a * r2};
  int zeros = 0;
  double prev = s[2];
  for (std::size_t i = 1; i < bp.t.size(); ++i) {
    advance(rhs, s, bp.t[i - 1], bp.t[i], tol, low_order);
    if ((s[2] < 0) != (prev < 0) && s[2] != 0) ++zeros;
    prev = s[2];
  }
  return {s[2], zeros};
}

double eigen_by_shooting(const BranchPoint& bp, int m, int k, double tol, bool low_order) {
  double lo = 0.0, hi = 2.0;
  while (shoot(bp, m, hi, tol, low_order).zeros <= k) {
    hi *= 2;
    if (hi > 1e8) throw Error(ErrorCode::EigensolveFail, "no eigenvalue bracket");
  }
  // narrow until the bracket holds exactly one eigenvalue
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    int z = shoot(bp, m, mid, tol, low_order).zeros;
    if (z <= k)
      lo = mid;
    else
      hi = mid;
    if (shoot(bp, m, lo, tol, low_order).zeros == k && shoot(bp, m, hi, tol, low_order).zeros == k + 1) break;
  }
  auto f = [&](double mu) { return shoot(bp, m, mu, tol, low_order).end_value; };
  double flo = f(lo), fhi = f(hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo < 0) == (fhi < 0)) throw Error(ErrorCode::EigensolveFail, "shooting bracket lost");
  boost::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                  boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

}  // namespace

std::vector<ModeEigenvalue> mode_eigenvalues(const BranchPoint& bp, int mode, int count) {
  if (mode < 0 || count < 1 || count > 6) throw Error(ErrorCode::InvalidArgument, "mode >= 0, 1 <= count <= 6");
  int core = 0;
  for (double tt : bp.t)
    if (tt <= 0) ++core;
  if (core < 50) throw Error(ErrorCode::DiscretizationUnresolved, "core has fewer than 50 samples");
  std::vector<ModeEigenvalue> out;
  double tight = bp.tol;
  for (int k = 0; k < count; ++k) {
    ModeEigenvalue ev;
    ev.mu = eigen_by_shooting(bp, mode, k, tight, false);
    ev.error = std::abs(ev.mu - eigen_by_shooting(bp, mode, k, tight, true));
    out.push_back(ev);
  }
  return out;
}

std::vector<double> mode_eigenvalues_fd(const BranchPoint& bp, int mode, int count, int nodes) {
  double eps = 1.0 / (bp.gamma * bp.gamma);
  double ta = std::max(bp.t.front(), -12.0), tb = bp.t_end();
  // unknowns at t_0..t_{N-1}; t_N = tb carries the Dirichlet zero
  int N = nodes;
  double h = (tb - ta) / N;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N), B = Eigen::MatrixXd::Zero(N, N);
  static const double c[3] = {-30.0, 16.0, -1.0};
  for (int i = 0; i < N; ++i) {
    for (int off = -2; off <= 2; ++off) {
      int j = i + off;
      double coef = -c[std::abs(off)] / (12 * h * h);
      if (j >= N) {  // odd reflection through the Dirichlet node
        if (j == N) continue;
        j = 2 * N - j;
        coef = -coef;
      }
      if (j < 0) {
        if (mode == 0)
          j = -j;  // even reflection: v_t = 0 at the left end
        else
          continue;  // v ≈ 0 deep in the core for m >= 1
      }
      A(i, j) += coef;
    }
    A(i, i) += mode * mode;
    double t = ta + i * h, w = bp.w_at(std::exp(t));
    double weight = (eps + 2 * (1 + eps * w) * (1 + eps * w)) * std::exp(2 * w + eps * w * w);
    B(i, i) = std::exp(2 * t) * weight;
  }
  if (mode == 0) {  // symmetrize the reflected first row
    A.row(0) *= 0.5;
    B(0, 0) *= 0.5;
  }
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::EigensolveFail, "dense pencil");
  std::vector<double> out;
  for (int k = 0; k < count && k < N; ++k) out.push_back(solver.eigenvalues()[k]);
  return out;
}

SpectrumReport radial_spectrum(const BranchPoint& bp, int max_mode, int count_per_mode, double gap_tol) {
  SpectrumReport rep;
  for (int m = 0; m <= max_mode; ++m) {
    auto evs = mode_eigenvalues(bp, m, count_per_mode);
    for (int k = 0; k < int(evs.size()); ++k) {
      SpectrumEntry e;
      e.mode = m;
      e.index = k;
      e.mu = evs[k].mu;
      e.error = evs[k].error;
      e.multiplicity = m == 0 ? 1 : 2;
      e.distance_to_one = e.mu - 1;
      e.near_one = std::abs(e.mu - 1) < gap_tol;
      rep.entries.push_back(e);
      if (e.mu + e.error < 1) rep.morse_index += e.multiplicity;
    }
  }
  std::sort(rep.entries.begin(), rep.entries.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) { return a.mu < b.mu; });
  return rep;
}

}  // namespace mtlab
