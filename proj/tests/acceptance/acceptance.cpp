// End-to-end acceptance checks. Usage: acceptance [name ...]; no names runs all.
// Prints one line per sub-check and one PASS/FAIL line per criterion; exit status 1 if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mtlab/error.hpp"
#include "mtlab/fem.hpp"
#include "mtlab/green.hpp"
#include "mtlab/hierarchy.hpp"
#include "mtlab/kirchhoff_routh.hpp"
#include "mtlab/liouville.hpp"
#include "mtlab/pohozaev.hpp"
#include "mtlab/radial.hpp"
#include "mtlab/reporter.hpp"

using namespace mtlab;

namespace {

struct Criterion {
  bool pass = true;
  void check(const std::string& what, bool ok, double value, double target, double tol) {
    std::printf("  %-4s %-48s value %-22.15g target %-22.15g tol %.3g\n", ok ? "ok" : "FAIL", what.c_str(), value,
                target, tol);
    pass = pass && ok;
  }
  void abs(const std::string& what, double value, double target, double tol) {
    check(what, std::abs(value - target) <= tol, value, target, tol);
  }
  void rel(const std::string& what, double value, double target, double tol) {
    check(what, std::abs(value / target - 1) <= tol, value, target, tol);
  }
};

double U_of(double r) { return -std::log(1 + r * r / 4); }

const Hierarchy& hierarchy() {
  static const Hierarchy h = hierarchy_profiles();
  return h;
}

std::vector<BranchPoint> radial_branch(const std::vector<double>& gammas) {
  std::vector<BranchPoint> out;
  for (double g : gammas) out.push_back(solve_branch_point(g));
  return out;
}

void exact_moments(Criterion& c) {
  const double pi = kPi;
  // published integrals, then the ones derived inside the proofs
  std::vector<std::pair<MomentTag, double>> targets = {
      {MomentTag::Mass, 4 * pi},          {MomentTag::MassPhi0, 0.0},
      {MomentTag::MassRadialRatio, 2 * pi}, {MomentTag::UMassPhi0, 2 * pi},
      {MomentTag::U2MassPhi0, -6 * pi},    {MomentTag::MassDilation, -4 * pi},
      {MomentTag::MassDilationSq, 32 * pi / 3}, {MomentTag::MassGrad1Sq, 2 * pi / 3},
  };
  for (auto [tag, exact] : targets) c.abs(moment_name(tag), moment(tag, 1e-10).value, exact, 1e-8);
}

void one_d_constants(Criterion& c) {
  c.abs("quarter integral of log", scalar_integral_quarter(QuarterKind::Log), 0.25, 1e-10);
  c.abs("quarter integral of log^2", scalar_integral_quarter(QuarterKind::LogSquared), 0.75, 1e-10);
  c.abs("c0", expansion_constants(0.0).c0, 4 * kPi, 1e-4);
  const Hierarchy& h = hierarchy();
  c.abs("r dw/dr asymptote", h.v0.derivative_asymptote, -2.0, 1e-8);
  double p = derivative_decay_fit(h.v0, -2.0).exponent;
  c.check("decay exponent of r dw/dr + 2", p >= 1.8, p, 1.8, 0);
}

void hierarchy_bounds(Criterion& c) {
  const Hierarchy& h = hierarchy();
  const auto& r = h.v0.grid->r();
  std::vector<double> fv(r.size()), fk(r.size()), fs(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    double U = U_of(r[i]);
    fv[i] = forcing_v0(U);
    fk[i] = forcing_k0(U, h.v0.values[i]);
    fs[i] = forcing_s0(U, h.v0.values[i], h.k0.values[i]);
  }
  std::vector<std::tuple<const char*, const RadialProfile*, std::vector<double>*>> ps = {
      {"v0", &h.v0, &fv}, {"k0", &h.k0, &fk}, {"s0", &h.s0, &fs}};
  for (auto& [name, prof, f] : ps) {
    GrowthBound g = growth_bound(*prof, 0.5, 10.0, 1e4);
    c.check(std::string(name) + " growth exponent on [10,1e4]", g.holds, g.exponent, 0.5, 0);
    double res = ode_residual(*prof, *f);
    c.check(std::string(name) + " weighted ODE residual", res <= 1e-7, res, 0, 1e-7);
  }
}

void radial_branch_fits(Criterion& c) {
  auto pts = radial_branch({4, 5, 6, 7, 8, 9, 10});
  auto samples = branch_samples(pts);
  FitReport cl = fit_c_lambda(samples);
  c.rel("C_lambda gamma fit: a", cl.coefficients[0].value, 4 * kPi, 1e-3);
  c.rel("C_lambda gamma fit: b", cl.coefficients[1].value, 4 * kPi, 0.05);

  ExpansionConstants k = expansion_constants(0.0);
  FitReport lg = fit_lambda_gamma(samples, k);
  double b0 = std::exp(k.B[0] / 2), b1 = k.B[1] / 2 * std::exp(-k.B[0] / 2);
  c.rel("sqrt(lambda) gamma fit: beta0", lg.coefficients[0].value, b0, 1e-3);
  // the quadrature gives B2 at roundoff level, so this is a relative test against a near-zero target
  double beta1 = lg.coefficients[1].value;
  c.check("sqrt(lambda) gamma fit: beta1", std::abs(beta1 - b1) <= 0.05 * std::abs(b1), beta1, b1, 0.05);

  for (const auto& p : pts)
    if (p.gamma == 8) c.rel("Dirichlet energy at gamma 8", p.energy, 4 * kPi, 0.02);
}

void radial_spectrum_checks(Criterion& c) {
  std::vector<TrendSample> ts;
  for (double g : {3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0}) {
    BranchPoint bp = solve_branch_point(g);
    ts.push_back({g, bp.theta, radial_spectrum(bp, 1, 2)});
  }
  auto find = [](const TrendSample& t, int mode, int index) {
    for (const auto& e : t.spectrum.entries)
      if (e.mode == mode && e.index == index) return e;
    throw Error(ErrorCode::InvalidArgument, "missing eigenvalue");
  };
  for (const auto& t : ts) {
    if (t.gamma < 4) continue;
    double v = find(t, 0, 0).mu * 2 * t.gamma * t.gamma;
    c.check("mu1 2 gamma^2 at gamma " + std::to_string(int(t.gamma)), v <= 1.1, v, 1.1, 0);
  }
  for (const auto& t : ts) {
    if (t.gamma == 8) c.rel("gamma^4 (mu4 - 1) at gamma 8", std::pow(8.0, 4) * (find(t, 0, 1).mu - 1), 3.0, 0.10);
    if (t.gamma != 3) continue;
    // Λ: half the trace of the closed-form disk Robin Hessian at the peak, which is I/π
    const double Lambda = 1 / kPi;
    auto e = find(t, 1, 0);
    double noise = 100 * std::max(1e-13, e.error);
    if (std::abs(e.mu - 1) < noise) {
      std::printf("  SKIP (mu2 - 1)/theta^2 at gamma 3: gap %.3g below noise %.3g\n", e.mu - 1, noise);
      continue;
    }
    c.rel("(mu2 - 1)/theta^2 at gamma 3", (e.mu - 1) / (t.theta * t.theta), 12 * kPi * Lambda, 0.30);
  }
  // the reporter must mark a below-noise gap as skipped
  std::vector<TrendSample> flat = ts;
  for (auto& t : flat)
    for (auto& e : t.spectrum.entries)
      if (e.mode == 1) e.mu = 1 + 1e-14;
  bool skipped = false;
  for (const auto& co : eigenvalue_trends(flat).coefficients)
    if (co.name == "mu2_minus_1_over_theta2_at_gamma") skipped = co.verdict == Verdict::Skipped;
  c.check("below-noise gap reported SKIPPED", skipped, skipped, 1, 0);
}

void fem_square(Criterion& c) {
  FemOptions o;
  o.h = 0.05;
  FemState s = solve_2d_branch(Domain::rectangle(2, 2), 4.0, 1, o).back();
  SpectrumReport spec = spectrum_2d(s, 4);
  c.check("Morse index", spec.morse_index == 1, spec.morse_index, 1, 0);

  double diam = 0;
  for (std::size_t e = 0; e < s.mesh->elements.size(); ++e) {
    const auto& t = s.mesh->elements[e];
    if (t[0] == s.peak_node || t[1] == s.peak_node || t[2] == s.peak_node)
      diam = std::max(diam, s.mesh->element_diameter(int(e)));
  }
  c.check("|x_lambda - center| within one element", s.x_lambda.norm() <= diam, s.x_lambda.norm(), 0, diam);

  SolutionIdentities id = solution_identity_check(s, 0.25);
  c.check("P(u,u) identity relative gap", id.p.gap <= 1e-3, id.p.gap, 0, 1e-3);
  for (int i = 0; i < 2; ++i)
    c.check("Q_" + std::to_string(i) + "(u,u) identity relative gap", id.q[i].gap <= 1e-3, id.q[i].gap, 0, 1e-3);

  std::map<std::pair<long long, long long>, int> index;
  auto key = [](const Vec2& x) { return std::make_pair(std::llround(x[0] * 1e10), std::llround(x[1] * 1e10)); };
  const auto& nodes = s.mesh->nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) index[key(nodes[i])] = int(i);
  for (int axis = 0; axis < 2; ++axis) {
    double worst = 0;
    std::size_t missing = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Vec2 m = nodes[i];
      m[axis] = -m[axis];
      auto it = index.find(key(m));
      if (it == index.end()) {
        ++missing;
        continue;
      }
      worst = std::max(worst, std::abs(s.u[i] - s.u[it->second]));
    }
    double tol = 10 * o.newton_tol * s.gamma;
    c.check(std::string("reflection error across ") + (axis ? "x" : "y") + " axis", missing == 0 && worst <= tol,
            worst, 0, tol);
  }

  double radial = solve_branch_point(4.0).lambda;
  double lam[2];
  double hs[2] = {0.05, 0.025};
  for (int k = 0; k < 2; ++k) {
    FemOptions od;
    od.h = hs[k];
    lam[k] = solve_2d_branch(Domain::unit_disk(), 4.0, 1, od).back().lambda;
  }
  c.rel("disk lambda(4), extrapolated, vs radial", richardson(lam[0], lam[1]), radial, 1e-4);
}

// closed-form disk Green function, kept separate from the library's
Vec2 reflect(const Vec2& x) { return x / x.squaredNorm(); }
double disk_green(const Vec2& x, const Vec2& y) {
  double image = x.squaredNorm() > 0 ? std::log(x.norm() * (y - reflect(x)).norm()) : 0.0;
  return (image - std::log((y - x).norm())) / (2 * kPi);
}
Vec2 disk_green_grad_y(const Vec2& x, const Vec2& y) {
  Vec2 a = y - x;
  Vec2 g = -a / a.squaredNorm() / (2 * kPi);
  if (x.squaredNorm() > 0) {
    Vec2 b = y - reflect(x);
    g += b / b.squaredNorm() / (2 * kPi);
  }
  return g;
}

void green_pohozaev(Criterion& c) {
  Domain disk = Domain::unit_disk();
  for (Vec2 x0 : {Vec2(0.0, 0.0), Vec2(0.3, 0.1), Vec2(-0.2, 0.5)}) {
    FieldFn G{[x0](const Vec2& y) { return disk_green(x0, y); },
              [x0](const Vec2& y) { return disk_green_grad_y(x0, y); }};
    char at[64];
    std::snprintf(at, sizeof at, " at (%g,%g)", x0[0], x0[1]);
    c.abs(std::string("P(G,G)") + at, p_form(G, G, x0, 0.1, disk).value, -1 / (2 * kPi), 1e-6);
    double dev = radius_independence_check(G, G, x0, {0.02, 0.05, 0.1, 0.2}, disk);
    c.check(std::string("radius independence") + at, dev <= 1e-8, dev, 0, 1e-8);
    // R(x) = -(1/2π) log(1-|x|²)
    Vec2 dR = x0 / (kPi * (1 - x0.squaredNorm()));
    for (int i = 0; i < 2; ++i)
      c.abs("Q_" + std::to_string(i) + "(G,G)" + at, q_form(G, G, x0, 0.1, i, disk).value, -dR[i], 1e-5);
  }
}

void kirchhoff_routh_counts(Criterion& c) {
  auto disk = find_critical_points(GreenOracle::for_domain(Domain::unit_disk()), 1, 100);
  c.check("unit disk k=1 count", disk.points.size() == 1, disk.points.size(), 1, 0);
  if (!disk.points.empty())
    c.check("unit disk critical point at origin", disk.points[0].points[0].norm() <= 1e-8,
            disk.points[0].points[0].norm(), 0, 1e-8);

  GreenOracle holed = GreenOracle::for_domain(Domain::punctured(Domain::unit_disk(), Vec2(0.3, 0), 0.05));
  auto a = find_critical_points(holed, 1, 100);
  auto b = find_critical_points(holed, 1, 200);
  c.check("punctured disk count, 100 seeds", a.points.size() == 2, a.points.size(), 2, 0);
  c.check("punctured disk count, 200 seeds", b.points.size() == 2, b.points.size(), 2, 0);

  auto sq = find_critical_points(GreenOracle::for_domain(Domain::rectangle(2, 2)), 2, 200);
  c.check("square k=2 count", sq.points.empty(), sq.points.size(), 0, 0);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> all = {
      {"exact_moments", exact_moments},
      {"one_d_constants", one_d_constants},
      {"hierarchy_bounds", hierarchy_bounds},
      {"radial_branch_fits", radial_branch_fits},
      {"radial_spectrum", radial_spectrum_checks},
      {"fem_square", fem_square},
      {"green_pohozaev", green_pohozaev},
      {"kirchhoff_routh_counts", kirchhoff_routh_counts},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0, ran = 0;
  for (std::size_t n = 0; n < all.size(); ++n) {
    const auto& [name, fn] = all[n];
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    Criterion c;
    std::printf("[%zu] %s\n", n + 1, name.c_str());
    try {
      fn(c);
    } catch (const Error& e) {
      std::printf("  error: %s\n", e.what());
      c.pass = false;
    }
    std::printf("%s  criterion %zu %s\n", c.pass ? "PASS" : "FAIL", n + 1, name.c_str());
    std::fflush(stdout);
    failed += !c.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matched\n");
    return 2;
  }
  return failed ? 1 : 0;
}
