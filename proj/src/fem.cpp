#include "mtlab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <cstdio>
#include <set>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "mtlab/error.hpp"
#include "mtlab/liouville.hpp"
#include "mtlab/parallel.hpp"
#include "mtlab/sparse_eigen.hpp"

namespace mtlab {

namespace {

// λ-free nonlinear pieces: load_i = ∫ u e^{u²} φ_i, N_ij = ∫ (1+2u²) e^{u²} φ_i φ_j, total = ∫ e^{u²}.
struct Nonlinear {
  Eigen::VectorXd load;
  SpMat jac;
  double exp_total = 0.0;
};

Nonlinear assemble_nonlinear(const Mesh& mesh, const Eigen::VectorXd& u, bool with_matrix) {
  const auto& rule = triangle_rule6();
  const std::size_t n = mesh.nodes.size(), ne = mesh.elements.size();
  int chunks = thread_count();
  std::vector<Eigen::VectorXd> loads(chunks, Eigen::VectorXd::Zero(n));
  std::vector<Triplets> trips(chunks);
  std::vector<double> totals(chunks, 0.0);
  parallel_chunks(ne, [&](std::size_t b, std::size_t e, int c) {
    auto& load = loads[c];
    auto& trip = trips[c];
    if (with_matrix) trip.reserve((e - b) * 9);
    for (std::size_t el = b; el < e; ++el) {
      const auto& t = mesh.elements[el];
      double area = mesh.element_area(int(el));
      double m[3][3] = {};
      for (std::size_t q = 0; q < rule.weights.size(); ++q) {
        const auto& l = rule.bary[q];
        double uq = l[0] * u[t[0]] + l[1] * u[t[1]] + l[2] * u[t[2]];
        double ex = std::exp(uq * uq), w = rule.weights[q] * area;
        totals[c] += w * ex;
        for (int i = 0; i < 3; ++i) {
          load[t[i]] += w * uq * ex * l[i];
          if (with_matrix)
            for (int j = 0; j < 3; ++j) m[i][j] += w * (1 + 2 * uq * uq) * ex * l[i] * l[j];
        }
      }
      if (with_matrix)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], m[i][j]);
    }
  });
  Nonlinear out;
  out.load = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < chunks; ++c) {
    out.load += loads[c];
    out.exp_total += totals[c];
  }
  if (with_matrix) {
    Triplets all;
    for (auto& t : trips) all.insert(all.end(), t.begin(), t.end());
    out.jac.resize(n, n);
    out.jac.setFromTriplets(all.begin(), all.end());
  }
  return out;
}

struct FreeMap {
  std::vector<int> free;   // free index -> node
  std::vector<int> index;  // node -> free index or -1
  SpMat select;            // nf x n
};

FreeMap free_map(const Mesh& mesh) {
  FreeMap f;
  f.index.assign(mesh.nodes.size(), 0);
  for (int b : mesh.boundary) f.index[b] = -1;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (f.index[i] == 0) {
      f.index[i] = int(f.free.size());
      f.free.push_back(int(i));
    }
  Triplets t;
  for (std::size_t k = 0; k < f.free.size(); ++k) t.emplace_back(int(k), f.free[k], 1.0);
  f.select.resize(f.free.size(), mesh.nodes.size());
  f.select.setFromTriplets(t.begin(), t.end());
  return f;
}

// Symmetric solve with a fallback for indefinite matrices that defeat LDLT.
class SymSolver {
 public:
  explicit SymSolver(const SpMat& a) {
    ldlt_.compute(a);
    ok_ = ldlt_.info() == Eigen::Success;
    if (ok_) {
      Eigen::VectorXd probe = Eigen::VectorXd::Ones(a.rows());
      ok_ = (a * ldlt_.solve(probe) - probe).norm() <= 1e-8 * probe.norm();
    }
    if (!ok_) {
      lu_.analyzePattern(a);
      lu_.factorize(a);
      if (lu_.info() != Eigen::Success) throw Error(ErrorCode::NewtonDiverged, "singular Newton matrix");
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return ok_ ? Eigen::VectorXd(ldlt_.solve(b)) : Eigen::VectorXd(lu_.solve(b));
  }

 private:
  bool ok_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  mutable Eigen::SparseLU<SpMat> lu_;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double theta_estimate(double gamma, double robin) {
  return 0.5 * std::exp(-(gamma * gamma + 4 * kPi * robin) / 2);
}

int nearest_node(const Mesh& mesh, const Vec2& x) {
  int best = 0;
  for (std::size_t i = 1; i < mesh.nodes.size(); ++i)
    if ((mesh.nodes[i] - x).squaredNorm() < (mesh.nodes[best] - x).squaredNorm()) best = int(i);
  return best;
}

std::vector<std::vector<int>> adjacency(const Mesh& mesh) {
  std::vector<std::set<int>> s(mesh.nodes.size());
  for (const auto& t : mesh.elements)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) s[t[i]].insert(t[j]);
  std::vector<std::vector<int>> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i].assign(s[i].begin(), s[i].end());
  return out;
}

// Largest hop count from the peak node among nodes inside radius r.
int core_layers(const Mesh& mesh, const std::vector<std::vector<int>>& adj, int peak, double r) {
  std::vector<int> hops(mesh.nodes.size(), -1);
  std::deque<int> queue{peak};
  hops[peak] = 0;
  int best = 0;
  const Vec2 c = mesh.nodes[peak];
  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    for (int j : adj[i]) {
      if (hops[j] >= 0 || (mesh.nodes[j] - c).norm() >= r) continue;
      hops[j] = hops[i] + 1;
      best = std::max(best, hops[j]);
      queue.push_back(j);
    }
  }
  return best;
}

Vec2 quadratic_peak(const Mesh& mesh, const std::vector<std::vector<int>>& adj, const Eigen::VectorXd& u,
                    int m) {
  const Vec2 c = mesh.nodes[m];
  std::vector<int> pts{m};
  pts.insert(pts.end(), adj[m].begin(), adj[m].end());
  double s = 0;
  for (int j : adj[m]) s = std::max(s, (mesh.nodes[j] - c).norm());
  if (pts.size() < 6 || s == 0) return c;
  Eigen::MatrixXd A(pts.size(), 6);
  Eigen::VectorXd b(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    Vec2 d = (mesh.nodes[pts[k]] - c) / s;
    A.row(k) << 1, d[0], d[1], d[0] * d[0], d[0] * d[1], d[1] * d[1];
    b[k] = u[pts[k]];
  }
  Eigen::VectorXd q = A.colPivHouseholderQr().solve(b);
  Mat2 H;
  H << 2 * q[3], q[4], q[4], 2 * q[5];
  if (!(H.determinant() > 0 && H(0, 0) < 0)) return c;
  Vec2 d = H.lu().solve(-Vec2(q[1], q[2]));
  if (d.norm() > 1.0) return c;
  return c + s * d;
}

struct BranchContext {
  std::shared_ptr<const Domain> domain;
  std::shared_ptr<const Mesh> mesh;
  FreeMap fm;
  SpMat K, Kff;
  std::vector<std::vector<int>> adj;
  int peak = 0;
  const FemOptions* options = nullptr;
};

// Bordered Newton for (u, λ) with u(peak) = gamma.
FemState newton_solve(const BranchContext& ctx, Eigen::VectorXd u, double lambda, double gamma) {
  const auto& mesh = *ctx.mesh;
  const auto& fm = ctx.fm;
  const int pf = fm.index[ctx.peak];
  const double tol = ctx.options->newton_tol;
  for (int b : mesh.boundary) u[b] = 0.0;

  auto measure = [&](const Eigen::VectorXd& uu, double lam, Nonlinear& nl, Eigen::VectorXd& F) {
    F = fm.select * (ctx.K * uu - lam * nl.load);
    double scale = (lam * (fm.select * nl.load)).cwiseAbs().maxCoeff();
    return F.cwiseAbs().maxCoeff() / scale;
  };

  // converged when the full Newton update is below tol; the residual is then checked against residual_tol
  double res = 0, step = 1e300;
  for (int it = 0; it <= ctx.options->max_newton; ++it) {
    Nonlinear nl = assemble_nonlinear(mesh, u, true);
    Eigen::VectorXd F;
    res = measure(u, lambda, nl, F);
    double gap = std::abs(u[ctx.peak] - gamma) / gamma;
    if (!std::isfinite(res) || !(lambda > 0))
      throw Error(ErrorCode::NewtonDiverged, "non-finite iterate, residual " + sci(res));
    if (step <= tol && gap <= 1e-13) {
      if (res > ctx.options->residual_tol)
        throw Error(ErrorCode::NewtonDiverged, "update converged but residual " + sci(res));
      FemState st;
      st.domain = ctx.domain;
      st.mesh = ctx.mesh;
      st.u = u;
      st.lambda = lambda;
      st.gamma = gamma;
      st.peak_node = ctx.peak;
      st.residual_norm = res;
      st.tol = ctx.options->residual_tol;
      st.newton_iterations = it;
      st.energy = u.dot(ctx.K * u);
      st.J_value = 0.5 * st.energy - 0.5 * lambda * nl.exp_total;
      int m = 0;
      u.maxCoeff(&m);
      st.x_lambda = quadratic_peak(mesh, ctx.adj, u, m);
      st.mesh_h = ctx.options->h;
      for (int i = 0; i < u.size(); ++i)
        if (u[i] < -1e-10) throw Error(ErrorCode::NegativeSolution, "node " + std::to_string(i));
      return st;
    }
    SpMat J = ctx.Kff - lambda * SpMat(fm.select * nl.jac * fm.select.transpose());
    SymSolver solver(J);
    Eigen::VectorXd bf = fm.select * nl.load;
    Eigen::VectorXd x1 = solver.solve(-F), x2 = solver.solve(bf);
    double dlam = (gamma - u[ctx.peak] - x1[pf]) / x2[pf];
    Eigen::VectorXd du = fm.select.transpose() * (x1 + dlam * x2);
    step = std::max(du.cwiseAbs().maxCoeff() / gamma, std::abs(dlam) / lambda);
    // damping only while far from the solution; near it the merit sits on the roundoff floor
    double alpha = 1.0;
    if (step > 1e-4) {
      double merit0 = res + gap;
      for (int ls = 0; ls < 12; ++ls, alpha *= 0.5) {
        double lam_trial = lambda + alpha * dlam;
        if (!(lam_trial > 0)) continue;
        Eigen::VectorXd trial = u + alpha * du;
        Nonlinear t = assemble_nonlinear(mesh, trial, false);
        Eigen::VectorXd Ft;
        double r = measure(trial, lam_trial, t, Ft);
        if (std::isfinite(r) && r + std::abs(trial[ctx.peak] - gamma) / gamma < merit0) break;
      }
    }
    u += alpha * du;
    lambda += alpha * dlam;
    if (alpha < 1) step = 1e300;
  }
  throw Error(ErrorCode::NewtonDiverged, "no convergence, last residual " + sci(res));
}

}  // namespace

P1Field FemState::field() const { return P1Field(mesh, u); }

double richardson(double coarse, double fine, double ratio, double order) {
  double f = std::pow(ratio, order);
  return fine + (fine - coarse) / (f - 1);
}

std::vector<FemState> solve_2d_branch(const Domain& domain, double gamma_target, int steps,
                                      const FemOptions& options) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(gamma_target > 0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  Vec2 x0 = options.peak_center ? *options.peak_center : domain.interior_center();
  if (!domain.contains(x0)) throw Error(ErrorCode::OutsideDomain, "peak center outside domain");
  GreenOracle green = GreenOracle::for_domain(domain);
  double robin = green.robin(x0);
  double theta_t = theta_estimate(gamma_target, robin);

  BranchContext ctx;
  ctx.options = &options;
  ctx.domain = std::make_shared<Domain>(domain);
  if (domain.mesh) {
    ctx.mesh = std::make_shared<Mesh>(*domain.mesh);
  } else {
    MeshOptions mo;
    mo.h = options.h;
    mo.grading.center = x0;
    mo.grading.inner_scale = options.inner_scale_factor * theta_t;
    ctx.mesh = std::make_shared<Mesh>(generate_mesh(domain, mo));
  }
  const Mesh& mesh = *ctx.mesh;
  ctx.adj = adjacency(mesh);
  ctx.peak = nearest_node(mesh, x0);
  int layers = core_layers(mesh, ctx.adj, ctx.peak, theta_t);
  if (layers < options.min_core_layers)
    throw Error(ErrorCode::MeshUnderresolved,
                std::to_string(layers) + " element layers inside the core radius " + sci(theta_t));
  ctx.fm = free_map(mesh);
  if (ctx.fm.index[ctx.peak] < 0) throw Error(ErrorCode::MeshUnderresolved, "peak node on the boundary");
  ctx.K = assemble_stiffness(mesh);
  ctx.Kff = ctx.fm.select * ctx.K * ctx.fm.select.transpose();

  double g0 = steps == 1 ? gamma_target
                         : (options.gamma_start > 0 ? options.gamma_start
                                                    : std::max(1.0, gamma_target - 0.5 * (steps - 1)));
  std::vector<double> gammas(steps);
  for (int k = 0; k < steps; ++k)
    gammas[k] = steps == 1 ? gamma_target : g0 + (gamma_target - g0) * k / (steps - 1);

  // bubble γ + U((x-x0)/θ̂)/γ plus (4π/γ)(R(x0) - H(x0,x)), which matches C·G away from x0
  std::vector<double> corr(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    corr[i] = (mesh.nodes[i] - x0).norm() < 1e-14 ? 0.0 : robin - green.regular(x0, mesh.nodes[i]);
  auto ansatz = [&](double g, Eigen::VectorXd& u, double& lambda) {
    double th = theta_estimate(g, robin);
    u.resize(mesh.nodes.size());
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
      double r = (mesh.nodes[i] - x0).norm();
      u[i] = std::max(0.0, g + bubble_U_radial(r / th) / g + 4 * kPi / g * corr[i]);
    }
    lambda = 1.0 / (th * th * g * g * std::exp(g * g));
  };

  std::vector<FemState> out;
  Eigen::VectorXd u;
  double lambda = 0;
  for (int k = 0; k < steps; ++k) {
    if (k == 0) {
      ansatz(gammas[0], u, lambda);
      out.push_back(newton_solve(ctx, u, lambda, gammas[0]));
      continue;
    }
    if (k >= 2) {
      double s = (gammas[k] - gammas[k - 1]) / (gammas[k - 1] - gammas[k - 2]);
      u = out[k - 1].u + s * (out[k - 1].u - out[k - 2].u);
      lambda = out[k - 1].lambda + s * (out[k - 1].lambda - out[k - 2].lambda);
      if (!(lambda > 0)) lambda = out[k - 1].lambda;
    } else {
      u = out[0].u * (gammas[1] / gammas[0]);
      lambda = out[0].lambda;
    }
    // the predictor misses when the core shrinks a lot between steps; restart from the bubble then
    try {
      out.push_back(newton_solve(ctx, u, lambda, gammas[k]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NewtonDiverged) throw;
      ansatz(gammas[k], u, lambda);
      out.push_back(newton_solve(ctx, u, lambda, gammas[k]));
    }
  }
  return out;
}

SpectrumReport spectrum_2d(const FemState& state, int count, double gap_tol) {
  if (count < 1 || count > 8) throw Error(ErrorCode::InvalidArgument, "1 <= count <= 8");
  const Mesh& mesh = *state.mesh;
  FreeMap fm = free_map(mesh);
  SpMat K = fm.select * assemble_stiffness(mesh) * fm.select.transpose();
  Nonlinear nl = assemble_nonlinear(mesh, state.u, true);
  SpMat B = state.lambda * SpMat(fm.select * nl.jac * fm.select.transpose());
  EigenPairs pairs = shift_invert_eigs(K, B, 0.5, count);
  // refine the cluster near 1 with a shift at 1
  std::vector<int> near;
  for (int k = 0; k < count; ++k)
    if (std::abs(pairs.values[k] - 1) < 0.1) near.push_back(k);
  if (!near.empty()) {
    EigenPairs cl = shift_invert_eigs(K, B, 1.0, int(near.size()));
    for (std::size_t j = 0; j < near.size(); ++j) {
      pairs.values[near[j]] = cl.values[j];
      pairs.residuals[near[j]] = cl.residuals[j];
    }
  }
  SpectrumReport rep;
  for (int k = 0; k < count; ++k) {
    SpectrumEntry e;
    e.mode = -1;
    e.index = k;
    e.mu = pairs.values[k];
    e.error = pairs.residuals[k];
    e.distance_to_one = e.mu - 1;
    e.near_one = std::abs(e.mu - 1) < gap_tol;
    rep.entries.push_back(e);
    if (e.mu + e.error < 1) ++rep.morse_index;
  }
  std::sort(rep.entries.begin(), rep.entries.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) { return a.mu < b.mu; });
  return rep;
}

namespace {

void ball_recurse(const Vec2& a, const Vec2& b, const Vec2& c, const double ua, const double ub, const double uc,
                  const Vec2& center, double d, double (*g)(double), int depth, double& acc) {
  auto inside = [&](const Vec2& p) { return (p - center).norm() <= d; };
  double area = 0.5 * std::abs((b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0]);
  int in = inside(a) + inside(b) + inside(c);
  double far = std::min({(a - center).norm(), (b - center).norm(), (c - center).norm()});
  double diam = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
  if (in == 0 && far > d + diam) return;
  const auto& rule = triangle_rule6();
  if (in == 3 || depth == 0) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& l = rule.bary[q];
      Vec2 p = l[0] * a + l[1] * b + l[2] * c;
      if (in != 3 && !inside(p)) continue;
      acc += rule.weights[q] * area * g(l[0] * ua + l[1] * ub + l[2] * uc);
    }
    return;
  }
  Vec2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  double uab = 0.5 * (ua + ub), ubc = 0.5 * (ub + uc), uca = 0.5 * (uc + ua);
  ball_recurse(a, ab, ca, ua, uab, uca, center, d, g, depth - 1, acc);
  ball_recurse(ab, b, bc, uab, ub, ubc, center, d, g, depth - 1, acc);
  ball_recurse(ca, bc, c, uca, ubc, uc, center, d, g, depth - 1, acc);
  ball_recurse(ab, bc, ca, uab, ubc, uca, center, d, g, depth - 1, acc);
}

}  // namespace

double ball_integral(const FemState& state, const Vec2& center, double d, double (*g)(double)) {
  const Mesh& mesh = *state.mesh;
  double acc = 0;
  for (const auto& t : mesh.elements)
    ball_recurse(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], state.u[t[0]], state.u[t[1]],
                 state.u[t[2]], center, d, g, 6, acc);
  return state.lambda * acc;
}

FarFieldRatio far_field_ratio(const FemState& state, const std::vector<Vec2>& samples, const GreenOracle& green) {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "no sample points");
  FarFieldRatio out;
  out.d = 0.25 * state.domain->inradius();
  P1Field f = state.field();
  for (const Vec2& x : samples) {
    if ((x - state.x_lambda).norm() < 2 * out.d)
      throw Error(ErrorCode::SampleTooClose, "sample within 2d of the peak");
    if (!state.domain->contains(x) || state.domain->distance_to_boundary(x) < 1e-12)
      throw Error(ErrorCode::OutsideDomain, "sample not interior");
    out.ratios.push_back(f.value(x) / green.green(state.x_lambda, x));
  }
  for (double r : out.ratios) out.ratio += r;
  out.ratio /= double(out.ratios.size());
  out.c_lambda = ball_integral(state, state.x_lambda, out.d, [](double u) { return u * std::exp(u * u); });
  return out;
}

}  // namespace mtlab
