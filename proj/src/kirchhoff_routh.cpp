#include "mtlab/kirchhoff_routh.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "mtlab/error.hpp"
#include "mtlab/parallel.hpp"

namespace mtlab {

KrValue kr_phi(const std::vector<Vec2>& points, const std::vector<double>& alphas, const GreenOracle& green) {
  const std::size_t k = points.size();
  if (k == 0 || alphas.size() != k) throw Error(ErrorCode::InvalidArgument, "need matching points and weights");
  for (std::size_t i = 0; i < k; ++i) {
    if (!(alphas[i] > 0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
    for (std::size_t j = i + 1; j < k; ++j)
      if ((points[i] - points[j]).norm() < 1e-6)
        throw Error(ErrorCode::CollidingPoints, "points closer than 1e-6");
  }
  KrValue out;
  out.gradient = Eigen::VectorXd::Zero(3 * k);
  for (std::size_t i = 0; i < k; ++i) {
    double a = alphas[i], la = std::log(a);
    double R = green.robin(points[i]);
    Vec2 dR = green.robin_grad(points[i]);
    out.value += a * a * R + 0.5 * (a * a - a * a * la);
    out.gradient.segment<2>(2 * i) += a * a * dR;
    out.gradient[2 * k + i] += 2 * a * R + 0.5 * (a - 2 * a * la);
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      double G = green.green(points[i], points[j]);
      out.value -= a * alphas[j] * G;
      // each unordered pair appears twice in the sum; G is symmetric
      out.gradient.segment<2>(2 * i) -= 2 * a * alphas[j] * green.green_grad_x(points[i], points[j]);
      out.gradient[2 * k + i] -= 2 * alphas[j] * G;
    }
  }
  return out;
}

namespace {

struct Box {
  Vec2 lo, hi;
};

Box outer_box(const Domain& d) {
  const Domain& outer = d.kind() == Domain::Kind::Punctured ? d.base() : d;
  if (outer.kind() == Domain::Kind::UnitDisk) return {Vec2(-1, -1), Vec2(1, 1)};
  auto poly = outer.outer_polygon();
  Box b{poly.front(), poly.front()};
  for (const auto& v : poly) {
    b.lo = b.lo.cwiseMin(v);
    b.hi = b.hi.cwiseMax(v);
  }
  return b;
}

class Search {
 public:
  Search(const GreenOracle& green, int k, const KrSearchOptions& opt)
      : green_(green), k_(k), opt_(opt), margin_(opt.boundary_margin * green.domain().inradius()) {}

  int dim() const { return k_ == 1 ? 2 : 3 * k_; }

  void unpack(const Eigen::VectorXd& z, std::vector<Vec2>& pts, std::vector<double>& al) const {
    pts.resize(k_);
    al.assign(k_, 1.0);
    for (int i = 0; i < k_; ++i) pts[i] = z.segment<2>(2 * i);
    if (k_ > 1)
      for (int i = 0; i < k_; ++i) al[i] = z[2 * k_ + i];
  }

  bool feasible(const Eigen::VectorXd& z) const {
    if (!z.allFinite()) return false;
    std::vector<Vec2> pts;
    std::vector<double> al;
    unpack(z, pts, al);
    const Domain& d = green_.domain();
    for (int i = 0; i < k_; ++i) {
      if (!d.contains(pts[i]) || d.distance_to_boundary(pts[i]) < margin_) return false;
      if (al[i] < opt_.alpha_min || al[i] > opt_.alpha_max) return false;
      for (int j = i + 1; j < k_; ++j)
        if ((pts[i] - pts[j]).norm() < 1e-6) return false;
    }
    return true;
  }

  std::optional<KrValue> eval(const Eigen::VectorXd& z) const {
    if (!feasible(z)) return std::nullopt;
    std::vector<Vec2> pts;
    std::vector<double> al;
    unpack(z, pts, al);
    try {
      KrValue v = kr_phi(pts, al, green_);
      if (k_ == 1) v.gradient.conservativeResize(2);
      if (!v.gradient.allFinite() || !std::isfinite(v.value)) return std::nullopt;
      return v;
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  // centered differences of the analytic gradient
  std::optional<Eigen::MatrixXd> hessian(const Eigen::VectorXd& z) const {
    const int n = dim();
    Eigen::MatrixXd H(n, n);
    for (int c = 0; c < n; ++c) {
      double s = 1e-5 * std::max(1.0, std::abs(z[c]));
      Eigen::VectorXd zp = z, zm = z;
      zp[c] += s;
      zm[c] -= s;
      auto gp = eval(zp), gm = eval(zm);
      if (!gp || !gm) return std::nullopt;
      H.col(c) = (gp->gradient - gm->gradient) / (2 * s);
    }
    return Eigen::MatrixXd(0.5 * (H + H.transpose()));
  }

  std::optional<CriticalPoint> newton(Eigen::VectorXd z) const {
    const double cap = 0.25 * green_.domain().inradius();
    auto cur = eval(z);
    if (!cur) return std::nullopt;
    for (int it = 0; it < opt_.max_iter; ++it) {
      double m0 = cur->gradient.norm();
      if (m0 <= opt_.gradient_tol) return finish(z, *cur);
      auto H = hessian(z);
      if (!H) return std::nullopt;
      // Newton direction, then steepest descent on ½|∇Φ|² if the line search fails
      Eigen::VectorXd dirs[2];
      dirs[0] = H->colPivHouseholderQr().solve(-cur->gradient);
      dirs[1] = -(*H) * cur->gradient;
      bool moved = false;
      for (auto& d : dirs) {
        if (!d.allFinite() || d.norm() == 0) continue;
        if (d.norm() > cap) d *= cap / d.norm();
        double t = 1.0;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
          Eigen::VectorXd trial = z + t * d;
          auto v = eval(trial);
          if (v && v->gradient.norm() < (1 - 1e-4 * t) * m0) {
            z = trial;
            cur = v;
            moved = true;
            break;
          }
        }
        if (moved) break;
      }
      if (!moved) {
        // stalled: accept only if already at the reporting tolerance
        if (m0 <= 1e-8) return finish(z, *cur);
        return std::nullopt;
      }
    }
    if (cur->gradient.norm() <= 1e-8) return finish(z, *cur);
    return std::nullopt;
  }

 private:
  std::optional<CriticalPoint> finish(const Eigen::VectorXd& z, const KrValue& v) const {
    CriticalPoint cp;
    unpack(z, cp.points, cp.alphas);
    cp.value = v.value;
    cp.gradient_norm = v.gradient.norm();
    auto H = hessian(z);
    if (!H) return std::nullopt;
    cp.hessian_eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(*H).eigenvalues();
    // label order does not matter for several points
    std::vector<int> perm(k_);
    for (int i = 0; i < k_; ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&](int a, int b) {
      return cp.points[a][0] < cp.points[b][0] ||
             (cp.points[a][0] == cp.points[b][0] && cp.points[a][1] < cp.points[b][1]);
    });
    CriticalPoint sorted = cp;
    for (int i = 0; i < k_; ++i) {
      sorted.points[i] = cp.points[perm[i]];
      sorted.alphas[i] = cp.alphas[perm[i]];
    }
    return sorted;
  }

  const GreenOracle& green_;
  int k_;
  KrSearchOptions opt_;
  double margin_;
};

double separation(const CriticalPoint& a, const CriticalPoint& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    s += (a.points[i] - b.points[i]).squaredNorm();
    s += (a.alphas[i] - b.alphas[i]) * (a.alphas[i] - b.alphas[i]);
  }
  return std::sqrt(s);
}

}  // namespace

CriticalPointSet find_critical_points(const GreenOracle& green, int k, int seeds, const KrSearchOptions& options) {
  if (k != 1 && k != 2) throw Error(ErrorCode::InvalidArgument, "k must be 1 or 2");
  if (seeds < 50) throw Error(ErrorCode::InvalidArgument, "at least 50 seeds");
  Search search(green, k, options);
  const Domain& domain = green.domain();
  Box box = outer_box(domain);

  // seeds are drawn sequentially so the set does not depend on the thread count
  std::mt19937_64 rng(options.rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> starts;
  while (int(starts.size()) < seeds) {
    Eigen::VectorXd z(search.dim());
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < 2; ++c) z[2 * i + c] = box.lo[c] + (box.hi[c] - box.lo[c]) * unit(rng);
    if (k > 1)
      for (int i = 0; i < k; ++i) z[2 * k + i] = std::exp(std::log(0.5) + std::log(4.0) * unit(rng));
    if (search.feasible(z)) starts.push_back(z);
  }

  std::vector<std::optional<CriticalPoint>> found(starts.size());
  parallel_chunks(starts.size(), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t s = b; s < e; ++s) found[s] = search.newton(starts[s]);
  });

  CriticalPointSet out;
  out.k = k;
  out.seeds = seeds;
  out.rng_seed = options.rng_seed;
  for (auto& f : found) {
    if (!f) continue;
    ++out.converged_seeds;
    bool dup = false;
    for (auto& p : out.points) {
      if (separation(p, *f) < out.dedup_radius) {
        if (f->gradient_norm < p.gradient_norm) p = *f;
        dup = true;
        break;
      }
    }
    if (!dup) out.points.push_back(*f);
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });
  return out;
}

}  // namespace mtlab
