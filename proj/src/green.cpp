#include "mtlab/green.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>

#include "mtlab/error.hpp"
#include "mtlab/p1.hpp"
#include "mtlab/quadrature.hpp"

namespace mtlab {

using cplx = std::complex<double>;

double fundamental_solution(const Vec2& x, const Vec2& y) {
  return -std::log((x - y).norm()) / (2 * kPi);
}

namespace {

Vec2 fundamental_grad_y(const Vec2& x, const Vec2& y) {
  Vec2 d = y - x;
  return -d / (2 * kPi * d.squaredNorm());
}

class DiskPart : public RegularPart {
 public:
  double value(const Vec2& x, const Vec2& y) const override {
    double q = 1.0 - 2.0 * x.dot(y) + x.squaredNorm() * y.squaredNorm();
    return -std::log(q) / (4 * kPi);
  }
  Vec2 grad_y(const Vec2& x, const Vec2& y) const override {
    double q = 1.0 - 2.0 * x.dot(y) + x.squaredNorm() * y.squaredNorm();
    return -(-2.0 * x + 2.0 * x.squaredNorm() * y) / (4 * kPi * q);
  }
  std::optional<Vec2> robin_grad(const Vec2& x) const override {
    return Vec2(x / (kPi * (1.0 - x.squaredNorm())));
  }
  std::optional<Mat2> robin_hess(const Vec2& x) const override {
    double s = 1.0 - x.squaredNorm();
    return Mat2(Mat2::Identity() / (kPi * s) + 2.0 * x * x.transpose() / (kPi * s * s));
  }
};

// Jacobi theta_1 with nome q and its logarithmic derivatives.
class Theta1 {
 public:
  explicit Theta1(double q) {
    for (int n = 0; n < 40; ++n) {
      double c = 2.0 * std::pow(q, (n + 0.5) * (n + 0.5)) * (n % 2 ? -1.0 : 1.0);
      if (std::abs(c) < 1e-300) break;
      coef_.push_back(c);
    }
  }
  cplx value(cplx v) const {
    cplx s = 0.0;
    for (std::size_t n = 0; n < coef_.size(); ++n) s += coef_[n] * std::sin(double(2 * n + 1) * v);
    return s;
  }
  cplx deriv(cplx v) const {
    cplx s = 0.0;
    for (std::size_t n = 0; n < coef_.size(); ++n) {
      double k = double(2 * n + 1);
      s += coef_[n] * k * std::cos(k * v);
    }
    return s;
  }
  // theta_1(v)/v, regular at 0
  cplx over_v(cplx v) const {
    cplx s = 0.0;
    for (std::size_t n = 0; n < coef_.size(); ++n) {
      double k = double(2 * n + 1);
      s += coef_[n] * k * sinc(k * v);
    }
    return s;
  }
  // d/dv of theta_1(v)/v
  cplx over_v_deriv(cplx v) const {
    cplx s = 0.0;
    for (std::size_t n = 0; n < coef_.size(); ++n) {
      double k = double(2 * n + 1);
      s += coef_[n] * k * k * sinc_deriv(k * v);
    }
    return s;
  }

 private:
  static cplx sinc(cplx z) {
    if (std::abs(z) < 1e-3) {
      cplx z2 = z * z;
      return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
    }
    return std::sin(z) / z;
  }
  static cplx sinc_deriv(cplx z) {
    if (std::abs(z) < 1e-3) {
      cplx z2 = z * z;
      return -z / 3.0 + z * z2 / 30.0 - z * z2 * z2 / 840.0;
    }
    return (z * std::cos(z) - std::sin(z)) / (z * z);
  }
  std::vector<double> coef_;
};

// Rectangle [0,a]x[0,b] in local coordinates, short side along x so the nome stays small.
class RectanglePart : public RegularPart {
 public:
  RectanglePart(double width, double height, const Vec2& center)
      : swap_(width > height),
        a_(swap_ ? height : width),
        b_(swap_ ? width : height),
        corner_(center - Vec2(width / 2, height / 2)),
        theta_(std::exp(-kPi * b_ / a_)) {}

  double value(const Vec2& x, const Vec2& y) const override {
    cplx z = local(x), w = local(y);
    double k = kPi / (2 * a_);
    double s = std::log(std::abs(theta_.over_v(k * (z - w)))) + std::log(k) +
               std::log(std::abs(theta_.value(k * (z + w)))) -
               std::log(std::abs(theta_.value(k * (std::conj(z) - w)))) -
               std::log(std::abs(theta_.value(k * (std::conj(z) + w))));
    return s / (2 * kPi);
  }

  Vec2 grad_y(const Vec2& x, const Vec2& y) const override {
    cplx z = local(x), w = local(y);
    double k = kPi / (2 * a_);
    cplx v1 = k * (z - w), v2 = k * (z + w), v3 = k * (std::conj(z) - w), v4 = k * (std::conj(z) + w);
    cplx d = -k * theta_.over_v_deriv(v1) / theta_.over_v(v1) + k * theta_.deriv(v2) / theta_.value(v2) +
             k * theta_.deriv(v3) / theta_.value(v3) - k * theta_.deriv(v4) / theta_.value(v4);
    return global_vec(Vec2(d.real(), -d.imag()) / (2 * kPi));
  }

  std::optional<Vec2> robin_grad(const Vec2& x) const override { return Vec2(2.0 * grad_y(x, x)); }

 private:
  cplx local(const Vec2& p) const {
    Vec2 d = p - corner_;
    return swap_ ? cplx(d[1], d[0]) : cplx(d[0], d[1]);
  }
  Vec2 global_vec(const Vec2& v) const { return swap_ ? Vec2(v[1], v[0]) : v; }

  bool swap_;
  double a_, b_;
  Vec2 corner_;
  Theta1 theta_;
};

// Base closed form plus a method-of-fundamental-solutions correction for the hole.
class CompositePart : public RegularPart {
 public:
  CompositePart(std::shared_ptr<const RegularPart> base, const Vec2& hole, double eps, int charges,
                double ratio)
      : base_(std::move(base)), hole_(hole) {
    int m = charges, n = 2 * charges;
    for (int k = 0; k < m; ++k) {
      double a = 2 * kPi * (k + 0.5) / m;
      charges_.push_back(hole + ratio * eps * Vec2(std::cos(a), std::sin(a)));
    }
    for (int j = 0; j < n; ++j) {
      double a = 2 * kPi * j / n;
      colloc_.push_back(hole + eps * Vec2(std::cos(a), std::sin(a)));
    }
    Eigen::MatrixXd mat(n, m);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < m; ++k) mat(j, k) = base_green(charges_[k], colloc_[j]);
    qr_ = mat.colPivHouseholderQr();
  }

  double value(const Vec2& x, const Vec2& y) const override {
    Eigen::VectorXd c = coeffs(x);
    double h = base_->value(x, y);
    for (std::size_t k = 0; k < charges_.size(); ++k) h += c[k] * base_green(charges_[k], y);
    return h;
  }

  Vec2 grad_y(const Vec2& x, const Vec2& y) const override {
    Eigen::VectorXd c = coeffs(x);
    Vec2 g = base_->grad_y(x, y);
    for (std::size_t k = 0; k < charges_.size(); ++k) g += c[k] * base_green_grad_y(charges_[k], y);
    return g;
  }

  std::optional<Vec2> robin_grad(const Vec2& x) const override {
    auto rb = base_->robin_grad(x);
    if (!rb) return std::nullopt;
    Eigen::Index n = Eigen::Index(colloc_.size());
    Eigen::VectorXd b(n), bx(n), by(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      b[j] = base_green(x, colloc_[j]);
      Vec2 g = base_green_grad_y(colloc_[j], x);
      bx[j] = g[0];
      by[j] = g[1];
    }
    Eigen::VectorXd c = qr_.solve(b), cx = qr_.solve(bx), cy = qr_.solve(by);
    Vec2 g = *rb;
    for (std::size_t k = 0; k < charges_.size(); ++k) {
      double gk = base_green(charges_[k], x);
      g += Vec2(cx[k], cy[k]) * gk + c[k] * base_green_grad_y(charges_[k], x);
    }
    return g;
  }

  std::optional<Mat2> robin_hess(const Vec2& x) const override {
    const double h = 1e-5;
    Mat2 m;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e[i] = h;
      auto gp = robin_grad(x + e), gm = robin_grad(x - e);
      m.col(i) = (*gp - *gm) / (2 * h);
    }
    return Mat2(0.5 * (m + m.transpose()));
  }

 private:
  Eigen::VectorXd coeffs(const Vec2& x) const {
    Eigen::VectorXd b(colloc_.size());
    for (std::size_t j = 0; j < colloc_.size(); ++j) b[j] = base_green(x, colloc_[j]);
    return qr_.solve(b);
  }
  double base_green(const Vec2& x, const Vec2& y) const {
    return fundamental_solution(x, y) - base_->value(x, y);
  }
  Vec2 base_green_grad_y(const Vec2& x, const Vec2& y) const {
    return fundamental_grad_y(x, y) - base_->grad_y(x, y);
  }

  std::shared_ptr<const RegularPart> base_;
  Vec2 hole_;
  std::vector<Vec2> charges_, colloc_;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

// P1 Dirichlet solve per source point; values off the mesh nodes through Green's representation
// formula so that H stays smooth in both arguments.
class FemPart : public RegularPart {
 public:
  FemPart(const Domain& domain, const GreenOptions& opt) {
    if (domain.mesh) {
      mesh_ = *domain.mesh;
    } else {
      MeshOptions mo;
      mo.h = opt.fem_h;
      mo.grading.center = domain.grading ? domain.grading->center : domain.interior_center();
      mo.grading.inner_scale = domain.grading ? domain.grading->inner_scale : 0.05 * domain.inradius();
      mesh_ = generate_mesh(domain, mo);
    }
    std::size_t n = mesh_.nodes.size();
    is_boundary_.assign(n, false);
    for (int b : mesh_.boundary) is_boundary_[b] = true;
    index_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (is_boundary_[i]) {
        index_[i] = bcount_++;
      } else {
        index_[i] = icount_++;
      }
    }
    SpMat k = assemble_stiffness(mesh_);
    Triplets tii, tib, tbi, tbb;
    for (int col = 0; col < k.outerSize(); ++col) {
      for (SpMat::InnerIterator it(k, col); it; ++it) {
        int r = int(it.row()), c = int(it.col());
        int ri = index_[r], ci = index_[c];
        bool rb = is_boundary_[r], cb = is_boundary_[c];
        if (!rb && !cb) tii.emplace_back(ri, ci, it.value());
        if (!rb && cb) tib.emplace_back(ri, ci, it.value());
        if (rb && !cb) tbi.emplace_back(ri, ci, it.value());
        if (rb && cb) tbb.emplace_back(ri, ci, it.value());
      }
    }
    kii_.resize(icount_, icount_);
    kii_.setFromTriplets(tii.begin(), tii.end());
    kib_.resize(icount_, bcount_);
    kib_.setFromTriplets(tib.begin(), tib.end());
    kbi_.resize(bcount_, icount_);
    kbi_.setFromTriplets(tbi.begin(), tbi.end());
    kbb_.resize(bcount_, bcount_);
    kbb_.setFromTriplets(tbb.begin(), tbb.end());
    solver_.compute(kii_);
    if (solver_.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "harmonic factorization failed");
    bnodes_.resize(bcount_);
    for (std::size_t i = 0; i < n; ++i)
      if (is_boundary_[i]) bnodes_[index_[i]] = int(i);
    edges_ = boundary_edges(mesh_);
    double hmax = 0.0;
    for (const auto& e : edges_) hmax = std::max(hmax, (mesh_.nodes[e[1]] - mesh_.nodes[e[0]]).norm());
    near_ = 2.0 * hmax;
    auto field_mesh = std::make_shared<const Mesh>(mesh_);
    mesh_ptr_ = field_mesh;
  }

  double value(const Vec2& x, const Vec2& y) const override {
    auto flux = boundary_flux(x);
    double h = 0.0;
    for (int b = 0; b < bcount_; ++b) h += fundamental_solution(y, mesh_.nodes[bnodes_[b]]) * flux[b];
    const auto& rule = gauss_legendre(8);
    for (const auto& e : edges_) {
      const Vec2 &p = mesh_.nodes[e[0]], &q = mesh_.nodes[e[1]];
      Vec2 d = q - p;
      double len = d.norm();
      Vec2 nu(d[1] / len, -d[0] / len);
      for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
        Vec2 s = p + 0.5 * (1 + rule.nodes[g]) * d;
        double data = fundamental_solution(x, s);
        // ∂_ν of S(y,s) with respect to s
        double dn = fundamental_grad_y(y, s).dot(nu);
        h -= 0.5 * len * rule.weights[g] * data * dn;
      }
    }
    return h;
  }

  Vec2 grad_y(const Vec2& x, const Vec2& y) const override {
    auto flux = boundary_flux(x);
    Vec2 g = Vec2::Zero();
    for (int b = 0; b < bcount_; ++b) g += fundamental_grad_y(mesh_.nodes[bnodes_[b]], y) * flux[b];
    const auto& rule = gauss_legendre(8);
    for (const auto& e : edges_) {
      const Vec2 &p = mesh_.nodes[e[0]], &q = mesh_.nodes[e[1]];
      Vec2 d = q - p;
      double len = d.norm();
      Vec2 nu(d[1] / len, -d[0] / len);
      for (std::size_t gi = 0; gi < rule.nodes.size(); ++gi) {
        Vec2 s = p + 0.5 * (1 + rule.nodes[gi]) * d;
        double data = fundamental_solution(x, s);
        // ∇_y of (s-y).ν/(-2π|s-y|^2)
        Vec2 r = s - y;
        double r2 = r.squaredNorm();
        Vec2 dgrad = (nu - 2.0 * r.dot(nu) * r / r2) / (2 * kPi * r2);
        g -= 0.5 * len * rule.weights[gi] * data * dgrad;
      }
    }
    return g;
  }

  double tolerance() const override { return 1e-13; }

 private:
  std::vector<double> boundary_flux(const Vec2& x) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(x[0], x[1]);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Eigen::VectorXd hb(bcount_);
    for (int b = 0; b < bcount_; ++b) hb[b] = fundamental_solution(x, mesh_.nodes[bnodes_[b]]);
    Eigen::VectorXd hi = solver_.solve(-(kib_ * hb));
    Eigen::VectorXd flux = kbi_ * hi + kbb_ * hb;
    std::vector<double> out(flux.data(), flux.data() + flux.size());
    if (cache_.size() > 4096) cache_.clear();
    cache_.emplace(key, out);
    return out;
  }

  Mesh mesh_;
  std::shared_ptr<const Mesh> mesh_ptr_;
  std::vector<bool> is_boundary_;
  std::vector<int> index_, bnodes_;
  int icount_ = 0, bcount_ = 0;
  SpMat kii_, kib_, kbi_, kbb_;
  Eigen::SimplicialLDLT<SpMat> solver_;
  std::vector<std::array<int, 2>> edges_;
  double near_ = 0.0;
  mutable std::mutex mu_;
  mutable std::map<std::pair<double, double>, std::vector<double>> cache_;
};

std::shared_ptr<const RegularPart> closed_form_part(const Domain& d) {
  switch (d.kind()) {
    case Domain::Kind::UnitDisk: return std::make_shared<DiskPart>();
    case Domain::Kind::Rectangle: return std::make_shared<RectanglePart>(d.width(), d.height(), d.rect_center());
    default: return nullptr;
  }
}

}  // namespace

GreenOracle::GreenOracle(const Domain& domain, GreenMethod method, const GreenOptions& options)
    : domain_(std::make_shared<const Domain>(domain)), method_(method) {
  switch (method) {
    case GreenMethod::ClosedFormDisk:
      if (domain.kind() != Domain::Kind::UnitDisk) {
        throw Error(ErrorCode::InvalidArgument, "closed_form_disk requires the unit disk");
      }
      part_ = std::make_shared<DiskPart>();
      break;
    case GreenMethod::HarmonicFem: part_ = std::make_shared<FemPart>(domain, options); break;
    case GreenMethod::MethodOfImagesComposite:
      if (domain.kind() == Domain::Kind::Punctured) {
        auto base = closed_form_part(domain.base());
        if (!base) throw Error(ErrorCode::InvalidArgument, "image construction needs a disk or rectangle base");
        part_ = std::make_shared<CompositePart>(base, domain.hole_center(), domain.hole_radius(),
                                                options.mfs_charges, options.mfs_charge_ratio);
      } else {
        part_ = closed_form_part(domain);
        if (!part_) throw Error(ErrorCode::InvalidArgument, "image construction needs a disk or rectangle");
      }
      break;
  }
}

GreenOracle GreenOracle::for_domain(const Domain& domain, const GreenOptions& options) {
  switch (domain.kind()) {
    case Domain::Kind::UnitDisk: return GreenOracle(domain, GreenMethod::ClosedFormDisk, options);
    case Domain::Kind::Rectangle: return GreenOracle(domain, GreenMethod::MethodOfImagesComposite, options);
    case Domain::Kind::Punctured:
      if (domain.base().kind() != Domain::Kind::Polygon) {
        return GreenOracle(domain, GreenMethod::MethodOfImagesComposite, options);
      }
      return GreenOracle(domain, GreenMethod::HarmonicFem, options);
    case Domain::Kind::Polygon: return GreenOracle(domain, GreenMethod::HarmonicFem, options);
  }
  return GreenOracle(domain, GreenMethod::HarmonicFem, options);
}

void GreenOracle::check_point(const Vec2& x) const {
  if (!domain_->contains(x)) throw Error(ErrorCode::OutsideDomain, "point outside domain");
}

double GreenOracle::green(const Vec2& x, const Vec2& y) const {
  check_point(x);
  if ((x - y).norm() < 1e-14) throw Error(ErrorCode::CoincidentPoints, "green evaluated at x == y");
  // boundary points are allowed for the field argument and give 0 up to the construction error
  if (!domain_->contains(y) && domain_->distance_to_boundary(y) > 1e-12) {
    throw Error(ErrorCode::OutsideDomain, "field point outside domain");
  }
  return fundamental_solution(x, y) - part_->value(x, y);
}

double GreenOracle::regular(const Vec2& x, const Vec2& y) const {
  check_point(x);
  return part_->value(x, y);
}

Vec2 GreenOracle::green_grad_y(const Vec2& x, const Vec2& y) const {
  check_point(x);
  if ((x - y).norm() < 1e-14) throw Error(ErrorCode::CoincidentPoints, "gradient evaluated at x == y");
  return fundamental_grad_y(x, y) - part_->grad_y(x, y);
}

Vec2 GreenOracle::regular_grad_y(const Vec2& x, const Vec2& y) const {
  check_point(x);
  return part_->grad_y(x, y);
}

double GreenOracle::fd_step() const { return std::max(1e-5, 10.0 * std::sqrt(part_->tolerance())); }

double GreenOracle::robin(const Vec2& x) const {
  check_point(x);
  return part_->value(x, x);
}

Vec2 GreenOracle::robin_grad(const Vec2& x) const {
  check_point(x);
  double h = fd_step();
  if (domain_->distance_to_boundary(x) < 5 * h) throw Error(ErrorCode::TooCloseToBoundary, "robin gradient");
  if (auto g = part_->robin_grad(x)) return *g;
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e[i] = h;
    g[i] = (part_->value(x + e, x + e) - part_->value(x - e, x - e)) / (2 * h);
  }
  return g;
}

Mat2 GreenOracle::robin_hess(const Vec2& x) const {
  check_point(x);
  double h = fd_step();
  if (domain_->distance_to_boundary(x) < 5 * h) throw Error(ErrorCode::TooCloseToBoundary, "robin hessian");
  if (auto m = part_->robin_hess(x)) return *m;
  if (part_->robin_grad(x)) {
    Mat2 m;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e[i] = h;
      m.col(i) = (*part_->robin_grad(x + e) - *part_->robin_grad(x - e)) / (2 * h);
    }
    return 0.5 * (m + m.transpose());
  }
  auto r = [&](const Vec2& p) { return part_->value(p, p); };
  double c = r(x);
  Mat2 m;
  for (int i = 0; i < 2; ++i) {
    Vec2 ei = Vec2::Zero();
    ei[i] = h;
    m(i, i) = (r(x + ei) - 2 * c + r(x - ei)) / (h * h);
  }
  Vec2 e0(h, 0), e1(0, h);
  m(0, 1) = m(1, 0) = (r(x + e0 + e1) - r(x + e0 - e1) - r(x - e0 + e1) + r(x - e0 - e1)) / (4 * h * h);
  return m;
}

}  // namespace mtlab
