#include "mtlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mtlab/error.hpp"

namespace mtlab {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return d1 * d2 < 0 && d3 * d4 < 0;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  return a;
}

}  // namespace

double Mesh::element_area(int e) const {
  const auto& t = elements[e];
  return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
}

double Mesh::element_diameter(int e) const {
  const auto& t = elements[e];
  return std::max({(nodes[t[0]] - nodes[t[1]]).norm(), (nodes[t[1]] - nodes[t[2]]).norm(),
                   (nodes[t[2]] - nodes[t[0]]).norm()});
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (std::size_t e = 0; e < elements.size(); ++e) h = std::max(h, element_diameter(int(e)));
  return h;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "nodes " << mesh.nodes.size() << " elements " << mesh.elements.size() << " boundary "
      << mesh.boundary.size() << "\n";
  char buf[64];
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p[0], p[1]);
    out << buf;
  }
  for (const auto& t : mesh.elements) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  for (int b : mesh.boundary) out << b << "\n";
}

Mesh read_mesh(std::istream& in) {
  std::string w1, w2, w3;
  long n = 0, m = 0, b = 0;
  if (!(in >> w1 >> n >> w2 >> m >> w3 >> b) || w1 != "nodes" || w2 != "elements" ||
      w3 != "boundary" || n < 0 || m < 0 || b < 0) {
    throw Error(ErrorCode::Io, "bad mesh header");
  }
  Mesh mesh;
  mesh.nodes.resize(n);
  for (auto& p : mesh.nodes)
    if (!(in >> p[0] >> p[1])) throw Error(ErrorCode::Io, "truncated node list");
  mesh.elements.resize(m);
  for (auto& t : mesh.elements) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw Error(ErrorCode::Io, "truncated element list");
    for (int k : t)
      if (k < 0 || k >= n) throw Error(ErrorCode::Io, "element references missing node");
  }
  mesh.boundary.resize(b);
  for (auto& i : mesh.boundary) {
    if (!(in >> i)) throw Error(ErrorCode::Io, "truncated boundary list");
    if (i < 0 || i >= n) throw Error(ErrorCode::Io, "boundary references missing node");
  }
  return mesh;
}

Domain Domain::unit_disk() { return Domain(); }

Domain Domain::rectangle(double width, double height, const Vec2& center) {
  Domain d;
  d.kind_ = Kind::Rectangle;
  d.width_ = width;
  d.height_ = height;
  d.rect_center_ = center;
  d.validate();
  return d;
}

Domain Domain::polygon(std::vector<Vec2> vertices) {
  Domain d;
  d.kind_ = Kind::Polygon;
  d.vertices_ = std::move(vertices);
  d.validate();
  return d;
}

Domain Domain::punctured(const Domain& base, const Vec2& hole_center, double hole_radius) {
  if (base.kind() == Kind::Punctured) {
    throw Error(ErrorCode::InvalidArgument, "nested punctures are not supported");
  }
  Domain d;
  d.kind_ = Kind::Punctured;
  Domain b = base;
  b.mesh.reset();
  b.grading.reset();
  d.base_ = std::make_shared<const Domain>(std::move(b));
  d.hole_center_ = hole_center;
  d.hole_radius_ = hole_radius;
  d.validate();
  return d;
}

std::string Domain::kind_name() const {
  switch (kind_) {
    case Kind::UnitDisk: return "unit_disk";
    case Kind::Rectangle: return "rectangle";
    case Kind::Polygon: return "polygon";
    case Kind::Punctured: return "punctured";
  }
  return "unknown";
}

std::vector<Vec2> Domain::outer_polygon() const {
  switch (kind_) {
    case Kind::Rectangle: {
      double a = width_ / 2, b = height_ / 2;
      const Vec2& c = rect_center_;
      return {c + Vec2(-a, -b), c + Vec2(a, -b), c + Vec2(a, b), c + Vec2(-a, b)};
    }
    case Kind::Polygon: return vertices_;
    case Kind::Punctured: return base_->outer_polygon();
    default: return {};
  }
}

void Domain::validate() const {
  switch (kind_) {
    case Kind::UnitDisk: return;
    case Kind::Rectangle:
      if (!(width_ > 0 && height_ > 0)) throw Error(ErrorCode::InvalidArgument, "rectangle sides must be positive");
      return;
    case Kind::Polygon: {
      const auto& v = vertices_;
      std::size_t n = v.size();
      if (n < 3) throw Error(ErrorCode::InvalidArgument, "polygon needs at least 3 vertices");
      double area = 0.0;
      for (std::size_t i = 0; i < n; ++i) area += cross(v[i], v[(i + 1) % n]);
      if (!(area > 0)) throw Error(ErrorCode::InvalidArgument, "polygon must be positively oriented");
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (j == i + 1 || (i == 0 && j == n - 1)) continue;
          if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
            throw Error(ErrorCode::InvalidArgument, "polygon is not simple");
          }
        }
      }
      return;
    }
    case Kind::Punctured:
      if (!(hole_radius_ > 0)) throw Error(ErrorCode::InvalidArgument, "hole radius must be positive");
      if (!base_->contains(hole_center_) || base_->distance_to_boundary(hole_center_) <= hole_radius_) {
        throw Error(ErrorCode::InvalidArgument, "hole closure must lie inside the base domain");
      }
      return;
  }
}

double Domain::distance_to_outer(const Vec2& x) const {
  switch (kind_) {
    case Kind::UnitDisk: return std::abs(1.0 - x.norm());
    case Kind::Punctured: return base_->distance_to_outer(x);
    default: {
      auto poly = outer_polygon();
      double d = 1e300;
      for (std::size_t i = 0; i < poly.size(); ++i)
        d = std::min(d, segment_distance(x, poly[i], poly[(i + 1) % poly.size()]));
      return d;
    }
  }
}

bool Domain::contains(const Vec2& x) const {
  switch (kind_) {
    case Kind::UnitDisk: return x.squaredNorm() < 1.0;
    case Kind::Rectangle: {
      Vec2 d = x - rect_center_;
      return std::abs(d[0]) < width_ / 2 && std::abs(d[1]) < height_ / 2;
    }
    case Kind::Polygon: {
      bool in = false;
      const auto& v = vertices_;
      for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if ((v[i][1] > x[1]) != (v[j][1] > x[1]) &&
            x[0] < (v[j][0] - v[i][0]) * (x[1] - v[i][1]) / (v[j][1] - v[i][1]) + v[i][0]) {
          in = !in;
        }
      }
      return in && distance_to_outer(x) > 0.0;
    }
    case Kind::Punctured:
      return base_->contains(x) && (x - hole_center_).norm() > hole_radius_;
  }
  return false;
}

double Domain::distance_to_boundary(const Vec2& x) const {
  if (kind_ == Kind::Punctured) {
    return std::min(base_->distance_to_boundary(x), std::abs((x - hole_center_).norm() - hole_radius_));
  }
  return distance_to_outer(x);
}

Vec2 Domain::interior_center() const {
  switch (kind_) {
    case Kind::UnitDisk: return Vec2::Zero();
    case Kind::Rectangle: return rect_center_;
    case Kind::Polygon: {
      double a = 0.0;
      Vec2 c = Vec2::Zero();
      const auto& v = vertices_;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % v.size()];
        double w = cross(p, q);
        a += w;
        c += w * (p + q);
      }
      return c / (3.0 * a);
    }
    case Kind::Punctured: return base_->interior_center();
  }
  return Vec2::Zero();
}

double Domain::inradius() const {
  switch (kind_) {
    case Kind::UnitDisk: return 1.0;
    case Kind::Rectangle: return std::min(width_, height_) / 2;
    default: break;
  }
  // sampled maximum of the boundary distance
  auto poly = outer_polygon();
  Vec2 lo(-1, -1), hi(1, 1);
  if (!poly.empty()) {
    lo = hi = poly[0];
    for (const auto& p : poly) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }
  double best = 0.0;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      Vec2 x(lo[0] + (hi[0] - lo[0]) * i / n, lo[1] + (hi[1] - lo[1]) * j / n);
      if (contains(x)) best = std::max(best, distance_to_boundary(x));
    }
  }
  return best;
}

double Domain::outer_radius_along(const Vec2& c, double phi) const {
  Vec2 d(std::cos(phi), std::sin(phi));
  switch (kind_) {
    case Kind::UnitDisk: {
      double b = c.dot(d);
      return -b + std::sqrt(b * b + 1.0 - c.squaredNorm());
    }
    case Kind::Punctured: return base_->outer_radius_along(c, phi);
    default: {
      auto poly = outer_polygon();
      double best = 1e300;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        Vec2 a = poly[i], e = poly[(i + 1) % poly.size()] - poly[i];
        double den = cross(d, e);
        if (std::abs(den) < 1e-300) continue;
        double t = cross(a - c, e) / den;
        double s = cross(a - c, d) / den;
        if (t > 0 && s >= -1e-14 && s <= 1 + 1e-14) best = std::min(best, t);
      }
      if (best == 1e300) throw Error(ErrorCode::OutsideDomain, "ray does not meet the boundary");
      return best;
    }
  }
}

std::vector<double> Domain::corner_angles(const Vec2& c) const {
  std::vector<double> out;
  for (const auto& p : outer_polygon()) out.push_back(wrap_angle(std::atan2(p[1] - c[1], p[0] - c[0])));
  return out;
}

Domain domain_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error(ErrorCode::ConfigInvalid, "domain.kind missing");
  std::string kind = j.at("kind").get<std::string>();
  auto vec = [](const nlohmann::json& a, const char* field) {
    if (!a.is_array() || a.size() != 2) throw Error(ErrorCode::ConfigInvalid, std::string("domain.") + field + " must be [x,y]");
    return Vec2(a[0].get<double>(), a[1].get<double>());
  };
  Domain d;
  try {
    if (kind == "unit_disk") {
      d = Domain::unit_disk();
    } else if (kind == "rectangle") {
      Vec2 c = j.contains("center") ? vec(j["center"], "center") : Vec2::Zero();
      d = Domain::rectangle(j.at("width").get<double>(), j.at("height").get<double>(), c);
    } else if (kind == "polygon") {
      std::vector<Vec2> v;
      for (const auto& p : j.at("vertices")) v.push_back(vec(p, "vertices"));
      d = Domain::polygon(std::move(v));
    } else if (kind == "punctured") {
      Domain base = domain_from_json(j.at("base"));
      d = Domain::punctured(base, vec(j.at("hole_center"), "hole_center"), j.at("hole_radius").get<double>());
    } else {
      throw Error(ErrorCode::ConfigInvalid, "domain.kind '" + kind + "' unknown");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("domain: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::ConfigInvalid, e.what());
    throw;
  }
  if (j.contains("grading")) {
    Grading g;
    const auto& gj = j["grading"];
    if (gj.contains("center")) g.center = vec(gj["center"], "grading.center");
    if (gj.contains("inner_scale")) g.inner_scale = gj["inner_scale"].get<double>();
    if (!(g.inner_scale > 0)) throw Error(ErrorCode::ConfigInvalid, "domain.grading.inner_scale must be positive");
    d.grading = g;
  }
  return d;
}

nlohmann::json domain_to_json(const Domain& d) {
  nlohmann::json j;
  j["kind"] = d.kind_name();
  switch (d.kind()) {
    case Domain::Kind::UnitDisk: break;
    case Domain::Kind::Rectangle:
      j["width"] = d.width();
      j["height"] = d.height();
      j["center"] = {d.rect_center()[0], d.rect_center()[1]};
      break;
    case Domain::Kind::Polygon:
      j["vertices"] = nlohmann::json::array();
      for (const auto& v : d.vertices()) j["vertices"].push_back({v[0], v[1]});
      break;
    case Domain::Kind::Punctured:
      j["base"] = domain_to_json(d.base());
      j["hole_center"] = {d.hole_center()[0], d.hole_center()[1]};
      j["hole_radius"] = d.hole_radius();
      break;
  }
  if (d.grading) {
    j["grading"] = {{"center", {d.grading->center[0], d.grading->center[1]}},
                    {"inner_scale", d.grading->inner_scale}};
  }
  return j;
}

namespace {

// Uniform angles with corner directions snapped onto the nearest grid angle.
std::vector<double> ring_angles(const Domain& domain, const Vec2& c, int n) {
  std::vector<double> phi(n);
  for (int j = 0; j < n; ++j) phi[j] = 2 * kPi * j / n;
  std::vector<int> used;
  for (double a : domain.corner_angles(c)) {
    int j = int(std::lround(a / (2 * kPi) * n)) % n;
    if (std::find(used.begin(), used.end(), j) != used.end()) {
      throw Error(ErrorCode::MeshUnderresolved, "two corners snap to one angle; decrease h");
    }
    used.push_back(j);
    phi[j] = j == 0 && a > kPi ? a - 2 * kPi : a;
  }
  return phi;
}

void add_ring_band(Mesh& mesh, const std::vector<double>& phi, int inner, int outer, int n) {
  for (int j = 0; j < n; ++j) {
    int jn = (j + 1) % n;
    int a0 = inner + j, a1 = inner + jn, b0 = outer + j, b1 = outer + jn;
    double p1 = jn == 0 ? 2 * kPi + phi[0] : phi[jn];
    double mid = wrap_angle(0.5 * (phi[j] + p1));
    int quadrant = int(mid / (kPi / 2));
    if (quadrant % 2 == 0) {
      mesh.elements.push_back({a0, a1, b1});
      mesh.elements.push_back({a0, b1, b0});
    } else {
      mesh.elements.push_back({a0, a1, b0});
      mesh.elements.push_back({a1, b1, b0});
    }
  }
}

void orient(Mesh& mesh) {
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    if (mesh.element_area(int(e)) < 0) std::swap(mesh.elements[e][1], mesh.elements[e][2]);
  }
}

}  // namespace

Mesh generate_mesh(const Domain& domain, const MeshOptions& options) {
  if (!(options.h > 0)) throw Error(ErrorCode::InvalidArgument, "mesh step must be positive");
  int n = std::max(options.min_angles, 8 * int(std::ceil(2 * kPi / options.h / 8.0)));
  Mesh mesh;
  if (domain.kind() == Domain::Kind::Punctured) {
    Vec2 c = domain.hole_center();
    double eps = domain.hole_radius();
    auto phi = ring_angles(domain, c, n);
    std::vector<double> rb(n);
    double rmin = 1e300;
    for (int j = 0; j < n; ++j) {
      rb[j] = domain.outer_radius_along(c, phi[j]);
      rmin = std::min(rmin, rb[j]);
    }
    int rings = std::max(4, int(std::ceil(std::log(rmin / eps) / (2 * kPi / n))));
    for (int k = 0; k <= rings; ++k) {
      double s = double(k) / rings;
      for (int j = 0; j < n; ++j) {
        double r = k == 0 ? eps : (k == rings ? rb[j] : eps * std::pow(rb[j] / eps, s));
        mesh.nodes.push_back(c + r * Vec2(std::cos(phi[j]), std::sin(phi[j])));
      }
    }
    for (int k = 0; k < rings; ++k) add_ring_band(mesh, phi, k * n, (k + 1) * n, n);
    for (int j = 0; j < n; ++j) mesh.boundary.push_back(j);
    for (int j = 0; j < n; ++j) mesh.boundary.push_back(rings * n + j);
    orient(mesh);
    return mesh;
  }

  Vec2 c = options.grading.center;
  if (!domain.contains(c)) throw Error(ErrorCode::OutsideDomain, "grading center outside domain");
  auto phi = ring_angles(domain, c, n);
  std::vector<double> rb(n);
  double rmin = 1e300;
  for (int j = 0; j < n; ++j) {
    rb[j] = domain.outer_radius_along(c, phi[j]);
    rmin = std::min(rmin, rb[j]);
  }
  double rho1 = options.grading.inner_scale / rmin;
  if (!(rho1 < 0.5)) throw Error(ErrorCode::InvalidArgument, "inner scale too large for domain");
  double dt = 2 * kPi / n;
  int rings = std::max(2, int(std::ceil(std::log(1.0 / rho1) / dt)) + 1);
  double step = std::log(1.0 / rho1) / (rings - 1);
  mesh.nodes.push_back(c);
  for (int k = 1; k <= rings; ++k) {
    double rho = k == rings ? 1.0 : rho1 * std::exp((k - 1) * step);
    for (int j = 0; j < n; ++j) {
      double r = k == rings ? rb[j] : rmin * rho * std::pow(rb[j] / rmin, rho);
      mesh.nodes.push_back(c + r * Vec2(std::cos(phi[j]), std::sin(phi[j])));
    }
  }
  for (int j = 0; j < n; ++j) mesh.elements.push_back({0, 1 + j, 1 + (j + 1) % n});
  for (int k = 1; k < rings; ++k) add_ring_band(mesh, phi, 1 + (k - 1) * n, 1 + k * n, n);
  for (int j = 0; j < n; ++j) mesh.boundary.push_back(1 + (rings - 1) * n + j);
  orient(mesh);
  return mesh;
}

void validate_mesh(const Domain& domain, const Mesh& mesh, double tol) {
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    if (!(mesh.element_area(int(e)) > 0)) {
      throw Error(ErrorCode::InvalidArgument, "element " + std::to_string(e) + " has non-positive area");
    }
  }
  for (int b : mesh.boundary) {
    const Vec2& p = mesh.nodes[b];
    double d = domain.distance_to_boundary(p);
    if (domain.kind() == Domain::Kind::UnitDisk) d = std::abs(p.norm() - 1.0);
    if (d > tol) {
      throw Error(ErrorCode::InvalidArgument, "boundary node " + std::to_string(b) + " off the boundary");
    }
  }
}

std::array<double, 3> barycentric(const Mesh& mesh, int e, const Vec2& x) {
  const auto& t = mesh.elements[e];
  const Vec2 &a = mesh.nodes[t[0]], &b = mesh.nodes[t[1]], &c = mesh.nodes[t[2]];
  double det = cross(b - a, c - a);
  double l1 = cross(x - a, c - a) / det;
  double l2 = cross(b - a, x - a) / det;
  return {1.0 - l1 - l2, l1, l2};
}

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(&mesh) {
  std::size_t m = mesh.elements.size();
  elo_.resize(m);
  ehi_.resize(m);
  Vec2 lo = Vec2::Constant(1e300), hi = Vec2::Constant(-1e300);
  for (std::size_t e = 0; e < m; ++e) {
    const auto& t = mesh.elements[e];
    elo_[e] = mesh.nodes[t[0]].cwiseMin(mesh.nodes[t[1]]).cwiseMin(mesh.nodes[t[2]]);
    ehi_[e] = mesh.nodes[t[0]].cwiseMax(mesh.nodes[t[1]]).cwiseMax(mesh.nodes[t[2]]);
    lo = lo.cwiseMin(elo_[e]);
    hi = hi.cwiseMax(ehi_[e]);
  }
  cells_.push_back(Cell{lo, hi, -1, {}});
  std::vector<int> all(m);
  for (std::size_t e = 0; e < m; ++e) all[e] = int(e);
  build(0, std::move(all), 0);
}

void MeshLocator::build(int cell, std::vector<int> elems, int depth) {
  if (elems.size() <= 12 || depth >= 40) {
    cells_[cell].elems = std::move(elems);
    return;
  }
  Vec2 lo = cells_[cell].lo, hi = cells_[cell].hi, mid = 0.5 * (lo + hi);
  int first = int(cells_.size());
  cells_[cell].child = first;
  std::array<std::vector<int>, 4> parts;
  for (int q = 0; q < 4; ++q) {
    Vec2 clo((q & 1) ? mid[0] : lo[0], (q & 2) ? mid[1] : lo[1]);
    Vec2 chi((q & 1) ? hi[0] : mid[0], (q & 2) ? hi[1] : mid[1]);
    cells_.push_back(Cell{clo, chi, -1, {}});
    for (int e : elems) {
      if (elo_[e][0] <= chi[0] && ehi_[e][0] >= clo[0] && elo_[e][1] <= chi[1] && ehi_[e][1] >= clo[1]) {
        parts[q].push_back(e);
      }
    }
  }
  // stop splitting when it does not separate anything
  std::size_t largest = 0;
  for (const auto& p : parts) largest = std::max(largest, p.size());
  if (largest == elems.size()) {
    cells_.resize(first);
    cells_[cell].child = -1;
    cells_[cell].elems = std::move(elems);
    return;
  }
  for (int q = 0; q < 4; ++q) build(first + q, std::move(parts[q]), depth + 1);
}

int MeshLocator::locate(const Vec2& x, std::array<double, 3>* bary) const {
  int cell = 0;
  const Cell* c = &cells_[0];
  if (x[0] < c->lo[0] || x[0] > c->hi[0] || x[1] < c->lo[1] || x[1] > c->hi[1]) return -1;
  while (c->child >= 0) {
    Vec2 mid = 0.5 * (c->lo + c->hi);
    int q = (x[0] >= mid[0] ? 1 : 0) + (x[1] >= mid[1] ? 2 : 0);
    cell = c->child + q;
    c = &cells_[cell];
  }
  int best = -1;
  double best_min = -1e300;
  std::array<double, 3> best_l{};
  for (int e : c->elems) {
    auto l = barycentric(*mesh_, e, x);
    double mn = std::min({l[0], l[1], l[2]});
    if (mn > best_min) {
      best_min = mn;
      best = e;
      best_l = l;
    }
  }
  if (best < 0 || best_min < -1e-10) return -1;
  if (bary) *bary = best_l;
  return best;
}

}  // namespace mtlab
