#include "mtlab/p1.hpp"

#include <map>

#include "mtlab/error.hpp"

namespace mtlab {

std::array<Vec2, 3> p1_gradients(const Mesh& mesh, int e) {
  const auto& t = mesh.elements[e];
  const Vec2 &a = mesh.nodes[t[0]], &b = mesh.nodes[t[1]], &c = mesh.nodes[t[2]];
  double det = (b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0];
  // ∇λ_i = rot90(opposite edge)/det
  Vec2 g0((b[1] - c[1]) / det, (c[0] - b[0]) / det);
  Vec2 g1((c[1] - a[1]) / det, (a[0] - c[0]) / det);
  Vec2 g2((a[1] - b[1]) / det, (b[0] - a[0]) / det);
  return {g0, g1, g2};
}

SpMat assemble_stiffness(const Mesh& mesh) {
  Triplets trip;
  trip.reserve(mesh.elements.size() * 9);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    auto g = p1_gradients(mesh, int(e));
    double area = mesh.element_area(int(e));
    const auto& t = mesh.elements[e];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], area * g[i].dot(g[j]));
  }
  SpMat k(mesh.nodes.size(), mesh.nodes.size());
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

std::vector<std::array<int, 2>> boundary_edges(const Mesh& mesh) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : mesh.elements) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      count[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  std::vector<std::array<int, 2>> out;
  for (const auto& t : mesh.elements) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (count[{std::min(a, b), std::max(a, b)}] == 1) out.push_back({a, b});
    }
  }
  return out;
}

const TriRule& triangle_rule6() {
  static const TriRule rule = [] {
    TriRule r;
    const double a1 = 0.445948490915965, w1 = 0.223381589678011;
    const double a2 = 0.091576213509771, w2 = 0.109951743655322;
    for (double a : {a1}) {
      double b = 1 - 2 * a;
      r.bary = {{a, a, b}, {a, b, a}, {b, a, a}};
      r.weights = {w1, w1, w1};
    }
    double b2 = 1 - 2 * a2;
    r.bary.push_back({a2, a2, b2});
    r.bary.push_back({a2, b2, a2});
    r.bary.push_back({b2, a2, a2});
    r.weights.insert(r.weights.end(), {w2, w2, w2});
    return r;
  }();
  return rule;
}

P1Field::P1Field(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != Eigen::Index(mesh_->nodes.size())) {
    throw Error(ErrorCode::InvalidArgument, "field size does not match mesh");
  }
  locator_ = std::make_shared<MeshLocator>(*mesh_);
  nodal_grad_.assign(mesh_->nodes.size(), Vec2::Zero());
  std::vector<double> wsum(mesh_->nodes.size(), 0.0);
  for (std::size_t e = 0; e < mesh_->elements.size(); ++e) {
    auto g = p1_gradients(*mesh_, int(e));
    const auto& t = mesh_->elements[e];
    Vec2 ge = values_[t[0]] * g[0] + values_[t[1]] * g[1] + values_[t[2]] * g[2];
    double a = mesh_->element_area(int(e));
    for (int k = 0; k < 3; ++k) {
      nodal_grad_[t[k]] += a * ge;
      wsum[t[k]] += a;
    }
  }
  for (std::size_t i = 0; i < nodal_grad_.size(); ++i)
    if (wsum[i] > 0) nodal_grad_[i] /= wsum[i];
}

int P1Field::locate(const Vec2& x, std::array<double, 3>& l) const {
  int e = locator_->locate(x, &l);
  if (e < 0) throw Error(ErrorCode::OutsideDomain, "point outside mesh");
  return e;
}

bool P1Field::inside(const Vec2& x) const { return locator_->locate(x) >= 0; }

double P1Field::value(const Vec2& x) const {
  std::array<double, 3> l;
  const auto& t = mesh_->elements[locate(x, l)];
  return l[0] * values_[t[0]] + l[1] * values_[t[1]] + l[2] * values_[t[2]];
}

Vec2 P1Field::gradient(const Vec2& x) const {
  std::array<double, 3> l;
  const auto& t = mesh_->elements[locate(x, l)];
  return l[0] * nodal_grad_[t[0]] + l[1] * nodal_grad_[t[1]] + l[2] * nodal_grad_[t[2]];
}

Vec2 P1Field::element_gradient(const Vec2& x) const {
  std::array<double, 3> l;
  int e = locate(x, l);
  auto g = p1_gradients(*mesh_, e);
  const auto& t = mesh_->elements[e];
  return values_[t[0]] * g[0] + values_[t[1]] * g[1] + values_[t[2]] * g[2];
}

}  // namespace mtlab
