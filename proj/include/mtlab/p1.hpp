#pragma once

#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <vector>

#include "mtlab/geometry.hpp"

namespace mtlab {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Gradients of the three barycentric functions on element e (constant per element).
std::array<Vec2, 3> p1_gradients(const Mesh& mesh, int e);
SpMat assemble_stiffness(const Mesh& mesh);

// Boundary edges oriented so the domain lies on the left; outward normal is (d_y, -d_x)/|d|.
std::vector<std::array<int, 2>> boundary_edges(const Mesh& mesh);

// Symmetric 6-point degree-4 rule on the reference triangle: barycentric coordinates and weights
// (weights sum to 1, multiply by the element area).
struct TriRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weights;
};
const TriRule& triangle_rule6();

// Piecewise-linear field with area-weighted recovered nodal gradients.
class P1Field {
 public:
  P1Field(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd values);
  double value(const Vec2& x) const;
  // Recovered (smoothed) gradient interpolated barycentrically.
  Vec2 gradient(const Vec2& x) const;
  // Raw element-wise constant gradient.
  Vec2 element_gradient(const Vec2& x) const;
  bool inside(const Vec2& x) const;
  const Mesh& mesh() const { return *mesh_; }
  const Eigen::VectorXd& values() const { return values_; }

 private:
  int locate(const Vec2& x, std::array<double, 3>& l) const;
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const MeshLocator> locator_;
  Eigen::VectorXd values_;
  std::vector<Vec2> nodal_grad_;
};

}  // namespace mtlab
