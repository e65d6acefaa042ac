#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtlab/types.hpp"

namespace mtlab {

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> elements;
  std::vector<int> boundary;

  double element_area(int e) const;
  // Longest edge over all elements.
  double max_diameter() const;
  double element_diameter(int e) const;
};

void write_mesh(const Mesh& mesh, std::ostream& out);
Mesh read_mesh(std::istream& in);

struct Grading {
  Vec2 center = Vec2::Zero();
  double inner_scale = 1e-3;  // radius of the first ring around the center
};

struct MeshOptions {
  double h = 0.1;        // step in log-radius, also the angular step
  Grading grading;
  int min_angles = 16;
};

class Domain {
 public:
  enum class Kind { UnitDisk, Rectangle, Polygon, Punctured };

  static Domain unit_disk();
  // Axis-aligned rectangle of the given width and height centered at `center`.
  static Domain rectangle(double width, double height, const Vec2& center = Vec2::Zero());
  static Domain polygon(std::vector<Vec2> vertices);
  static Domain punctured(const Domain& base, const Vec2& hole_center, double hole_radius);

  Kind kind() const { return kind_; }
  std::string kind_name() const;

  bool contains(const Vec2& x) const;
  // Distance to the nearest boundary component (outer boundary or hole).
  double distance_to_boundary(const Vec2& x) const;
  double inradius() const;
  // A point deep inside, used as default grading center.
  Vec2 interior_center() const;

  // Distance from c to the outer boundary along direction phi (c must see the whole boundary).
  double outer_radius_along(const Vec2& c, double phi) const;
  // Angles (relative to c) of polygon corners of the outer boundary.
  std::vector<double> corner_angles(const Vec2& c) const;
  // Distance from x to the outer boundary curve.
  double distance_to_outer(const Vec2& x) const;

  const Domain& base() const { return *base_; }
  const Vec2& hole_center() const { return hole_center_; }
  double hole_radius() const { return hole_radius_; }
  double width() const { return width_; }
  double height() const { return height_; }
  const Vec2& rect_center() const { return rect_center_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  // Outer boundary as a polygon (rectangle corners or polygon vertices); empty for the disk.
  std::vector<Vec2> outer_polygon() const;

  void validate() const;

  std::optional<Mesh> mesh;
  std::optional<Grading> grading;

 private:
  Kind kind_ = Kind::UnitDisk;
  double width_ = 0.0, height_ = 0.0;
  Vec2 rect_center_ = Vec2::Zero();
  std::vector<Vec2> vertices_;
  std::shared_ptr<const Domain> base_;
  Vec2 hole_center_ = Vec2::Zero();
  double hole_radius_ = 0.0;
};

Domain domain_from_json(const nlohmann::json& j);
nlohmann::json domain_to_json(const Domain& d);

// Star-shaped log-polar triangulation around the grading center (or around the hole).
Mesh generate_mesh(const Domain& domain, const MeshOptions& options);
// Checks element orientation and boundary placement; throws on violation.
void validate_mesh(const Domain& domain, const Mesh& mesh, double tol = 1e-12);

// Quadtree point location; graded meshes defeat a uniform bucket grid.
class MeshLocator {
 public:
  explicit MeshLocator(const Mesh& mesh);
  // Returns the element index containing x (or -1) and fills barycentric weights.
  int locate(const Vec2& x, std::array<double, 3>* bary = nullptr) const;

 private:
  struct Cell {
    Vec2 lo, hi;
    int child = -1;
    std::vector<int> elems;
  };
  void build(int cell, std::vector<int> elems, int depth);

  const Mesh* mesh_;
  std::vector<Cell> cells_;
  std::vector<Vec2> elo_, ehi_;
};

std::array<double, 3> barycentric(const Mesh& mesh, int e, const Vec2& x);

}  // namespace mtlab
