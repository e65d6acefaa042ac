#pragma once

#include <memory>
#include <optional>

#include "mtlab/geometry.hpp"

namespace mtlab {

enum class GreenMethod { ClosedFormDisk, HarmonicFem, MethodOfImagesComposite };

struct GreenOptions {
  double fem_h = 0.05;            // log-polar step of the harmonic-FEM mesh
  int mfs_charges = 96;           // charges inside a hole
  double mfs_charge_ratio = 0.75; // charge circle radius / hole radius
};

// Interface for the regular part H(x,y) of a particular construction.
class RegularPart {
 public:
  virtual ~RegularPart() = default;
  virtual double value(const Vec2& x, const Vec2& y) const = 0;
  virtual Vec2 grad_y(const Vec2& x, const Vec2& y) const = 0;
  virtual std::optional<Vec2> robin_grad(const Vec2&) const { return std::nullopt; }
  virtual std::optional<Mat2> robin_hess(const Vec2&) const { return std::nullopt; }
  virtual double tolerance() const { return 1e-15; }
};

class GreenOracle {
 public:
  GreenOracle(const Domain& domain, GreenMethod method, const GreenOptions& options = {});
  // Disk: closed form; rectangle and punctured: image constructions; polygon: harmonic FEM.
  static GreenOracle for_domain(const Domain& domain, const GreenOptions& options = {});

  double green(const Vec2& x, const Vec2& y) const;
  double regular(const Vec2& x, const Vec2& y) const;
  // Gradients with respect to the second (field) argument.
  Vec2 green_grad_y(const Vec2& x, const Vec2& y) const;
  Vec2 regular_grad_y(const Vec2& x, const Vec2& y) const;
  // Gradient with respect to the source argument, via symmetry of G.
  Vec2 green_grad_x(const Vec2& x, const Vec2& y) const { return green_grad_y(y, x); }

  double robin(const Vec2& x) const;
  Vec2 robin_grad(const Vec2& x) const;
  Mat2 robin_hess(const Vec2& x) const;

  double fd_step() const;
  double solver_tolerance() const { return part_->tolerance(); }
  GreenMethod method() const { return method_; }
  const Domain& domain() const { return *domain_; }

 private:
  void check_point(const Vec2& x) const;
  std::shared_ptr<const Domain> domain_;
  GreenMethod method_;
  std::shared_ptr<const RegularPart> part_;
};

// Fundamental solution S(x,y) = -(1/2π) log|x-y|.
double fundamental_solution(const Vec2& x, const Vec2& y);

}  // namespace mtlab
