#pragma once

#include <string>
#include <vector>

#include "mtlab/types.hpp"

namespace mtlab {

// Standard Liouville bubble U(x) = -log(1 + |x|^2/4).
double bubble_U(const Vec2& x);
double bubble_U_radial(double r);
Vec2 bubble_grad(const Vec2& x);
double bubble_e2U(const Vec2& x);
double bubble_e2U_radial(double r);

enum class KernelLabel { Phi0, Phi1, Phi2 };

// Bounded kernel of -Δφ - 2e^{2U}φ = 0.
double kernel_value(KernelLabel label, const Vec2& x);
Vec2 kernel_grad(KernelLabel label, const Vec2& x);
Mat2 kernel_hessian(KernelLabel label, const Vec2& x);

enum class MomentTag {
  Mass,              // e^{2U}
  MassPhi0,          // e^{2U} phi0
  MassRadialRatio,   // e^{2U} |x|^2/(4+|x|^2)
  UMassPhi0,         // U e^{2U} phi0
  U2MassPhi0,        // U^2 e^{2U} phi0
  MassDilation,      // e^{2U} (x.∇U)
  MassDilationSq,    // 2 e^{2U} (x.∇U)^2
  MassGrad1Sq,       // 2 e^{2U} (∂_1 U)^2
  MassPhi1Phi2,      // e^{2U} phi1 phi2
  MassPhi0Phi1,      // e^{2U} phi0 phi1
};

struct BubbleMoment {
  MomentTag tag;
  std::string name;
  double value = 0.0;
  double error = 0.0;
};

const std::vector<MomentTag>& moment_catalog();
std::string moment_name(MomentTag tag);
// Closed-form value when one is known; NaN otherwise.
double moment_exact(MomentTag tag);
double moment_integrand(MomentTag tag, const Vec2& x);

// Integral over the plane using r = 2 tan(s).
BubbleMoment moment(MomentTag tag, double tol);
// Integral over |x| < cutoff with a tail bound folded into the error.
BubbleMoment moment_truncated(MomentTag tag, double tol, double cutoff = 1e6);

enum class QuarterKind { Log, LogSquared };
double scalar_integral_quarter(QuarterKind kind, double scale = 1.0);

}  // namespace mtlab
