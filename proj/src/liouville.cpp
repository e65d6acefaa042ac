#include "mtlab/liouville.hpp"

#include <cmath>
#include <limits>

#include "mtlab/error.hpp"
#include "mtlab/quadrature.hpp"

namespace mtlab {

double bubble_U(const Vec2& x) { return -std::log1p(x.squaredNorm() / 4.0); }
double bubble_U_radial(double r) { return -std::log1p(r * r / 4.0); }

Vec2 bubble_grad(const Vec2& x) { return -2.0 * x / (4.0 + x.squaredNorm()); }

double bubble_e2U(const Vec2& x) { return bubble_e2U_radial(x.norm()); }
double bubble_e2U_radial(double r) {
  double d = 4.0 + r * r;
  return 16.0 / (d * d);
}

double kernel_value(KernelLabel label, const Vec2& x) {
  double d = 4.0 + x.squaredNorm();
  switch (label) {
    case KernelLabel::Phi0: return (4.0 - x.squaredNorm()) / d;
    case KernelLabel::Phi1: return x[0] / d;
    case KernelLabel::Phi2: return x[1] / d;
  }
  return 0.0;
}

Vec2 kernel_grad(KernelLabel label, const Vec2& x) {
  double d = 4.0 + x.squaredNorm();
  switch (label) {
    case KernelLabel::Phi0: return -16.0 * x / (d * d);
    case KernelLabel::Phi1: return Vec2(1.0 / d - 2.0 * x[0] * x[0] / (d * d), -2.0 * x[0] * x[1] / (d * d));
    case KernelLabel::Phi2: return Vec2(-2.0 * x[0] * x[1] / (d * d), 1.0 / d - 2.0 * x[1] * x[1] / (d * d));
  }
  return Vec2::Zero();
}

Mat2 kernel_hessian(KernelLabel label, const Vec2& x) {
  double d = 4.0 + x.squaredNorm();
  double d2 = d * d, d3 = d2 * d;
  Mat2 h;
  if (label == KernelLabel::Phi0) {
    // phi0 = -1 + 8/d
    h = -16.0 / d2 * Mat2::Identity() + 64.0 / d3 * (x * x.transpose());
    return h;
  }
  int i = label == KernelLabel::Phi1 ? 0 : 1;
  // x_i/d: ∂_j = δ_ij/d - 2 x_i x_j/d^2
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      double dij = i == j ? 1.0 : 0.0, dik = i == k ? 1.0 : 0.0, djk = j == k ? 1.0 : 0.0;
      h(j, k) = -2.0 * dij * x[k] / d2 - 2.0 * (dik * x[j] + djk * x[i]) / d2 +
                8.0 * x[i] * x[j] * x[k] / d3;
    }
  }
  return h;
}

const std::vector<MomentTag>& moment_catalog() {
  static const std::vector<MomentTag> tags = {
      MomentTag::Mass,          MomentTag::MassPhi0,       MomentTag::MassRadialRatio,
      MomentTag::UMassPhi0,     MomentTag::U2MassPhi0,     MomentTag::MassDilation,
      MomentTag::MassDilationSq, MomentTag::MassGrad1Sq,   MomentTag::MassPhi1Phi2,
      MomentTag::MassPhi0Phi1};
  return tags;
}

std::string moment_name(MomentTag tag) {
  switch (tag) {
    case MomentTag::Mass: return "e2U";
    case MomentTag::MassPhi0: return "e2U_phi0";
    case MomentTag::MassRadialRatio: return "e2U_r2_over_4pr2";
    case MomentTag::UMassPhi0: return "U_e2U_phi0";
    case MomentTag::U2MassPhi0: return "U2_e2U_phi0";
    case MomentTag::MassDilation: return "e2U_xgradU";
    case MomentTag::MassDilationSq: return "2_e2U_xgradU_sq";
    case MomentTag::MassGrad1Sq: return "2_e2U_d1U_sq";
    case MomentTag::MassPhi1Phi2: return "e2U_phi1_phi2";
    case MomentTag::MassPhi0Phi1: return "e2U_phi0_phi1";
  }
  return "unknown";
}

double moment_exact(MomentTag tag) {
  switch (tag) {
    case MomentTag::Mass: return 4.0 * kPi;
    case MomentTag::MassPhi0: return 0.0;
    case MomentTag::MassRadialRatio: return 2.0 * kPi;
    case MomentTag::UMassPhi0: return 2.0 * kPi;
    case MomentTag::U2MassPhi0: return -6.0 * kPi;
    case MomentTag::MassDilation: return -4.0 * kPi;
    case MomentTag::MassDilationSq: return 32.0 * kPi / 3.0;
    case MomentTag::MassGrad1Sq: return 2.0 * kPi / 3.0;
    case MomentTag::MassPhi1Phi2: return 0.0;
    case MomentTag::MassPhi0Phi1: return 0.0;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double moment_integrand(MomentTag tag, const Vec2& x) {
  double e = bubble_e2U(x);
  double u = bubble_U(x);
  double p0 = kernel_value(KernelLabel::Phi0, x);
  Vec2 g = bubble_grad(x);
  double r2 = x.squaredNorm();
  switch (tag) {
    case MomentTag::Mass: return e;
    case MomentTag::MassPhi0: return e * p0;
    case MomentTag::MassRadialRatio: return e * r2 / (4.0 + r2);
    case MomentTag::UMassPhi0: return u * e * p0;
    case MomentTag::U2MassPhi0: return u * u * e * p0;
    case MomentTag::MassDilation: return e * x.dot(g);
    case MomentTag::MassDilationSq: return 2.0 * e * x.dot(g) * x.dot(g);
    case MomentTag::MassGrad1Sq: return 2.0 * e * g[0] * g[0];
    case MomentTag::MassPhi1Phi2:
      return e * kernel_value(KernelLabel::Phi1, x) * kernel_value(KernelLabel::Phi2, x);
    case MomentTag::MassPhi0Phi1: return e * p0 * kernel_value(KernelLabel::Phi1, x);
  }
  return 0.0;
}

namespace {

enum class Angular { Radial, Cos2, Generic };

Angular angular_kind(MomentTag tag) {
  switch (tag) {
    case MomentTag::MassGrad1Sq: return Angular::Cos2;
    case MomentTag::MassPhi1Phi2:
    case MomentTag::MassPhi0Phi1: return Angular::Generic;
    default: return Angular::Radial;
  }
}

// ∫ g(r) r dr over [0, rmax) with r = 2 tan(s).
QuadResult radial_tan(const std::function<double(double)>& g, double tol) {
  auto h = [&](double s) {
    double c = std::cos(s);
    if (c <= 0.0) return 0.0;
    double r = 2.0 * std::tan(s);
    return g(r) * r * 2.0 / (c * c);
  };
  return integrate_adaptive(h, 0.0, kPi / 2.0, tol, 40);
}

// ∫ g(r) r dr over [0, cutoff): r = e^{-y} inside r<1, r = e^{y} outside.
QuadResult radial_log(const std::function<double(double)>& g, double tol, double cutoff) {
  auto inner = [&](double y) {
    double r = std::exp(-y);
    return g(r) * r * r;
  };
  auto outer = [&](double y) {
    double r = std::exp(y);
    return g(r) * r * r;
  };
  QuadResult a = integrate_adaptive(inner, 0.0, 745.0, tol / 2, 40);
  QuadResult b = integrate_adaptive(outer, 0.0, std::log(cutoff), tol / 2, 40);
  return {a.value + b.value, a.error + b.error};
}

}  // namespace

static BubbleMoment finish(MomentTag tag, QuadResult q, double tol) {
  BubbleMoment m{tag, moment_name(tag), q.value, q.error};
  if (!(m.error <= tol)) {
    throw Error(ErrorCode::NoConvergence, "moment " + m.name + " error estimate above tolerance");
  }
  return m;
}

BubbleMoment moment(MomentTag tag, double tol) {
  if (tol < 1e-12) throw Error(ErrorCode::InvalidArgument, "moment tolerance below 1e-12");
  double qtol = tol / 8.0;
  switch (angular_kind(tag)) {
    case Angular::Radial: {
      auto g = [&](double r) { return moment_integrand(tag, Vec2(r, 0.0)); };
      QuadResult q = radial_tan(g, qtol / (2 * kPi));
      return finish(tag, {2 * kPi * q.value, 2 * kPi * q.error}, tol);
    }
    case Angular::Cos2: {
      // integrand(r,φ) = g(r) cos^2 φ, angular factor π
      auto g = [&](double r) { return moment_integrand(tag, Vec2(r, 0.0)); };
      QuadResult q = radial_tan(g, qtol / kPi);
      return finish(tag, {kPi * q.value, kPi * q.error}, tol);
    }
    case Angular::Generic: {
      auto outer = [&](double phi) {
        Vec2 dir(std::cos(phi), std::sin(phi));
        auto g = [&](double r) { return moment_integrand(tag, r * dir); };
        return radial_tan(g, qtol / (4 * kPi)).value;
      };
      QuadResult q = integrate_adaptive(outer, 0.0, 2 * kPi, qtol, 20);
      return finish(tag, q, tol);
    }
  }
  return {};
}

BubbleMoment moment_truncated(MomentTag tag, double tol, double cutoff) {
  double qtol = tol / 8.0;
  auto tail_bound = [&](const std::function<double(double)>& g) {
    // integrands decay like r^-4 up to logarithms
    return std::abs(g(cutoff)) * cutoff * cutoff / 2.0 * 1.5;
  };
  switch (angular_kind(tag)) {
    case Angular::Radial:
    case Angular::Cos2: {
      double ang = angular_kind(tag) == Angular::Radial ? 2 * kPi : kPi;
      auto g = [&](double r) { return moment_integrand(tag, Vec2(r, 0.0)); };
      QuadResult q = radial_log(g, qtol / ang, cutoff);
      double tail = ang * tail_bound(g);
      return BubbleMoment{tag, moment_name(tag), ang * q.value, ang * q.error + tail};
    }
    case Angular::Generic: {
      double tail = 0.0;
      auto outer = [&](double phi) {
        Vec2 dir(std::cos(phi), std::sin(phi));
        auto g = [&](double r) { return moment_integrand(tag, r * dir); };
        tail = std::max(tail, tail_bound(g));
        return radial_log(g, qtol / (4 * kPi), cutoff).value;
      };
      QuadResult q = integrate_adaptive(outer, 0.0, 2 * kPi, qtol, 20);
      return BubbleMoment{tag, moment_name(tag), q.value, q.error + 2 * kPi * tail};
    }
  }
  return {};
}

double scalar_integral_quarter(QuarterKind kind, double scale) {
  auto f = [&](double t) {
    double a = 1.0 + t * t;
    double l = std::log1p(t * t);
    double w = t / (a * a) - 2.0 * t / (a * a * a);
    return scale * w * (kind == QuarterKind::Log ? l : l * l);
  };
  QuadResult head = integrate_adaptive(f, 0.0, 1.0, 1e-14, 30);
  QuadResult tail = integrate_half_line(f, 1.0, 1e-14);
  double err = head.error + tail.error;
  if (err > 1e-11 * std::max(1.0, std::abs(scale))) {
    throw Error(ErrorCode::NoConvergence, "quarter integral did not converge");
  }
  return head.value + tail.value;
}

}  // namespace mtlab
