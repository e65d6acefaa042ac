#include "mtlab/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>

#include "mtlab/error.hpp"

namespace mtlab {

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double tol, unsigned max_depth) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (std::isinf(b)) {
    // x = a + s/(1-s)
    auto g = [&](double s) {
      double d = 1.0 - s;
      return f(a + s / d) / (d * d);
    };
    return integrate_adaptive(g, 0.0, 1.0, tol, max_depth);
  }
  struct Panel {
    double lo, hi, value, error;
    unsigned depth;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi, unsigned depth) {
    double err = 0.0;
    double v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    return Panel{lo, hi, v, err, depth};
  };
  std::priority_queue<Panel> heap;
  heap.push(eval(a, b, 0));
  double total = heap.top().value, total_err = heap.top().error;
  const std::size_t max_panels = std::size_t(1) << std::min(max_depth, 16u);
  while (total_err > tol && heap.size() < max_panels) {
    Panel p = heap.top();
    if (p.depth >= max_depth) break;
    heap.pop();
    double mid = 0.5 * (p.lo + p.hi);
    Panel l = eval(p.lo, mid, p.depth + 1), r = eval(mid, p.hi, p.depth + 1);
    total += l.value + r.value - p.value;
    total_err += l.error + r.error - p.error;
    heap.push(l);
    heap.push(r);
  }
  // re-sum to avoid drift from incremental updates
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total)) throw Error(ErrorCode::NoConvergence, "non-finite integral");
  return {total, total_err};
}

QuadResult integrate_half_line(const std::function<double(double)>& f, double a, double tol) {
  boost::math::quadrature::exp_sinh<double> rule;
  double err = 0.0;
  double shift = a;
  double value = rule.integrate([&](double s) { return f(s + shift); }, tol, &err);
  if (!std::isfinite(value)) throw Error(ErrorCode::NoConvergence, "non-finite integral");
  return {value, err};
}

namespace {

template <int N>
GaussRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  GaussRule rule;
  // Boost stores the non-negative half.
  for (int i = static_cast<int>(x.size()) - 1; i >= 0; --i) {
    if (x[i] == 0.0) continue;
    rule.nodes.push_back(-x[i]);
    rule.weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    rule.nodes.push_back(x[i]);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  switch (n) {
    case 4: rule = make_rule<4>(); break;
    case 6: rule = make_rule<6>(); break;
    case 8: rule = make_rule<8>(); break;
    case 10: rule = make_rule<10>(); break;
    case 12: rule = make_rule<12>(); break;
    case 16: rule = make_rule<16>(); break;
    case 20: rule = make_rule<20>(); break;
    case 30: rule = make_rule<30>(); break;
    default: throw Error(ErrorCode::InvalidArgument, "unsupported Gauss-Legendre order");
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace mtlab
