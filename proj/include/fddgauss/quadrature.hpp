#pragma once

#include <cstddef>
#include <vector>

namespace fddgauss {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
// Rules are cached per n; the returned reference stays valid.
const QuadratureRule& gauss_legendre(std::size_t n);

// Integrates f over [lo, hi] with the n-point Gauss-Legendre rule.
template <typename F>
double integrate_gl(F&& f, double lo, double hi, std::size_t n) {
  const QuadratureRule& rule = gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * sum;
}

// Composite rule: `panels` equal panels on [lo, hi], n nodes each.
template <typename F>
double integrate_composite(F&& f, double lo, double hi, std::size_t panels, std::size_t n) {
  const double width = (hi - lo) / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    sum += integrate_gl(f, lo + width * static_cast<double>(p), lo + width * static_cast<double>(p + 1), n);
  }
  return sum;
}

}  // namespace fddgauss
