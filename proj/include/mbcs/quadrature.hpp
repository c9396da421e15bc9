#pragma once

#include <vector>

namespace mbcs {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (cached per n).
const QuadratureRule& gauss_legendre(int n);

/// n-point Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal panels.
template <class F>
double composite_gauss(F&& f, double a, double b, int panels, int order) {
  const auto& rule = gauss_legendre(order);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h;
    double part = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) part += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    sum += 0.5 * h * part;
  }
  return sum;
}

}  // namespace mbcs
