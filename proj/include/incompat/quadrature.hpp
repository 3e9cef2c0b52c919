#pragma once

#include <vector>

#include "incompat/linalg.hpp"

namespace incompat {

/// Gauss–Legendre rule mapped to [0, 1].
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to 1
};

/// Cached, thread-safe after first use.
const LineRule& gauss_legendre(int n);

/// Quadrature on the reference triangle {(s,t): s,t >= 0, s+t <= 1},
/// stored as barycentric-style pairs (s, t) with weights summing to 1.
struct TriangleRule {
  std::vector<double> s, t, weights;
};

/// order 6 selects the 12-point symmetric degree-6 rule; any other order n >= 1
/// gives a collapsed Gauss product rule exact for degree 2n-2.
const TriangleRule& triangle_rule(int order);

/// ∫_T f over the chart triangle (p0, p1, p2), with f evaluated at chart points.
template <class F>
double integrate_triangle(const Vec2& p0, const Vec2& p1, const Vec2& p2, int order, F&& f) {
  const TriangleRule& rule = triangle_rule(order);
  const Vec2 e1 = p1 - p0, e2 = p2 - p0;
  const double area = 0.5 * std::abs(wedge(e1, e2));
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) acc += rule.weights[i] * f(p0 + rule.s[i] * e1 + rule.t[i] * e2);
  return acc * area;
}

}  // namespace incompat
