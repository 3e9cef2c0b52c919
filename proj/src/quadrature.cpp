#include "incompat/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace incompat {

namespace {

LineRule build_gauss_legendre(int n) {
  // Newton iteration on P_n from the Chebyshev initial guess.
  LineRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    // Map [-1, 1] -> [0, 1]; weights halve.
    r.nodes[i] = 0.5 * (1.0 - z);
    r.nodes[n - 1 - i] = 0.5 * (1.0 + z);
    r.weights[i] = r.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.5;
  return r;
}

TriangleRule dunavant6() {
  TriangleRule r;
  auto orbit3 = [&](double a, double b, double w) {
    // (a, b, b) and its rotations
    const double bary[3][3] = {{a, b, b}, {b, a, b}, {b, b, a}};
    for (const auto& l : bary) {
      r.s.push_back(l[1]);
      r.t.push_back(l[2]);
      r.weights.push_back(w);
    }
  };
  auto orbit6 = [&](double a, double b, double c, double w) {
    const double bary[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
    for (const auto& l : bary) {
      r.s.push_back(l[1]);
      r.t.push_back(l[2]);
      r.weights.push_back(w);
    }
  };
  orbit3(0.501426509658179, 0.249286745170910, 0.116786275726379);
  orbit3(0.873821971016996, 0.063089014491502, 0.050844906370207);
  orbit6(0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
  return r;
}

TriangleRule collapsed_gauss(int n) {
  // Duffy map (u, v) in [0,1]^2 -> (s, t) = (u (1 - v), v), Jacobian (1 - v);
  // normalized so the weights integrate the reference area 1/2 to 1.
  const LineRule& g = gauss_legendre(n);
  const LineRule& gv = gauss_legendre(n + 1);
  TriangleRule r;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n + 1; ++j) {
      const double u = g.nodes[i], v = gv.nodes[j];
      r.s.push_back(u * (1.0 - v));
      r.t.push_back(v);
      r.weights.push_back(2.0 * g.weights[i] * gv.weights[j] * (1.0 - v));
    }
  return r;
}

std::mutex cache_mutex;

}  // namespace

const LineRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  static std::map<int, LineRule> cache;
  std::lock_guard lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

const TriangleRule& triangle_rule(int order) {
  if (order < 1) throw std::invalid_argument("triangle_rule: order must be positive");
  static std::map<int, TriangleRule> cache;
  {
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
  }
  TriangleRule r = order == 6 ? dunavant6() : collapsed_gauss(order);
  std::lock_guard lock(cache_mutex);
  return cache.try_emplace(order, std::move(r)).first->second;
}

}  // namespace incompat
