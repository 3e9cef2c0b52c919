#include "incompat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "incompat/optim.hpp"
#include "incompat/quadrature.hpp"

namespace incompat {

Chart::Chart(double x0_, double x1_, double y0_, double y1_) : x0(x0_), x1(x1_), y0(y0_), y1(y1_) {
  if (!(x0 < x1) || !(y0 < y1)) throw GeometryError("chart: need x0 < x1 and y0 < y1");
}

bool Chart::contains(const Vec2& p, double tol) const {
  return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
}

LatticeFrame::LatticeFrame(Vec2 a_, Vec2 b_) : a(a_), b(b_) {
  const double scale = norm(a) * norm(b);
  if (!(std::abs(wedge(a, b)) > 1e-12 * scale) || scale == 0.0)
    throw GeometryError("lattice frame: axes a and b must be linearly independent");
}

Vec2 LatticeFrame::axis(Axis u) const {
  switch (u) {
    case Axis::A: return a;
    case Axis::B: return b;
    case Axis::C: return c();
  }
  return a;
}

// ---------------------------------------------------------------------------

MetricField::MetricField(Kind kind, const Chart& chart, const LatticeFrame& frame)
    : kind_(kind), chart_(chart), frame_(frame), frame_inv_(frame.basis().inverse()) {}

MetricField MetricField::euclidean(const Chart& chart, const LatticeFrame& frame) {
  return MetricField(Kind::Euclidean, chart, frame);
}

MetricField MetricField::conformal(const Chart& chart, const LatticeFrame& frame, ScalarFieldExpr phi) {
  MetricField m(Kind::Conformal, chart, frame);
  m.phi_.emplace(std::move(phi));
  return m;
}

MetricField MetricField::general(const Chart& chart, const LatticeFrame& frame, ScalarFieldExpr g_aa,
                                 ScalarFieldExpr g_bb, ScalarFieldExpr g_ab) {
  MetricField m(Kind::General, chart, frame);
  m.gaa_.emplace(std::move(g_aa));
  m.gbb_.emplace(std::move(g_bb));
  m.gab_.emplace(std::move(g_ab));
  return m;
}

Mat2 MetricField::tensor(const Vec2& p) const {
  switch (kind_) {
    case Kind::Euclidean: return Mat2::identity();
    case Kind::Conformal: {
      const double f = phi_->value(p.x, p.y);
      return Mat2::diag(f * f, f * f);
    }
    case Kind::General: {
      const double ab = gab_->value(p.x, p.y);
      const Mat2 gf(gaa_->value(p.x, p.y), ab, ab, gbb_->value(p.x, p.y));
      return frame_inv_.transpose() * gf * frame_inv_;
    }
  }
  return Mat2::identity();
}

MetricJet MetricField::jet(const Vec2& p) const {
  MetricJet j;
  switch (kind_) {
    case Kind::Euclidean:
      j.G = Mat2::identity();
      return j;
    case Kind::Conformal: {
      // G = φ² I: ∂G = 2φ∂φ, ∂²G = 2(∂φ∂φ + φ∂²φ).
      const FieldJet f = phi_->jet(p.x, p.y);
      const double v = f.value, fx = f.grad[0], fy = f.grad[1];
      auto iso = [](double s) { return Mat2::diag(s, s); };
      j.G = iso(v * v);
      j.Gx = iso(2.0 * v * fx);
      j.Gy = iso(2.0 * v * fy);
      j.Gxx = iso(2.0 * (fx * fx + v * f.hess[0]));
      j.Gxy = iso(2.0 * (fx * fy + v * f.hess[1]));
      j.Gyy = iso(2.0 * (fy * fy + v * f.hess[2]));
      return j;
    }
    case Kind::General: {
      const FieldJet a = gaa_->jet(p.x, p.y), b = gbb_->jet(p.x, p.y), c = gab_->jet(p.x, p.y);
      const Mat2 Ti = frame_inv_.transpose();
      auto chart = [&](double aa, double bb, double ab) { return Ti * Mat2(aa, ab, ab, bb) * frame_inv_; };
      j.G = chart(a.value, b.value, c.value);
      j.Gx = chart(a.grad[0], b.grad[0], c.grad[0]);
      j.Gy = chart(a.grad[1], b.grad[1], c.grad[1]);
      j.Gxx = chart(a.hess[0], b.hess[0], c.hess[0]);
      j.Gxy = chart(a.hess[1], b.hess[1], c.hess[1]);
      j.Gyy = chart(a.hess[2], b.hess[2], c.hess[2]);
      return j;
    }
  }
  return j;
}

std::array<double, 3> MetricField::frame_coefficients(const Vec2& p) const {
  if (kind_ == Kind::General) return {gaa_->value(p.x, p.y), gbb_->value(p.x, p.y), gab_->value(p.x, p.y)};
  const Mat2 G = tensor(p);
  return {dot(frame_.a, G * frame_.a), dot(frame_.b, G * frame_.b), dot(frame_.a, G * frame_.b)};
}

double MetricField::length(const Vec2& p, const Vec2& v) const { return std::sqrt(dot(v, tensor(p) * v)); }

double MetricField::volume_density(const Vec2& p) const {
  switch (kind_) {
    case Kind::Euclidean: return 1.0;
    case Kind::Conformal: {
      const double f = phi_->value(p.x, p.y);
      return f * f;
    }
    case Kind::General: return std::sqrt(tensor(p).det());
  }
  return 1.0;
}

double MetricField::nu(const Vec2& p) const { return volume_density(p) * std::abs(frame_.chart_wedge()); }

void MetricField::validate_spd(int n, double min_eig) const {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 p{chart_.x0 + chart_.width() * (i + 0.5) / n, chart_.y0 + chart_.height() * (j + 0.5) / n};
      Mat2 G;
      try {
        G = tensor(p);
      } catch (const DomainError& e) {
        throw GeometryError("metric undefined at (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                            "): " + e.what());
      }
      const SymEigen e = sym_eigen(G);
      if (!std::isfinite(e.l1) || !(e.l2 > min_eig) || std::abs(G.b - G.c) > 1e-12 * std::abs(e.l1))
        throw GeometryError("metric is not positive definite at (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ")");
    }
}

// ---------------------------------------------------------------------------

ExpResult exp_connection(const Chart& chart, const Vec2& p, const Vec2& v) {
  ExpResult r;
  r.point = p + v;
  r.inside = chart.contains(r.point);
  return r;
}

Vec2 parallel_transport(const Vec2&, const Vec2&, const Vec2& v) { return v; }

Vec2 conformal_transport(const Vec2& p, const Vec2& q, const Vec2& v, const ScalarFieldExpr& phi) {
  const double fp = phi(p.x, p.y), fq = phi(q.x, q.y);
  if (!(fp > 0.0) || !(fq > 0.0)) throw GeometryError("conformal transport: conformal factor must be positive");
  return (fp / fq) * v;
}

double segment_length(const Vec2& p, const Vec2& v, const MetricField& g, int n_quad) {
  if (n_quad < 2) throw GeometryError("segment_length: need at least 2 quadrature nodes");
  if (!g.chart().contains(p) || !g.chart().contains(p + v)) throw GeometryError("segment_length: segment exits domain");
  const LineRule& rule = gauss_legendre(n_quad);
  double acc = 0.0;
  for (int i = 0; i < n_quad; ++i) acc += rule.weights[i] * g.length(p + rule.nodes[i] * v, v);
  return acc;
}

namespace {

// Length of the polyline through `pts` and its gradient with respect to every node.
double polyline_length(std::span<const Vec2> pts, const MetricField& g, const LineRule& rule, std::span<Vec2> grad) {
  for (auto& gr : grad) gr = {};
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const Vec2 v = pts[k + 1] - pts[k];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = rule.nodes[q], w = rule.weights[q];
      const MetricJet j = g.jet(pts[k] + t * v);
      const Vec2 Gv = j.G * v;
      const double s = std::sqrt(std::max(dot(v, Gv), 1e-300));
      total += w * s;
      // d/dv sqrt(vᵀGv) = Gv/s; d/dx sqrt(vᵀG(x)v) = (vᵀ∂G v)/(2s).
      const Vec2 dx{dot(v, j.Gx * v) / (2.0 * s), dot(v, j.Gy * v) / (2.0 * s)};
      const Vec2 dv = Gv / s;
      grad[k] += w * ((1.0 - t) * dx - dv);
      grad[k + 1] += w * (t * dx + dv);
    }
  }
  return total;
}

}  // namespace

namespace {

// Relaxes the interior nodes of pts in place and returns the polyline length.
LbfgsResult relax_polyline(std::vector<Vec2>& pts, const MetricField& g, const LineRule& rule, double straight,
                           const DistanceOptions& opts) {
  const int m = static_cast<int>(pts.size());
  std::vector<Vec2> grad(m);
  const Chart& chart = g.chart();
  const Objective objective = [&](std::span<const double> x, std::span<double> gx) {
    for (int i = 1; i + 1 < m; ++i) {
      pts[i] = {x[2 * (i - 1)], x[2 * (i - 1) + 1]};
      // Nodes are only defined inside the chart; forbid the line search from leaving it.
      if (!chart.contains(pts[i], 0.0)) return std::numeric_limits<double>::infinity();
    }
    const double len = polyline_length(pts, g, rule, grad);
    for (int i = 1; i + 1 < m; ++i) {
      gx[2 * (i - 1)] = grad[i].x;
      gx[2 * (i - 1) + 1] = grad[i].y;
    }
    return len;
  };
  std::vector<double> x(2 * (m - 2));
  for (int i = 1; i + 1 < m; ++i) {
    x[2 * (i - 1)] = pts[i].x;
    x[2 * (i - 1) + 1] = pts[i].y;
  }
  LbfgsOptions lo;
  lo.max_iters = opts.max_iters;
  lo.rel_decrease_tol = opts.tol;
  lo.grad_tol = 1e-14 * straight;
  const LbfgsResult r = lbfgs_minimize(x, objective, lo);
  for (int i = 1; i + 1 < m; ++i) pts[i] = {x[2 * (i - 1)], x[2 * (i - 1) + 1]};
  return r;
}

bool relax_ok(const LbfgsResult& r) {
  return r.status != LbfgsStatus::MaxIterations && r.status != LbfgsStatus::NonFinite;
}

}  // namespace

DistanceResult riemannian_distance(const Vec2& p, const Vec2& q, const MetricField& g, const DistanceOptions& opts) {
  if (!g.chart().contains(p) || !g.chart().contains(q)) throw GeometryError("riemannian_distance: point outside domain");
  DistanceResult res;
  const LineRule& rule = gauss_legendre(opts.quad_per_segment);
  const int m = std::max(opts.nodes, 2);
  std::vector<Vec2> pts(m), grad(m);
  for (int i = 0; i < m; ++i) pts[i] = p + (static_cast<double>(i) / (m - 1)) * (q - p);
  const double straight = polyline_length(pts, g, rule, grad);
  if (opts.fast || m == 2 || p == q) {
    res.value = opts.fast ? segment_length(p, q - p, g, std::max(2, opts.quad_per_segment * (m - 1))) : straight;
    return res;
  }
  const bool extrapolate = opts.extrapolate && m >= 5 && m % 2 == 1;
  if (!extrapolate) {
    const LbfgsResult r = relax_polyline(pts, g, rule, straight, opts);
    res.value = std::min(r.value, straight);
    res.iterations = r.iterations;
    res.converged = relax_ok(r);
    return res;
  }
  // Relax on the half-resolution polyline, refine by midpoints, relax again and
  // cancel the leading O(h²) discretization error.
  const int mc = (m + 1) / 2;
  std::vector<Vec2> coarse(mc);
  for (int i = 0; i < mc; ++i) coarse[i] = pts[2 * i];
  const LbfgsResult rc = relax_polyline(coarse, g, rule, straight, opts);
  for (int i = 0; i < mc; ++i) pts[2 * i] = coarse[i];
  for (int i = 0; i + 1 < mc; ++i) pts[2 * i + 1] = 0.5 * (coarse[i] + coarse[i + 1]);
  const LbfgsResult rf = relax_polyline(pts, g, rule, straight, opts);
  res.value = std::min((4.0 * rf.value - rc.value) / 3.0, straight);
  res.iterations = rc.iterations + rf.iterations;
  res.converged = relax_ok(rc) && relax_ok(rf);
  return res;
}

double gauss_curvature(const MetricField& g, const Vec2& p) {
  const MetricJet j = g.jet(p);
  // First fundamental form notation: E = G11, F = G12, G = G22; u = x, v = y.
  const double E = j.G.a, F = j.G.b, G = j.G.d;
  const double Eu = j.Gx.a, Ev = j.Gy.a, Fu = j.Gx.b, Fv = j.Gy.b, Gu = j.Gx.d, Gv = j.Gy.d;
  const double Evv = j.Gyy.a, Guu = j.Gxx.d, Fuv = j.Gxy.b;
  const double disc = E * G - F * F;
  if (!(disc > 1e-300)) throw GeometryError("gauss_curvature: degenerate metric");
  auto det3 = [](double a, double b, double c, double d, double e, double f, double g_, double h, double i) {
    return a * (e * i - f * h) - b * (d * i - f * g_) + c * (d * h - e * g_);
  };
  const double m1 = det3(-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev,  //
                         Fv - 0.5 * Gu, E, F,                                 //
                         0.5 * Gv, F, G);
  const double m2 = det3(0.0, 0.5 * Ev, 0.5 * Gu,  //
                         0.5 * Ev, E, F,           //
                         0.5 * Gu, F, G);
  return (m1 - m2) / (disc * disc);
}

SingularValues singular_values_g(const FiberMap& A, const MetricField& g) {
  const Mat2 G = g.tensor(A.base);
  if (!(sym_eigen(G).l2 > 1e-12)) throw GeometryError("degenerate metric");
  return singular_values(A.A * sym_inv_sqrt(G));
}

double fiber_norm(const FiberMap& A, const MetricField& g) {
  const Mat2 G = g.tensor(A.base);
  if (!(sym_eigen(G).l2 > 1e-12)) throw GeometryError("degenerate metric");
  // |A|² = tr(A G^{-1} Aᵀ)
  return std::sqrt(std::max(0.0, (A.A * G.inverse() * A.A.transpose()).trace()));
}

double dist2_to_O(const SingularValues& sv) { return (sv.s1 - 1.0) * (sv.s1 - 1.0) + (sv.s2 - 1.0) * (sv.s2 - 1.0); }

double dist2_to_SO(const SingularValues& sv) {
  if (sv.det_sign >= 0) return dist2_to_O(sv);
  return (sv.s1 - 1.0) * (sv.s1 - 1.0) + (sv.s2 + 1.0) * (sv.s2 + 1.0);
}

double dist_to_O(const FiberMap& A, const MetricField& g) { return std::sqrt(dist2_to_O(singular_values_g(A, g))); }
double dist_to_SO(const FiberMap& A, const MetricField& g) { return std::sqrt(dist2_to_SO(singular_values_g(A, g))); }

FiberMap rotation_fiber(const MetricField& g, const Vec2& p, double angle) {
  return {p, Mat2::rotation(angle) * sym_sqrt(g.tensor(p))};
}

}  // namespace incompat
