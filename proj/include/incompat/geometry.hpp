#pragma once

// Planar-chart realization of a flat symmetric connection together with a
// Riemannian metric on the same chart.
//
// The connection is the trivial connection of the chart: the coordinate
// frame is parallel, geodesics of the connection are straight chart
// segments, and the lattice axes a, b, c = -a-b are constant vectors.
// The metric is an arbitrary smooth SPD field given by expressions.

#include <optional>
#include <stdexcept>
#include <string>

#include "incompat/field_expr.hpp"
#include "incompat/linalg.hpp"

namespace incompat {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned rectangle [x0,x1]×[y0,y1] in chart coordinates.
struct Chart {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  Chart() = default;
  Chart(double x0_, double x1_, double y0_, double y1_);

  bool contains(const Vec2& p, double tol = 1e-12) const;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

enum class Axis : int { A = 0, B = 1, C = 2 };

/// Constant crystallographic axes a, b and c = -a-b.
struct LatticeFrame {
  Vec2 a{1.0, 0.0};
  Vec2 b{-0.5, 0.8660254037844386};

  LatticeFrame() = default;
  LatticeFrame(Vec2 a_, Vec2 b_);

  Vec2 c() const { return -a - b; }
  Vec2 axis(Axis u) const;
  Vec2 axis(int k) const { return axis(static_cast<Axis>(k)); }
  /// Chart-area bivector a ∧ b.
  double chart_wedge() const { return wedge(a, b); }
  /// Matrix with columns a, b.
  Mat2 basis() const { return Mat2::from_columns(a, b); }

  static LatticeFrame hexagonal() { return {}; }
};

/// Metric tensor in the chart basis and its first and second chart derivatives.
struct MetricJet {
  Mat2 G, Gx, Gy, Gxx, Gxy, Gyy;
};

/// Smooth SPD metric field over a chart.
///
/// euclidean:  G = I
/// conformal:  G = φ² I
/// general:    coefficients g_aa, g_bb, g_ab in the lattice frame {a, b};
///             the chart tensor is F^{-T} [[g_aa, g_ab], [g_ab, g_bb]] F^{-1}
///             with F = [a b].
class MetricField {
 public:
  enum class Kind { Euclidean, Conformal, General };

  static MetricField euclidean(const Chart& chart, const LatticeFrame& frame);
  static MetricField conformal(const Chart& chart, const LatticeFrame& frame, ScalarFieldExpr phi);
  static MetricField general(const Chart& chart, const LatticeFrame& frame, ScalarFieldExpr g_aa, ScalarFieldExpr g_bb,
                             ScalarFieldExpr g_ab);

  Kind kind() const { return kind_; }
  const Chart& chart() const { return chart_; }
  const LatticeFrame& frame() const { return frame_; }

  /// G(p) in the chart basis.
  Mat2 tensor(const Vec2& p) const;
  MetricJet jet(const Vec2& p) const;
  /// (g_aa, g_bb, g_ab) at p.
  std::array<double, 3> frame_coefficients(const Vec2& p) const;

  /// |v|_g at p.
  double length(const Vec2& p, const Vec2& v) const;
  /// ν(p) = |a ∧ b|_g = sqrt(g_aa g_bb - g_ab²).
  double nu(const Vec2& p) const;
  /// sqrt(det G(p)), the density of the volume form in chart coordinates.
  double volume_density(const Vec2& p) const;

  /// The conformal factor φ when the metric was built as conformal.
  const std::optional<DifferentiableField>& conformal_factor() const { return phi_; }

  /// Throws GeometryError if G fails to be SPD (eigenvalues > min_eig) on an n×n grid.
  void validate_spd(int n = 64, double min_eig = 1e-12) const;

 private:
  MetricField(Kind kind, const Chart& chart, const LatticeFrame& frame);

  Kind kind_;
  Chart chart_;
  LatticeFrame frame_;
  Mat2 frame_inv_;  // F^{-1}
  std::optional<DifferentiableField> phi_;
  std::optional<DifferentiableField> gaa_, gbb_, gab_;
};

/// Linear map T_pM -> R² in chart coordinates, anchored at p.
struct FiberMap {
  Vec2 base;
  Mat2 A;
};

struct ExpResult {
  Vec2 point;
  bool inside = true;
};

ExpResult exp_connection(const Chart& chart, const Vec2& p, const Vec2& v);
Vec2 parallel_transport(const Vec2& p, const Vec2& q, const Vec2& v);
/// Transport of the metric flat connection whose parallel frame is (a/φ, b/φ): v ↦ φ(p)/φ(q) v.
Vec2 conformal_transport(const Vec2& p, const Vec2& q, const Vec2& v, const ScalarFieldExpr& phi);

/// Length of the chart segment t ↦ p + t v, t ∈ [0,1], by Gauss–Legendre quadrature.
double segment_length(const Vec2& p, const Vec2& v, const MetricField& g, int n_quad = 8);

struct DistanceOptions {
  int nodes = 9;  // polyline nodes including both endpoints
  double tol = 1e-10;
  int max_iters = 500;
  int quad_per_segment = 4;
  /// Combine the relaxed lengths at nodes and (nodes+1)/2 by Richardson
  /// extrapolation. Requires an odd node count of at least 5.
  bool extrapolate = true;
  /// Return segment_length of the straight segment without relaxation.
  bool fast = false;
};

struct DistanceResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
};

/// Geodesic distance estimate by relaxing a polyline from the straight segment.
/// Never exceeds the straight-segment length computed with the same rule.
DistanceResult riemannian_distance(const Vec2& p, const Vec2& q, const MetricField& g, const DistanceOptions& opts = {});

/// Gauss curvature at p via the Brioschi formula on symbolic derivatives of G.
double gauss_curvature(const MetricField& g, const Vec2& p);

/// Singular values of A G(p)^{-1/2}, the fiber map written in g-orthonormal coordinates.
SingularValues singular_values_g(const FiberMap& A, const MetricField& g);
/// Frobenius norm induced by g on T*M and the Euclidean metric on R².
double fiber_norm(const FiberMap& A, const MetricField& g);
double dist_to_O(const FiberMap& A, const MetricField& g);
double dist_to_SO(const FiberMap& A, const MetricField& g);

/// Same distances from precomputed singular values.
double dist2_to_O(const SingularValues& sv);
double dist2_to_SO(const SingularValues& sv);

/// Builds the fiber map R G(p)^{1/2}, an orientation-preserving isometry (T_pM, g) -> (R², e).
FiberMap rotation_fiber(const MetricField& g, const Vec2& p, double angle);

}  // namespace incompat
