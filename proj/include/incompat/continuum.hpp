#pragma once

// Piecewise-affine extension of lattice configurations and the continuum
// energy densities W (limit) and W_ε (mesh-dependent).

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>

#include "incompat/energy.hpp"

namespace incompat {

/// Barycentric extension of a lattice configuration; dF is constant per triangle.
class DeformationField {
 public:
  DeformationField(const Triangulation& tri, Configuration f);

  const Triangulation& mesh() const { return *tri_; }
  const Configuration& values() const { return f_; }
  /// dF on triangle t in the chart basis.
  const Mat2& differential(int t) const { return dF_[t]; }
  FiberMap fiber(int t) const;

  /// Triangle containing x, or -1 when x lies outside M_ε.
  int locate(const Vec2& x) const;
  /// F(x). Outside M_ε the lattice cell is completed with ghost values: a
  /// missing lattice vertex takes the mean of its mesh neighbors, or the
  /// value of the nearest mesh vertex when it has none.
  Vec2 operator()(const Vec2& x) const;

 private:
  Vec2 lattice_value(int i, int j) const;
  static long long cell_key(int i, int j, bool plus);

  const Triangulation* tri_;
  Configuration f_;
  std::vector<Mat2> dF_;
  std::unordered_map<long long, int> cells_;  // (lattice cell, class) -> triangle
};

DeformationField affine_extend(const Triangulation& tri, Configuration f);

/// (A a ∧ A b) / ν(p): the determinant of A relative to the g-volume form.
double det_fiber(const FiberMap& A, const MetricField& g);

/// Fiber data of W frozen at one base point.
struct LocalFrame {
  Vec2 p;
  std::array<Vec2, 3> axes;     // a, b, c in the chart
  std::array<double, 3> len;    // |u|_g
  std::array<double, 3> rho;    // |u|_g / Σ|w|_g
  double nu = 1.0;              // |a ∧ b|_g
  double chart_wedge = 1.0;     // a ∧ b in the chart
};

class ContinuumDensity {
 public:
  ContinuumDensity(MetricField g, Laws laws);

  const MetricField& metric() const { return g_; }
  const Laws& laws() const { return laws_; }

  LocalFrame local(const Vec2& p) const;

  /// W(A) = Σ_u ρ^u Φ(|Au| / |u|_g) + Ψ(det_fiber A)
  double W(const FiberMap& A) const { return W(local(A.base), A.A); }
  double W(const LocalFrame& L, const Mat2& A) const;
  /// ∂W/∂A (entrywise, chart basis); undefined where some A u vanishes.
  Mat2 dW(const LocalFrame& L, const Mat2& A) const;

  /// W_ε on triangle t: Σ_u ρ_ε^u Φ(|Au| / D_ε^u) + Ψ((Aa ∧ Ab) / ν_ε).
  double W_eps(const Triangulation& tri, const TriangleMeasures& m, int t, const Mat2& A) const;

 private:
  MetricField g_;
  Laws laws_;
};

/// Σ_T μ_T W_ε(dF_T) = ∫_{M_ε} W_ε^Total(dF_ε) dVol_g.
double integral_energy(const DeformationField& F, const TriangleMeasures& m, const ContinuumDensity& density);
/// Σ_T μ_T W(dF_T) with W frozen at each centroid.
double integral_energy_limit(const DeformationField& F, const TriangleMeasures& m, const ContinuumDensity& density);

/// Jacobian of a smooth map in chart coordinates.
using JacobianFn = std::function<Mat2(const Vec2&)>;
/// ∫_M W(dF) dVol_g over the whole chart by a tensor Gauss rule.
double integral_energy_smooth(const JacobianFn& dF, const ContinuumDensity& density, int panels = 32, int order = 6);

struct ConformalReport {
  bool conformal = false;
  double conformality_residual = 0.0;  // max |Gf/g_aa - Gf(p0)/g_aa(p0)|
  bool hexagonal = false;              // |a| = |b| and angle 2π/3 at one point
  double hexagonal_defect = 0.0;
  double material_max = 0.0;           // max |W_q(A∘Π̃_q^p) - W_p(A)|
  double rotation_max = 0.0;           // max |W(A∘R_{π/3}) - W(A)|
  int samples = 0;
  bool skipped = true;
};

/// Material-connection and π/3-rotation identities of W for a conformal metric.
ConformalReport conformal_symmetry_check(const ContinuumDensity& density, int samples, std::uint64_t seed,
                                         double conformal_tol = 1e-10);

/// g_p-rotation by angle: G^{-1/2} R G^{1/2}.
Mat2 metric_rotation(const Mat2& G, double angle);

}  // namespace incompat
