#pragma once

// Discrete bond and signed-volume energies on a lattice triangulation and
// their gradients with respect to the vertex values.

#include <span>
#include <stdexcept>
#include <vector>

#include "incompat/laws.hpp"
#include "incompat/triangulation.hpp"
#include "json.hpp"

namespace incompat {

/// f_ε : V_ε -> R², indexed like Triangulation::vertices.
using Configuration = std::vector<Vec2>;

class EnergyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnergyBreakdown {
  double bond = 0.0;
  double volume = 0.0;
  double total = 0.0;
  std::vector<double> per_edge;      // filled when detail is requested
  std::vector<double> per_triangle;
};

/// Binds a mesh, its measures and the laws; evaluation is const and thread-safe.
class EnergyModel {
 public:
  EnergyModel(const Triangulation& tri, const TriangleMeasures& m, Laws laws);

  const Triangulation& mesh() const { return tri_; }
  const TriangleMeasures& measures() const { return m_; }
  const Laws& laws() const { return laws_; }

  /// Returns E and, when grad is non-empty, writes ∂E/∂f (same length as f).
  EnergyBreakdown evaluate(std::span<const Vec2> f, std::span<Vec2> grad = {}, bool detail = false) const;

 private:
  void check(std::span<const Vec2> f) const;

  const Triangulation& tri_;
  const TriangleMeasures& m_;
  Laws laws_;
  std::vector<double> inv_d_;      // 1 / d(p, q) per edge
  std::vector<double> vol_scale_;  // 1 / (ε² ν) per triangle
};

double bond_energy(const Triangulation& tri, const TriangleMeasures& m, const BondLaw& law, std::span<const Vec2> f);
double volume_energy(const Triangulation& tri, const TriangleMeasures& m, const VolumeLaw& law, std::span<const Vec2> f);
EnergyBreakdown total_energy(const Triangulation& tri, const TriangleMeasures& m, const Laws& laws,
                             std::span<const Vec2> f, bool detail = false);
std::vector<Vec2> energy_gradient(const Triangulation& tri, const TriangleMeasures& m, const Laws& laws,
                                  std::span<const Vec2> f);

/// (f(v1)-f(v0)) ∧ (f(v2)-f(v1)) for triangle t in its stored vertex order.
double signed_wedge(const Triangulation& tri, int t, std::span<const Vec2> f);

nlohmann::json to_json(const EnergyBreakdown& e);
nlohmann::json configuration_to_json(std::span<const Vec2> f);
Configuration configuration_from_json(const nlohmann::json& j);

}  // namespace incompat
