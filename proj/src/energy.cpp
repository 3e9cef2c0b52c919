#include "incompat/energy.hpp"

#include <cmath>
#include <string>

#include "incompat/energy_kernels.hpp"

namespace incompat {

EnergyModel::EnergyModel(const Triangulation& tri, const TriangleMeasures& m, Laws laws)
    : tri_(tri), m_(m), laws_(std::move(laws)) {
  if (m.edge_distance.size() != tri.edges.size() || m.mu.size() != tri.triangles.size())
    throw EnergyError("measures do not match the triangulation");
  inv_d_.resize(tri.edges.size());
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    if (!(m.edge_distance[e] > 0.0)) throw EnergyError("edge " + std::to_string(e) + " has zero cached distance");
    inv_d_[e] = 1.0 / m.edge_distance[e];
  }
  vol_scale_.resize(tri.triangles.size());
  const double eps2 = tri.epsilon * tri.epsilon;
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    if (!(m.nu[t] > 0.0)) throw EnergyError("triangle " + std::to_string(t) + " has nonpositive nu");
    vol_scale_[t] = 1.0 / (eps2 * m.nu[t]);
  }
}

void EnergyModel::check(std::span<const Vec2> f) const {
  if (f.size() != tri_.vertices.size())
    throw EnergyError("configuration has " + std::to_string(f.size()) + " values, mesh has " +
                      std::to_string(tri_.vertices.size()) + " vertices");
}

EnergyBreakdown EnergyModel::evaluate(std::span<const Vec2> f, std::span<Vec2> grad, bool detail) const {
  check(f);
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != f.size()) throw EnergyError("gradient buffer has the wrong length");
  const std::size_t ne = tri_.edges.size(), nt = tri_.triangles.size();

  std::vector<double> dx(ne), dy(ne), e_bond(ne), c_bond(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const Vec2 d = f[tri_.edges[e].q] - f[tri_.edges[e].p];
    dx[e] = d.x;
    dy[e] = d.y;
  }
  if (laws_.bond.kind() == BondLaw::Kind::Hookean) {
    kernels::bond_hookean(laws_.bond.stiffness(), {dx.data(), dy.data(), inv_d_.data(), m_.edge_mu.data(),
                                                   e_bond.data(), c_bond.data(), ne});
  } else {
    for (std::size_t e = 0; e < ne; ++e) {
      const double len = std::hypot(dx[e], dy[e]);
      const double r = len * inv_d_[e];
      e_bond[e] = m_.edge_mu[e] * laws_.bond.value(r);
      if (want_grad) c_bond[e] = m_.edge_mu[e] * laws_.bond.derivative(r) * inv_d_[e] / len;
    }
  }

  std::vector<double> w(nt), e_vol(nt), c_vol(nt);
  for (std::size_t t = 0; t < nt; ++t) w[t] = signed_wedge(tri_, static_cast<int>(t), f);
  const kernels::VolumeBatch vb{w.data(), vol_scale_.data(), m_.mu.data(), e_vol.data(), c_vol.data(), nt};
  if (laws_.volume.kind() == VolumeLaw::Kind::Huber)
    kernels::volume_huber(laws_.volume.beta(), laws_.volume.delta(), vb);
  else
    kernels::volume_abs(laws_.volume.beta(), vb);

  EnergyBreakdown out;
  for (std::size_t e = 0; e < ne; ++e) out.bond += e_bond[e];
  for (std::size_t t = 0; t < nt; ++t) out.volume += e_vol[t];
  out.total = out.bond + out.volume;
  if (detail) {
    out.per_edge = std::move(e_bond);
    out.per_triangle = std::move(e_vol);
  }

  if (want_grad) {
    for (auto& g : grad) g = {};
    for (std::size_t e = 0; e < ne; ++e) {
      if (!std::isfinite(c_bond[e])) {
        if (dx[e] == 0.0 && dy[e] == 0.0)
          throw EnergyError("bond gradient undefined: edge " + std::to_string(e) + " has zero length");
        throw EnergyError("non-finite bond gradient on edge " + std::to_string(e));
      }
      const Vec2 gq{c_bond[e] * dx[e], c_bond[e] * dy[e]};
      grad[tri_.edges[e].q] += gq;
      grad[tri_.edges[e].p] -= gq;
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& v = tri_.triangles[t].v;
      const Vec2 u = f[v[1]] - f[v[0]], s = f[v[2]] - f[v[1]];
      // w = u ∧ s: ∂w/∂u = (s.y, -s.x), ∂w/∂s = (-u.y, u.x)
      const Vec2 du{c_vol[t] * s.y, -c_vol[t] * s.x}, ds{-c_vol[t] * u.y, c_vol[t] * u.x};
      grad[v[0]] -= du;
      grad[v[1]] += du - ds;
      grad[v[2]] += ds;
    }
  }
  return out;
}

double signed_wedge(const Triangulation& tri, int t, std::span<const Vec2> f) {
  const auto& v = tri.triangles[t].v;
  return wedge(f[v[1]] - f[v[0]], f[v[2]] - f[v[1]]);
}

double bond_energy(const Triangulation& tri, const TriangleMeasures& m, const BondLaw& law, std::span<const Vec2> f) {
  return EnergyModel(tri, m, {law, VolumeLaw::huber()}).evaluate(f).bond;
}

double volume_energy(const Triangulation& tri, const TriangleMeasures& m, const VolumeLaw& law,
                     std::span<const Vec2> f) {
  return EnergyModel(tri, m, {BondLaw::hookean(), law}).evaluate(f).volume;
}

EnergyBreakdown total_energy(const Triangulation& tri, const TriangleMeasures& m, const Laws& laws,
                             std::span<const Vec2> f, bool detail) {
  return EnergyModel(tri, m, laws).evaluate(f, {}, detail);
}

std::vector<Vec2> energy_gradient(const Triangulation& tri, const TriangleMeasures& m, const Laws& laws,
                                  std::span<const Vec2> f) {
  std::vector<Vec2> g(f.size());
  EnergyModel(tri, m, laws).evaluate(f, g);
  return g;
}

nlohmann::json to_json(const EnergyBreakdown& e) {
  nlohmann::json j{{"bond", e.bond}, {"volume", e.volume}, {"total", e.total}};
  if (!e.per_edge.empty()) j["per_edge"] = e.per_edge;
  if (!e.per_triangle.empty()) j["per_triangle"] = e.per_triangle;
  return j;
}

nlohmann::json configuration_to_json(std::span<const Vec2> f) {
  nlohmann::json j = nlohmann::json::array();
  for (const Vec2& v : f) j.push_back({v.x, v.y});
  return j;
}

Configuration configuration_from_json(const nlohmann::json& j) {
  Configuration f;
  for (const auto& v : j) {
    const Vec2 p{v.at(0).get<double>(), v.at(1).get<double>()};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw EnergyError("configuration has a non-finite entry");
    f.push_back(p);
  }
  return f;
}

}  // namespace incompat
