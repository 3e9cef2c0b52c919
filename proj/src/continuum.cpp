#include "incompat/continuum.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "incompat/quadrature.hpp"

namespace incompat {

long long DeformationField::cell_key(int i, int j, bool plus) {
  return ((static_cast<long long>(i) << 32) ^ static_cast<long long>(static_cast<unsigned int>(j))) * 2 + (plus ? 0 : 1);
}

DeformationField::DeformationField(const Triangulation& tri, Configuration f) : tri_(&tri), f_(std::move(f)) {
  if (f_.size() != tri.vertices.size()) throw EnergyError("configuration does not match the mesh");
  const Mat2 F = tri.frame.basis();
  dF_.resize(tri.triangles.size());
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto& v = tri.triangles[t].v;
    const double s = tri.triangles[t].orient == Orientation::Plus ? tri.epsilon : -tri.epsilon;
    const Mat2 sides = Mat2::from_columns(f_[v[1]] - f_[v[0]], f_[v[2]] - f_[v[1]]);
    const Mat2 M = s * F;
    if (!(std::abs(M.det()) > 0.0)) throw GeometryError("degenerate triangle " + std::to_string(t));
    dF_[t] = sides * M.inverse();
    const auto& ij = tri.lattice[tri.triangles[t].orient == Orientation::Plus ? v[0] : v[2]];
    cells_[cell_key(ij[0], ij[1], tri.triangles[t].orient == Orientation::Plus)] = static_cast<int>(t);
  }
}

FiberMap DeformationField::fiber(int t) const {
  const auto c = tri_->corners(t);
  return {(c[0] + c[1] + c[2]) / 3.0, dF_[t]};
}

namespace {

struct CellCoord {
  int i, j;
  double alpha, beta;
};

CellCoord cell_of(const Triangulation& tri, const Vec2& x) {
  const Vec2 u = tri.frame.basis().inverse() * ((x - tri.origin) / tri.epsilon);
  const double fi = std::floor(u.x), fj = std::floor(u.y);
  return {static_cast<int>(fi), static_cast<int>(fj), u.x - fi, u.y - fj};
}

}  // namespace

int DeformationField::locate(const Vec2& x) const {
  const CellCoord c = cell_of(*tri_, x);
  const auto it = cells_.find(cell_key(c.i, c.j, c.alpha >= c.beta));
  return it == cells_.end() ? -1 : it->second;
}

Vec2 DeformationField::lattice_value(int i, int j) const {
  const int v = tri_->vertex_at(i, j);
  if (v >= 0) return f_[v];
  static constexpr int nb[6][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
  Vec2 sum;
  int k = 0;
  for (const auto& d : nb) {
    const int w = tri_->vertex_at(i + d[0], j + d[1]);
    if (w >= 0) sum += f_[w], ++k;
  }
  if (k > 0) return sum / static_cast<double>(k);
  const Vec2 x = tri_->origin + tri_->epsilon * (static_cast<double>(i) * tri_->frame.a + static_cast<double>(j) * tri_->frame.b);
  std::size_t best = 0;
  double dbest = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < tri_->vertices.size(); ++w) {
    const double d = norm2(tri_->vertices[w] - x);
    if (d < dbest) dbest = d, best = w;
  }
  return f_[best];
}

Vec2 DeformationField::operator()(const Vec2& x) const {
  const CellCoord c = cell_of(*tri_, x);
  const Vec2 f00 = lattice_value(c.i, c.j), f11 = lattice_value(c.i + 1, c.j + 1);
  if (c.alpha >= c.beta) {
    const Vec2 f10 = lattice_value(c.i + 1, c.j);
    return f00 + c.alpha * (f10 - f00) + c.beta * (f11 - f10);
  }
  const Vec2 f01 = lattice_value(c.i, c.j + 1);
  return f00 + c.beta * (f01 - f00) + c.alpha * (f11 - f01);
}

DeformationField affine_extend(const Triangulation& tri, Configuration f) { return DeformationField(tri, std::move(f)); }

double det_fiber(const FiberMap& A, const MetricField& g) {
  const double nu = g.nu(A.base);
  if (!(nu > 0.0)) throw GeometryError("det_fiber: degenerate metric");
  const LatticeFrame& fr = g.frame();
  return wedge(A.A * fr.a, A.A * fr.b) / nu;
}

// ---------------------------------------------------------------------------

ContinuumDensity::ContinuumDensity(MetricField g, Laws laws) : g_(std::move(g)), laws_(std::move(laws)) {}

LocalFrame ContinuumDensity::local(const Vec2& p) const {
  LocalFrame L;
  L.p = p;
  const LatticeFrame& fr = g_.frame();
  const Mat2 G = g_.tensor(p);
  L.axes = {fr.a, fr.b, fr.c()};
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) sum += L.len[k] = std::sqrt(dot(L.axes[k], G * L.axes[k]));
  for (int k = 0; k < 3; ++k) L.rho[k] = L.len[k] / sum;
  L.chart_wedge = fr.chart_wedge();
  L.nu = std::sqrt(G.det()) * std::abs(L.chart_wedge);
  return L;
}

double ContinuumDensity::W(const LocalFrame& L, const Mat2& A) const {
  double w = 0.0;
  for (int k = 0; k < 3; ++k) w += L.rho[k] * laws_.bond.value(norm(A * L.axes[k]) / L.len[k]);
  return w + laws_.volume.value(wedge(A * L.axes[0], A * L.axes[1]) / L.nu);
}

Mat2 ContinuumDensity::dW(const LocalFrame& L, const Mat2& A) const {
  Mat2 d{0.0, 0.0, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    const Vec2 Au = A * L.axes[k];
    const double n = norm(Au);
    const double r = n / L.len[k];
    d += (L.rho[k] * laws_.bond.derivative(r) / (L.len[k] * n)) * outer(Au, L.axes[k]);
  }
  const double det = wedge(A * L.axes[0], A * L.axes[1]) / L.nu;
  d += (laws_.volume.derivative(det) * L.chart_wedge / L.nu) * A.cofactor();
  return d;
}

double ContinuumDensity::W_eps(const Triangulation& tri, const TriangleMeasures& m, int t, const Mat2& A) const {
  const LatticeFrame& fr = tri.frame;
  const std::array<Vec2, 3> axes{fr.a, fr.b, fr.c()};
  double w = 0.0;
  for (int k = 0; k < 3; ++k) w += m.rho[t][k] * laws_.bond.value(norm(A * axes[k]) / m.D[t][k]);
  return w + laws_.volume.value(wedge(A * axes[0], A * axes[1]) / m.nu[t]);
}

double integral_energy(const DeformationField& F, const TriangleMeasures& m, const ContinuumDensity& density) {
  double acc = 0.0;
  for (std::size_t t = 0; t < m.mu.size(); ++t)
    acc += m.mu[t] * density.W_eps(F.mesh(), m, static_cast<int>(t), F.differential(static_cast<int>(t)));
  return acc;
}

double integral_energy_limit(const DeformationField& F, const TriangleMeasures& m, const ContinuumDensity& density) {
  double acc = 0.0;
  for (std::size_t t = 0; t < m.mu.size(); ++t) acc += m.mu[t] * density.W(F.fiber(static_cast<int>(t)));
  return acc;
}

double integral_energy_smooth(const JacobianFn& dF, const ContinuumDensity& density, int panels, int order) {
  const Chart& chart = density.metric().chart();
  const LineRule& rule = gauss_legendre(order);
  const double hx = chart.width() / panels, hy = chart.height() / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i)
    for (int j = 0; j < panels; ++j)
      for (std::size_t a = 0; a < rule.nodes.size(); ++a)
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
          const Vec2 x{chart.x0 + (i + rule.nodes[a]) * hx, chart.y0 + (j + rule.nodes[b]) * hy};
          acc += rule.weights[a] * rule.weights[b] * density.metric().volume_density(x) * density.W({x, dF(x)});
        }
  return acc * hx * hy;
}

// ---------------------------------------------------------------------------

Mat2 metric_rotation(const Mat2& G, double angle) {
  return sym_inv_sqrt(G) * Mat2::rotation(angle) * sym_sqrt(G);
}

ConformalReport conformal_symmetry_check(const ContinuumDensity& density, int samples, std::uint64_t seed,
                                         double conformal_tol) {
  ConformalReport rep;
  const MetricField& g = density.metric();
  const Chart& chart = g.chart();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(chart.x0, chart.x1), uy(chart.y0, chart.y1), ua(-2.0, 2.0);

  // Conformality with respect to the chart frame: Gf(x) / g_aa(x) is constant.
  const Vec2 p0{0.5 * (chart.x0 + chart.x1), 0.5 * (chart.y0 + chart.y1)};
  const auto c0 = g.frame_coefficients(p0);
  for (int i = 0; i < 256; ++i) {
    const Vec2 p{ux(rng), uy(rng)};
    const auto c = g.frame_coefficients(p);
    rep.conformality_residual = std::max({rep.conformality_residual, std::abs(c[1] / c[0] - c0[1] / c0[0]),
                                          std::abs(c[2] / c[0] - c0[2] / c0[0])});
  }
  rep.conformal = rep.conformality_residual <= conformal_tol;
  if (!rep.conformal) return rep;
  rep.skipped = false;

  auto phi = [&](const Vec2& p) {
    if (g.kind() == MetricField::Kind::Conformal) return g.conformal_factor()->value(p.x, p.y);
    return std::sqrt(g.frame_coefficients(p)[0]);
  };
  const double cos_ab = c0[2] / std::sqrt(c0[0] * c0[1]);
  rep.hexagonal_defect = std::max(std::abs(c0[0] - c0[1]) / c0[0], std::abs(cos_ab + 0.5));
  rep.hexagonal = rep.hexagonal_defect <= 1e-12;

  for (int s = 0; s < samples; ++s) {
    const Vec2 p{ux(rng), uy(rng)}, q{ux(rng), uy(rng)};
    const Mat2 A{ua(rng), ua(rng), ua(rng), ua(rng)};
    // Π̃_q^p : T_q -> T_p is v ↦ φ(q)/φ(p) v.
    const double lambda = phi(q) / phi(p);
    const double wp = density.W({p, A}), wq = density.W({q, lambda * A});
    rep.material_max = std::max(rep.material_max, std::abs(wq - wp));
    if (rep.hexagonal) {
      const Mat2 R = metric_rotation(g.tensor(p), std::numbers::pi / 3.0);
      rep.rotation_max = std::max(rep.rotation_max, std::abs(density.W({p, A * R}) - wp));
    }
    ++rep.samples;
  }
  return rep;
}

}  // namespace incompat
