#include "incompat/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "incompat/parallel.hpp"
#include "incompat/quadrature.hpp"

namespace incompat {

namespace {

long long lattice_key(int i, int j) {
  return (static_cast<long long>(i) << 32) ^ static_cast<long long>(static_cast<unsigned int>(j));
}

Vec2 lattice_point(const Vec2& origin, const LatticeFrame& f, double eps, int i, int j) {
  return origin + eps * (static_cast<double>(i) * f.a + static_cast<double>(j) * f.b);
}

}  // namespace

const char* axis_name(Axis u) {
  switch (u) {
    case Axis::A: return "a";
    case Axis::B: return "b";
    case Axis::C: return "c";
  }
  return "?";
}

int Triangulation::vertex_at(int i, int j) const {
  const auto it = index_.find(lattice_key(i, j));
  return it == index_.end() ? -1 : it->second;
}

std::array<Vec2, 3> Triangulation::corners(int t) const {
  const auto& v = triangles[t].v;
  return {vertices[v[0]], vertices[v[1]], vertices[v[2]]};
}

std::vector<int> Triangulation::neighbors(int v) const {
  std::vector<int> out;
  for (int e : vertex_edges_[v]) out.push_back(edges[e].p == v ? edges[e].q : edges[e].p);
  return out;
}

std::size_t Triangulation::num_interior() const {
  return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 0));
}

void Triangulation::finalize() {
  index_.clear();
  for (std::size_t v = 0; v < lattice.size(); ++v) index_[lattice_key(lattice[v][0], lattice[v][1])] = static_cast<int>(v);

  edges.clear();
  std::map<std::pair<int, int>, int> edge_ids;
  for (auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      int p = t.v[k], q = t.v[(k + 1) % 3];
      if (t.orient == Orientation::Minus) std::swap(p, q);
      const auto key = std::minmax(p, q);
      auto [it, fresh] = edge_ids.emplace(key, static_cast<int>(edges.size()));
      if (fresh) edges.push_back({p, q, static_cast<Axis>(k)});
      t.edges[k] = it->second;
    }
  }

  edge_triangles.assign(edges.size(), {});
  std::vector<int> tri_count(vertices.size(), 0);
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      edge_triangles[triangles[t].edges[k]].push_back(static_cast<int>(t));
      ++tri_count[triangles[t].v[k]];
    }
  }
  vertex_edges_.assign(vertices.size(), {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    vertex_edges_[edges[e].p].push_back(static_cast<int>(e));
    vertex_edges_[edges[e].q].push_back(static_cast<int>(e));
  }
  boundary.assign(vertices.size(), 0);
  for (std::size_t v = 0; v < vertices.size(); ++v) boundary[v] = tri_count[v] < 6;
}

Triangulation build_lattice(const Chart& chart, const LatticeFrame& frame, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw GeometryError("epsilon must be positive and finite");
  Triangulation tri;
  tri.epsilon = epsilon;
  tri.chart = chart;
  tri.frame = frame;
  tri.origin = {chart.x0 + 0.5 * epsilon, chart.y0 + 0.5 * epsilon};

  // Lattice-coordinate bounding box of the chart.
  const Mat2 Finv = frame.basis().inverse();
  double imin = 1e300, imax = -1e300, jmin = 1e300, jmax = -1e300;
  for (const Vec2 corner : {Vec2{chart.x0, chart.y0}, Vec2{chart.x1, chart.y0}, Vec2{chart.x0, chart.y1},
                            Vec2{chart.x1, chart.y1}}) {
    const Vec2 ij = Finv * ((corner - tri.origin) / epsilon);
    imin = std::min(imin, ij.x), imax = std::max(imax, ij.x);
    jmin = std::min(jmin, ij.y), jmax = std::max(jmax, ij.y);
  }
  if ((imax - imin) * (jmax - jmin) > 5e7) throw GeometryError("epsilon too small for this domain");
  const int i0 = static_cast<int>(std::floor(imin)) - 1, i1 = static_cast<int>(std::ceil(imax)) + 1;
  const int j0 = static_cast<int>(std::floor(jmin)) - 1, j1 = static_cast<int>(std::ceil(jmax)) + 1;
  const double tol = 1e-12 * std::max(chart.width(), chart.height());
  auto inside = [&](int i, int j) { return chart.contains(lattice_point(tri.origin, frame, epsilon, i, j), tol); };

  struct Raw {
    std::array<std::array<int, 2>, 3> ij;
    Orientation orient;
  };
  std::vector<Raw> raw;
  for (int j = j0; j < j1; ++j)
    for (int i = i0; i < i1; ++i) {
      if (!inside(i, j) || !inside(i + 1, j + 1)) continue;
      if (inside(i + 1, j)) raw.push_back({{{{i, j}, {i + 1, j}, {i + 1, j + 1}}}, Orientation::Plus});
      if (inside(i, j + 1)) raw.push_back({{{{i + 1, j + 1}, {i, j + 1}, {i, j}}}, Orientation::Minus});
    }
  if (raw.empty()) throw GeometryError("domain too small for epsilon: no lattice triangle fits");

  // Row-major vertex numbering (j outer, i inner).
  std::vector<std::array<int, 2>> used;
  for (const auto& r : raw)
    for (const auto& ij : r.ij) used.push_back(ij);
  std::sort(used.begin(), used.end(), [](const auto& u, const auto& w) { return u[1] != w[1] ? u[1] < w[1] : u[0] < w[0]; });
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::unordered_map<long long, int> number;
  for (std::size_t v = 0; v < used.size(); ++v) {
    number[lattice_key(used[v][0], used[v][1])] = static_cast<int>(v);
    tri.lattice.push_back(used[v]);
    tri.vertices.push_back(lattice_point(tri.origin, frame, epsilon, used[v][0], used[v][1]));
  }
  for (const auto& r : raw) {
    Triangle t;
    t.orient = r.orient;
    for (int k = 0; k < 3; ++k) t.v[k] = number.at(lattice_key(r.ij[k][0], r.ij[k][1]));
    tri.triangles.push_back(t);
  }
  tri.finalize();
  if (tri.num_interior() == 0) throw GeometryError("domain too small for epsilon: no interior vertex");
  return tri;
}

std::vector<std::string> check_invariants(const Triangulation& tri) {
  std::vector<std::string> bad;
  const double eps = tri.epsilon;
  const double tol = 1e-12 * std::max({1.0, std::abs(tri.chart.x0), std::abs(tri.chart.x1), std::abs(tri.chart.y0),
                                       std::abs(tri.chart.y1)});
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const auto c = tri.corners(static_cast<int>(t));
    const double s = tri.triangles[t].orient == Orientation::Plus ? 1.0 : -1.0;
    for (int k = 0; k < 3; ++k) {
      const Vec2 side = c[(k + 1) % 3] - c[k];
      if (norm(side - s * eps * tri.frame.axis(k)) > tol)
        bad.push_back("triangle " + std::to_string(t) + " side " + std::to_string(k) + " is not parallel to its axis");
      if (!tri.chart.contains(c[k], tol)) bad.push_back("triangle " + std::to_string(t) + " leaves the chart");
    }
  }
  for (std::size_t e = 0; e < tri.edges.size(); ++e) {
    const auto& inc = tri.edge_triangles[e];
    if (inc.empty() || inc.size() > 2) {
      bad.push_back("edge " + std::to_string(e) + " has " + std::to_string(inc.size()) + " incident triangles");
    } else if (inc.size() == 2 && tri.triangles[inc[0]].orient == tri.triangles[inc[1]].orient) {
      bad.push_back("edge " + std::to_string(e) + " is shared by two triangles of the same class");
    }
  }
  for (std::size_t v = 0; v < tri.vertices.size(); ++v) {
    if (tri.boundary[v]) continue;
    const auto nb = tri.neighbors(static_cast<int>(v));
    if (nb.size() != 6) {
      bad.push_back("interior vertex " + std::to_string(v) + " has " + std::to_string(nb.size()) + " neighbors");
      continue;
    }
    for (int k = 0; k < 3; ++k)
      for (double s : {1.0, -1.0}) {
        const Vec2 target = tri.vertices[v] + s * eps * tri.frame.axis(k);
        const bool found = std::any_of(nb.begin(), nb.end(), [&](int w) { return norm(tri.vertices[w] - target) <= tol; });
        if (!found) bad.push_back("interior vertex " + std::to_string(v) + " misses a lattice neighbor");
      }
  }
  return bad;
}

// ---------------------------------------------------------------------------

double TriangleMeasures::total_area() const {
  double s = 0.0;
  for (double m : mu) s += m;
  return s;
}

double triangle_area(const MetricField& g, const std::array<Vec2, 3>& t, int order) {
  return integrate_triangle(t[0], t[1], t[2], order, [&](const Vec2& x) { return g.volume_density(x); });
}

std::array<double, 3> closest_edge_fractions(const MetricField& g, const std::array<Vec2, 3>& t, int n_sample,
                                             int order) {
  const Vec2 centroid = (t[0] + t[1] + t[2]) / 3.0;
  const Mat2 G = g.tensor(centroid);
  std::array<double, 3> rho{};

  if (n_sample <= 0) {
    // In a constant metric the region closest to side k is the triangle spanned
    // by that side and the incenter.
    std::array<double, 3> len;
    for (int k = 0; k < 3; ++k) {
      const Vec2 s = t[(k + 1) % 3] - t[k];
      len[k] = std::sqrt(dot(s, G * s));
    }
    const Vec2 incenter = (len[1] * t[0] + len[2] * t[1] + len[0] * t[2]) / (len[0] + len[1] + len[2]);
    for (int k = 0; k < 3; ++k)
      rho[k] = integrate_triangle(t[k], t[(k + 1) % 3], incenter, order, [&](const Vec2& x) { return g.volume_density(x); });
  } else {
    // Stratified: centroids of the k² congruent sub-triangles.
    const int n = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_sample)))));
    const Mat2 H = sym_sqrt(G);
    std::array<Vec2, 3> h{H * t[0], H * t[1], H * t[2]};
    auto seg_dist = [](const Vec2& x, const Vec2& p, const Vec2& q) {
      const Vec2 d = q - p;
      const double s = std::clamp(dot(x - p, d) / dot(d, d), 0.0, 1.0);
      return norm(x - (p + s * d));
    };
    const Vec2 e1 = (t[1] - t[0]) / n, e2 = (t[2] - t[0]) / n;
    auto sample = [&](double u, double w) {
      const Vec2 x = t[0] + u * e1 + w * e2;
      const Vec2 hx = H * x;
      int best = 0;
      double dbest = seg_dist(hx, h[0], h[1]);
      for (int k = 1; k < 3; ++k) {
        const double d = seg_dist(hx, h[k], h[(k + 1) % 3]);
        if (d < dbest) dbest = d, best = k;
      }
      rho[best] += g.volume_density(x);
    };
    for (int i = 0; i < n; ++i)
      for (int j = 0; i + j < n; ++j) {
        sample(i + 1.0 / 3.0, j + 1.0 / 3.0);
        if (i + j + 1 < n) sample(i + 2.0 / 3.0, j + 2.0 / 3.0);
      }
  }
  const double total = rho[0] + rho[1] + rho[2];
  for (double& r : rho) r /= total;
  return rho;
}

std::array<double, 3> rescaled_distances(const MetricField& g, const std::array<Vec2, 3>& t, double epsilon,
                                         const DistanceOptions& opts) {
  std::array<double, 3> D;
  for (int k = 0; k < 3; ++k) D[k] = riemannian_distance(t[k], t[(k + 1) % 3], g, opts).value / epsilon;
  return D;
}

double edge_weight(const Triangulation& tri, const TriangleMeasures& m, int edge) {
  const auto& inc = tri.edge_triangles.at(edge);
  if (inc.empty()) throw GeometryError("edge " + std::to_string(edge) + " has no incident triangle");
  const int axis = static_cast<int>(tri.edges[edge].axis);
  double w = 0.0;
  for (int t : inc) w += m.rho[t][axis] * m.mu[t];
  return w;
}

TriangleMeasures compute_measures(const Triangulation& tri, const MetricField& g, const MeasureOptions& opts) {
  TriangleMeasures m;
  const std::size_t ne = tri.edges.size(), nt = tri.triangles.size();
  m.edge_distance.assign(ne, 0.0);
  std::vector<char> failed(ne, 0);
  const bool euclid = g.kind() == MetricField::Kind::Euclidean;
  parallel_for(
      ne,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const Vec2 p = tri.vertices[tri.edges[i].p], q = tri.vertices[tri.edges[i].q];
          if (euclid) {
            m.edge_distance[i] = norm(q - p);
            continue;
          }
          const DistanceResult r = riemannian_distance(p, q, g, opts.distance);
          m.edge_distance[i] = r.value;
          failed[i] = !r.converged;
        }
      },
      8);
  m.distance_failures = static_cast<int>(std::count(failed.begin(), failed.end(), 1));

  m.mu.assign(nt, 0.0);
  m.nu.assign(nt, 0.0);
  m.rho.assign(nt, {});
  m.D.assign(nt, {});
  parallel_for(
      nt,
      [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
          const auto c = tri.corners(static_cast<int>(t));
          m.mu[t] = triangle_area(g, c, opts.quad_order);
          m.nu[t] = g.nu((c[0] + c[1] + c[2]) / 3.0);
          m.rho[t] = closest_edge_fractions(g, c, opts.rho_samples, opts.quad_order);
          for (int k = 0; k < 3; ++k) m.D[t][k] = m.edge_distance[tri.triangles[t].edges[k]] / tri.epsilon;
        }
      },
      16);

  m.edge_mu.assign(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) m.edge_mu[e] = edge_weight(tri, m, static_cast<int>(e));
  return m;
}

double metric_volume(const Chart& chart, const MetricField& g, int panels, int order) {
  const LineRule& rule = gauss_legendre(order);
  const double hx = chart.width() / panels, hy = chart.height() / panels;
  double acc = 0.0;
  for (int i = 0; i < panels; ++i)
    for (int j = 0; j < panels; ++j) {
      double cell = 0.0;
      for (std::size_t a = 0; a < rule.nodes.size(); ++a)
        for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
          const Vec2 x{chart.x0 + (i + rule.nodes[a]) * hx, chart.y0 + (j + rule.nodes[b]) * hy};
          cell += rule.weights[a] * rule.weights[b] * g.volume_density(x);
        }
      acc += cell;
    }
  return acc * hx * hy;
}

double coverage_defect(const Chart& chart, const Triangulation&, const MetricField& g, const TriangleMeasures& m) {
  return metric_volume(chart, g) - m.total_area();
}

// ---------------------------------------------------------------------------

nlohmann::json mesh_to_json(const Triangulation& tri) {
  using nlohmann::json;
  json j;
  j["epsilon"] = tri.epsilon;
  j["chart"] = {tri.chart.x0, tri.chart.x1, tri.chart.y0, tri.chart.y1};
  j["origin"] = {tri.origin.x, tri.origin.y};
  j["frame"] = {{"a", {tri.frame.a.x, tri.frame.a.y}}, {"b", {tri.frame.b.x, tri.frame.b.y}}};
  json verts = json::array(), edges = json::array(), tris = json::array();
  for (const Vec2& v : tri.vertices) verts.push_back({v.x, v.y});
  for (const Edge& e : tri.edges) edges.push_back({e.p, e.q, axis_name(e.axis)});
  for (const Triangle& t : tri.triangles)
    tris.push_back({t.v[0], t.v[1], t.v[2], t.orient == Orientation::Plus ? "+" : "-"});
  j["vertices"] = std::move(verts);
  j["edges"] = std::move(edges);
  j["triangles"] = std::move(tris);
  return j;
}

Triangulation mesh_from_json(const nlohmann::json& j) {
  Triangulation tri;
  try {
    tri.epsilon = j.at("epsilon").get<double>();
    const auto& c = j.at("chart");
    tri.chart = Chart(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>(), c.at(3).get<double>());
    tri.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
    const auto& f = j.at("frame");
    tri.frame = LatticeFrame({f.at("a").at(0).get<double>(), f.at("a").at(1).get<double>()},
                             {f.at("b").at(0).get<double>(), f.at("b").at(1).get<double>()});
    const Mat2 Finv = tri.frame.basis().inverse();
    for (const auto& v : j.at("vertices")) {
      const Vec2 p{v.at(0).get<double>(), v.at(1).get<double>()};
      const Vec2 ij = Finv * ((p - tri.origin) / tri.epsilon);
      if (std::abs(ij.x - std::round(ij.x)) > 1e-9 || std::abs(ij.y - std::round(ij.y)) > 1e-9)
        throw GeometryError("mesh json: vertex " + std::to_string(tri.vertices.size()) + " is not a lattice point");
      tri.vertices.push_back(p);
      tri.lattice.push_back({static_cast<int>(std::lround(ij.x)), static_cast<int>(std::lround(ij.y))});
    }
    const int nv = static_cast<int>(tri.vertices.size());
    for (const auto& t : j.at("triangles")) {
      Triangle tr;
      for (int k = 0; k < 3; ++k) {
        tr.v[k] = t.at(k).get<int>();
        if (tr.v[k] < 0 || tr.v[k] >= nv) throw GeometryError("mesh json: triangle vertex index out of range");
      }
      const std::string o = t.at(3).get<std::string>();
      if (o != "+" && o != "-") throw GeometryError("mesh json: orientation must be \"+\" or \"-\"");
      tr.orient = o == "+" ? Orientation::Plus : Orientation::Minus;
      tri.triangles.push_back(tr);
    }
    tri.finalize();
    const auto& edges = j.at("edges");
    bool same = edges.size() == tri.edges.size();
    for (std::size_t e = 0; same && e < tri.edges.size(); ++e)
      same = edges[e].at(0).get<int>() == tri.edges[e].p && edges[e].at(1).get<int>() == tri.edges[e].q &&
             edges[e].at(2).get<std::string>() == axis_name(tri.edges[e].axis);
    if (!same) throw GeometryError("mesh json: edge list is inconsistent with the triangles");
    const auto problems = check_invariants(tri);
    if (!problems.empty()) throw GeometryError("mesh json: " + problems.front());
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(std::string("mesh json: ") + e.what());
  }
  return tri;
}

}  // namespace incompat
