#pragma once

// ε-scale hexagonal lattice over a chart rectangle and the per-edge /
// per-triangle measures that enter the discrete energies.
//
// Vertex order inside a triangle follows one convention for both classes:
// side k runs from v[k] to v[k+1] and is parallel to axis k (a, b, c).
//   K+ : (p, p+εa, p+εa+εb)        sides +εa, +εb, +εc
//   K- : (p+εa+εb, p+εb, p)        sides -εa, -εb, -εc
// With this order (v1-v0)∧(v2-v1) = ε² a∧b for both classes, so a single
// formula serves the signed-volume term.

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "incompat/geometry.hpp"
#include "json.hpp"

namespace incompat {

enum class Orientation : int { Plus = 0, Minus = 1 };

/// q = p + ε·axis in chart coordinates.
struct Edge {
  int p = 0, q = 0;
  Axis axis = Axis::A;
};

struct Triangle {
  std::array<int, 3> v{};
  Orientation orient = Orientation::Plus;
  /// edge index of side k (v[k] -> v[k+1], axis k)
  std::array<int, 3> edges{};
};

class Triangulation {
 public:
  double epsilon = 0.0;
  Chart chart;
  LatticeFrame frame;
  Vec2 origin;

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 2>> lattice;  // (i, j) with v = origin + ε(i a + j b)
  std::vector<Edge> edges;
  std::vector<Triangle> triangles;
  std::vector<char> boundary;                // fewer than six incident triangles
  std::vector<std::vector<int>> edge_triangles;

  std::size_t num_vertices() const { return vertices.size(); }
  /// -1 when the lattice point is not a mesh vertex.
  int vertex_at(int i, int j) const;
  std::array<Vec2, 3> corners(int t) const;
  /// Vertices joined to v by an edge, in edge order.
  std::vector<int> neighbors(int v) const;
  std::size_t num_interior() const;

  /// Rebuilds lookup tables, edges, incidence and boundary flags from
  /// vertices/lattice/triangles (edges keep their triangle-derived order).
  void finalize();

 private:
  std::unordered_map<long long, int> index_;
  std::vector<std::vector<int>> vertex_edges_;
};

/// Lattice {origin + ε(i a + j b)} with origin = lower-left corner + (ε/2, ε/2);
/// keeps exactly the triangles whose closed hull lies in the chart.
Triangulation build_lattice(const Chart& chart, const LatticeFrame& frame, double epsilon);

/// Violated structural invariants, empty when the mesh is sound.
std::vector<std::string> check_invariants(const Triangulation& tri);

// ---------------------------------------------------------------------------

struct MeasureOptions {
  int quad_order = 6;
  /// 0 integrates the exact closest-edge regions; n > 0 uses n stratified samples.
  int rho_samples = 0;
  DistanceOptions distance;
};

struct TriangleMeasures {
  std::vector<double> mu;                    // g-area of each triangle
  std::vector<double> nu;                    // ν at the centroid
  std::vector<std::array<double, 3>> rho;    // closest-edge fractions by axis
  std::vector<std::array<double, 3>> D;      // d(side)/ε by axis
  std::vector<double> edge_distance;         // d(p, q) per edge
  std::vector<double> edge_mu;               // μ_ε(p, q) per edge
  int distance_failures = 0;                 // edges whose relaxation hit max_iters

  double total_area() const;
};

double triangle_area(const MetricField& g, const std::array<Vec2, 3>& t, int order = 6);

/// Fractions of the g-area of t closest to side k (v[k] -> v[k+1]), with the
/// point-to-side distance measured in the frozen metric G(centroid).
std::array<double, 3> closest_edge_fractions(const MetricField& g, const std::array<Vec2, 3>& t, int n_sample = 0,
                                             int order = 6);

std::array<double, 3> rescaled_distances(const MetricField& g, const std::array<Vec2, 3>& t, double epsilon,
                                         const DistanceOptions& opts = {});

double edge_weight(const Triangulation& tri, const TriangleMeasures& m, int edge);

TriangleMeasures compute_measures(const Triangulation& tri, const MetricField& g, const MeasureOptions& opts = {});

/// Vol_g of the chart rectangle by a tensor Gauss rule on panels×panels cells.
double metric_volume(const Chart& chart, const MetricField& g, int panels = 16, int order = 8);

/// Vol_g(M) - Σ μ(triangle).
double coverage_defect(const Chart& chart, const Triangulation& tri, const MetricField& g,
                       const TriangleMeasures& m);

nlohmann::json mesh_to_json(const Triangulation& tri);
Triangulation mesh_from_json(const nlohmann::json& j);

const char* axis_name(Axis u);

}  // namespace incompat
