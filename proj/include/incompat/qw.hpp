#pragma once

// Upper estimate of the quasiconvex envelope QW at a fiber:
//   QW(A) ≤ inf_φ ⨍_D W(A + dφ) ω,
// with φ piecewise affine on a triangulated hexagon D inscribed in the unit
// disc and φ = 0 on ∂D. Meshes at successive levels are nested (red
// refinement), so every coarse test field is also a fine one.

#include <cstdint>
#include <string>
#include <vector>

#include "incompat/continuum.hpp"
#include "incompat/optim.hpp"

namespace incompat {

struct DiscMesh {
  int level = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<char> on_boundary;
  std::vector<int> var_of;                    // node -> unknown index, -1 on the boundary
  std::vector<double> weight;                 // |T| / |D|
  std::vector<std::array<Vec2, 3>> grad_lambda;
  std::vector<std::array<int, 2>> parents;    // nodes of the previous level (equal for inherited nodes)
  int num_vars() const;
};

/// Cached; level ≥ 1 has 24·4^(level-1) triangles.
const DiscMesh& disc_mesh(int level);

struct QwOptions {
  int level = 3;
  int random_starts = 8;
  std::uint64_t seed = 1;
  double start_scale = 0.1;
  LbfgsOptions lbfgs{10000, 1e-12, 1e-13, 10, 1e-4, 0.5, 60};
};

struct QwResult {
  double estimate = 0.0;
  double W = 0.0;
  std::vector<double> per_level;  // estimate after each level 1..level
  bool warning = false;           // some inner solve ended abnormally
};

/// The inner problem is posed for the symmetric factor of A's polar
/// decomposition, snapped to a 2^-40 grid, which makes the estimate exactly
/// invariant under rotations of the target.
QwResult qw_upper_estimate(const FiberMap& A, const ContinuumDensity& density, const QwOptions& opts = {});

struct QwRow {
  FiberMap A;
  double W = 0.0, qw = 0.0, dist2 = 0.0;
  bool sandwich_ok = true;
};

struct RigidityReport {
  std::vector<QwRow> rows;
  double min_ratio = 0.0;       // min qw / dist² over rows with dist² > 1e-4
  int near_zero_away = 0;       // rows with dist² > 0.1 but qw < 1e-6
  int sandwich_violations = 0;
};

RigidityReport rigidity_lower_check(const ContinuumDensity& density, const std::vector<FiberMap>& fibers,
                                    const QwOptions& opts = {}, double sandwich_tol = 1e-9);

/// Fiber samples for QW tables: every fourth is an exact g-isometry R G^{1/2};
/// the others are perturbations R G^{1/2}(I + sN) kept only when
/// dist²(A, SO) ≥ min_far.
std::vector<FiberMap> sample_fibers(const MetricField& g, int n, std::uint64_t seed, double perturbation = 0.5,
                                    double min_far = 0.05);

/// Header plus one line per row: A entries, base point, W, QW_est, dist², flag.
std::string qw_table_csv(const RigidityReport& rep);

}  // namespace incompat
