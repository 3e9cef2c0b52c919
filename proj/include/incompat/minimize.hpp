#pragma once

// Approximate minimizers of the discrete energy and ε-sweeps.

#include <cstdint>
#include <string>
#include <vector>

#include "incompat/continuum.hpp"
#include "incompat/optim.hpp"

namespace incompat {

struct SolveOptions {
  int max_iters = 20000;
  /// Negative selects the default 1e-8 · (mesh g-area).
  double grad_tol = -1.0;
  double sufficient_decrease = 1e-4;
  double backtrack = 0.5;
  int history = 10;
  int multi_start = 4;
  std::uint64_t seed = 0;
  /// Extra starts perturb the initial configuration by uniform noise of this amplitude times ε.
  double start_noise = 0.1;

  void validate() const;
  nlohmann::json to_json() const;
};

struct SolveDiagnostics {
  LbfgsStatus status = LbfgsStatus::Converged;
  double grad_norm = 0.0;
  double grad_tol = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int best_start = 0;
  std::vector<double> start_energies;
  bool warning = false;
  double seconds = 0.0;
};

struct SolveResult {
  Configuration f;
  EnergyBreakdown energy;
  SolveDiagnostics diag;
};

SolveResult minimize_config(const EnergyModel& model, const Configuration& init, const SolveOptions& opts = {});

enum class InitKind { ChartIdentity, Scaled, Random, Custom };

InitKind parse_init_kind(const std::string& s);

/// chart-identity: f(v) = v; scaled: param · v; random: v + uniform noise in
/// [-param, param]²; custom: `custom` is copied after a size check.
Configuration initial_configuration(const Triangulation& tri, InitKind kind, double param = 1.0,
                                    std::uint64_t seed = 0, const Configuration* custom = nullptr);

struct Procrustes {
  Mat2 R = Mat2::identity();  // proper rotation
  Vec2 t;
  double rms = 0.0;
  double max_dev = 0.0;
};

/// Best rigid motion x ↦ R x + t taking `from` onto `to` in the least-squares sense.
Procrustes procrustes_align(std::span<const Vec2> from, std::span<const Vec2> to);

struct ProblemSpec {
  Chart chart;
  LatticeFrame frame;
  MetricField metric = MetricField::euclidean(Chart{}, LatticeFrame{});
  Laws laws;
  MeasureOptions measures;
};

struct SweepEntry {
  double epsilon = 0.0;
  std::size_t n_vertices = 0;
  double energy = 0.0, bond = 0.0, volume = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  double defect = 0.0;
  double seconds = 0.0;
  bool warning = false;
  int distance_failures = 0;
};

struct SweepReport {
  std::vector<SweepEntry> entries;   // decreasing ε
  std::vector<double> relative_change;  // |E_k - E_{k-1}| / |E_{k-1}|
  SolveOptions options;
  std::vector<Configuration> minimizers;

  bool any_warning() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

SweepReport epsilon_sweep(const ProblemSpec& spec, const std::vector<double>& eps_list, const SolveOptions& opts = {},
                          bool keep_minimizers = false);

}  // namespace incompat
