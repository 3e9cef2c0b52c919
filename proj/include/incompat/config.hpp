#pragma once

// Versioned JSON problem configuration. Unknown keys are rejected.
//
// {
//   "version": 1,
//   "chart": {"x0": 0, "x1": 1, "y0": 0, "y1": 1},
//   "frame": {"a": [1, 0], "b": [-0.5, 0.8660254037844386]},
//   "metric": {"kind": "euclidean"}
//           | {"kind": "conformal", "phi": "exp((x^2+y^2)/2)"}
//           | {"kind": "general", "g_aa": "...", "g_bb": "...", "g_ab": "..."},
//   "bond_law": {"kind": "hookean", "k": 1}
//             | {"kind": "custom", "phi": "<expression in x = r>", "alpha": 1, "C": 1, "L": 2},
//   "volume_law": {"kind": "huber", "beta": 1, "delta": 0.001} | {"kind": "abs", "beta": 1},
//   "epsilon": 0.1,
//   "eps_list": [0.2, 0.1, 0.05],
//   "solver": {"max_iters": ..., "grad_tol": ..., "sufficient_decrease": ..., "backtrack": ...,
//              "history": ..., "multi_start": ..., "start_noise": ...},
//   "init": {"kind": "chart-identity" | "scaled" | "random", "param": 1.0},
//   "measures": {"quad_order": 6, "rho_samples": 0, "distance_nodes": 9, "distance_tol": 1e-10,
//                "distance_max_iters": 500, "distance_fast": false, "distance_extrapolate": true},
//   "qw": {"level": 3, "samples": 50, "random_starts": 8, "perturbation": 0.5, "min_far": 0.05},
//   "seed": 0,
//   "output": {"dir": "out"}
// }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "incompat/minimize.hpp"
#include "incompat/qw.hpp"
#include "json.hpp"

namespace incompat {

inline constexpr int kConfigVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error((path.empty() ? std::string("config") : path) + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct MetricSpec {
  std::string kind = "euclidean";
  std::string phi = "1";
  std::string g_aa, g_bb, g_ab;
};

struct QwSpec {
  int level = 3;
  int samples = 50;
  int random_starts = 8;
  double perturbation = 0.5;
  double min_far = 0.05;
};

struct ProblemConfig {
  int version = kConfigVersion;
  Chart chart;
  LatticeFrame frame;
  MetricSpec metric_spec;
  Laws laws;
  std::optional<double> epsilon;
  std::vector<double> eps_list;
  SolveOptions solver;
  InitKind init = InitKind::ChartIdentity;
  double init_param = 1.0;
  MeasureOptions measures;
  QwSpec qw;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  MetricField metric() const;
  ProblemSpec problem() const;
};

/// Validates structure, expressions, SPD-ness of the metric on a 64×64 grid and the frame.
ProblemConfig parse_config(const nlohmann::json& j);
ProblemConfig load_config(const std::filesystem::path& path);

}  // namespace incompat
