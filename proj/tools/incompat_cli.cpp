// incompat: command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 solver warning,
// 3 validation failure, 4 any other runtime error.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "incompat/config.hpp"
#include "incompat/io.hpp"
#include "incompat/parallel.hpp"
#include "incompat/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace incompat;

namespace {

constexpr int kOk = 0, kConfigFailure = 1, kSolverWarning = 2, kValidationFailure = 3, kRuntimeFailure = 4;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string eps;
  bool timings = false;
};

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || !(v > 0.0)) throw ConfigError("--eps", "bad value \"" + item + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--eps", "empty list");
  return out;
}

ProblemConfig load(const Common& c) {
  ProblemConfig cfg = c.config.empty() ? parse_config(json{{"version", kConfigVersion}}) : load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.solver.seed = *c.seed;
  }
  if (!c.eps.empty()) {
    const auto list = parse_eps_list(c.eps);
    cfg.epsilon = list.front();
    cfg.eps_list = list;
  }
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.threads > 0) set_thread_count(c.threads);
  return cfg;
}

double single_epsilon(const ProblemConfig& cfg) {
  if (cfg.epsilon) return *cfg.epsilon;
  if (!cfg.eps_list.empty()) return cfg.eps_list.front();
  throw ConfigError("epsilon", "missing (set epsilon, eps_list or --eps)");
}

json counts(const Triangulation& tri) {
  return {{"epsilon", tri.epsilon},
          {"vertices", tri.num_vertices()},
          {"interior_vertices", tri.num_interior()},
          {"edges", tri.edges.size()},
          {"triangles", tri.triangles.size()}};
}

int cmd_mesh(const ProblemConfig& cfg) {
  const MetricField g = cfg.metric();
  const Triangulation tri = build_lattice(cfg.chart, cfg.frame, single_epsilon(cfg));
  const TriangleMeasures m = compute_measures(tri, g, cfg.measures);
  const double vol = metric_volume(cfg.chart, g);
  const double defect = coverage_defect(cfg.chart, tri, g, m);
  json summary = counts(tri);
  summary["volume"] = vol;
  summary["mesh_area"] = m.total_area();
  summary["coverage_defect"] = defect;
  summary["defect_over_volume"] = defect / vol;
  summary["distance_failures"] = m.distance_failures;
  const auto problems = check_invariants(tri);
  summary["invariant_violations"] = problems;
  write_json(fs::path(cfg.out_dir) / "mesh.json", mesh_to_json(tri));
  write_json(fs::path(cfg.out_dir) / "mesh_summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return problems.empty() ? kOk : kRuntimeFailure;
}

int cmd_minimize(const ProblemConfig& cfg, bool timings) {
  const MetricField g = cfg.metric();
  const Triangulation tri = build_lattice(cfg.chart, cfg.frame, single_epsilon(cfg));
  const TriangleMeasures m = compute_measures(tri, g, cfg.measures);
  const EnergyModel model(tri, m, cfg.laws);
  const Configuration init = initial_configuration(tri, cfg.init, cfg.init_param, cfg.seed);
  SolveResult r = minimize_config(model, init, cfg.solver);
  if (!timings) r.diag.seconds = 0.0;

  json report = counts(tri);
  report["min_energy"] = r.energy.total;
  report["bond"] = r.energy.bond;
  report["volume"] = r.energy.volume;
  report["status"] = to_string(r.diag.status);
  report["grad_norm"] = r.diag.grad_norm;
  report["grad_tol"] = r.diag.grad_tol;
  report["iterations"] = r.diag.iterations;
  report["evaluations"] = r.diag.evaluations;
  report["best_start"] = r.diag.best_start;
  report["start_energies"] = r.diag.start_energies;
  report["warning"] = r.diag.warning;
  report["seconds"] = r.diag.seconds;
  report["distance_failures"] = m.distance_failures;
  report["solver"] = cfg.solver.to_json();
  report["bond_law"] = cfg.laws.bond.describe();
  report["volume_law"] = cfg.laws.volume.describe();
  write_json(fs::path(cfg.out_dir) / "minimize.json", report);
  write_json(fs::path(cfg.out_dir) / "configuration.json", configuration_to_json(r.f));
  std::cout << "epsilon " << tri.epsilon << "  vertices " << tri.num_vertices() << "  min_energy " << r.energy.total
            << "  status " << to_string(r.diag.status) << "\n";
  if (r.diag.warning) {
    std::cerr << "warning: solver stopped with " << to_string(r.diag.status) << ", grad_norm " << r.diag.grad_norm
              << " > " << r.diag.grad_tol << "\n";
    return kSolverWarning;
  }
  return kOk;
}

int cmd_sweep(const ProblemConfig& cfg, bool timings) {
  if (cfg.eps_list.empty()) throw ConfigError("eps_list", "missing (set eps_list or --eps)");
  SweepReport rep;
  try {
    rep = epsilon_sweep(cfg.problem(), cfg.eps_list, cfg.solver);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("eps_list", e.what());
  }
  if (!timings)
    for (auto& e : rep.entries) e.seconds = 0.0;
  write_json(fs::path(cfg.out_dir) / "sweep.json", rep.to_json());
  write_text(fs::path(cfg.out_dir) / "sweep.csv", rep.to_csv());
  std::cout << rep.to_csv();
  if (rep.any_warning()) {
    std::cerr << "warning: at least one solve ended above its gradient tolerance\n";
    return kSolverWarning;
  }
  return kOk;
}

int cmd_qw(const ProblemConfig& cfg) {
  const ContinuumDensity density(cfg.metric(), cfg.laws);
  const auto fibers = sample_fibers(density.metric(), cfg.qw.samples, cfg.seed, cfg.qw.perturbation, cfg.qw.min_far);
  QwOptions opts;
  opts.level = cfg.qw.level;
  opts.random_starts = cfg.qw.random_starts;
  opts.seed = cfg.seed + 1;
  const RigidityReport rep = rigidity_lower_check(density, fibers, opts);
  const std::string csv = qw_table_csv(rep);
  json summary{{"samples", rep.rows.size()},
               {"level", opts.level},
               {"min_ratio", rep.min_ratio},
               {"near_zero_away", rep.near_zero_away},
               {"sandwich_violations", rep.sandwich_violations}};
  write_text(fs::path(cfg.out_dir) / "qw.csv", csv);
  write_json(fs::path(cfg.out_dir) / "qw_summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  if (rep.sandwich_violations > 0) {
    std::cerr << "warning: " << rep.sandwich_violations << " rows violate QW_est <= W\n";
    return kSolverWarning;
  }
  return kOk;
}

int cmd_validate(const std::string& selector, std::size_t trials, const Common& c) {
  if (c.threads > 0) set_thread_count(c.threads);
  ValidationOptions opts;
  opts.trials = trials;
  if (c.seed) opts.seed = *c.seed;
  std::vector<SuiteResult> results;
  try {
    results = run_suites(selector, opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("suite", e.what());
  }
  bool all = true;
  json report = json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    report.push_back(to_json(r));
    std::printf("%-4s %-28s trials=%zu violations=%zu worst=%.3e %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.trials, r.violations, r.worst, r.detail.c_str());
  }
  if (!c.out.empty()) write_json(fs::path(c.out) / "validate.json", report);
  return all ? kOk : kValidationFailure;
}

int cmd_curvature(const ProblemConfig& cfg, int n) {
  const MetricField g = cfg.metric();
  std::ostringstream csv;
  csv.precision(17);
  csv << "x,y,K\n";
  double kmin = 0.0, kmax = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p{cfg.chart.x0 + cfg.chart.width() * (i + 0.5) / n, cfg.chart.y0 + cfg.chart.height() * (j + 0.5) / n};
      const double K = gauss_curvature(g, p);
      if (i == 0 && j == 0) kmin = kmax = K;
      kmin = std::min(kmin, K);
      kmax = std::max(kmax, K);
      csv << p.x << ',' << p.y << ',' << K << '\n';
    }
  json summary{{"grid", n}, {"K_min", kmin}, {"K_max", kmax}, {"flat", std::max(-kmin, kmax) < 1e-10}};
  write_text(fs::path(cfg.out_dir) / "curvature.csv", csv.str());
  write_json(fs::path(cfg.out_dir) / "curvature.json", summary);
  std::cout << summary.dump(2) << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "problem configuration (JSON)");
  if (config_required) opt->required();
  sub->add_option("--out", c.out, "output directory (overrides output.dir)");
  sub->add_option("--seed", c.seed, "random seed (overrides seed)");
  sub->add_option("--threads", c.threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  sub->add_option("--eps", c.eps, "comma-separated ε list (overrides epsilon and eps_list)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-to-continuum elasticity of incompatible lattices"};
  app.require_subcommand(1);
  Common c;
  std::string selector = "all";
  std::size_t trials = 100000;
  int grid = 33;

  auto* mesh = app.add_subcommand("mesh", "build the lattice triangulation and its measures");
  add_common(mesh, c, false);
  auto* minimize = app.add_subcommand("minimize", "minimize the discrete energy at one ε");
  add_common(minimize, c, false);
  minimize->add_flag("--timings", c.timings, "record wall-clock seconds in the report");
  auto* sweep = app.add_subcommand("sweep", "minimize over a decreasing ε list");
  add_common(sweep, c, false);
  sweep->add_flag("--timings", c.timings, "record wall-clock seconds in the report");
  auto* qw = app.add_subcommand("qw", "table of W, the QW upper estimate and dist² on sampled fibers");
  add_common(qw, c, false);
  auto* validate = app.add_subcommand("validate", "run the randomized property suites");
  validate->add_option("suite", selector, "all | appendix | geometry | distance | energy | continuum");
  validate->add_option("--out", c.out, "write validate.json into this directory");
  validate->add_option("--seed", c.seed, "random seed");
  validate->add_option("--threads", c.threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  validate->add_option("--trials", trials, "trials per randomized suite")->check(CLI::PositiveNumber);
  auto* curvature = app.add_subcommand("curvature", "Gauss curvature of the metric on a grid");
  add_common(curvature, c, false);
  curvature->add_option("--grid", grid, "grid points per side")->check(CLI::Range(1, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigFailure;
  }

  try {
    if (*validate) return cmd_validate(selector, trials, c);
    const ProblemConfig cfg = load(c);
    if (*mesh) return cmd_mesh(cfg);
    if (*minimize) return cmd_minimize(cfg, c.timings);
    if (*sweep) return cmd_sweep(cfg, c.timings);
    if (*qw) return cmd_qw(cfg);
    if (*curvature) return cmd_curvature(cfg, grid);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}
