#include "incompat/minimize.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "incompat/parallel.hpp"

namespace incompat {

void SolveOptions::validate() const {
  if (max_iters < 1) throw std::invalid_argument("solver.max_iters must be ≥ 1");
  if (grad_tol == 0.0 || !std::isfinite(grad_tol)) throw std::invalid_argument("solver.grad_tol must be > 0");
  if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0))
    throw std::invalid_argument("solver.sufficient_decrease must lie in (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw std::invalid_argument("solver.backtrack must lie in (0, 1)");
  if (history < 1) throw std::invalid_argument("solver.history must be ≥ 1");
  if (multi_start < 1) throw std::invalid_argument("solver.multi_start must be ≥ 1");
  if (!(start_noise >= 0.0)) throw std::invalid_argument("solver.start_noise must be ≥ 0");
}

nlohmann::json SolveOptions::to_json() const {
  return {{"max_iters", max_iters},       {"grad_tol", grad_tol},
          {"sufficient_decrease", sufficient_decrease}, {"backtrack", backtrack},
          {"history", history},           {"multi_start", multi_start},
          {"seed", seed},                 {"start_noise", start_noise}};
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  std::uint64_t out;
  seq.generate(reinterpret_cast<std::uint32_t*>(&out), reinterpret_cast<std::uint32_t*>(&out) + 2);
  return out;
}

void subtract_mean(Configuration& f) {
  Vec2 mean;
  for (const Vec2& v : f) mean += v;
  mean = mean / static_cast<double>(f.size());
  for (Vec2& v : f) v -= mean;
}

}  // namespace

SolveResult minimize_config(const EnergyModel& model, const Configuration& init, const SolveOptions& opts) {
  opts.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const Triangulation& tri = model.mesh();
  if (init.size() != tri.vertices.size()) throw EnergyError("initial configuration does not match the mesh");
  for (const Vec2& v : init)
    if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw EnergyError("initial configuration is not finite");

  LbfgsOptions lo;
  lo.max_iters = opts.max_iters;
  lo.grad_tol = opts.grad_tol > 0.0 ? opts.grad_tol : 1e-8 * model.measures().total_area();
  lo.history = opts.history;
  lo.sufficient_decrease = opts.sufficient_decrease;
  lo.backtrack = opts.backtrack;

  struct Run {
    Configuration f;
    LbfgsResult r;
    bool aborted = false;
  };
  std::vector<Run> runs(opts.multi_start);
  parallel_for(
      runs.size(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t s = b; s < e; ++s) {
          Run& run = runs[s];
          run.f = init;
          if (s > 0) {
            std::mt19937_64 rng(stream_seed(opts.seed, s));
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            const double amp = opts.start_noise * tri.epsilon;
            for (Vec2& v : run.f) v += Vec2{amp * u(rng), amp * u(rng)};
          }
          const Objective obj = [&](std::span<const double> x, std::span<double> g) {
            const std::span<const Vec2> f(reinterpret_cast<const Vec2*>(x.data()), x.size() / 2);
            const std::span<Vec2> gv(reinterpret_cast<Vec2*>(g.data()), g.size() / 2);
            try {
              const double E = model.evaluate(f, gv).total;
              return std::isfinite(E) ? E : std::numeric_limits<double>::infinity();
            } catch (const EnergyError&) {
              return std::numeric_limits<double>::infinity();
            }
          };
          std::span<double> x(reinterpret_cast<double*>(run.f.data()), 2 * run.f.size());
          run.r = lbfgs_minimize(x, obj, lo);
          run.aborted = run.r.status == LbfgsStatus::NonFinite;
        }
      },
      1);

  SolveResult out;
  int best = -1;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    out.diag.start_energies.push_back(runs[s].r.value);
    if (runs[s].aborted) continue;
    if (best < 0 || runs[s].r.value < runs[best].r.value) best = static_cast<int>(s);
  }
  if (best < 0) throw EnergyError("every start produced a non-finite energy");
  const Run& win = runs[best];
  out.f = win.f;
  subtract_mean(out.f);
  out.energy = model.evaluate(out.f);
  out.diag.status = win.r.status;
  out.diag.grad_norm = win.r.grad_norm;
  out.diag.grad_tol = lo.grad_tol;
  out.diag.iterations = win.r.iterations;
  out.diag.evaluations = win.r.evaluations;
  out.diag.best_start = best;
  out.diag.warning = !win.r.ok() && win.r.grad_norm > lo.grad_tol;
  out.diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

InitKind parse_init_kind(const std::string& s) {
  if (s == "chart-identity") return InitKind::ChartIdentity;
  if (s == "scaled") return InitKind::Scaled;
  if (s == "random") return InitKind::Random;
  if (s == "custom") return InitKind::Custom;
  throw std::invalid_argument("unknown initial configuration kind '" + s + "'");
}

Configuration initial_configuration(const Triangulation& tri, InitKind kind, double param, std::uint64_t seed,
                                    const Configuration* custom) {
  Configuration f(tri.vertices.begin(), tri.vertices.end());
  switch (kind) {
    case InitKind::ChartIdentity: break;
    case InitKind::Scaled:
      for (Vec2& v : f) v = param * v;
      break;
    case InitKind::Random: {
      if (param == 0.0) break;
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-param, param);
      for (Vec2& v : f) v += Vec2{u(rng), u(rng)};
      break;
    }
    case InitKind::Custom:
      if (custom == nullptr || custom->size() != f.size()) throw std::invalid_argument("custom configuration has the wrong size");
      f = *custom;
      break;
  }
  return f;
}

Procrustes procrustes_align(std::span<const Vec2> from, std::span<const Vec2> to) {
  if (from.size() != to.size() || from.empty()) throw std::invalid_argument("procrustes: size mismatch");
  Vec2 cf, ct;
  for (std::size_t i = 0; i < from.size(); ++i) cf += from[i], ct += to[i];
  cf = cf / static_cast<double>(from.size());
  ct = ct / static_cast<double>(from.size());
  // Optimal proper rotation maximizes tr(Rᵀ H), H = Σ (to - ct)(from - cf)ᵀ.
  Mat2 H{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < from.size(); ++i) H += outer(to[i] - ct, from[i] - cf);
  const double angle = std::atan2(H.c - H.b, H.a + H.d);
  Procrustes p;
  p.R = Mat2::rotation(angle);
  p.t = ct - p.R * cf;
  double ss = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    const double d = norm(p.R * from[i] + p.t - to[i]);
    ss += d * d;
    p.max_dev = std::max(p.max_dev, d);
  }
  p.rms = std::sqrt(ss / static_cast<double>(from.size()));
  return p;
}

bool SweepReport::any_warning() const {
  for (const auto& e : entries)
    if (e.warning) return true;
  return false;
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j;
  j["solver"] = options.to_json();
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries)
    j["entries"].push_back({{"epsilon", e.epsilon},
                            {"n_vertices", e.n_vertices},
                            {"min_energy", e.energy},
                            {"bond", e.bond},
                            {"volume", e.volume},
                            {"grad_norm", e.grad_norm},
                            {"iterations", e.iterations},
                            {"defect", e.defect},
                            {"seconds", e.seconds},
                            {"warning", e.warning},
                            {"distance_failures", e.distance_failures}});
  j["relative_change"] = relative_change;
  return j;
}

std::string SweepReport::to_csv() const {
  std::ostringstream s;
  s.precision(17);
  s << "epsilon,n_vertices,min_energy,bond,volume,grad_norm,defect,seconds\n";
  for (const auto& e : entries)
    s << e.epsilon << ',' << e.n_vertices << ',' << e.energy << ',' << e.bond << ',' << e.volume << ',' << e.grad_norm
      << ',' << e.defect << ',' << e.seconds << '\n';
  return s.str();
}

SweepReport epsilon_sweep(const ProblemSpec& spec, const std::vector<double>& eps_list, const SolveOptions& opts,
                          bool keep_minimizers) {
  if (eps_list.size() < 3) throw std::invalid_argument("epsilon sweep needs at least 3 values");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("epsilon list must be strictly decreasing");

  SweepReport rep;
  rep.options = opts;
  std::unique_ptr<Triangulation> prev_tri;
  Configuration prev_f;
  for (double eps : eps_list) {
    const auto t0 = std::chrono::steady_clock::now();
    auto tri = std::make_unique<Triangulation>(build_lattice(spec.chart, spec.frame, eps));
    const TriangleMeasures m = compute_measures(*tri, spec.metric, spec.measures);
    const EnergyModel model(*tri, m, spec.laws);

    Configuration init;
    if (prev_tri) {
      // Warm start: sample the coarse minimizer's piecewise-affine extension.
      const DeformationField coarse(*prev_tri, prev_f);
      for (const Vec2& v : tri->vertices) init.push_back(coarse(v));
    } else {
      init = initial_configuration(*tri, InitKind::ChartIdentity);
    }
    const SolveResult r = minimize_config(model, init, opts);

    SweepEntry e;
    e.epsilon = eps;
    e.n_vertices = tri->vertices.size();
    e.energy = r.energy.total;
    e.bond = r.energy.bond;
    e.volume = r.energy.volume;
    e.grad_norm = r.diag.grad_norm;
    e.iterations = r.diag.iterations;
    e.defect = coverage_defect(spec.chart, *tri, spec.metric, m);
    e.warning = r.diag.warning || m.distance_failures > 0;
    e.distance_failures = m.distance_failures;
    e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.entries.empty()) {
      const double last = rep.entries.back().energy;
      rep.relative_change.push_back(std::abs(e.energy - last) / std::max(std::abs(last), 1e-300));
    }
    rep.entries.push_back(e);
    if (keep_minimizers) rep.minimizers.push_back(r.f);
    prev_tri = std::move(tri);
    prev_f = r.f;
  }
  return rep;
}

}  // namespace incompat
