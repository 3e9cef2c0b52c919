#include "incompat/qw.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "incompat/parallel.hpp"

namespace incompat {

int DiscMesh::num_vars() const {
  int n = 0;
  for (int v : var_of) n += v >= 0;
  return 2 * n;
}

namespace {

void finish(DiscMesh& m) {
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : m.tris)
    for (int k = 0; k < 3; ++k) ++count[std::minmax(t[k], t[(k + 1) % 3])];
  m.on_boundary.assign(m.nodes.size(), 0);
  for (const auto& [e, c] : count)
    if (c == 1) m.on_boundary[e.first] = m.on_boundary[e.second] = 1;
  m.var_of.assign(m.nodes.size(), -1);
  int next = 0;
  for (std::size_t v = 0; v < m.nodes.size(); ++v)
    if (!m.on_boundary[v]) m.var_of[v] = next++;

  double total = 0.0;
  m.weight.clear();
  m.grad_lambda.clear();
  for (const auto& t : m.tris) {
    const Vec2 p0 = m.nodes[t[0]], p1 = m.nodes[t[1]], p2 = m.nodes[t[2]];
    const double twice = wedge(p1 - p0, p2 - p0);
    // ∇λ_k = perp(opposite side) / (2|T|), oriented counterclockwise.
    m.grad_lambda.push_back({perp(p2 - p1) / twice, perp(p0 - p2) / twice, perp(p1 - p0) / twice});
    m.weight.push_back(0.5 * std::abs(twice));
    total += 0.5 * std::abs(twice);
  }
  for (double& w : m.weight) w /= total;
}

DiscMesh refine(const DiscMesh& coarse) {
  DiscMesh m;
  m.level = coarse.level + 1;
  m.nodes = coarse.nodes;
  for (std::size_t v = 0; v < coarse.nodes.size(); ++v) m.parents.push_back({static_cast<int>(v), static_cast<int>(v)});
  std::map<std::pair<int, int>, int> mid;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto [it, fresh] = mid.emplace(key, static_cast<int>(m.nodes.size()));
    if (fresh) {
      m.nodes.push_back(0.5 * (coarse.nodes[a] + coarse.nodes[b]));
      m.parents.push_back({a, b});
    }
    return it->second;
  };
  for (const auto& t : coarse.tris) {
    const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
    m.tris.push_back({t[0], a, c});
    m.tris.push_back({a, t[1], b});
    m.tris.push_back({c, b, t[2]});
    m.tris.push_back({a, b, c});
  }
  finish(m);
  return m;
}

DiscMesh hexagon() {
  DiscMesh m;
  m.nodes.push_back({0.0, 0.0});
  for (int k = 0; k < 6; ++k) {
    const double th = k * std::numbers::pi / 3.0;
    m.nodes.push_back({std::cos(th), std::sin(th)});
  }
  for (int k = 0; k < 6; ++k) m.tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
  for (std::size_t v = 0; v < m.nodes.size(); ++v) m.parents.push_back({static_cast<int>(v), static_cast<int>(v)});
  finish(m);
  return m;
}

double closest_rotation_angle(const Mat2& A) {
  const double s = A.c - A.b, c = A.a + A.d;
  return (s == 0.0 && c == 0.0) ? 0.0 : std::atan2(s, c);
}

Mat2 canonical_stretch(const Mat2& A) {
  const Mat2 S = Mat2::rotation(closest_rotation_angle(A)).transpose() * A;
  constexpr double kGrid = 0x1p-40;
  auto snap = [](double v) { return std::nearbyint(v / kGrid) * kGrid; };
  const double off = snap(0.5 * (S.b + S.c));
  return {snap(S.a), off, off, snap(S.d)};
}

// Nodal test field, 2 unknowns per interior node; boundary nodes are zero.
double objective(const DiscMesh& m, const LocalFrame& L, const Mat2& A, const ContinuumDensity& density,
                 std::span<const double> x, std::span<double> g) {
  auto val = [&](int node) {
    const int v = m.var_of[node];
    return v < 0 ? Vec2{} : Vec2{x[2 * v], x[2 * v + 1]};
  };
  for (double& gi : g) gi = 0.0;
  double J = 0.0;
  for (std::size_t t = 0; t < m.tris.size(); ++t) {
    const auto& tr = m.tris[t];
    Mat2 M = A;
    for (int k = 0; k < 3; ++k) M += outer(val(tr[k]), m.grad_lambda[t][k]);
    J += m.weight[t] * density.W(L, M);
    if (g.empty()) continue;
    const Mat2 D = m.weight[t] * density.dW(L, M);
    for (int k = 0; k < 3; ++k) {
      const int v = m.var_of[tr[k]];
      if (v < 0) continue;
      const Vec2 gl = D * m.grad_lambda[t][k];
      g[2 * v] += gl.x;
      g[2 * v + 1] += gl.y;
    }
  }
  return std::isfinite(J) ? J : std::numeric_limits<double>::infinity();
}

std::vector<double> prolong(const DiscMesh& fine, const DiscMesh& coarse, const std::vector<double>& xc) {
  std::vector<double> xf(fine.num_vars(), 0.0);
  auto coarse_val = [&](int node) {
    const int v = coarse.var_of[node];
    return v < 0 ? Vec2{} : Vec2{xc[2 * v], xc[2 * v + 1]};
  };
  for (std::size_t n = 0; n < fine.nodes.size(); ++n) {
    const int v = fine.var_of[n];
    if (v < 0) continue;
    const auto [a, b] = fine.parents[n];
    const Vec2 val = a == b ? coarse_val(a) : 0.5 * (coarse_val(a) + coarse_val(b));
    xf[2 * v] = val.x;
    xf[2 * v + 1] = val.y;
  }
  return xf;
}

}  // namespace

const DiscMesh& disc_mesh(int level) {
  if (level < 1 || level > 6) throw std::invalid_argument("disc mesh level must be in [1, 6]");
  static std::mutex mu;
  static std::vector<std::unique_ptr<DiscMesh>> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (cache.empty()) cache.push_back(std::make_unique<DiscMesh>(hexagon()));
  while (static_cast<int>(cache.size()) <= level) cache.push_back(std::make_unique<DiscMesh>(refine(*cache.back())));
  return *cache[level];
}

QwResult qw_upper_estimate(const FiberMap& A, const ContinuumDensity& density, const QwOptions& opts) {
  if (opts.level < 1) throw std::invalid_argument("qw: mesh level must be ≥ 1");
  QwResult res;
  const LocalFrame L = density.local(A.base);
  res.W = density.W(L, A.A);

  // W(R M) = W(M) for rotations R of the target, so the inner problem is
  // solved for the symmetric factor S = Qᵀ A, Q the closest rotation. S is
  // snapped to a fixed grid so that A and R A give bitwise identical inputs.
  const Mat2 S = canonical_stretch(A.A);
  const double amp = opts.start_scale * (1.0 + A.A.frob());

  std::vector<double> best;
  double best_val = res.W;
  const DiscMesh* prev = nullptr;
  for (int level = 1; level <= opts.level; ++level) {
    const DiscMesh& m = disc_mesh(level);
    const Objective f = [&](std::span<const double> x, std::span<double> g) { return objective(m, L, S, density, x, g); };
    std::vector<std::vector<double>> starts;
    if (prev == nullptr) {
      starts.emplace_back(m.num_vars(), 0.0);
      std::mt19937_64 rng(opts.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int s = 0; s < opts.random_starts; ++s) {
        std::vector<double> x(m.num_vars());
        for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
          x[i] = amp * u(rng);
          x[i + 1] = amp * u(rng);
        }
        starts.push_back(std::move(x));
      }
    } else {
      starts.push_back(prolong(m, *prev, best));
    }
    std::vector<double> level_best;
    double level_val = std::numeric_limits<double>::infinity();
    for (auto& x : starts) {
      const LbfgsResult r = lbfgs_minimize(x, f, opts.lbfgs);
      if (r.status == LbfgsStatus::NonFinite) res.warning = true;
      const double v = objective(m, L, S, density, x, {});
      if (v < level_val) level_val = v, level_best = x;
    }
    // The coarse optimum is itself a test field on this level.
    if (prev != nullptr && !(level_val < best_val)) level_best = prolong(m, *prev, best), level_val = best_val;
    best = std::move(level_best);
    best_val = std::min(level_val, best_val);
    res.per_level.push_back(best_val);
    prev = &m;
  }
  res.estimate = std::min(best_val, res.W);
  res.per_level.back() = res.estimate;
  return res;
}

RigidityReport rigidity_lower_check(const ContinuumDensity& density, const std::vector<FiberMap>& fibers,
                                    const QwOptions& opts, double sandwich_tol) {
  RigidityReport rep;
  rep.rows.resize(fibers.size());
  parallel_for(
      fibers.size(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          QwRow& row = rep.rows[i];
          row.A = fibers[i];
          const QwResult r = qw_upper_estimate(fibers[i], density, opts);
          row.W = r.W;
          row.qw = r.estimate;
          row.dist2 = dist2_to_SO(singular_values_g(fibers[i], density.metric()));
          row.sandwich_ok = row.qw >= -sandwich_tol && row.qw <= row.W + sandwich_tol;
        }
      },
      1);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const QwRow& row : rep.rows) {
    if (row.dist2 > 1e-4) rep.min_ratio = std::min(rep.min_ratio, row.qw / row.dist2);
    if (row.dist2 > 0.1 && row.qw < 1e-6) ++rep.near_zero_away;
    if (!row.sandwich_ok) ++rep.sandwich_violations;
  }
  return rep;
}

std::vector<FiberMap> sample_fibers(const MetricField& g, int n, std::uint64_t seed, double perturbation,
                                    double min_far) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
  std::normal_distribution<double> N(0.0, 1.0);
  const Chart& c = g.chart();
  std::vector<FiberMap> out;
  while (static_cast<int>(out.size()) < n) {
    const Vec2 p{c.x0 + c.width() * u(rng), c.y0 + c.height() * u(rng)};
    FiberMap A = rotation_fiber(g, p, ang(rng));
    if (out.size() % 4 != 0) {
      const double s = perturbation * u(rng);
      A.A = A.A * (Mat2::identity() + s * Mat2{N(rng), N(rng), N(rng), N(rng)});
      if (dist2_to_SO(singular_values_g(A, g)) < min_far) continue;
    }
    out.push_back(A);
  }
  return out;
}

std::string qw_table_csv(const RigidityReport& rep) {
  std::ostringstream s;
  s.precision(17);
  s << "px,py,A11,A12,A21,A22,W,QW_est,dist2,sandwich_ok\n";
  for (const QwRow& r : rep.rows)
    s << r.A.base.x << ',' << r.A.base.y << ',' << r.A.A.a << ',' << r.A.A.b << ',' << r.A.A.c << ',' << r.A.A.d << ','
      << r.W << ',' << r.qw << ',' << r.dist2 << ',' << (r.sandwich_ok ? 1 : 0) << '\n';
  return s.str();
}

}  // namespace incompat
