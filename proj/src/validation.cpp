#include "incompat/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "incompat/continuum.hpp"
#include "incompat/minimize.hpp"
#include "incompat/optim.hpp"

namespace incompat {

namespace {

using Rng = std::mt19937_64;

double unif(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
double gauss(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }
double log_unif(Rng& rng, double lo, double hi) { return std::exp(unif(rng, std::log(lo), std::log(hi))); }

Mat2 random_matrix(Rng& rng, double scale) { return scale * Mat2{gauss(rng), gauss(rng), gauss(rng), gauss(rng)}; }

Mat2 random_orthogonal(Rng& rng) {
  const Mat2 R = Mat2::rotation(unif(rng, -std::numbers::pi, std::numbers::pi));
  return unif(rng, 0.0, 1.0) < 0.5 ? R : R * Mat2::diag(1.0, -1.0);
}

Mat2 random_spd(Rng& rng) {
  const Mat2 Q = Mat2::rotation(unif(rng, 0.0, std::numbers::pi));
  return Q * Mat2::diag(log_unif(rng, 0.1, 10.0), log_unif(rng, 0.1, 10.0)) * Q.transpose();
}

Vec2 random_unit(Rng& rng) {
  const double t = unif(rng, -std::numbers::pi, std::numbers::pi);
  return {std::cos(t), std::sin(t)};
}

struct Tally {
  SuiteResult r;
  double slack;
  void check(double lhs, double rhs) {
    ++r.trials;
    const double margin = lhs - rhs;
    if (!(margin <= slack * std::max(1.0, std::abs(rhs)))) {
      ++r.violations;
      r.worst = std::max(r.worst, std::isfinite(margin) ? margin : std::numeric_limits<double>::infinity());
    }
  }
  void check_equal(double a, double b) {
    ++r.trials;
    const double d = std::abs(a - b);
    if (!(d <= slack * std::max(1.0, std::abs(b)))) {
      ++r.violations;
      r.worst = std::max(r.worst, std::isfinite(d) ? d : std::numeric_limits<double>::infinity());
    }
  }
  SuiteResult done() {
    r.passed = r.violations == 0;
    return r;
  }
};

Tally start(const std::string& name, const std::string& group, const ValidationOptions& o) {
  Tally t{{}, o.slack};
  t.r.name = name;
  t.r.group = group;
  return t;
}

// Independent closed forms: min over rotations (and reflections) of |B - Q|².
double oracle_dist2_SO(const Mat2& B) { return B.frob2() + 2.0 - 2.0 * std::hypot(B.a + B.d, B.c - B.b); }
double oracle_dist2_O(const Mat2& B) {
  return B.frob2() + 2.0 - 2.0 * std::max(std::hypot(B.a + B.d, B.c - B.b), std::hypot(B.a - B.d, B.b + B.c));
}

double ratio_sum(const Mat2& A, const Vec2& x, const Vec2& y) {
  return norm2(A * x) / norm2(x) + norm2(A * y) / norm2(y) + norm2(A * (x + y)) / norm2(x + y);
}

}  // namespace

SuiteResult appendix_isometry(const ValidationOptions& o) {
  Tally t = start("appendix-i-isometry", "appendix", o);
  Rng rng(o.seed ^ 0x11);
  for (std::size_t i = 0; i < o.trials; ++i) {
    const Mat2 A = random_orthogonal(rng);
    const Vec2 x = log_unif(rng, 0.1, 10.0) * random_unit(rng), y = log_unif(rng, 0.1, 10.0) * random_unit(rng);
    if (std::abs(wedge(x, y)) < 1e-6 * norm(x) * norm(y)) continue;
    // The three length identities hold by construction; polarization gives (Ax, Ay) = (x, y).
    const double scale = norm2(x) + norm2(y);
    const double polar = 0.5 * (norm2(A * (x + y)) - norm2(A * x) - norm2(A * y));
    t.check_equal(polar / scale, dot(x, y) / scale);
    // and hence the Gram matrix of A in the orthonormal basis is the identity.
    t.check_equal((A.transpose() * A - Mat2::identity()).frob(), 0.0);
  }
  return t.done();
}

SuiteResult appendix_equal_length(const ValidationOptions& o) {
  Tally t = start("appendix-ii-equal-length", "appendix", o);
  Rng rng(o.seed ^ 0x22);
  for (std::size_t i = 0; i < o.trials; ++i) {
    const double theta = unif(rng, 0.05, std::numbers::pi - 0.05);
    const double len = log_unif(rng, 0.1, 10.0);
    const Vec2 x = len * random_unit(rng);
    const Vec2 y = Mat2::rotation(unif(rng, 0.0, 1.0) < 0.5 ? theta : -theta) * x;
    const Mat2 A = random_matrix(rng, log_unif(rng, 0.01, 100.0));
    t.check(A.frob2(), 2.0 / (1.0 - std::cos(theta)) * ratio_sum(A, x, y));
  }
  return t.done();
}

double constructive_constant(double r, double theta) {
  if (r < 1.0) r = 1.0 / r;  // the bound is symmetric in x and y
  const double alpha = (r * r - 1.0) / (2.0 * r * (r + std::cos(theta)));
  // v = x + αy and w = (1-α)y have equal length; C comes from the angle between them.
  const Vec2 x{1.0, 0.0}, y{r * std::cos(theta), r * std::sin(theta)};
  const Vec2 v = x + alpha * y, w = (1.0 - alpha) * y;
  const double cos_vw = dot(v, w) / (norm(v) * norm(w));
  const double C = 2.0 / (1.0 - cos_vw);
  const double om = (1.0 - alpha) * (1.0 - alpha);
  return C * std::max({(1.0 + alpha) / (om * r * r), 1.0 + (alpha * alpha + alpha) / om, 1.0});
}

SuiteResult appendix_constructive(const ValidationOptions& o) {
  Tally t = start("appendix-iii-constructive", "appendix", o);
  Rng rng(o.seed ^ 0x33);
  for (std::size_t i = 0; i < o.trials; ++i) {
    const double theta = unif(rng, 0.05, std::numbers::pi - 0.05);
    const double r = log_unif(rng, 0.1, 10.0);
    const double len = log_unif(rng, 0.1, 10.0);
    const Vec2 x = len * random_unit(rng);
    const Vec2 y = r * (Mat2::rotation(unif(rng, 0.0, 1.0) < 0.5 ? theta : -theta) * x);
    const Mat2 A = random_matrix(rng, log_unif(rng, 0.01, 100.0));
    t.check(A.frob2(), constructive_constant(r, theta) * ratio_sum(A, x, y));
  }
  return t.done();
}

namespace {

double dist_O_ratio(const FiberAlgebra& alg, const Mat2& A, const Vec2& x, const Vec2& y) {
  double rhs = 0.0;
  for (const Vec2& u : {x, y, x + y}) {
    const double d = norm(A * u) / norm(u) - 1.0;
    rhs += d * d;
  }
  if (rhs < 1e-24) return 0.0;
  return alg.dist2_O(alg.svd(A)) / rhs;
}

// Local ascent of the ratio from A0. The ratio depends on A only through the
// symmetric factor U of A = QU, so the search runs over (U11, U12, U22).
double ascend_ratio(const FiberAlgebra& alg, const Mat2& A0, const Vec2& x, const Vec2& y) {
  const Mat2 U0 = sym_sqrt(A0.transpose() * A0);
  std::array<double, 3> z{U0.a, U0.b, U0.d};
  auto ratio = [&](std::span<const double> v) { return dist_O_ratio(alg, Mat2{v[0], v[1], v[1], v[2]}, x, y); };
  const Objective obj = [&](std::span<const double> v, std::span<double> g) {
    std::array<double, 3> w{v[0], v[1], v[2]};
    for (int i = 0; i < 3; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(v[i]));
      w[i] = v[i] + h;
      const double fp = ratio(w);
      w[i] = v[i] - h;
      const double fm = ratio(w);
      w[i] = v[i];
      g[i] = -(fp - fm) / (2.0 * h);
    }
    return -ratio(v);
  };
  const double start = std::max(ratio(z), dist_O_ratio(alg, A0, x, y));
  LbfgsOptions opt;
  opt.max_iters = 500;
  opt.grad_tol = 1e-12;
  opt.rel_decrease_tol = 1e-14;
  lbfgs_minimize(z, obj, opt);
  return std::max(start, ratio(z));
}

}  // namespace

constexpr std::size_t kAscentSeeds = 16;

SuiteResult appendix_dist_O(const ValidationOptions& o) {
  Tally t = start("appendix-iv-dist-O", "appendix", o);
  Rng rng(o.seed ^ 0x44);
  const std::size_t pairs = 100, per_pair = std::max<std::size_t>(2, o.trials / pairs);
  double worst_spread = 1.0, max_C = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double theta = unif(rng, 0.1, std::numbers::pi - 0.1);
    const Vec2 x = random_unit(rng);
    const Vec2 y = log_unif(rng, 0.2, 5.0) * (Mat2::rotation(theta) * x);
    // Each half estimates sup of the ratio independently: random search, then ascent from its best sample.
    double half[2] = {0.0, 0.0};
    std::vector<std::pair<double, Mat2>> seeds[2];
    for (std::size_t k = 0; k < per_pair; ++k) {
      Mat2 A;
      if (k % 2 == 0) {
        // Near O(2): Q (I + s S), S symmetric with unit norm.
        const Mat2 S0 = random_matrix(rng, 1.0);
        Mat2 S = 0.5 * (S0 + S0.transpose());
        S = (1.0 / S.frob()) * S;
        A = random_orthogonal(rng) * (Mat2::identity() + log_unif(rng, 1e-4, 1.0) * S);
      } else {
        A = random_matrix(rng, log_unif(rng, 0.05, 5.0));
      }
      ++t.r.trials;
      const double ratio = dist_O_ratio(o.algebra, A, x, y);
      if (!std::isfinite(ratio)) {
        ++t.r.violations;
        continue;
      }
      const int h = k < per_pair / 2 ? 0 : 1;
      half[h] = std::max(half[h], ratio);
      seeds[h].emplace_back(ratio, A);
    }
    for (int h = 0; h < 2; ++h) {
      auto& sd = seeds[h];
      const std::size_t top = std::min<std::size_t>(kAscentSeeds, sd.size());
      std::partial_sort(sd.begin(), sd.begin() + top, sd.end(),
                        [](const auto& l, const auto& r) { return l.first > r.first; });
      for (std::size_t i = 0; i < top; ++i) half[h] = std::max(half[h], ascend_ratio(o.algebra, sd[i].second, x, y));
    }
    const double spread = std::max(half[0], half[1]) / std::max(std::min(half[0], half[1]), 1e-300);
    worst_spread = std::max(worst_spread, spread);
    max_C = std::max({max_C, half[0], half[1]});
    if (!std::isfinite(max_C) || !(spread <= 2.0)) ++t.r.violations;
  }
  std::ostringstream s;
  s << "max C_hat " << max_C << ", worst half-to-half spread " << worst_spread;
  t.r.detail = s.str();
  t.r.worst = worst_spread;
  t.r.passed = t.r.violations == 0;
  return t.r;
}

SuiteResult appendix_singular_values(const ValidationOptions& o) {
  Tally t = start("appendix-v-singular-values", "appendix", o);
  Rng rng(o.seed ^ 0x55);
  for (std::size_t i = 0; i < o.trials; ++i) {
    const Mat2 G = random_spd(rng);
    Mat2 A = random_matrix(rng, log_unif(rng, 0.1, 10.0));
    if (i % 3 == 0 && A.det() > 0.0) A = A * Mat2::diag(1.0, -1.0);
    const Mat2 B = A * sym_inv_sqrt(G);
    const SingularValues sv = o.algebra.svd(B);
    const double dO = o.algebra.dist2_O(sv), dSO = o.algebra.dist2_SO(sv);
    t.check_equal(dO, oracle_dist2_O(B));
    t.check_equal(dSO, oracle_dist2_SO(B));
    const bool neg = B.det() < 0.0;
    t.check(dSO, dO + (neg ? 4.0 * std::sqrt(std::abs(B.det())) : 0.0));
    if (neg)
      t.check_equal(dSO, dO + 4.0 * sv.s2);
    else
      t.check_equal(dSO, dO);
  }
  return t.done();
}

// ---------------------------------------------------------------------------

DistanceOrderResult distance_order(const MetricField& g, std::uint64_t seed, int n_lengths, int n_dirs) {
  DistanceOrderResult res;
  Rng rng(seed);
  const Chart& c = g.chart();
  std::vector<Vec2> pts, dirs;
  for (int k = 0; k < n_dirs; ++k) {
    pts.push_back({c.x0 + c.width() * unif(rng, 0.3, 0.7), c.y0 + c.height() * unif(rng, 0.3, 0.7)});
    dirs.push_back(random_unit(rng));
  }
  for (int i = 0; i < n_lengths; ++i) {
    const double len = 1e-3 * std::pow(100.0, static_cast<double>(i) / (n_lengths - 1));
    double err = 0.0;
    for (int k = 0; k < n_dirs; ++k) {
      const Vec2 v = len * dirs[k];
      const double d = riemannian_distance(pts[k], exp_connection(c, pts[k], v).point, g).value;
      err += std::abs(d - g.length(pts[k], v));
    }
    res.lengths.push_back(len);
    res.errors.push_back(err / n_dirs);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(n_lengths);
  for (int i = 0; i < n_lengths; ++i) {
    const double lx = std::log(res.lengths[i]), ly = std::log(res.errors[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return res;
}

namespace {

MetricField test_conformal_metric(const Chart& chart) {
  return MetricField::conformal(chart, LatticeFrame::hexagonal(), parse_field("exp((x^2+y^2)/2)"));
}

}  // namespace

SuiteResult distance_order_suite(const ValidationOptions& o) {
  SuiteResult r;
  r.name = "distance-quadratic-order";
  r.group = "distance";
  const DistanceOrderResult d = distance_order(test_conformal_metric(Chart(0, 1, 0, 1)), o.seed);
  r.trials = d.lengths.size();
  r.worst = d.slope;
  r.passed = d.slope >= 1.9;
  r.violations = r.passed ? 0 : 1;
  std::ostringstream s;
  s << "log-log slope " << d.slope;
  r.detail = s.str();
  return r;
}

SuiteResult geometry_properties(const ValidationOptions& o) {
  Tally t = start("geometry-properties", "geometry", o);
  t.slack = 1e-12;
  Rng rng(o.seed ^ 0x66);
  const Chart chart(0, 1, 0, 1);
  const MetricField g = test_conformal_metric(chart);
  const std::size_t n = std::min<std::size_t>(o.trials, 2000);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p{unif(rng, 0, 1), unif(rng, 0, 1)}, v{unif(rng, -0.1, 0.1), unif(rng, -0.1, 0.1)},
        w{unif(rng, -0.1, 0.1), unif(rng, -0.1, 0.1)};
    t.check_equal(norm(exp_connection(chart, exp_connection(chart, p, v).point, w).point - exp_connection(chart, p, v + w).point), 0.0);

    const Mat2 G = random_spd(rng);
    Mat2 A = random_matrix(rng, 1.0);
    const SingularValues sv = o.algebra.svd(A * sym_inv_sqrt(G));
    const double dO = o.algebra.dist2_O(sv), dSO = o.algebra.dist2_SO(sv);
    t.check(dO, dSO);
    if (A.det() >= 0.0) t.check_equal(dSO, dO);
    const Mat2 R = Mat2::rotation(unif(rng, -3.0, 3.0));
    t.check_equal(o.algebra.dist2_SO(o.algebra.svd(R * A * sym_inv_sqrt(G))), dSO);
  }
  for (int i = 0; i < 40; ++i) {
    const Vec2 p{unif(rng, 0.2, 0.8), unif(rng, 0.2, 0.8)};
    const Vec2 q = p + Vec2{unif(rng, -0.15, 0.15), unif(rng, -0.15, 0.15)};
    t.check(riemannian_distance(p, q, g).value, segment_length(p, q - p, g, 16));
  }
  return t.done();
}

SuiteResult energy_properties(const ValidationOptions& o) {
  Tally t = start("energy-properties", "energy", o);
  t.slack = 1e-11;
  Rng rng(o.seed ^ 0x77);
  const Chart chart(0, 1, 0, 1);
  const Triangulation tri = build_lattice(chart, LatticeFrame::hexagonal(), 0.25);
  const MetricField ge = MetricField::euclidean(chart, LatticeFrame::hexagonal());
  const MetricField gc = test_conformal_metric(chart);
  const TriangleMeasures me = compute_measures(tri, ge), mc = compute_measures(tri, gc);
  const Laws laws;
  for (int trial = 0; trial < 50; ++trial) {
    const TriangleMeasures& m = trial % 2 ? mc : me;
    const EnergyModel model(tri, m, laws);
    const Configuration f = initial_configuration(tri, InitKind::Random, 0.05, rng());
    const EnergyBreakdown e = model.evaluate(f);
    const Mat2 R = Mat2::rotation(unif(rng, -3.0, 3.0));
    const Vec2 c{unif(rng, -5, 5), unif(rng, -5, 5)};
    Configuration g1 = f, g2 = f, refl = f;
    for (std::size_t v = 0; v < f.size(); ++v) {
      g1[v] = R * f[v] + c;
      g2[v] = f[v] + c;
      refl[v] = {f[v].x, -f[v].y};
    }
    t.check_equal(model.evaluate(g1).total, e.total);
    t.check_equal(model.evaluate(g2).total, e.total);
    const EnergyBreakdown er = model.evaluate(refl);
    t.check_equal(er.bond, e.bond);
    std::vector<Vec2> grad(f.size());
    model.evaluate(f, grad);
    Vec2 sum;
    for (const Vec2& gv : grad) sum += gv;
    t.check_equal(norm(sum), 0.0);
  }
  // Reflecting a stress-free state raises the volume term strictly.
  const EnergyModel flat(tri, me, laws);
  Configuration id = initial_configuration(tri, InitKind::ChartIdentity), refl = id;
  for (Vec2& v : refl) v.y = -v.y;
  const EnergyBreakdown e0 = flat.evaluate(id), e1 = flat.evaluate(refl);
  t.check(e0.volume, 1e-14);
  t.check(e0.volume + 1e-3, e1.volume);
  return t.done();
}

SuiteResult continuum_properties(const ValidationOptions& o) {
  Tally t = start("continuum-properties", "continuum", o);
  t.slack = 1e-10;
  Rng rng(o.seed ^ 0x88);
  const Chart chart(0, 1, 0, 1);
  const MetricField g = test_conformal_metric(chart);
  const Triangulation tri = build_lattice(chart, LatticeFrame::hexagonal(), 0.2);
  const TriangleMeasures m = compute_measures(tri, g);
  const ContinuumDensity density(g, Laws{});
  const EnergyModel model(tri, m, Laws{});
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration f = initial_configuration(tri, InitKind::Random, 0.05, rng());
    const double E = model.evaluate(f).total;
    const double I = integral_energy(affine_extend(tri, f), m, density);
    t.check_equal(I / E, 1.0);
  }
  double growth = 0.0;
  const std::size_t n = std::min<std::size_t>(o.trials, 10000);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p{unif(rng, 0, 1), unif(rng, 0, 1)};
    FiberMap A;
    if (i % 2 == 0)
      A = rotation_fiber(g, p, unif(rng, -3.0, 3.0));
    else
      A = {p, random_matrix(rng, log_unif(rng, 0.01, 10.0))};
    const double W = density.W(A);
    const double d2 = dist2_to_SO(singular_values_g(A, g));
    ++t.r.trials;
    if ((W < 1e-10) != (d2 < 1e-8)) ++t.r.violations;
    growth = std::max(growth, W / (1.0 + fiber_norm(A, g) * fiber_norm(A, g)));
  }
  std::ostringstream s;
  s << "growth constant C_W_hat " << growth;
  t.r.detail = s.str();
  return t.done();
}

std::vector<SuiteResult> run_suites(const std::string& selector, const ValidationOptions& o) {
  static const std::vector<std::string> known{"all", "appendix", "geometry", "distance", "energy", "continuum"};
  if (std::find(known.begin(), known.end(), selector) == known.end())
    throw std::invalid_argument("unknown suite selector '" + selector + "'");
  std::vector<SuiteResult> out;
  auto want = [&](const char* g) { return selector == "all" || selector == g; };
  if (want("appendix")) {
    out.push_back(appendix_isometry(o));
    out.push_back(appendix_equal_length(o));
    out.push_back(appendix_constructive(o));
    out.push_back(appendix_dist_O(o));
    out.push_back(appendix_singular_values(o));
  }
  if (want("geometry")) out.push_back(geometry_properties(o));
  if (want("distance")) out.push_back(distance_order_suite(o));
  if (want("energy")) out.push_back(energy_properties(o));
  if (want("continuum")) out.push_back(continuum_properties(o));
  return out;
}

nlohmann::json to_json(const SuiteResult& r) {
  return {{"name", r.name},     {"group", r.group},           {"passed", r.passed}, {"trials", r.trials},
          {"violations", r.violations}, {"worst", r.worst}, {"detail", r.detail}};
}

}  // namespace incompat
