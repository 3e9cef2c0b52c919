#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "incompat/continuum.hpp"

using namespace incompat;

namespace {

const Chart kUnit{};
const LatticeFrame kHex{};

MetricField curved() { return MetricField::conformal(kUnit, kHex, parse_field("exp((x^2+y^2)/2)")); }

// Direct evaluation of W from the metric tensor alone.
double W_oracle(const MetricField& g, const Laws& laws, const Vec2& p, const Mat2& A) {
  const Mat2 G = g.tensor(p);
  const LatticeFrame& fr = g.frame();
  const Vec2 ax[3] = {fr.a, fr.b, fr.c()};
  double len[3], total = 0;
  for (int k = 0; k < 3; ++k) total += len[k] = std::sqrt(dot(ax[k], G * ax[k]));
  double w = 0;
  for (int k = 0; k < 3; ++k) w += len[k] / total * laws.bond.value(norm(A * ax[k]) / len[k]);
  const double nu = std::sqrt(G.det()) * std::abs(wedge(fr.a, fr.b));
  return w + laws.volume.value(wedge(A * fr.a, A * fr.b) / nu);
}

Mat2 random_matrix(std::mt19937_64& rng, double s = 2.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return {u(rng), u(rng), u(rng), u(rng)};
}

Configuration random_config(const Triangulation& tri, std::mt19937_64& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  Configuration f;
  for (const Vec2& v : tri.vertices) f.push_back({v.x + 0.3 * v.y * v.y + u(rng), 1.2 * v.y + u(rng)});
  return f;
}

}  // namespace

TEST_CASE("affine extension reproduces affine maps") {
  const auto tri = build_lattice(kUnit, kHex, 0.1);
  Configuration id(tri.vertices.begin(), tri.vertices.end());
  const DeformationField F = affine_extend(tri, id);
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const Mat2 d = F.differential(static_cast<int>(t)) - Mat2::identity();
    CHECK(d.frob() < 1e-12);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int inside = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec2 x{u(rng), u(rng)};
    if (F.locate(x) < 0) continue;
    ++inside;
    CHECK(norm(F(x) - x) < 1e-12);
  }
  CHECK(inside > 300);

  const Mat2 L{1.3, -0.4, 0.2, 0.7};
  const Vec2 c{0.5, -2.0};
  Configuration lf;
  for (const Vec2& v : tri.vertices) lf.push_back(L * v + c);
  const DeformationField FL = affine_extend(tri, lf);
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    CHECK((FL.differential(static_cast<int>(t)) - L).frob() < 1e-12);
    const auto k = tri.corners(static_cast<int>(t));
    const Vec2 centroid = (1.0 / 3.0) * (k[0] + k[1] + k[2]);
    const auto& v = tri.triangles[t].v;
    const Vec2 mean = (1.0 / 3.0) * (lf[v[0]] + lf[v[1]] + lf[v[2]]);
    CHECK(norm(FL(centroid) - mean) < 1e-12);
  }
}

TEST_CASE("affine extension satisfies the edge relations and continuity") {
  const auto tri = build_lattice(kUnit, kHex, 0.2);
  std::mt19937_64 rng(2);
  const Configuration f = random_config(tri, rng, 0.05);
  const DeformationField F = affine_extend(tri, f);
  const double eps = tri.epsilon;
  for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
    const Triangle& T = tri.triangles[t];
    const double s = T.orient == Orientation::Plus ? 1.0 : -1.0;
    const Mat2& dF = F.differential(static_cast<int>(t));
    for (int k = 0; k < 3; ++k) {
      const Vec2 lhs = dF * (s * eps * kHex.axis(k));
      const Vec2 rhs = f[T.v[(k + 1) % 3]] - f[T.v[k]];
      CHECK(norm(lhs - rhs) < 1e-12);
    }
    // Shared vertices: the affine map of t reproduces the vertex values.
    const auto k = tri.corners(static_cast<int>(t));
    for (int j = 0; j < 3; ++j) {
      const Vec2 inward = k[j] + 1e-9 * ((1.0 / 3.0) * (k[0] + k[1] + k[2]) - k[j]);
      CHECK(norm(F(inward) - f[T.v[j]]) < 1e-8);
    }
  }
  // Points outside M_ε are still assigned finite values.
  const Vec2 corner{0.001, 0.999};
  CHECK(F.locate(corner) == -1);
  const Vec2 v = F(corner);
  CHECK(std::isfinite(v.x));
  CHECK(std::isfinite(v.y));
}

TEST_CASE("det_fiber examples") {
  const auto e = MetricField::euclidean(kUnit, kHex);
  CHECK(det_fiber({{0.4, 0.4}, Mat2::identity()}, e) == doctest::Approx(1.0).epsilon(1e-15));
  const auto g = curved();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const Mat2 A = random_matrix(rng);
    const double d = det_fiber({p, A}, g);
    const Mat2 swapped{A.b, A.a, A.d, A.c};
    CHECK(det_fiber({p, swapped}, g) == doctest::Approx(-d).epsilon(1e-13));
    CHECK(d * g.nu(p) == doctest::Approx(A.det() * kHex.chart_wedge()).epsilon(1e-12));
  }
}

TEST_CASE("W matches the direct formula and vanishes on SO(g,e)") {
  const auto g = curved();
  const Laws laws;
  const ContinuumDensity W(g, laws);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const Mat2 A = random_matrix(rng);
    CHECK(W.W({p, A}) == doctest::Approx(W_oracle(g, laws, p, A)).epsilon(1e-12));
    const FiberMap R = rotation_fiber(g, p, ang(rng));
    CHECK(std::abs(W.W(R)) < 1e-12);
  }
  // A = 0: Σρ Φ(0) + Ψ(0) = 1 + (1 - δ/2).
  CHECK(W.W({{0.3, 0.3}, Mat2{}}) == doctest::Approx(2.0 - 0.5e-3).epsilon(1e-14));
}

TEST_CASE("W zero set, coercivity and growth on random fibers") {
  const auto g = curved();
  const ContinuumDensity W(g, Laws{});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
  double alpha = std::numeric_limits<double>::infinity(), C = 0;
  int agree = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const FiberMap A = (i % 5 == 0) ? rotation_fiber(g, p, ang(rng)) : FiberMap{p, random_matrix(rng)};
    const double w = W.W(A);
    const double d2 = dist_to_SO(A, g) * dist_to_SO(A, g);
    CHECK(w >= 0.0);
    agree += (w < 1e-10) == (d2 < 1e-8);
    if (d2 > 1e-8) alpha = std::min(alpha, w / d2);
    const double n = fiber_norm(A, g);
    C = std::max(C, w / (1.0 + n * n));
  }
  CHECK(agree == 10000);
  MESSAGE("empirical alpha_W = " << alpha << ", C_W = " << C);
  CHECK(alpha > 0.0);
  CHECK(C < 10.0);
}

TEST_CASE("integral of W_eps equals the discrete energy") {
  const auto g = curved();
  const Laws laws;
  const ContinuumDensity density(g, laws);
  std::mt19937_64 rng(6);
  for (double eps : {0.2, 0.1}) {
    const auto tri = build_lattice(kUnit, kHex, eps);
    const auto m = compute_measures(tri, g);
    for (int i = 0; i < 5; ++i) {
      const Configuration f = random_config(tri, rng, 0.2 * eps);
      const double e = total_energy(tri, m, laws, f).total;
      const double I = integral_energy(affine_extend(tri, f), m, density);
      CHECK(std::abs(e - I) <= 1e-10 * e);
    }
  }
  const auto flat = MetricField::euclidean(kUnit, kHex);
  const auto tri = build_lattice(kUnit, kHex, 0.2);
  const auto m = compute_measures(tri, flat);
  const ContinuumDensity d0(flat, laws);
  Configuration id(tri.vertices.begin(), tri.vertices.end());
  CHECK(std::abs(integral_energy(affine_extend(tri, id), m, d0)) < 1e-12);
}

TEST_CASE("W_eps approaches W uniformly") {
  const auto g = curved();
  const ContinuumDensity density(g, Laws{});
  std::mt19937_64 rng(7);
  std::vector<Mat2> As;
  for (int i = 0; i < 10; ++i) As.push_back(random_matrix(rng));
  std::vector<double> h;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto tri = build_lattice(kUnit, kHex, eps);
    const auto m = compute_measures(tri, g);
    double worst = 0;
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
      const auto k = tri.corners(static_cast<int>(t));
      const Vec2 c = (1.0 / 3.0) * (k[0] + k[1] + k[2]);
      for (const Mat2& A : As) {
        const double n = fiber_norm({c, A}, g);
        const double diff = density.W_eps(tri, m, static_cast<int>(t), A) - density.W({c, A});
        worst = std::max(worst, std::abs(diff) / (1.0 + n * n));
      }
    }
    h.push_back(worst);
  }
  MESSAGE("h(eps) = " << h[0] << ", " << h[1] << ", " << h[2]);
  CHECK(h[1] < h[0]);
  CHECK(h[2] < h[1]);
}

TEST_CASE("conformal symmetries") {
  SUBCASE("homogeneous euclidean") {
    const ContinuumDensity d(MetricField::euclidean(kUnit, kHex), Laws{});
    const ConformalReport r = conformal_symmetry_check(d, 1000, 1);
    CHECK(r.conformal);
    CHECK(r.hexagonal);
    CHECK_FALSE(r.skipped);
    CHECK(r.material_max < 1e-12);
    CHECK(r.rotation_max < 1e-12);
    // Independent check: the Euclidean π/3 rotation.
    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
      const Mat2 A = random_matrix(rng);
      CHECK(std::abs(d.W({{0.5, 0.5}, A * Mat2::rotation(std::numbers::pi / 3)}) - d.W({{0.5, 0.5}, A})) < 1e-12);
    }
  }
  SUBCASE("curved conformal") {
    const ContinuumDensity d(curved(), Laws{});
    const ConformalReport r = conformal_symmetry_check(d, 1000, 2);
    CHECK(r.conformal);
    CHECK(r.samples == 1000);
    CHECK(r.material_max < 1e-10);
    CHECK(r.rotation_max < 1e-10);
  }
  SUBCASE("non-conformal negative control") {
    const auto g = MetricField::general(kUnit, kHex, parse_field("1"), parse_field("1+x"), parse_field("-0.5+0.2*y"));
    const ConformalReport r = conformal_symmetry_check(ContinuumDensity(g, Laws{}), 100, 3);
    CHECK_FALSE(r.conformal);
    CHECK(r.skipped);
    CHECK(r.conformality_residual > 0.01);
  }
}

TEST_CASE("metric rotation is a g-isometry of angle theta") {
  const Mat2 G{2.0, 0.3, 0.3, 0.8};
  const Mat2 R = metric_rotation(G, 0.7);
  const Mat2 P = R.transpose() * G * R - G;
  CHECK(P.frob() < 1e-13);
  CHECK(R.det() == doctest::Approx(1.0).epsilon(1e-13));
  const Mat2 R6 = [&] {
    Mat2 acc = Mat2::identity();
    const Mat2 r = metric_rotation(G, std::numbers::pi / 3);
    for (int i = 0; i < 6; ++i) acc = acc * r;
    return acc;
  }();
  CHECK((R6 - Mat2::identity()).frob() < 1e-12);
}
