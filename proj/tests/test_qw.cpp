#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "incompat/qw.hpp"

using namespace incompat;

namespace {

const Chart kUnit{};
const LatticeFrame kHex{};

MetricField curved() { return MetricField::conformal(kUnit, kHex, parse_field("exp((x^2+y^2)/2)")); }

}  // namespace

TEST_CASE("disc meshes are nested and normalized") {
  for (int level = 1; level <= 4; ++level) {
    const DiscMesh& m = disc_mesh(level);
    CHECK(m.level == level);
    CHECK(m.tris.size() == static_cast<std::size_t>(24 * (1 << (2 * (level - 1)))));
    double w = 0;
    for (double x : m.weight) w += x;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t v = 0; v < m.nodes.size(); ++v) {
      CHECK(norm(m.nodes[v]) <= 1.0 + 1e-14);
      CHECK((m.var_of[v] < 0) == static_cast<bool>(m.on_boundary[v]));
    }
    if (level > 1) {
      const DiscMesh& c = disc_mesh(level - 1);
      for (std::size_t v = 0; v < m.nodes.size(); ++v) {
        const auto [p, q] = m.parents[v];
        CHECK(norm(m.nodes[v] - 0.5 * (c.nodes[p] + c.nodes[q])) < 1e-14);
      }
    }
  }
  CHECK(&disc_mesh(2) == &disc_mesh(2));
}

TEST_CASE("isometries have zero estimate") {
  const auto g = curved();
  const ContinuumDensity d(g, Laws{});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 10; ++i) {
    const QwResult r = qw_upper_estimate(rotation_fiber(g, {u(rng), u(rng)}, ang(rng)), d);
    CHECK(r.estimate < 1e-8);
    CHECK(r.estimate >= 0.0);
  }
}

TEST_CASE("sandwich, monotone levels and non-quasiconvexity") {
  const auto g = curved();
  const ContinuumDensity d(g, Laws{});
  const auto fibers = sample_fibers(g, 24, 5);
  QwOptions opts;
  opts.level = 3;
  for (const FiberMap& A : fibers) {
    const QwResult r = qw_upper_estimate(A, d, opts);
    CHECK(r.estimate >= 0.0);
    CHECK(r.estimate <= r.W + 1e-9);
    CHECK(r.W == doctest::Approx(d.W(A)).epsilon(1e-15));
    REQUIRE(r.per_level.size() == 3);
    for (std::size_t k = 1; k < r.per_level.size(); ++k) CHECK(r.per_level[k] <= r.per_level[k - 1] + 1e-8);
    CHECK(r.estimate == r.per_level.back());
  }
  // Uniform compression of an isometry is relaxed by wrinkling test fields.
  FiberMap C = rotation_fiber(g, {0.5, 0.5}, 0.3);
  C.A = 0.5 * C.A;
  const QwResult r = qw_upper_estimate(C, d, opts);
  MESSAGE("compression gap W - QW_est = " << r.W - r.estimate);
  CHECK(r.estimate < r.W - 0.1);
}

TEST_CASE("estimates are deterministic and frame indifferent") {
  const auto g = curved();
  const ContinuumDensity d(g, Laws{});
  const auto fibers = sample_fibers(g, 8, 9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  for (const FiberMap& A : fibers) {
    const QwResult a = qw_upper_estimate(A, d), b = qw_upper_estimate(A, d);
    CHECK(a.estimate == b.estimate);
    FiberMap RA = A;
    RA.A = Mat2::rotation(ang(rng)) * A.A;
    CHECK(std::abs(qw_upper_estimate(RA, d).estimate - a.estimate) < 1e-6);
  }
}

TEST_CASE("rigidity lower check") {
  const auto g = curved();
  const ContinuumDensity d(g, Laws{});
  const auto fibers = sample_fibers(g, 40, 11);
  int iso = 0, far = 0;
  for (const FiberMap& A : fibers) {
    const double d2 = dist_to_SO(A, g) * dist_to_SO(A, g);
    if (d2 < 1e-20) ++iso;
    if (d2 >= 0.05 - 1e-12) ++far;
  }
  CHECK(iso == 10);
  CHECK(far == 30);
  QwOptions two, three;
  two.level = 2;
  three.level = 3;
  const RigidityReport r2 = rigidity_lower_check(d, fibers, two), r3 = rigidity_lower_check(d, fibers, three);
  CHECK(r3.sandwich_violations == 0);
  CHECK(r3.near_zero_away == 0);
  CHECK(r3.min_ratio > 0.0);
  CHECK(r3.min_ratio >= 0.5 * r2.min_ratio);
  CHECK(r3.min_ratio <= 1.5 * r2.min_ratio);
  for (const QwRow& row : r3.rows) CHECK((row.qw < 1e-6) == (row.dist2 < 1e-4));
  const std::string csv = qw_table_csv(r3);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
}
