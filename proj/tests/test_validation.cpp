#include <set>

#include "doctest.h"
#include "incompat/validation.hpp"

using namespace incompat;

TEST_CASE("all suites pass at the default trial counts") {
  const auto results = run_suites("all");
  CHECK(results.size() == 9);
  for (const SuiteResult& r : results) {
    INFO(r.name << ": " << r.detail);
    CHECK(r.passed);
    CHECK(r.violations == 0);
    CHECK(r.trials > 0);
  }
}

TEST_CASE("appendix suites run 1e5 trials each") {
  const auto results = run_suites("appendix");
  REQUIRE(results.size() == 5);
  for (const SuiteResult& r : results) {
    CHECK(r.group == "appendix");
    CHECK(r.trials >= 100000);
    CHECK(r.passed);
  }
}

TEST_CASE("selectors pick single groups") {
  for (const std::string g : {"geometry", "distance", "energy", "continuum"}) {
    const auto results = run_suites(g);
    REQUIRE(results.size() == 1);
    CHECK(results[0].group == g);
  }
  CHECK_THROWS(run_suites("nonsense"));
}

TEST_CASE("a sign error in dist2_SO is caught") {
  ValidationOptions opts;
  opts.trials = 20000;
  opts.algebra.dist2_SO = [](const SingularValues& s) {
    if (s.det_sign >= 0) return dist2_to_O(s);
    return (s.s1 - 1.0) * (s.s1 - 1.0) + (s.s2 - 1.0) * (s.s2 - 1.0);
  };
  CHECK_FALSE(appendix_singular_values(opts).passed);
  CHECK(appendix_singular_values(opts).violations > 0);
}

TEST_CASE("a wrong singular value routine is caught") {
  ValidationOptions opts;
  opts.trials = 20000;
  opts.algebra.svd = [](const Mat2& m) {
    SingularValues s = singular_values(m);
    s.det_sign = 1;
    return s;
  };
  CHECK_FALSE(appendix_singular_values(opts).passed);
}

TEST_CASE("suites are deterministic for a fixed seed") {
  ValidationOptions opts;
  opts.trials = 5000;
  const SuiteResult a = appendix_dist_O(opts), b = appendix_dist_O(opts);
  CHECK(a.worst == b.worst);
  CHECK(a.detail == b.detail);
  const auto j = to_json(a);
  CHECK(j.at("name").get<std::string>() == a.name);
}

TEST_CASE("distance order on the curved metric is quadratic") {
  const auto g = MetricField::conformal(Chart{}, LatticeFrame{}, parse_field("exp((x^2+y^2)/2)"));
  const DistanceOrderResult r = distance_order(g, 1);
  CHECK(r.slope >= 1.9);
  CHECK(r.lengths.size() == r.errors.size());
  CHECK(r.lengths.front() == doctest::Approx(1e-3));
  CHECK(r.lengths.back() == doctest::Approx(1e-1));
}
