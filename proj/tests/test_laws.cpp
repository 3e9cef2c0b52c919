#include <cmath>

#include "doctest.h"
#include "incompat/laws.hpp"

using namespace incompat;

TEST_CASE("default laws satisfy the structural conditions") {
  const LawReport b = validate_laws(BondLaw::hookean());
  CHECK(b.ok());
  CHECK(b.checks > 10000);
  const LawReport v = validate_laws(VolumeLaw::huber());
  CHECK(v.ok());
  CHECK(validate_laws(BondLaw::hookean(3.5)).ok());
  CHECK(validate_laws(VolumeLaw::huber(2.0, 0.1)).ok());
}

TEST_CASE("abs volume law with alpha 1/2 has no violations") {
  const VolumeLaw law = VolumeLaw::abs(1.0);
  CHECK(law.declared().alpha == 0.5);
  const LawReport r = validate_laws(law);
  CHECK(r.ok());
  // Direct check of |a-1| > sqrt|a|/2 for a < 0.
  for (double a = -1000.0; a < 0.0; a += 0.37) CHECK(std::abs(a - 1.0) > 0.5 * std::sqrt(std::abs(a)));
}

TEST_CASE("custom hookean expression matches the built-in law") {
  const BondLaw c = BondLaw::custom(parse_field("(x-1)^2"), {1.0, 1.0, 2.0});
  const BondLaw h = BondLaw::hookean();
  for (double r : {0.0, 0.3, 1.0, 1.7, 40.0}) {
    CHECK(c.value(r) == doctest::Approx(h.value(r)).epsilon(1e-15));
    CHECK(c.derivative(r) == doctest::Approx(h.derivative(r)).epsilon(1e-15));
  }
  CHECK(validate_laws(c).ok());
}

TEST_CASE("sinh|log r| violates the growth condition") {
  // sinh|log r| = |r - 1/r| / 2
  const BondLaw s = BondLaw::custom(parse_field("sqrt((x-1/x)^2)/2"), {1.0, 10.0, 10.0});
  CHECK(s.value(std::exp(0.7)) == doctest::Approx(std::sinh(0.7)).epsilon(1e-14));
  CHECK(s.value(std::exp(-1.3)) == doctest::Approx(std::sinh(1.3)).epsilon(1e-14));
  const LawReport r = validate_laws(s);
  CHECK_FALSE(r.ok());
  CHECK(r.count("growth") > 0);
  // Φ(r) ~ 1/(2r) is unbounded near r = 0 while C(1 + r²) is not.
  for (const LawViolation& v : r.violations)
    if (v.condition == "growth") CHECK(v.x < 1.0);
}

TEST_CASE("declared constants that are too strong are reported") {
  const BondLaw weak = BondLaw::custom(parse_field("(x-1)^2"), {1.5, 1.0, 2.0});
  const LawReport r = validate_laws(weak);
  CHECK(r.count("coercivity") > 0);
  CHECK(r.count("growth") == 0);
  CHECK(r.count("zero") == 0);
  const BondLaw shifted = BondLaw::custom(parse_field("(x-1)^2 + 0.01"), {1.0, 2.0, 2.0});
  CHECK(validate_laws(shifted).count("zero") == 1);
}

TEST_CASE("volume law properties on random samples") {
  for (const VolumeLaw& law : {VolumeLaw::abs(0.7), VolumeLaw::huber(1.3, 0.05)}) {
    const LawConstants& k = law.declared();
    CHECK(law.value(1.0) == 0.0);
    for (double a = -50.0; a <= 50.0; a += 0.013) {
      const double v = law.value(a);
      if (a != 1.0) CHECK(v > 0.0);
      if (a < 0.0) CHECK(v > k.alpha * std::sqrt(-a));
      CHECK(v < k.C * (1.0 + std::abs(a)));
      const double b = a + 0.29;
      CHECK(std::abs(law.value(b) - v) <= k.L * 0.29 * (1.0 + 1e-12));
      // Derivative agrees with central differences away from kinks.
      if (std::abs(std::abs(a - 1.0) - law.delta()) > 1e-3 && std::abs(a - 1.0) > 1e-3) {
        const double h = 1e-7;
        CHECK(law.derivative(a) == doctest::Approx((law.value(a + h) - law.value(a - h)) / (2 * h)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("invalid law parameters throw") {
  CHECK_THROWS(BondLaw::hookean(0.0));
  CHECK_THROWS(VolumeLaw::abs(-1.0));
  CHECK_THROWS(VolumeLaw::huber(1.0, 0.0));
  CHECK_THROWS(VolumeLaw::huber(1.0, 1.5));
}
