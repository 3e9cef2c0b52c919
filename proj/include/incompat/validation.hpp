#pragma once

// Randomized property suites: the two-dimensional matrix inequalities behind the
// rigidity estimates, the quadratic order of the distance approximation, and
// structural properties of the discrete and continuum energies.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "incompat/geometry.hpp"
#include "json.hpp"

namespace incompat {

struct SuiteResult {
  std::string name;
  std::string group;  // appendix | geometry | distance | energy | continuum
  bool passed = true;
  std::size_t trials = 0;
  std::size_t violations = 0;
  double worst = 0.0;   // largest violation margin, or the suite's headline statistic
  std::string detail;
};

/// The fiber-algebra primitives under test; replaceable for mutation checks.
struct FiberAlgebra {
  std::function<SingularValues(const Mat2&)> svd = [](const Mat2& m) { return singular_values(m); };
  std::function<double(const SingularValues&)> dist2_O = [](const SingularValues& s) { return dist2_to_O(s); };
  std::function<double(const SingularValues&)> dist2_SO = [](const SingularValues& s) { return dist2_to_SO(s); };
};

struct ValidationOptions {
  std::size_t trials = 100000;
  std::uint64_t seed = 20240601;
  /// A check fails when lhs - rhs > slack · max(1, |rhs|).
  double slack = 1e-12;
  FiberAlgebra algebra;
};

SuiteResult appendix_isometry(const ValidationOptions& opts);        // (i)
SuiteResult appendix_equal_length(const ValidationOptions& opts);    // (ii)
SuiteResult appendix_constructive(const ValidationOptions& opts);    // (iii)
SuiteResult appendix_dist_O(const ValidationOptions& opts);          // (iv)
SuiteResult appendix_singular_values(const ValidationOptions& opts); // (v)

/// Constant C'(r, θ) of the unequal-length bound, from the equal-length reduction.
double constructive_constant(double r, double theta);

struct DistanceOrderResult {
  double slope = 0.0;
  std::vector<double> lengths, errors;
};
/// Regression slope of |d(p, p+v) - |v|_g| against |v| for |v| in [1e-3, 1e-1].
DistanceOrderResult distance_order(const MetricField& g, std::uint64_t seed, int n_lengths = 9, int n_dirs = 6);

SuiteResult geometry_properties(const ValidationOptions& opts);
SuiteResult distance_order_suite(const ValidationOptions& opts);
SuiteResult energy_properties(const ValidationOptions& opts);
SuiteResult continuum_properties(const ValidationOptions& opts);

/// selector: all | appendix | geometry | distance | energy | continuum
std::vector<SuiteResult> run_suites(const std::string& selector, const ValidationOptions& opts = {});

nlohmann::json to_json(const SuiteResult& r);

}  // namespace incompat
