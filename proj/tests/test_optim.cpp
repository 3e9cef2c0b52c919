#include <cmath>
#include <vector>

#include "doctest.h"
#include "incompat/optim.hpp"

using namespace incompat;

namespace {

double rosenbrock(std::span<const double> x, std::span<double> g) {
  double f = 0;
  for (double& gi : g) gi = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i], b = 1 - x[i];
    f += 100 * a * a + b * b;
    g[i] += -400 * a * x[i] - 2 * b;
    g[i + 1] += 200 * a;
  }
  return f;
}

}  // namespace

TEST_CASE("rosenbrock converges to the global minimum") {
  std::vector<double> x(10, -1.2);
  LbfgsOptions o;
  o.max_iters = 5000;
  o.grad_tol = 1e-10;
  const LbfgsResult r = lbfgs_minimize(x, rosenbrock, o);
  CHECK(r.status == LbfgsStatus::Converged);
  for (double xi : x) CHECK(xi == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("accepted iterates never increase the objective beyond rounding noise") {
  double prev = INFINITY;
  for (int k = 1; k <= 80; ++k) {
    std::vector<double> x(6, -1.2);
    LbfgsOptions o;
    o.max_iters = k;
    o.grad_tol = 0;
    const LbfgsResult r = lbfgs_minimize(x, rosenbrock, o);
    CHECK(r.value <= prev + 1e-12 * std::abs(prev));
    prev = r.value;
  }
}

TEST_CASE("stopping rules and failures") {
  auto quad = [](std::span<const double> x, std::span<double> g) {
    g[0] = 2 * x[0];
    return x[0] * x[0];
  };
  std::vector<double> x{0.0};
  CHECK(lbfgs_minimize(x, quad).status == LbfgsStatus::Converged);
  auto nan = [](std::span<const double>, std::span<double> g) {
    g[0] = 0;
    return NAN;
  };
  x = {1.0};
  CHECK(lbfgs_minimize(x, nan).status == LbfgsStatus::NonFinite);
  std::vector<double> y(4, -1.2);
  LbfgsOptions o;
  o.max_iters = 3;
  o.grad_tol = 0;
  CHECK(lbfgs_minimize(y, rosenbrock, o).status == LbfgsStatus::MaxIterations);
  CHECK(to_string(LbfgsStatus::SmallDecrease) == "small-decrease");
}
