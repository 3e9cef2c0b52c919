#pragma once

// Limited-memory BFGS with a backtracking (Armijo) line search.
//
// Used for three different problems: relaxing polylines toward geodesics,
// minimizing discrete lattice energies, and the inner problem of the
// quasiconvex-envelope estimator.

#include <functional>
#include <span>
#include <string>

namespace incompat {

struct LbfgsOptions {
  int max_iters = 1000;
  /// Stop when the Euclidean norm of the gradient drops below this.
  double grad_tol = 1e-8;
  /// Stop when one iteration decreases the objective by less than
  /// rel_decrease_tol * |f|. Disabled when zero.
  double rel_decrease_tol = 0.0;
  int history = 10;
  double sufficient_decrease = 1e-4;
  double backtrack = 0.5;
  int max_linesearch = 60;
};

enum class LbfgsStatus { Converged, SmallDecrease, MaxIterations, LineSearchFailed, NonFinite };

std::string to_string(LbfgsStatus status);

struct LbfgsResult {
  LbfgsStatus status = LbfgsStatus::MaxIterations;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;

  bool ok() const { return status == LbfgsStatus::Converged || status == LbfgsStatus::SmallDecrease; }
};

/// Objective callback: returns f(x) and writes ∇f(x) into grad (same length as x).
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Minimizes in place; x holds the last accepted iterate on return. Accepted
/// iterates satisfy the Armijo condition, or, once the required decrease
/// falls below 1e-12·|f|, an approximate Wolfe condition that lets f move by
/// at most that rounding noise.
LbfgsResult lbfgs_minimize(std::span<double> x, const Objective& objective, const LbfgsOptions& options = {});

}  // namespace incompat
