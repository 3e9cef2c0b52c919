#include "incompat/optim.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

namespace incompat {

std::string to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::Converged: return "converged";
    case LbfgsStatus::SmallDecrease: return "small-decrease";
    case LbfgsStatus::MaxIterations: return "max-iterations";
    case LbfgsStatus::LineSearchFailed: return "line-search-failed";
    case LbfgsStatus::NonFinite: return "non-finite";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

constexpr double kNoise = 1e-12;

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsResult lbfgs_minimize(std::span<double> x, const Objective& objective, const LbfgsOptions& opt) {
  const std::size_t n = x.size();
  LbfgsResult res;
  std::vector<double> g(n), d(n), x_trial(n), g_trial(n), alpha(opt.history > 0 ? opt.history : 1);
  std::deque<Pair> mem;

  double f = objective(x, g);
  ++res.evaluations;
  res.value = f;
  res.grad_norm = std::sqrt(dot(g, g));
  if (!std::isfinite(f) || !std::isfinite(res.grad_norm)) {
    res.status = LbfgsStatus::NonFinite;
    return res;
  }
  if (n == 0 || res.grad_norm <= opt.grad_tol) {
    res.status = LbfgsStatus::Converged;
    return res;
  }

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    // Two-loop recursion for d = -H g.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    const int m = static_cast<int>(mem.size());
    for (int k = m - 1; k >= 0; --k) {
      alpha[k] = mem[k].rho * dot(mem[k].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * mem[k].y[i];
    }
    double step0 = 1.0;
    if (m > 0) {
      const Pair& last = mem.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& di : d) di *= gamma;
    } else {
      step0 = std::min(1.0, 1.0 / res.grad_norm);
    }
    for (int k = 0; k < m; ++k) {
      const double beta = mem[k].rho * dot(mem[k].y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * mem[k].s[i];
    }

    double slope = dot(g, d);
    if (!(slope < 0.0)) {
      // Memory produced an ascent direction; restart from steepest descent.
      mem.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -res.grad_norm * res.grad_norm;
      step0 = std::min(1.0, 1.0 / res.grad_norm);
    }

    double step = step0;
    double f_trial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_linesearch; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] + step * d[i];
      f_trial = objective(x_trial, g_trial);
      ++res.evaluations;
      if (std::isfinite(f_trial) && f_trial <= f + opt.sufficient_decrease * step * slope) {
        accepted = true;
        break;
      }
      // Once the demanded decrease is below the rounding noise of f, fall back
      // to an approximate Wolfe test on the directional derivative; f may then
      // move by rounding noise only.
      if (std::isfinite(f_trial) && f_trial <= f + kNoise * std::abs(f) &&
          -opt.sufficient_decrease * step * slope <= kNoise * std::abs(f) &&
          dot(g_trial, d) <= (1.0 - 2.0 * opt.sufficient_decrease) * -slope) {
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    res.iterations = iter + 1;
    if (!accepted) {
      // One retry along steepest descent before giving up.
      if (!mem.empty()) {
        mem.clear();
        --iter;
        res.iterations = iter + 1;
        continue;
      }
      res.status = LbfgsStatus::LineSearchFailed;
      return res;
    }

    Pair p;
    p.s.resize(n);
    p.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_trial[i] - x[i];
      p.y[i] = g_trial[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    const double f_prev = f;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = x_trial[i];
      g[i] = g_trial[i];
    }
    f = f_trial;
    res.value = f;
    res.grad_norm = std::sqrt(dot(g, g));
    if (!std::isfinite(res.grad_norm)) {
      res.status = LbfgsStatus::NonFinite;
      return res;
    }
    if (sy > 1e-14 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y)) && sy > 0.0) {
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (static_cast<int>(mem.size()) > opt.history) mem.pop_front();
    }
    if (res.grad_norm <= opt.grad_tol) {
      res.status = LbfgsStatus::Converged;
      return res;
    }
    if (opt.rel_decrease_tol > 0.0 && f_prev - f <= opt.rel_decrease_tol * std::abs(f)) {
      res.status = LbfgsStatus::SmallDecrease;
      return res;
    }
  }
  res.status = LbfgsStatus::MaxIterations;
  return res;
}

}  // namespace incompat
