#include "incompat/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace incompat {

BondLaw BondLaw::hookean(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("hookean stiffness must be positive");
  BondLaw law;
  law.kind_ = Kind::Hookean;
  law.k_ = k;
  law.declared_ = {k, k, 2.0 * k};
  return law;
}

BondLaw BondLaw::custom(const ScalarFieldExpr& phi, LawConstants declared) {
  BondLaw law;
  law.kind_ = Kind::Custom;
  law.phi_ = phi;
  law.dphi_ = phi.derivative(0);
  law.declared_ = declared;
  return law;
}

std::string BondLaw::describe() const {
  std::ostringstream s;
  if (kind_ == Kind::Hookean)
    s << "hookean(k=" << k_ << ")";
  else
    s << "custom(" << phi_->to_string() << ")";
  return s.str();
}

double BondLaw::value(double r) const {
  if (kind_ == Kind::Hookean) return k_ * (r - 1.0) * (r - 1.0);
  return (*phi_)(r, 0.0);
}

double BondLaw::derivative(double r) const {
  if (kind_ == Kind::Hookean) return 2.0 * k_ * (r - 1.0);
  return (*dphi_)(r, 0.0);
}

VolumeLaw VolumeLaw::abs(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("volume law beta must be positive");
  VolumeLaw law;
  law.kind_ = Kind::Abs;
  law.beta_ = beta;
  law.delta_ = 0.0;
  law.declared_ = {0.5 * beta, 2.0 * beta, beta};
  return law;
}

VolumeLaw VolumeLaw::huber(double beta, double delta) {
  if (!(beta > 0.0)) throw std::invalid_argument("volume law beta must be positive");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::invalid_argument("huber delta must lie in (0, 1)");
  VolumeLaw law;
  law.kind_ = Kind::Huber;
  law.beta_ = beta;
  law.delta_ = delta;
  law.declared_ = {0.5 * beta, beta, beta};
  return law;
}

std::string VolumeLaw::describe() const {
  std::ostringstream s;
  if (kind_ == Kind::Abs)
    s << "abs(beta=" << beta_ << ")";
  else
    s << "huber(beta=" << beta_ << ", delta=" << delta_ << ")";
  return s.str();
}

double VolumeLaw::value(double a) const {
  const double t = a - 1.0;
  if (kind_ == Kind::Abs) return beta_ * std::abs(t);
  if (std::abs(t) <= delta_) return beta_ * (t * t / (2.0 * delta_));
  return beta_ * (std::abs(t) - 0.5 * delta_);
}

double VolumeLaw::derivative(double a) const {
  const double t = a - 1.0;
  if (kind_ == Kind::Huber && std::abs(t) <= delta_) return beta_ * (t / delta_);
  return t > 0.0 ? beta_ : (t < 0.0 ? -beta_ : 0.0);
}

std::size_t LawReport::count(const std::string& condition) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const LawViolation& v) { return v.condition == condition; }));
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / std::max(1, n - 1));
  return g;
}

bool leq(double lhs, double rhs, double slack) { return lhs <= rhs + slack * std::max(1.0, std::abs(rhs)); }

template <class Law>
void check_lipschitz(const Law& law, const std::vector<double>& pts, double L, bool bond, const GridSpec& grid,
                     LawReport& rep) {
  std::vector<double> sub, val;
  for (std::size_t i = 0; i < pts.size(); i += std::max(1, grid.lipschitz_stride)) sub.push_back(pts[i]);
  for (double s : sub) val.push_back(law.value(s));
  for (std::size_t i = 0; i < sub.size(); ++i)
    for (std::size_t j = i + 1; j < sub.size(); ++j) {
      const double lhs = std::abs(val[i] - val[j]);
      const double rhs = bond ? L * (1.0 + std::abs(sub[i]) + std::abs(sub[j])) * std::abs(sub[i] - sub[j])
                              : L * std::abs(sub[i] - sub[j]);
      ++rep.checks;
      if (!std::isfinite(lhs) || !leq(lhs, rhs, grid.slack)) rep.violations.push_back({"lipschitz", sub[i], sub[j], lhs, rhs});
    }
}

}  // namespace

LawReport validate_laws(const BondLaw& law, const GridSpec& grid) {
  LawReport rep;
  rep.law = law.describe();
  const LawConstants& k = law.declared();
  std::vector<double> r = log_grid(grid.r_min, grid.r_max, grid.n_bond);
  r.insert(r.begin(), 0.0);
  r.push_back(1.0);
  std::sort(r.begin(), r.end());

  auto eval = [&](double x) {
    try {
      return law.value(x);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const double at_one = eval(1.0);
  ++rep.checks;
  if (!(std::abs(at_one) <= grid.slack)) rep.violations.push_back({"zero", 1.0, 0.0, at_one, 0.0});
  for (double x : r) {
    const double v = eval(x);
    const double lo = k.alpha * (x - 1.0) * (x - 1.0), hi = k.C * (1.0 + x * x);
    rep.checks += 2;
    if (!std::isfinite(v) || !leq(lo, v, grid.slack)) rep.violations.push_back({"coercivity", x, 0.0, v, lo});
    if (!std::isfinite(v) || !leq(v, hi, grid.slack)) rep.violations.push_back({"growth", x, 0.0, v, hi});
  }
  struct Wrapped {
    decltype(eval)& f;
    double value(double x) const { return f(x); }
  } wrapped{eval};
  check_lipschitz(wrapped, r, k.L, true, grid, rep);
  return rep;
}

LawReport validate_laws(const VolumeLaw& law, const GridSpec& grid) {
  LawReport rep;
  rep.law = law.describe();
  const LawConstants& k = law.declared();
  const std::vector<double> pos = log_grid(1e-6, grid.a_max, grid.n_volume / 2);
  std::vector<double> a;
  for (double x : pos) {
    a.push_back(x);
    a.push_back(-x);
    a.push_back(1.0 + x * 1e-3);
    a.push_back(1.0 - x * 1e-3);
  }
  a.push_back(0.0);
  a.push_back(1.0);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());

  ++rep.checks;
  if (law.value(1.0) != 0.0) rep.violations.push_back({"zero", 1.0, 0.0, law.value(1.0), 0.0});
  for (double x : a) {
    const double v = law.value(x);
    if (x != 1.0) {
      ++rep.checks;
      if (!(v > 0.0)) rep.violations.push_back({"zero", x, 0.0, v, 0.0});
    }
    if (x < 0.0) {
      const double lo = k.alpha * std::sqrt(std::abs(x));
      ++rep.checks;
      if (!(v > lo)) rep.violations.push_back({"coercivity", x, 0.0, v, lo});
    }
    const double hi = k.C * (1.0 + std::abs(x));
    ++rep.checks;
    if (!(v < hi)) rep.violations.push_back({"growth", x, 0.0, v, hi});
  }
  check_lipschitz(law, a, k.L, false, grid, rep);
  return rep;
}

}  // namespace incompat
