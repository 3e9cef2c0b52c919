#pragma once

// Constitutive laws of the discrete model: Φ acts on the relative elongation
// of an edge, Ψ on the normalized signed area of a triangle.

#include <optional>
#include <string>
#include <vector>

#include "incompat/field_expr.hpp"

namespace incompat {

/// Declared structural constants, checked on sample grids by validate_laws.
struct LawConstants {
  double alpha = 1.0;
  double C = 1.0;
  double L = 1.0;
};

class BondLaw {
 public:
  enum class Kind { Hookean, Custom };

  /// Φ(r) = k (r-1)²; declares α = k, C = k, L = 2k.
  static BondLaw hookean(double k = 1.0);
  /// Φ given as an expression in the variable x, which stands for r.
  static BondLaw custom(const ScalarFieldExpr& phi, LawConstants declared);

  Kind kind() const { return kind_; }
  double stiffness() const { return k_; }
  const LawConstants& declared() const { return declared_; }
  std::string describe() const;

  double value(double r) const;
  double derivative(double r) const;

 private:
  Kind kind_ = Kind::Hookean;
  double k_ = 1.0;
  LawConstants declared_{1.0, 1.0, 2.0};
  std::optional<ScalarFieldExpr> phi_, dphi_;
};

class VolumeLaw {
 public:
  enum class Kind { Abs, Huber };

  /// Ψ(a) = β|a-1|; declares α = β/2, C = 2β, L = β.
  static VolumeLaw abs(double beta = 1.0);
  /// Ψ(a) = β huber_δ(a-1), huber_δ(t) = t²/(2δ) for |t| ≤ δ, |t| - δ/2 otherwise;
  /// declares α = β/2, C = β, L = β.
  static VolumeLaw huber(double beta = 1.0, double delta = 1e-3);

  Kind kind() const { return kind_; }
  double beta() const { return beta_; }
  double delta() const { return delta_; }
  const LawConstants& declared() const { return declared_; }
  std::string describe() const;

  double value(double a) const;
  double derivative(double a) const;

 private:
  Kind kind_ = Kind::Huber;
  double beta_ = 1.0, delta_ = 1e-3;
  LawConstants declared_{0.5, 1.0, 1.0};
};

struct Laws {
  BondLaw bond = BondLaw::hookean();
  VolumeLaw volume = VolumeLaw::huber();
};

struct GridSpec {
  int n_bond = 2001;   // log-spaced r in [r_min, r_max], plus r = 0
  double r_min = 1e-3, r_max = 1e3;
  int n_volume = 4001; // signed log-spaced a in [-a_max, a_max], plus a = 0 and a = 1
  double a_max = 1e3;
  int lipschitz_stride = 10;  // pairs are taken among every stride-th grid point
  double slack = 1e-12;       // relative
};

struct LawViolation {
  std::string condition;  // zero | coercivity | growth | lipschitz
  double x = 0.0, y = 0.0;
  double lhs = 0.0, rhs = 0.0;
};

struct LawReport {
  std::string law;
  std::size_t checks = 0;
  std::vector<LawViolation> violations;
  bool ok() const { return violations.empty(); }
  std::size_t count(const std::string& condition) const;
};

LawReport validate_laws(const BondLaw& law, const GridSpec& grid = {});
LawReport validate_laws(const VolumeLaw& law, const GridSpec& grid = {});

}  // namespace incompat
