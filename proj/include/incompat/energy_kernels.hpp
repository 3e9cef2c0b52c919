#pragma once

// Per-element energy kernels in structure-of-arrays form.
//
// Each kernel fills energy[i] and a scalar coefficient coef[i] from which the
// caller rebuilds the gradient. Scalar and AVX2 variants perform the same
// IEEE operations in the same order, so their outputs are bitwise identical;
// reductions are left to the caller so summation order stays fixed.

#include <cstddef>
#include <string>

namespace incompat::kernels {

/// Hookean bonds: r = |(dx,dy)| * inv_d, energy = mu k (r-1)²,
/// coef = mu 2k (r-1) inv_d / |(dx,dy)|  (so ∂E/∂Δ = coef · Δ).
struct BondBatch {
  const double* dx;
  const double* dy;
  const double* inv_d;
  const double* mu;
  double* energy;
  double* coef;
  std::size_t n;
};

/// Signed-area terms: a = w * scale, energy = mu Ψ(a), coef = mu Ψ'(a) scale
/// (so ∂E/∂w = coef).
struct VolumeBatch {
  const double* w;
  const double* scale;
  const double* mu;
  double* energy;
  double* coef;
  std::size_t n;
};

enum class Isa { Scalar, Avx2 };

std::string to_string(Isa isa);
bool avx2_supported();
/// Best supported ISA unless overridden by force_isa.
Isa active_isa();
/// Pins dispatch (tests, benchmarks). Requesting an unsupported ISA falls back to scalar.
void force_isa(Isa isa);
void reset_isa();

void bond_hookean(double k, const BondBatch& b);
void volume_huber(double beta, double delta, const VolumeBatch& v);
void volume_abs(double beta, const VolumeBatch& v);

namespace scalar {
void bond_hookean(double k, const BondBatch& b);
void volume_huber(double beta, double delta, const VolumeBatch& v);
void volume_abs(double beta, const VolumeBatch& v);
}  // namespace scalar

namespace avx2 {
void bond_hookean(double k, const BondBatch& b);
void volume_huber(double beta, double delta, const VolumeBatch& v);
void volume_abs(double beta, const VolumeBatch& v);
}  // namespace avx2

}  // namespace incompat::kernels
