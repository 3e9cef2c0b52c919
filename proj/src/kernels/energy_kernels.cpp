#include <atomic>

#include "incompat/energy_kernels.hpp"

namespace incompat::kernels {

namespace {
// -1: no override
std::atomic<int> g_forced{-1};
}  // namespace

std::string to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_supported() {
#if defined(INCOMPAT_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  const int forced = g_forced.load();
  if (forced >= 0) return static_cast<Isa>(forced) == Isa::Avx2 && avx2_supported() ? Isa::Avx2 : Isa::Scalar;
  return avx2_supported() ? Isa::Avx2 : Isa::Scalar;
}

void force_isa(Isa isa) { g_forced = static_cast<int>(isa); }
void reset_isa() { g_forced = -1; }

#if defined(INCOMPAT_WITH_AVX2)
#define INCOMPAT_DISPATCH(fn, ...) \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define INCOMPAT_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void bond_hookean(double k, const BondBatch& b) { INCOMPAT_DISPATCH(bond_hookean, k, b); }
void volume_huber(double beta, double delta, const VolumeBatch& v) { INCOMPAT_DISPATCH(volume_huber, beta, delta, v); }
void volume_abs(double beta, const VolumeBatch& v) { INCOMPAT_DISPATCH(volume_abs, beta, v); }

#undef INCOMPAT_DISPATCH

}  // namespace incompat::kernels
