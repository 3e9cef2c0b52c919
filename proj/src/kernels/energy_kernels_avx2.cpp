#include <immintrin.h>

#include "incompat/energy_kernels.hpp"

namespace incompat::kernels::avx2 {

namespace {

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

// sign(t) in {-1, 0, 1}
inline __m256d vsign(__m256d t) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(t, zero, _CMP_GT_OQ), _mm256_set1_pd(1.0));
  const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(t, zero, _CMP_LT_OQ), _mm256_set1_pd(-1.0));
  return _mm256_or_pd(pos, neg);
}

}  // namespace

void bond_hookean(double k, const BondBatch& b) {
  const __m256d vk = _mm256_set1_pd(k), v2k = _mm256_set1_pd(2.0 * k), one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= b.n; i += 4) {
    const __m256d dx = _mm256_loadu_pd(b.dx + i), dy = _mm256_loadu_pd(b.dy + i);
    const __m256d inv_d = _mm256_loadu_pd(b.inv_d + i), mu = _mm256_loadu_pd(b.mu + i);
    const __m256d len = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
    const __m256d t = _mm256_sub_pd(_mm256_mul_pd(len, inv_d), one);
    _mm256_storeu_pd(b.energy + i, _mm256_mul_pd(mu, _mm256_mul_pd(vk, _mm256_mul_pd(t, t))));
    const __m256d c = _mm256_mul_pd(_mm256_mul_pd(mu, _mm256_mul_pd(v2k, t)), inv_d);
    _mm256_storeu_pd(b.coef + i, _mm256_div_pd(c, len));
  }
  if (i < b.n) {
    BondBatch tail = b;
    tail.dx += i, tail.dy += i, tail.inv_d += i, tail.mu += i, tail.energy += i, tail.coef += i;
    tail.n = b.n - i;
    scalar::bond_hookean(k, tail);
  }
}

void volume_huber(double beta, double delta, const VolumeBatch& v) {
  const __m256d vbeta = _mm256_set1_pd(beta), vdelta = _mm256_set1_pd(delta);
  const __m256d two_delta = _mm256_set1_pd(2.0 * delta), half_delta = _mm256_set1_pd(0.5 * delta);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= v.n; i += 4) {
    const __m256d scale = _mm256_loadu_pd(v.scale + i), mu = _mm256_loadu_pd(v.mu + i);
    const __m256d t = _mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(v.w + i), scale), one);
    const __m256d at = vabs(t);
    const __m256d inner = _mm256_cmp_pd(at, vdelta, _CMP_LE_OQ);
    const __m256d h = _mm256_blendv_pd(_mm256_sub_pd(at, half_delta), _mm256_div_pd(_mm256_mul_pd(t, t), two_delta), inner);
    const __m256d outer_sign = _mm256_blendv_pd(_mm256_set1_pd(-1.0), one, _mm256_cmp_pd(t, _mm256_setzero_pd(), _CMP_GT_OQ));
    const __m256d dh = _mm256_blendv_pd(outer_sign, _mm256_div_pd(t, vdelta), inner);
    _mm256_storeu_pd(v.energy + i, _mm256_mul_pd(mu, _mm256_mul_pd(vbeta, h)));
    _mm256_storeu_pd(v.coef + i, _mm256_mul_pd(_mm256_mul_pd(mu, _mm256_mul_pd(vbeta, dh)), scale));
  }
  if (i < v.n) {
    VolumeBatch tail = v;
    tail.w += i, tail.scale += i, tail.mu += i, tail.energy += i, tail.coef += i;
    tail.n = v.n - i;
    scalar::volume_huber(beta, delta, tail);
  }
}

void volume_abs(double beta, const VolumeBatch& v) {
  const __m256d vbeta = _mm256_set1_pd(beta), one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= v.n; i += 4) {
    const __m256d scale = _mm256_loadu_pd(v.scale + i), mu = _mm256_loadu_pd(v.mu + i);
    const __m256d t = _mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(v.w + i), scale), one);
    _mm256_storeu_pd(v.energy + i, _mm256_mul_pd(mu, _mm256_mul_pd(vbeta, vabs(t))));
    _mm256_storeu_pd(v.coef + i, _mm256_mul_pd(_mm256_mul_pd(mu, _mm256_mul_pd(vbeta, vsign(t))), scale));
  }
  if (i < v.n) {
    VolumeBatch tail = v;
    tail.w += i, tail.scale += i, tail.mu += i, tail.energy += i, tail.coef += i;
    tail.n = v.n - i;
    scalar::volume_abs(beta, tail);
  }
}

}  // namespace incompat::kernels::avx2
