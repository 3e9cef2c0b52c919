#include <cmath>

#include "incompat/energy_kernels.hpp"

namespace incompat::kernels::scalar {

void bond_hookean(double k, const BondBatch& b) {
  const double two_k = 2.0 * k;
  for (std::size_t i = 0; i < b.n; ++i) {
    const double len = std::sqrt(b.dx[i] * b.dx[i] + b.dy[i] * b.dy[i]);
    const double t = len * b.inv_d[i] - 1.0;
    b.energy[i] = b.mu[i] * (k * (t * t));
    b.coef[i] = b.mu[i] * (two_k * t) * b.inv_d[i] / len;
  }
}

void volume_huber(double beta, double delta, const VolumeBatch& v) {
  const double two_delta = 2.0 * delta, half_delta = 0.5 * delta;
  for (std::size_t i = 0; i < v.n; ++i) {
    const double t = v.w[i] * v.scale[i] - 1.0;
    const double at = std::abs(t);
    double h, dh;
    if (at <= delta) {
      h = t * t / two_delta;
      dh = t / delta;
    } else {
      h = at - half_delta;
      dh = t > 0.0 ? 1.0 : -1.0;
    }
    v.energy[i] = v.mu[i] * (beta * h);
    v.coef[i] = v.mu[i] * (beta * dh) * v.scale[i];
  }
}

void volume_abs(double beta, const VolumeBatch& v) {
  for (std::size_t i = 0; i < v.n; ++i) {
    const double t = v.w[i] * v.scale[i] - 1.0;
    const double s = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    v.energy[i] = v.mu[i] * (beta * std::abs(t));
    v.coef[i] = v.mu[i] * (beta * s) * v.scale[i];
  }
}

}  // namespace incompat::kernels::scalar
