#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"
#include "incompat/energy_kernels.hpp"

using namespace incompat::kernels;

namespace {

struct Data {
  std::vector<double> dx, dy, inv_d, mu, w, scale;
  explicit Data(std::size_t n, unsigned seed) : dx(n), dy(n), inv_d(n), mu(n), w(n), scale(n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0), p(0.1, 10.0);
    for (std::size_t i = 0; i < n; ++i) {
      dx[i] = u(rng), dy[i] = u(rng), inv_d[i] = p(rng), mu[i] = p(rng) * 1e-3;
      scale[i] = p(rng);
      // Cluster some wedges around the kink and the smoothing radius.
      w[i] = (i % 3 == 0) ? (1.0 + 1e-3 * u(rng)) / scale[i] : u(rng);
    }
  }
};

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar and avx2 kernels are bitwise identical") {
  if (!avx2_supported()) {
    MESSAGE("AVX2 not available on this machine; only the scalar path is exercised");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 1000u, 4099u}) {
    Data d(n, 7 + static_cast<unsigned>(n));
    std::vector<double> e1(n), c1(n), e2(n), c2(n);
    scalar::bond_hookean(1.7, {d.dx.data(), d.dy.data(), d.inv_d.data(), d.mu.data(), e1.data(), c1.data(), n});
    avx2::bond_hookean(1.7, {d.dx.data(), d.dy.data(), d.inv_d.data(), d.mu.data(), e2.data(), c2.data(), n});
    CHECK(same_bits(e1, e2));
    CHECK(same_bits(c1, c2));
    scalar::volume_huber(1.3, 1e-3, {d.w.data(), d.scale.data(), d.mu.data(), e1.data(), c1.data(), n});
    avx2::volume_huber(1.3, 1e-3, {d.w.data(), d.scale.data(), d.mu.data(), e2.data(), c2.data(), n});
    CHECK(same_bits(e1, e2));
    CHECK(same_bits(c1, c2));
    scalar::volume_abs(0.8, {d.w.data(), d.scale.data(), d.mu.data(), e1.data(), c1.data(), n});
    avx2::volume_abs(0.8, {d.w.data(), d.scale.data(), d.mu.data(), e2.data(), c2.data(), n});
    CHECK(same_bits(e1, e2));
    CHECK(same_bits(c1, c2));
  }
}

TEST_CASE("dispatch honours force_isa") {
  force_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  force_isa(Isa::Avx2);
  CHECK(active_isa() == (avx2_supported() ? Isa::Avx2 : Isa::Scalar));
  reset_isa();
  CHECK(active_isa() == (avx2_supported() ? Isa::Avx2 : Isa::Scalar));
  CHECK(to_string(Isa::Scalar) == "scalar");
}

TEST_CASE("scalar kernels match the closed forms") {
  const double dx = 0.3, dy = 0.4, inv_d = 2.5, mu = 0.2, e0 = 0.0;
  double e, c;
  scalar::bond_hookean(2.0, {&dx, &dy, &inv_d, &mu, &e, &c, 1});
  // r = 0.5 * 2.5 = 1.25
  CHECK(e == doctest::Approx(0.2 * 2.0 * 0.0625).epsilon(1e-15));
  CHECK(c == doctest::Approx(0.2 * 2.0 * 2.0 * 0.25 * 2.5 / 0.5).epsilon(1e-15));
  const double w = -0.5, scale = 2.0;
  scalar::volume_huber(1.0, 1e-3, {&w, &scale, &mu, &e, &c, 1});
  CHECK(e == doctest::Approx(0.2 * (2.0 - 0.5e-3)).epsilon(1e-15));
  CHECK(c == doctest::Approx(-0.2 * 2.0).epsilon(1e-15));
  const double w1 = 0.5;
  scalar::volume_abs(1.0, {&w1, &scale, &mu, &e, &c, 1});
  CHECK(e == e0);
}
