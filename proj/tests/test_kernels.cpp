#include "doctest.h"

#include <random>

#include "filament/errors.hpp"
#include "filament/kernels.hpp"

using namespace filament;

namespace {

std::vector<complexd> random_field(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<complexd> v(n);
  for (auto& c : v) c = complexd(dist(rng), dist(rng));
  return v;
}

}  // namespace

TEST_CASE("fft matches the direct DFT oracle") {
  const std::size_t n = 64;
  const auto v = random_field(n, 7);
  for (int sign : {-1, +1}) {
    auto fast = v;
    kernels::fft_radix2(fast, sign);
    const auto slow = kernels::dft_reference(v, sign);
    double scale = kernels::max_abs(slow);
    CHECK(kernels::max_abs_diff(fast, slow) / scale < 1e-12);
  }
}

TEST_CASE("fft inverse of forward recovers the input") {
  const std::size_t n = 1024;
  const auto v = random_field(n, 11);
  auto w = v;
  kernels::fft_radix2(w, -1);
  kernels::fft_radix2(w, +1);
  for (auto& c : w) c /= static_cast<double>(n);
  CHECK(kernels::max_abs_diff(w, v) / kernels::max_abs(v) < 1e-13);
}

TEST_CASE("parallel fft is bit-identical to the serial reference") {
  // large enough to trip the OpenMP path
  const std::size_t n = 1 << 15;
  const auto v = random_field(n, 3);
  auto a = v, b = v;
  kernels::fft_radix2(a, -1);
  kernels::fft_radix2_serial(b, -1);
  CHECK(kernels::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("pointwise kernels match their serial references bit for bit") {
  const std::size_t n = 1 << 15;
  const auto mult = random_field(n, 5);
  auto a = random_field(n, 6), b = a;
  kernels::apply_multiplier(a, mult);
  kernels::apply_multiplier_serial(b, mult);
  CHECK(kernels::max_abs_diff(a, b) == 0.0);

  a = random_field(n, 8);
  b = a;
  kernels::phase_kick(a, 0.037, 0.5);
  kernels::phase_kick_serial(b, 0.037, 0.5);
  CHECK(kernels::max_abs_diff(a, b) == 0.0);

  a = random_field(n, 9);
  b = a;
  kernels::ansatz_phase_kick(a, 0.3, 0.02);
  kernels::ansatz_phase_kick_serial(b, 0.3, 0.02);
  CHECK(kernels::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("phase kick preserves the modulus exactly") {
  auto a = random_field(256, 10);
  auto before = a;
  kernels::phase_kick(a, 1.7, 0.3);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(std::abs(std::abs(a[i]) - std::abs(before[i])) < 1e-15);
}

TEST_CASE("fft size contract") {
  std::vector<complexd> bad(48);
  CHECK_THROWS_AS(kernels::fft_radix2(bad, -1), contract_error);
  auto ok = random_field(16, 1);
  CHECK_THROWS_AS(kernels::fft_radix2(ok, 2), contract_error);
}
