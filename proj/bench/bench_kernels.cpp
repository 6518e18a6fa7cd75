// Timing comparison of the OpenMP kernels against their serial reference
// implementations: FFT, spectral multiplier, nonlinear phase kick, and one
// split-step trajectory. Run with --threads N to pin the team size.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "filament/kernels.hpp"
#include "filament/nls.hpp"
#include "filament/wavefield.hpp"

using namespace filament;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    body();
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

std::vector<complexd> random_field(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  std::vector<complexd> v(n);
  for (auto& c : v) c = complexd(dist(rng), dist(rng));
  return v;
}

void row(const char* name, std::size_t n, double serial, double parallel) {
  std::printf("%-22s n=%-8zu serial %10.4f ms   omp %10.4f ms   speedup %5.2fx\n", name, n,
              serial * 1e3, parallel * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--threads") kernels::set_threads(std::atoi(argv[i + 1]));
  }
  std::printf("threads: %d\n", kernels::threads());
  std::mt19937_64 rng(42);

  for (std::size_t n : {1u << 16, 1u << 18, 1u << 20}) {
    auto base = random_field(n, rng);
    auto a = base;
    const double ts = time_best_of(5, [&] {
      a = base;
      kernels::fft_radix2_serial(a, -1);
    });
    auto check = a;
    const double tp = time_best_of(5, [&] {
      a = base;
      kernels::fft_radix2(a, -1);
    });
    row("fft_radix2", n, ts, tp);
    if (kernels::max_abs_diff(check, a) != 0.0) std::printf("  !! serial/omp mismatch\n");
  }

  for (std::size_t n : {1u << 18, 1u << 20}) {
    auto base = random_field(n, rng);
    auto mult = random_field(n, rng);
    auto a = base;
    const double ts = time_best_of(10, [&] {
      a = base;
      kernels::apply_multiplier_serial(a, mult);
    });
    const double tp = time_best_of(10, [&] {
      a = base;
      kernels::apply_multiplier(a, mult);
    });
    row("apply_multiplier", n, ts, tp);

    a = base;
    const double ks = time_best_of(10, [&] {
      a = base;
      kernels::phase_kick_serial(a, 0.01, 0.0);
    });
    const double kp = time_best_of(10, [&] {
      a = base;
      kernels::phase_kick(a, 0.01, 0.0);
    });
    row("phase_kick", n, ks, kp);

    a = base;
    const double us = time_best_of(10, [&] {
      a = base;
      kernels::ansatz_phase_kick_serial(a, 0.3, 0.01);
    });
    const double up = time_best_of(10, [&] {
      a = base;
      kernels::ansatz_phase_kick(a, 0.3, 0.01);
    });
    row("ansatz_phase_kick", n, us, up);
  }

  {
    // one short pseudo-conformal trajectory, dominated by the kernels above
    const Grid1D g = Grid1D::periodic(4000.0, 1u << 17);
    std::vector<complexd> v(g.n);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double x = g.node(j);
      v[j] = 0.05 * std::exp(-x * x / 2.0);
    }
    const WaveField u0(g, v, 1.0);
    const double t = time_best_of(3, [&] {
      split_step_u(u0, 0.3, 1.0, 50.0, 0.05, {50.0}, 0.01);
    });
    std::printf("%-22s n=%-8zu        %10.4f ms (current thread setting)\n", "split_step_u",
                g.n, t * 1e3);
  }
  return 0;
}
