#pragma once

#include <cstddef>
#include <vector>

#include "filament/vec3.hpp"

// Hot array kernels. Each parallel kernel has a serial reference implementation
// that stays in the build; tests assert they agree and bench/ compares timings.
// Reductions are always serial with a fixed summation order so that reports are
// byte-identical regardless of thread count.
namespace filament::kernels {

// Number of OpenMP threads used by the parallel kernels (0 = runtime default).
void set_threads(int n);
int threads();

// In-place radix-2 complex FFT, natural (bit-reversed-resolved) order.
// sign = -1: X_k = sum_j x_j e^{-2*pi*i*j*k/n}; sign = +1: unnormalized inverse.
// n must be a power of two.
void fft_radix2(std::vector<complexd>& a, int sign);
void fft_radix2_serial(std::vector<complexd>& a, int sign);

// O(n^2) direct DFT with the same convention; the independent oracle.
std::vector<complexd> dft_reference(const std::vector<complexd>& a, int sign);

// a[i] *= m[i]
void apply_multiplier(std::vector<complexd>& a, const std::vector<complexd>& m);
void apply_multiplier_serial(std::vector<complexd>& a, const std::vector<complexd>& m);

// w[i] *= exp(i * coeff * (|w[i]|^2 - offset)). The modulus is preserved exactly.
void phase_kick(std::vector<complexd>& w, double coeff, double offset);
void phase_kick_serial(std::vector<complexd>& w, double coeff, double offset);

// Phase kick acting on w = u + alpha: u[i] = (u[i]+alpha) e^{i coeff (|u[i]+alpha|^2 - alpha^2)} - alpha.
void ansatz_phase_kick(std::vector<complexd>& u, double alpha, double coeff);
void ansatz_phase_kick_serial(std::vector<complexd>& u, double alpha, double coeff);

// Deterministic (serial, in-order) reductions.
double max_abs(const std::vector<complexd>& a);
double sum_abs2(const std::vector<complexd>& a);
double max_abs_diff(const std::vector<complexd>& a, const std::vector<complexd>& b);

}  // namespace filament::kernels
