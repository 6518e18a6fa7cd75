#include "filament/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "filament/errors.hpp"

namespace filament::kernels {

namespace {

int g_threads = 0;

// Parallelism only pays off past this size on the machines we target.
constexpr std::size_t kParallelCutoff = 1 << 14;

bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Twiddle table w_j = exp(-2*pi*i*j/n), j < n/2, cached per size.
const std::vector<complexd>& twiddles(std::size_t n) {
  static std::mutex mtx;
  static std::map<std::size_t, std::vector<complexd>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<complexd> w(n / 2);
  const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t j = 0; j < n / 2; ++j) w[j] = std::polar(1.0, step * static_cast<double>(j));
  return cache.emplace(n, std::move(w)).first->second;
}

void bit_reverse_permute(std::vector<complexd>& a) {
  const std::size_t n = a.size();
  std::size_t j = 0;
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
}

template <bool Parallel>
void fft_impl(std::vector<complexd>& a, int sign) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw contract_error("fft_radix2: size must be a power of two");
  if (sign != -1 && sign != 1) throw contract_error("fft_radix2: sign must be +-1");

  const auto& w = twiddles(n);
  bit_reverse_permute(a);

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = n / len;  // twiddle index stride in the full table
    const std::size_t pairs = n >> 1;    // total butterflies per stage
#ifdef _OPENMP
#pragma omp parallel for if (Parallel && n >= kParallelCutoff) schedule(static)
#endif
    for (long long p = 0; p < static_cast<long long>(pairs); ++p) {
      const std::size_t block = static_cast<std::size_t>(p) / half;
      const std::size_t j = static_cast<std::size_t>(p) % half;
      const std::size_t i = block * len + j;
      const complexd tw = sign < 0 ? w[j * stride] : std::conj(w[j * stride]);
      const complexd t = a[i + half] * tw;
      const complexd u = a[i];
      a[i] = u + t;
      a[i + half] = u - t;
    }
  }
}

}  // namespace

void set_threads(int n) {
  g_threads = n;
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void fft_radix2(std::vector<complexd>& a, int sign) { fft_impl<true>(a, sign); }

void fft_radix2_serial(std::vector<complexd>& a, int sign) { fft_impl<false>(a, sign); }

std::vector<complexd> dft_reference(const std::vector<complexd>& a, int sign) {
  const std::size_t n = a.size();
  std::vector<complexd> out(n);
  const double step = sign * 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    complexd s{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      // exp evaluated per term: slow and accurate, exactly what an oracle should be
      s += a[j] * std::polar(1.0, step * static_cast<double>(j * k % n));
    }
    out[k] = s;
  }
  return out;
}

void apply_multiplier(std::vector<complexd>& a, const std::vector<complexd>& m) {
  if (a.size() != m.size()) throw contract_error("apply_multiplier: size mismatch");
  const long long n = static_cast<long long>(a.size());
#ifdef _OPENMP
#pragma omp parallel for if (a.size() >= kParallelCutoff) schedule(static)
#endif
  for (long long i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] *= m[static_cast<std::size_t>(i)];
}

void apply_multiplier_serial(std::vector<complexd>& a, const std::vector<complexd>& m) {
  if (a.size() != m.size()) throw contract_error("apply_multiplier: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= m[i];
}

void phase_kick(std::vector<complexd>& w, double coeff, double offset) {
  const long long n = static_cast<long long>(w.size());
#ifdef _OPENMP
#pragma omp parallel for if (w.size() >= kParallelCutoff) schedule(static)
#endif
  for (long long i = 0; i < n; ++i) {
    auto& v = w[static_cast<std::size_t>(i)];
    v *= std::polar(1.0, coeff * (std::norm(v) - offset));
  }
}

void phase_kick_serial(std::vector<complexd>& w, double coeff, double offset) {
  for (auto& v : w) v *= std::polar(1.0, coeff * (std::norm(v) - offset));
}

void ansatz_phase_kick(std::vector<complexd>& u, double alpha, double coeff) {
  const long long n = static_cast<long long>(u.size());
  const double a2 = alpha * alpha;
#ifdef _OPENMP
#pragma omp parallel for if (u.size() >= kParallelCutoff) schedule(static)
#endif
  for (long long i = 0; i < n; ++i) {
    auto& v = u[static_cast<std::size_t>(i)];
    const complexd w = v + alpha;
    v = w * std::polar(1.0, coeff * (std::norm(w) - a2)) - alpha;
  }
}

void ansatz_phase_kick_serial(std::vector<complexd>& u, double alpha, double coeff) {
  const double a2 = alpha * alpha;
  for (auto& v : u) {
    const complexd w = v + alpha;
    v = w * std::polar(1.0, coeff * (std::norm(w) - a2)) - alpha;
  }
}

double max_abs(const std::vector<complexd>& a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

double sum_abs2(const std::vector<complexd>& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s;
}

double max_abs_diff(const std::vector<complexd>& a, const std::vector<complexd>& b) {
  if (a.size() != b.size()) throw contract_error("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace filament::kernels
