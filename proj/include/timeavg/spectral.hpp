// Spectral helpers for sampled real signals, backed by FFTW.

#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace timeavg {

enum class Window { rectangular, hann };

struct SpectralOptions {
  Window window = Window::rectangular;
  /// Only bins strictly below this angular frequency are searched.
  double max_frequency = std::numeric_limits<double>::infinity();
};

inline constexpr std::size_t kMinSpectralSamples = 64;

namespace detail {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s *p) const { fftw_destroy_plan(p); }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

struct FftwFree {
  void operator()(void *p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto *p = static_cast<T *>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr)
    throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

/// Forward real-to-complex transform; returns the n/2 + 1 non-negative bins.
inline std::vector<std::complex<double>> rfft(const std::vector<double> &x) {
  const std::size_t n = x.size();
  auto in = fftw_buffer<double>(n);
  auto out = fftw_buffer<fftw_complex>(n / 2 + 1);
  FftwPlan plan(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.get());
  std::vector<std::complex<double>> bins(n / 2 + 1);
  for (std::size_t k = 0; k < bins.size(); ++k)
    bins[k] = {out[k][0], out[k][1]};
  return bins;
}

/// Inverse of rfft for a length-n signal (normalized).
inline std::vector<double> irfft(const std::vector<std::complex<double>> &bins, std::size_t n) {
  auto in = fftw_buffer<fftw_complex>(n / 2 + 1);
  auto out = fftw_buffer<double>(n);
  FftwPlan plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  for (std::size_t k = 0; k < bins.size(); ++k) {
    in[k][0] = bins[k].real();
    in[k][1] = bins[k].imag();
  }
  fftw_execute(plan.get());
  std::vector<double> x(out.get(), out.get() + n);
  for (auto &v : x)
    v /= static_cast<double>(n);
  return x;
}

} // namespace detail

/// Bin spacing 2 pi / (N dt) in rad per unit time.
inline double frequency_resolution(std::size_t samples, double dt) {
  return 2.0 * std::numbers::pi / (static_cast<double>(samples) * dt);
}

/// Angular frequency of the strongest non-DC component. The mean is removed
/// first; the peak bin is refined by a parabola through the log-magnitudes of
/// it and its neighbours. Returns 0 for a constant signal.
inline double dominant_frequency(std::span<const double> signal, double dt, const SpectralOptions &opts = {}) {
  const std::size_t n = signal.size();
  if (n < kMinSpectralSamples)
    throw std::invalid_argument("dominant_frequency: need at least 64 samples");
  if (!(dt > 0.0))
    throw std::invalid_argument("dominant_frequency: dt must be positive");

  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = signal[i] - mean;
    scale = std::max(scale, std::abs(signal[i]));
  }
  if (opts.window == Window::hann)
    for (std::size_t i = 0; i < n; ++i)
      x[i] *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));

  const auto bins = detail::rfft(x);
  const double df = frequency_resolution(n, dt);
  std::size_t peak = 0;
  double peak_mag = 0.0;
  for (std::size_t k = 1; k < bins.size(); ++k) {
    if (!(static_cast<double>(k) * df < opts.max_frequency))
      break;
    const double mag = std::abs(bins[k]);
    if (mag > peak_mag) {
      peak_mag = mag;
      peak = k;
    }
  }
  // Nothing above rounding noise: constant signal.
  if (peak == 0 || peak_mag <= 1e-13 * std::max(scale, 1e-300) * static_cast<double>(n))
    return 0.0;

  double offset = 0.0;
  if (peak + 1 < bins.size()) {
    const double lo = std::abs(bins[peak - 1]);
    const double hi = std::abs(bins[peak + 1]);
    if (lo > 0.0 && hi > 0.0) {
      const double a = std::log(lo);
      const double b = std::log(peak_mag);
      const double c = std::log(hi);
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0)
        offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
  }
  return (static_cast<double>(peak) + offset) * df;
}

/// Ideal low-pass of a sampled signal: components with angular frequency
/// >= cutoff are removed. The signal is mirror-extended before the transform
/// so the implied periodic continuation has no jump at the ends.
inline std::vector<double> lowpass_signal(std::span<const double> signal, double dt, double cutoff) {
  const std::size_t n = signal.size();
  if (n < 2)
    return {signal.begin(), signal.end()};
  if (!(dt > 0.0) || !(cutoff > 0.0))
    throw std::invalid_argument("lowpass_signal: dt and cutoff must be positive");
  const std::size_t m = 2 * n - 2;
  std::vector<double> ext(m);
  for (std::size_t i = 0; i < n; ++i)
    ext[i] = signal[i];
  for (std::size_t i = 1; i + 1 < n; ++i)
    ext[m - i] = signal[i];
  auto bins = detail::rfft(ext);
  const double df = frequency_resolution(m, dt);
  for (std::size_t k = 0; k < bins.size(); ++k)
    if (!(static_cast<double>(k) * df < cutoff))
      bins[k] = 0.0;
  auto filtered = detail::irfft(bins, m);
  filtered.resize(n);
  return filtered;
}

} // namespace timeavg
