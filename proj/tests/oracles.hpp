#pragma once

// Reference computations used by the tests. Written directly from the
// textbook definitions, without sharing code with the library.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// Periodogram power |X_k|^2 of bin k via a direct DFT sum.
template <typename T>
double dft_power(std::span<const T> x, std::size_t k) {
  const double n = static_cast<double>(x.size());
  double re = 0.0, im = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) * static_cast<double>(t) / n;
    re += static_cast<double>(x[t]) * std::cos(w);
    im += static_cast<double>(x[t]) * std::sin(w);
  }
  return re * re + im * im;
}

/// Sum of periodogram power over bins whose frequency lies in [lo, hi] Hz.
template <typename T>
double band_power(std::span<const T> x, double fs, double lo, double hi) {
  const double df = fs / static_cast<double>(x.size());
  double total = 0.0;
  for (std::size_t k = 0; k <= x.size() / 2; ++k) {
    const double f = static_cast<double>(k) * df;
    if (f >= lo && f <= hi) total += dft_power(x, k);
  }
  return total;
}

/// Magnitude of an analog Butterworth band-pass built from an order-n
/// low-pass prototype, evaluated at the prewarped digital frequency.
inline double butterworth_bandpass_magnitude(int order, double lo, double hi, double fs, double f) {
  auto warp = [&](double hz) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); };
  const double w1 = warp(lo), w2 = warp(hi), w = warp(f);
  const double bw = w2 - w1, w0sq = w1 * w2;
  // Low-pass prototype frequency seen through s -> (s^2 + w0^2) / (s * bw).
  const double omega = std::abs((w * w - w0sq) / (w * bw));
  return 1.0 / std::sqrt(1.0 + std::pow(omega, 2 * order));
}

/// Per-index 1D-LBP code straight from the operator definition.
template <typename T>
unsigned naive_lbp_code(const std::vector<T>& x, std::size_t i, int p) {
  unsigned code = 0;
  const int h = p / 2;
  for (int r = 0; r < h; ++r) {
    const auto left = x[i + static_cast<std::size_t>(r) - static_cast<std::size_t>(h)];
    const auto right = x[i + static_cast<std::size_t>(r) + 1];
    if (left - x[i] >= 0) code += 1u << r;
    if (right - x[i] >= 0) code += 1u << (r + h);
  }
  return code;
}

template <typename T>
std::vector<std::size_t> naive_lbp_counts(const std::vector<T>& x, int p) {
  std::vector<std::size_t> counts(std::size_t{1} << p, 0);
  const std::size_t h = static_cast<std::size_t>(p / 2);
  for (std::size_t i = h; i + h < x.size(); ++i) ++counts[naive_lbp_code(x, i, p)];
  return counts;
}

}  // namespace oracle
