#pragma once

// Butterworth band-pass design and forward-backward (zero-phase) filtering.
//
// An order-N analog low-pass prototype is mapped to a band-pass (2N poles)
// and then to the z-plane with the bilinear transform, prewarping both band
// edges so the -3 dB points land exactly on the requested frequencies. So a
// "4th-order band-pass" here has 8 poles, the usual toolbox convention.
//
// Filtering runs as a cascade of second-order sections; the expanded
// transfer-function polynomials (b, a) are kept for inspection and export.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/signal.hpp"

namespace vigil {

struct BandSpec {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const BandSpec&) const = default;
};

inline constexpr int kDefaultFilterOrder = 4;

/// Artifact removal band applied to raw data before any band split.
inline const BandSpec& artifact_band() {
  static const BandSpec b{"artifact", 1.0, 75.0};
  return b;
}

/// delta, theta, alpha, beta, gamma, and the 1-50 Hz total band.
inline const std::vector<BandSpec>& default_bands() {
  static const std::vector<BandSpec> bands{
      {"delta", 1.0, 4.0},  {"theta", 4.0, 8.0},   {"alpha", 8.0, 14.0},
      {"beta", 14.0, 31.0}, {"gamma", 31.0, 50.0}, {"total", 1.0, 50.0}};
  return bands;
}

/// The five physiological rhythms, without the total band.
inline std::vector<BandSpec> rhythm_bands() {
  auto b = default_bands();
  b.pop_back();
  return b;
}

inline const BandSpec& band_by_name(const std::string& name) {
  for (const auto& b : default_bands())
    if (b.name == name) return b;
  throw DomainError("unknown band '" + name + "'");
}

inline void check_band(double lo, double hi, double fs) {
  if (!(fs > 0.0)) throw DomainError("sampling rate must be positive");
  if (!(lo > 0.0 && lo < hi && hi < fs / 2.0))
    throw DomainError("band edges must satisfy 0 < lo < hi < fs/2 (lo=" + std::to_string(lo) +
                      ", hi=" + std::to_string(hi) + ", fs=" + std::to_string(fs) + ")");
}

/// Direct-form-II-transposed biquad, a[0] == 1.
struct SecondOrderSection {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};
};

struct FilterCoefficients {
  std::vector<double> b;
  std::vector<double> a;  // a[0] == 1
  std::vector<SecondOrderSection> sections;
  std::vector<std::complex<double>> zeros;
  std::vector<std::complex<double>> poles;
  double gain = 1.0;

  int order = 0;  // prototype order; the band-pass has 2 * order poles
  double lo = 0.0;
  double hi = 0.0;
  double fs = 0.0;

  std::size_t n_taps() const noexcept { return std::max(a.size(), b.size()); }
  /// Samples of odd reflection added on each side by filtfilt.
  std::size_t pad_length() const noexcept { return 3 * (n_taps() - 1); }
};

namespace detail {

using cplx = std::complex<double>;

inline std::vector<double> poly_from_roots(std::span<const cplx> roots) {
  std::vector<cplx> c{1.0};
  for (const auto& r : roots) {
    c.push_back(0.0);
    for (std::size_t i = c.size() - 1; i > 0; --i) c[i] -= r * c[i - 1];
  }
  std::vector<double> out(c.size());
  std::transform(c.begin(), c.end(), out.begin(), [](cplx v) { return v.real(); });
  return out;
}

/// Pairs conjugate poles (and leftover real poles) into biquads. Each section
/// gets one zero at z=+1 and one at z=-1, which is where all band-pass zeros sit.
inline std::vector<SecondOrderSection> to_sections(std::vector<cplx> poles, double gain) {
  std::vector<cplx> complex_upper;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) <= 1e-14 * std::max(1.0, std::abs(p)))
      reals.push_back(p.real());
    else if (p.imag() > 0)
      complex_upper.push_back(p);
  }
  std::sort(complex_upper.begin(), complex_upper.end(),
            [](cplx x, cplx y) { return std::abs(x) < std::abs(y); });
  std::sort(reals.begin(), reals.end());

  std::vector<SecondOrderSection> secs;
  for (const auto& p : complex_upper) {
    SecondOrderSection s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -2.0 * p.real(), std::norm(p)};
    secs.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    SecondOrderSection s;
    s.b = {1.0, 0.0, -1.0};
    s.a = {1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]};
    secs.push_back(s);
  }
  if (!secs.empty())
    for (auto& c : secs.front().b) c *= gain;
  return secs;
}

/// Steady-state DF2T state of a section for a unit step input.
inline std::array<double, 2> section_step_state(const SecondOrderSection& s) {
  const double dc = (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
  return {dc - s.b[0], s.b[2] - s.a[2] * dc};
}

inline double section_dc_gain(const SecondOrderSection& s) {
  return (s.b[0] + s.b[1] + s.b[2]) / (1.0 + s.a[1] + s.a[2]);
}

/// Runs the cascade in place. `init_scale` multiplies the step-steady-state
/// initial conditions (0 gives zero initial state).
inline void run_sections(std::span<const SecondOrderSection> secs, std::span<double> x, double init_scale) {
  double upstream_dc = 1.0;
  for (const auto& s : secs) {
    auto zi = section_step_state(s);
    double z1 = zi[0] * init_scale * upstream_dc;
    double z2 = zi[1] * init_scale * upstream_dc;
    upstream_dc *= section_dc_gain(s);
    const double b0 = s.b[0], b1 = s.b[1], b2 = s.b[2], a1 = s.a[1], a2 = s.a[2];
    for (double& v : x) {
      const double in = v;
      const double y = b0 * in + z1;
      z1 = b1 * in - a1 * y + z2;
      z2 = b2 * in - a2 * y;
      v = y;
    }
  }
}

}  // namespace detail

inline FilterCoefficients design_butterworth_bandpass(int order, double lo, double hi, double fs) {
  using detail::cplx;
  if (order < 1) throw DomainError("filter order must be >= 1");
  check_band(lo, hi, fs);

  const double fs2 = 2.0 * fs;
  const double w_lo = fs2 * std::tan(std::numbers::pi * lo / fs);
  const double w_hi = fs2 * std::tan(std::numbers::pi * hi / fs);
  const double bw = w_hi - w_lo;
  const double w0 = std::sqrt(w_lo * w_hi);

  // Analog band-pass: each prototype pole p splits into the roots of
  // s^2 - p*bw*s + w0^2; `order` zeros sit at s = 0.
  std::vector<cplx> analog_poles;
  for (int m = -order + 1; m < order; m += 2) {
    const cplx p = -std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * order)));
    const cplx half = p * bw / 2.0;
    const cplx disc = std::sqrt(half * half - w0 * w0);
    analog_poles.push_back(half + disc);
    analog_poles.push_back(half - disc);
  }
  double analog_gain = std::pow(bw, order);

  FilterCoefficients f;
  f.order = order;
  f.lo = lo;
  f.hi = hi;
  f.fs = fs;

  // Bilinear transform. Analog zeros at 0 map to z = +1; the `order` zeros
  // at infinity map to z = -1.
  cplx num(1.0), den(1.0);
  for (int i = 0; i < order; ++i) num *= cplx(fs2);
  for (const auto& p : analog_poles) {
    f.poles.push_back((fs2 + p) / (fs2 - p));
    den *= (fs2 - p);
  }
  for (int i = 0; i < order; ++i) f.zeros.emplace_back(1.0, 0.0);
  for (int i = 0; i < order; ++i) f.zeros.emplace_back(-1.0, 0.0);
  f.gain = analog_gain * (num / den).real();

  f.b = detail::poly_from_roots(f.zeros);
  for (auto& c : f.b) c *= f.gain;
  f.a = detail::poly_from_roots(f.poles);
  f.sections = detail::to_sections(f.poles, f.gain);
  return f;
}

inline FilterCoefficients design_band(const BandSpec& band, double fs, int order = kDefaultFilterOrder) {
  return design_butterworth_bandpass(order, band.lo, band.hi, fs);
}

/// H(e^{j 2 pi f / fs}) from the pole/zero form.
inline std::complex<double> frequency_response(const FilterCoefficients& f, double freq_hz) {
  const auto z = std::polar(1.0, 2.0 * std::numbers::pi * freq_hz / f.fs);
  std::complex<double> h = f.gain;
  for (const auto& q : f.zeros) h *= (z - q);
  for (const auto& p : f.poles) h /= (z - p);
  return h;
}

/// Single causal pass with zero initial state.
inline std::vector<double> lfilter(const FilterCoefficients& f, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  detail::run_sections(f.sections, y, 0.0);
  return y;
}

/// Forward-backward filtering. The input is extended at both ends by odd
/// reflection of pad_length() samples and each pass starts from the
/// step-response steady state scaled to its first sample.
inline std::vector<double> filtfilt(const FilterCoefficients& f, std::span<const double> x) {
  const std::size_t pad = f.pad_length();
  if (x.size() <= pad)
    throw DomainError("filtfilt: input of " + std::to_string(x.size()) +
                      " samples too short, need at least " + std::to_string(pad + 1));
  const std::size_t n = x.size();
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[n + pad + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  detail::run_sections(f.sections, ext, ext.front());
  std::reverse(ext.begin(), ext.end());
  detail::run_sections(f.sections, ext, ext.front());
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

/// Applies filtfilt to every channel.
inline Session filter_session(const Session& s, const FilterCoefficients& f) {
  Session out = s;
  std::vector<double> buf(s.n_samples());
  for (std::size_t ch = 0; ch < s.n_channels(); ++ch) {
    auto row = s.data.row(ch);
    std::copy(row.begin(), row.end(), buf.begin());
    const auto y = filtfilt(f, buf);
    std::transform(y.begin(), y.end(), out.data.row(ch).begin(), [](double v) { return static_cast<float>(v); });
  }
  return out;
}

/// Removes artifacts with the 1-75 Hz filter, then filters the cleaned signal
/// through each requested band. Outputs share labels, fs and perclos.
inline std::map<std::string, Session> band_decompose(const Session& s, const std::vector<BandSpec>& bands,
                                                     int order = kDefaultFilterOrder) {
  std::map<std::string, Session> out;
  if (bands.empty()) return out;
  validate(s);
  for (const auto& b : bands) check_band(b.lo, b.hi, s.fs);
  const Session cleaned = filter_session(s, design_band(artifact_band(), s.fs, order));
  for (const auto& b : bands) out.emplace(b.name, filter_session(cleaned, design_band(b, s.fs, order)));
  return out;
}

}  // namespace vigil
