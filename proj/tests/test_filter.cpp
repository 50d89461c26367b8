#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "oracles.hpp"
#include "vigil/filter.hpp"
#include "vigil/rng.hpp"

using namespace vigil;

namespace {

std::vector<double> sine(double f, double fs, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / fs);
  return x;
}

std::vector<double> white(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = r.normal();
  return x;
}

// |H| from the expanded transfer-function polynomials.
double poly_magnitude(const FilterCoefficients& f, double hz) {
  const auto zinv = std::polar(1.0, -2.0 * std::numbers::pi * hz / f.fs);
  std::complex<double> num = 0.0, den = 0.0, zk = 1.0;
  for (std::size_t k = 0; k < std::max(f.a.size(), f.b.size()); ++k) {
    if (k < f.b.size()) num += f.b[k] * zk;
    if (k < f.a.size()) den += f.a[k] * zk;
    zk *= zinv;
  }
  return std::abs(num / den);
}

struct Case {
  int order;
  double lo, hi, fs;
};

const std::vector<Case> kDesigns{{4, 1, 75, 1000}, {4, 1, 75, 200},  {4, 1, 4, 200},  {4, 4, 8, 200},
                                 {4, 8, 14, 200},  {4, 14, 31, 200}, {4, 31, 50, 200}, {4, 1, 50, 200},
                                 {1, 20, 30, 200}, {2, 5, 60, 250},  {6, 2, 10, 500}};

}  // namespace

TEST(Butterworth, MinusThreeDbAtBothEdges) {
  for (const auto& c : kDesigns) {
    const auto f = design_butterworth_bandpass(c.order, c.lo, c.hi, c.fs);
    const double edge = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(frequency_response(f, c.lo)) / edge, 1.0, 1e-6) << c.lo << "-" << c.hi << "@" << c.fs;
    EXPECT_NEAR(std::abs(frequency_response(f, c.hi)) / edge, 1.0, 1e-6) << c.lo << "-" << c.hi << "@" << c.fs;
  }
}

TEST(Butterworth, ArtifactFilterAtOneKilohertz) {
  const auto f = design_butterworth_bandpass(4, 1.0, 75.0, 1000.0);
  EXPECT_EQ(f.poles.size(), 8u);
  EXPECT_EQ(f.a.size(), 9u);
  EXPECT_DOUBLE_EQ(f.a[0], 1.0);
  for (const auto& p : f.poles) EXPECT_LT(std::abs(p), 1.0);
}

TEST(Butterworth, ExpandedPolynomialsAgreeForWideBands) {
  // The expanded b/a form loses precision as the band narrows relative to fs,
  // which is why filtering runs on second-order sections.
  for (const auto& c : std::vector<Case>{{4, 1, 75, 200}, {4, 14, 31, 200}, {4, 31, 50, 200}, {2, 5, 60, 250}}) {
    const auto f = design_butterworth_bandpass(c.order, c.lo, c.hi, c.fs);
    for (double hz = 0.5; hz < c.fs / 2.0; hz += 0.5)
      EXPECT_NEAR(poly_magnitude(f, hz), std::abs(frequency_response(f, hz)), 1e-4) << hz;
  }
}

TEST(Butterworth, MatchesAnalogPrototypeOracle) {
  for (const auto& c : kDesigns) {
    const auto f = design_butterworth_bandpass(c.order, c.lo, c.hi, c.fs);
    EXPECT_EQ(f.poles.size(), static_cast<std::size_t>(2 * c.order));
    EXPECT_DOUBLE_EQ(f.a[0], 1.0);
    for (double hz = 0.25; hz < c.fs / 2.0; hz += c.fs / 173.0) {
      const double want = oracle::butterworth_bandpass_magnitude(c.order, c.lo, c.hi, c.fs, hz);
      EXPECT_NEAR(std::abs(frequency_response(f, hz)), want, 1e-9 + 1e-7 * want) << hz;
    }
  }
}

TEST(Butterworth, OrderOneUnityAtGeometricCentre) {
  const double fs = 1000.0;
  const double lo = 0.25 * fs / 2.0 * 0.9, hi = 0.25 * fs / 2.0 * 1.1;
  const auto f = design_butterworth_bandpass(1, lo, hi, fs);
  // Unity sits at the prewarped centre, close to the geometric one for a narrow band.
  const double centre = std::sqrt(lo * hi);
  EXPECT_NEAR(std::abs(frequency_response(f, centre)), 1.0, 1e-3);
  const double warped = fs / std::numbers::pi *
                        std::atan(std::sqrt(std::tan(std::numbers::pi * lo / fs) * std::tan(std::numbers::pi * hi / fs)));
  EXPECT_NEAR(std::abs(frequency_response(f, warped)), 1.0, 1e-12);
}

TEST(Butterworth, InvalidEdges) {
  EXPECT_THROW(design_butterworth_bandpass(4, 1.0, 100.0, 200.0), DomainError);
  EXPECT_THROW(design_butterworth_bandpass(4, 1.0, 120.0, 200.0), DomainError);
  EXPECT_THROW(design_butterworth_bandpass(4, 0.0, 10.0, 200.0), DomainError);
  EXPECT_THROW(design_butterworth_bandpass(4, 10.0, 10.0, 200.0), DomainError);
  EXPECT_THROW(design_butterworth_bandpass(0, 1.0, 10.0, 200.0), DomainError);
}

TEST(Butterworth, ImpulseResponseDecaysWithinSixtySeconds) {
  for (const auto& c : kDesigns) {
    const auto f = design_butterworth_bandpass(c.order, c.lo, c.hi, c.fs);
    const auto n = static_cast<std::size_t>(60.0 * c.fs);
    std::vector<double> x(n, 0.0);
    x[0] = 1.0;
    const auto h = lfilter(f, x);
    double peak = 0.0;
    for (double v : h) peak = std::max(peak, std::abs(v));
    double tail = 0.0;
    for (std::size_t t = n - static_cast<std::size_t>(c.fs); t < n; ++t) tail = std::max(tail, std::abs(h[t]));
    EXPECT_LT(tail, 1e-8 * peak) << c.lo << "-" << c.hi << "@" << c.fs;
  }
}

TEST(Filtfilt, InBandSinusoidZeroPhaseAndSquaredGain) {
  const double fs = 200.0;
  for (const auto& band : default_bands()) {
    const auto f = design_band(band, fs);
    const double hz = std::sqrt(band.lo * band.hi) * 1.07;
    const std::size_t n = 60 * 200;
    const auto x = sine(hz, fs, n);
    const auto y = filtfilt(f, x);
    ASSERT_EQ(y.size(), n);
    const std::size_t a = n / 3, b = 2 * n / 3;
    int best_lag = 0;
    double best = -1e300;
    for (int lag = -50; lag <= 50; ++lag) {
      double acc = 0.0;
      for (std::size_t t = a; t < b; ++t) acc += x[t] * y[static_cast<std::size_t>(static_cast<long>(t) + lag)];
      if (acc > best) best = acc, best_lag = lag;
    }
    EXPECT_EQ(best_lag, 0) << band.name;
    double xy = 0.0, xx = 0.0;
    for (std::size_t t = a; t < b; ++t) xy += x[t] * y[t], xx += x[t] * x[t];
    const double h2 = std::norm(frequency_response(f, hz));
    EXPECT_NEAR(xy / xx / h2, 1.0, 0.01) << band.name;
  }
}

TEST(Filtfilt, SixtyHertzThroughAlphaAttenuatedFortyDb) {
  const double fs = 200.0;
  const auto f = design_band(band_by_name("alpha"), fs);
  const std::size_t n = 30 * 200;
  const auto x = sine(60.0, fs, n);
  const auto y = filtfilt(f, x);
  double ey = 0.0, ex = 0.0;
  for (std::size_t t = n / 3; t < 2 * n / 3; ++t) ey += y[t] * y[t], ex += x[t] * x[t];
  const double db = 10.0 * std::log10(ey / ex);
  EXPECT_LE(db, -40.0);
  EXPECT_LE(20.0 * std::log10(std::norm(frequency_response(f, 60.0))), -40.0);
}

TEST(Filtfilt, ZeroInZeroOut) {
  const auto f = design_band(band_by_name("theta"), 200.0);
  const std::vector<double> x(1000, 0.0);
  for (double v : filtfilt(f, x)) EXPECT_EQ(v, 0.0);
}

TEST(Filtfilt, Linearity) {
  const auto f = design_band(artifact_band(), 200.0);
  const auto x = white(4000, 1), y = white(4000, 2);
  const double alpha = 2.5, beta = -0.75;
  std::vector<double> mix(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mix[i] = alpha * x[i] + beta * y[i];
  const auto fm = filtfilt(f, mix), fx = filtfilt(f, x), fy = filtfilt(f, y);
  double scale = 0.0;
  for (double v : fm) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(fm[i], alpha * fx[i] + beta * fy[i], 1e-9 * scale);
}

TEST(Filtfilt, TimeReversalSymmetryAwayFromEdges) {
  // The edge padding is not symmetric under reversal, so compare the part of
  // the output that the edges no longer influence.
  const double fs = 200.0;
  for (const auto& band : default_bands()) {
    const auto f = design_band(band, fs);
    double rmax = 0.0;
    for (const auto& p : f.poles) rmax = std::max(rmax, std::abs(p));
    const auto settle = static_cast<std::size_t>(4.0 * std::log(1e-12) / std::log(rmax));
    const std::size_t n = 3 * settle + 2000;
    const auto x = white(n, 9);
    auto xr = x;
    std::reverse(xr.begin(), xr.end());
    const auto y = filtfilt(f, x);
    auto yr = filtfilt(f, xr);
    std::reverse(yr.begin(), yr.end());
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    for (std::size_t t = settle; t + settle < n; ++t) ASSERT_NEAR(yr[t], y[t], 1e-9 * scale) << band.name << " t=" << t;
  }
}

TEST(Filtfilt, TooShortInputNamesMinimum) {
  const auto f = design_band(band_by_name("beta"), 200.0);
  EXPECT_EQ(f.pad_length(), 24u);
  const std::vector<double> x(24, 1.0);
  try {
    filtfilt(f, x);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("25"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(filtfilt(f, std::vector<double>(25, 1.0)));
}

TEST(Filtfilt, ConstantInputIsRemoved) {
  const auto f = design_band(band_by_name("total"), 200.0);
  const std::vector<double> x(4000, 3.0);
  for (double v : filtfilt(f, x)) EXPECT_NEAR(v, 0.0, 1e-9);
}

namespace {

Session noise_session(std::size_t seconds, int fs, std::uint64_t seed) {
  Session s;
  s.subject_id = "noise";
  s.fs = fs;
  s.channels = {"O1"};
  const auto x = white(seconds * static_cast<std::size_t>(fs), seed);
  s.data = Matrix<float>(1, x.size());
  std::transform(x.begin(), x.end(), s.data.row(0).begin(), [](double v) { return static_cast<float>(v); });
  s.perclos.assign(s.n_epochs(), 0.2f);
  return s;
}

}  // namespace

TEST(BandDecompose, DefaultBandsGiveSixOutputs) {
  const auto s = noise_session(16, 200, 4);
  const auto out = band_decompose(s, default_bands());
  ASSERT_EQ(out.size(), 6u);
  for (const auto* name : {"delta", "theta", "alpha", "beta", "gamma", "total"}) {
    ASSERT_TRUE(out.count(name)) << name;
    const auto& b = out.at(name);
    EXPECT_EQ(b.perclos, s.perclos);
    EXPECT_EQ(b.fs, s.fs);
    EXPECT_EQ(b.channels, s.channels);
    EXPECT_EQ(b.n_samples(), s.n_samples());
  }
  EXPECT_TRUE(band_decompose(s, {}).empty());
}

TEST(BandDecompose, AppliesArtifactFilterFirst) {
  const auto s = noise_session(16, 200, 5);
  const auto out = band_decompose(s, {band_by_name("alpha")});
  const auto manual = filter_session(filter_session(s, design_band(artifact_band(), 200)), design_band(band_by_name("alpha"), 200));
  EXPECT_EQ(out.at("alpha").data, manual.data);
}

TEST(BandDecompose, WhiteNoiseDeltaPowerBelowFiveHertz) {
  const auto s = noise_session(56, 200, 6);
  const auto out = band_decompose(s, {band_by_name("delta")});
  const auto y = out.at("delta").data.row(0);
  const std::size_t n = y.size();
  double total = 0.0;
  for (float v : y) total += static_cast<double>(v) * v;
  total *= static_cast<double>(n);  // Parseval: sum_k |X_k|^2 = n * sum_t x_t^2
  const double df = 200.0 / static_cast<double>(n);
  double low = oracle::dft_power(y, 0);
  for (std::size_t k = 1; static_cast<double>(k) * df <= 5.0; ++k) low += 2.0 * oracle::dft_power(y, k);
  EXPECT_GE(low / total, 0.90);
}

TEST(BandDecompose, RejectsBandAboveNyquist) {
  const auto s = noise_session(16, 200, 7);
  EXPECT_THROW(band_decompose(s, {{"hf", 80.0, 120.0}}), DomainError);
  EXPECT_THROW(band_by_name("kappa"), DomainError);
}
