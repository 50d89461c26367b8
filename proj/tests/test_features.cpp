#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "vigil/features.hpp"
#include "vigil/rng.hpp"

using namespace vigil;

namespace {

// Integer-valued samples so that shifts and scalings stay exact.
std::vector<double> random_window(Rng& rng, std::size_t n, int levels) {
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(rng.below(static_cast<std::uint64_t>(levels)));
  return x;
}

Epoch random_epoch(std::size_t channels, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  Epoch e;
  e.session_id = "s";
  e.samples = Matrix<float>(channels, len);
  for (auto& v : e.samples.flat()) v = static_cast<float>(rng.normal());
  return e;
}

}  // namespace

TEST(LbpCode, Examples) {
  EXPECT_EQ(lbp_code(std::vector<double>{5, 5, 5}, 1, 2), 3u);
  EXPECT_EQ(lbp_code(std::vector<double>{1, 3, 2}, 1, 2), 0u);
  EXPECT_EQ(lbp_code(std::vector<double>{0, 1, 2, 3, 4}, 2, 4), 12u);
}

TEST(LbpCode, IndexOutsideInteriorThrows) {
  const std::vector<double> x{0, 1, 2, 3, 4};
  EXPECT_THROW(lbp_code(x, 0, 2), DomainError);
  EXPECT_THROW(lbp_code(x, 4, 2), DomainError);
  EXPECT_THROW(lbp_code(x, 1, 4), DomainError);
  EXPECT_THROW(lbp_code(x, 2, 3), DomainError);
  EXPECT_THROW(lbp_code(x, 2, 18), DomainError);
}

TEST(LbpCode, MatchesNaiveOracle) {
  Rng rng(2024);
  std::size_t checked = 0;
  for (int p : {2, 4, 6, 8}) {
    for (int trial = 0; trial < 400; ++trial) {
      const auto x = random_window(rng, 20 + rng.below(40), trial % 2 ? 4 : 1000);
      for (std::size_t i = static_cast<std::size_t>(p / 2); i + static_cast<std::size_t>(p / 2) < x.size(); ++i) {
        ASSERT_EQ(lbp_code(x, i, p), oracle::naive_lbp_code(x, i, p));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(LbpCode, InvariantUnderShiftAndPositiveScale) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 * static_cast<int>(1 + rng.below(4));
    const auto x = random_window(rng, 40, 6);
    auto shifted = x, scaled = x;
    for (auto& v : shifted) v += 37.0;
    for (auto& v : scaled) v *= 3.0;
    for (std::size_t i = static_cast<std::size_t>(p / 2); i + static_cast<std::size_t>(p / 2) < x.size(); ++i) {
      EXPECT_EQ(lbp_code(x, i, p), lbp_code(shifted, i, p));
      EXPECT_EQ(lbp_code(x, i, p), lbp_code(scaled, i, p));
    }
  }
}

TEST(LbpHistogram, ConstantAndMonotone) {
  const std::vector<double> flat(100, 2.5);
  EXPECT_EQ(lbp_histogram(flat, 2), (std::vector<double>{0, 0, 0, 1}));
  for (int p : {4, 6}) {
    const auto h = lbp_histogram(flat, p);
    EXPECT_DOUBLE_EQ(h.back(), 1.0);
  }
  std::vector<double> up(100);
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = static_cast<double>(i) * 0.3;
  EXPECT_EQ(lbp_histogram(up, 2), (std::vector<double>{0, 0, 1, 0}));
}

TEST(LbpHistogram, EqualsNaiveRecountOnRandomWindows) {
  Rng rng(77);
  int windows = 0;
  for (int p : {2, 4, 6}) {
    for (int trial = 0; trial < 400; ++trial) {
      const std::size_t n = static_cast<std::size_t>(p) + 1 + rng.below(300);
      std::vector<float> x(n);
      for (auto& v : x) v = trial % 3 ? static_cast<float>(rng.normal()) : static_cast<float>(rng.below(3));
      const auto fast = lbp_counts(std::span<const float>(x), p);
      const auto slow = oracle::naive_lbp_counts(x, p);
      ASSERT_EQ(fast.size(), slow.size());
      for (std::size_t k = 0; k < fast.size(); ++k) ASSERT_EQ(fast[k], slow[k]) << "p=" << p << " code " << k;
      const auto h = lbp_histogram(std::span<const float>(x), p);
      double sum = 0.0;
      for (double v : h) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      ++windows;
    }
  }
  EXPECT_GE(windows, 1000);
}

TEST(LbpHistogram, TooShortWindowThrows) {
  EXPECT_THROW(lbp_histogram(std::vector<double>{1, 2}, 2), DomainError);
  EXPECT_NO_THROW(lbp_histogram(std::vector<double>{1, 2, 3}, 2));
  EXPECT_THROW(lbp_histogram(std::vector<double>{1, 2, 3, 4}, 4), DomainError);
}

TEST(LbpFeatures, DimensionsForDefaultMontage) {
  const auto e = random_epoch(17, 1600, 1);
  EXPECT_EQ(extract_lbp_features(e, 2).dimension(), 68u);
  EXPECT_EQ(extract_lbp_features(e, 4).dimension(), 272u);
  for (int p : {2, 4, 6}) EXPECT_EQ(extract_lbp_features(e, p).dimension(), (std::size_t{1} << p) * 17);
}

TEST(LbpFeatures, PerChannelBlocksSumToOne) {
  const auto e = random_epoch(3, 400, 2);
  const auto fv = extract_lbp_features(e, 4);
  ASSERT_EQ(fv.dimension(), 48u);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 16; ++k) sum += fv.values[ch * 16 + k];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const auto one = random_epoch(1, 400, 3);
  const auto fv1 = extract_lbp_features(one, 2);
  EXPECT_EQ(fv1.dimension(), 4u);
  EXPECT_NEAR(fv1.values[0] + fv1.values[1] + fv1.values[2] + fv1.values[3], 1.0, 1e-12);
}

TEST(LbpFeatures, ChannelOrderIsPreserved) {
  auto e = random_epoch(2, 200, 4);
  for (std::size_t t = 0; t < 200; ++t) e.samples(0, t) = 1.0f;  // constant first channel
  const auto fv = extract_lbp_features(e, 2);
  EXPECT_EQ(fv.values[3], 1.0);
  EXPECT_LT(fv.values[7], 1.0);
}

TEST(LbpFeatures, BandConcatenation) {
  const auto a = random_epoch(17, 800, 5), b = random_epoch(17, 800, 6);
  const auto fv = extract_lbp_features(std::vector<const Epoch*>{&a, &b}, 2);
  ASSERT_EQ(fv.dimension(), 136u);
  const auto fa = extract_lbp_features(a, 2), fb = extract_lbp_features(b, 2);
  EXPECT_TRUE(std::equal(fa.values.begin(), fa.values.end(), fv.values.begin()));
  EXPECT_TRUE(std::equal(fb.values.begin(), fb.values.end(), fv.values.begin() + 68));
}

TEST(DifferentialEntropy, GaussianClosedForm) {
  Rng rng(8);
  std::vector<double> x(200000);
  for (auto& v : x) v = rng.normal();
  const double want = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(want, 1.4189, 1e-4);
  EXPECT_NEAR(differential_entropy(std::span<const double>(x)), want, 0.05);
}

TEST(DifferentialEntropy, AmplitudeDoublingAddsLnTwo) {
  Rng rng(9);
  std::vector<double> x(1600);
  for (auto& v : x) v = rng.normal() * 3.0 + 1.0;
  auto doubled = x;
  for (auto& v : doubled) v *= 2.0;
  EXPECT_NEAR(differential_entropy(std::span<const double>(doubled)) - differential_entropy(std::span<const double>(x)),
              std::log(2.0), 1e-9);
}

TEST(DifferentialEntropy, ShiftInvariant) {
  Rng rng(10);
  std::vector<double> x(1600);
  for (auto& v : x) v = rng.normal();
  auto shifted = x;
  for (auto& v : shifted) v += 250.0;
  EXPECT_NEAR(differential_entropy(std::span<const double>(shifted)), differential_entropy(std::span<const double>(x)),
              1e-9);
}

TEST(DifferentialEntropy, UnbiasedVariance) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const double var = 5.0 / 3.0;  // sum of squared deviations 5, n - 1 = 3
  EXPECT_NEAR(differential_entropy(std::span<const double>(x)),
              0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var), 1e-14);
}

TEST(DifferentialEntropy, ConstantChannelIsFlooredWithWarning) {
  const std::vector<double> x(100, 4.0);
  ScopedWarningCapture cap;
  EXPECT_DOUBLE_EQ(differential_entropy(std::span<const double>(x)),
                   0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * 1e-12));
  EXPECT_EQ(cap.messages().size(), 1u);
}

TEST(DeFeatures, BandMajorLayoutAndDimension) {
  std::map<std::string, Epoch> bands;
  for (std::size_t b = 0; b < de_band_names().size(); ++b) {
    auto e = random_epoch(17, 1600, 20 + b);
    for (auto& v : e.samples.flat()) v *= static_cast<float>(b + 1);
    bands.emplace(de_band_names()[b], std::move(e));
  }
  const auto fv = extract_de_features(bands);
  EXPECT_EQ(fv.kind, FeatureKind::De);
  ASSERT_EQ(fv.dimension(), 85u);
  for (std::size_t b = 0; b < 5; ++b)
    for (std::size_t ch = 0; ch < 17; ++ch)
      EXPECT_DOUBLE_EQ(fv.values[b * 17 + ch],
                       differential_entropy(std::as_const(bands.at(de_band_names()[b]).samples).row(ch)));
  bands.erase("gamma");
  EXPECT_THROW(extract_de_features(bands), DomainError);
}

TEST(DeFeatures, MisalignedEpochsRejected) {
  std::map<std::string, Epoch> bands;
  for (std::size_t b = 0; b < 5; ++b) {
    auto e = random_epoch(2, 100, b);
    e.index = b == 3 ? 7 : 0;
    bands.emplace(de_band_names()[b], std::move(e));
  }
  EXPECT_THROW(extract_de_features(bands), DomainError);
}
