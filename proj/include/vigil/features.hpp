#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/signal.hpp"

namespace vigil {

enum class FeatureKind { Lbp, De };

inline std::string to_string(FeatureKind k) { return k == FeatureKind::Lbp ? "lbp" : "de"; }

/// Neighbour count for the 1D-LBP operator: even, 2..16.
struct LbpParams {
  int p = 2;

  explicit LbpParams(int neighbours = 2) : p(neighbours) {
    if (p < 2 || p > 16 || p % 2 != 0)
      throw DomainError("LBP neighbour count must be even and within [2, 16], got " + std::to_string(p));
  }
  std::size_t bins() const noexcept { return std::size_t{1} << p; }
  std::size_t half() const noexcept { return static_cast<std::size_t>(p / 2); }
};

struct FeatureVector {
  std::vector<double> values;
  FeatureKind kind = FeatureKind::Lbp;

  std::size_t dimension() const noexcept { return values.size(); }
};

/// 1D-LBP code of sample i. Neighbour r on the left sets bit r, neighbour r
/// on the right sets bit r + P/2; a bit is set when the neighbour is >= the centre.
template <typename T>
std::uint32_t lbp_code(std::span<const T> x, std::size_t i, int p) {
  const LbpParams params(p);
  const std::size_t h = params.half();
  if (i < h || i + h >= x.size())
    throw DomainError("lbp_code: index " + std::to_string(i) + " lacks a full neighbourhood of " +
                      std::to_string(p) + " samples in a window of " + std::to_string(x.size()));
  std::uint32_t code = 0;
  const T c = x[i];
  for (std::size_t r = 0; r < h; ++r) {
    if (x[i + r - h] >= c) code |= 1u << r;
    if (x[i + r + 1] >= c) code |= 1u << (r + h);
  }
  return code;
}

template <typename T>
std::uint32_t lbp_code(const std::vector<T>& x, std::size_t i, int p) {
  return lbp_code(std::span<const T>(x), i, p);
}

/// Raw code counts over all interior samples.
template <typename T>
std::vector<std::uint64_t> lbp_counts(std::span<const T> x, int p) {
  const LbpParams params(p);
  const std::size_t h = params.half();
  if (x.size() <= static_cast<std::size_t>(p))
    throw DomainError("lbp_histogram: window of " + std::to_string(x.size()) + " samples needs more than " +
                      std::to_string(p));
  std::vector<std::uint64_t> counts(params.bins(), 0);
  const T* data = x.data();
  const std::size_t end = x.size() - h;
  for (std::size_t i = h; i < end; ++i) {
    const T c = data[i];
    const T* left = data + i - h;
    const T* right = data + i + 1;
    std::uint32_t code = 0;
    for (std::size_t r = 0; r < h; ++r) {
      code |= static_cast<std::uint32_t>(left[r] >= c) << r;
      code |= static_cast<std::uint32_t>(right[r] >= c) << (r + h);
    }
    ++counts[code];
  }
  return counts;
}

/// Relative frequency of each of the 2^P codes; sums to 1.
template <typename T>
std::vector<double> lbp_histogram(std::span<const T> x, int p) {
  const auto counts = lbp_counts(x, p);
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  std::vector<double> hist(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    hist[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  return hist;
}

template <typename T>
std::vector<double> lbp_histogram(const std::vector<T>& x, int p) {
  return lbp_histogram(std::span<const T>(x), p);
}

/// Per-channel histograms concatenated in channel order: 2^P * n_channels values.
inline FeatureVector extract_lbp_features(const Epoch& epoch, int p) {
  FeatureVector fv;
  fv.kind = FeatureKind::Lbp;
  fv.values.reserve(LbpParams(p).bins() * epoch.samples.rows());
  for (std::size_t ch = 0; ch < epoch.samples.rows(); ++ch) {
    const auto h = lbp_histogram(epoch.samples.row(ch), p);
    fv.values.insert(fv.values.end(), h.begin(), h.end());
  }
  return fv;
}

/// LBP blocks of several band-filtered copies of one epoch, concatenated in
/// the order given.
inline FeatureVector extract_lbp_features(const std::vector<const Epoch*>& band_epochs, int p) {
  FeatureVector fv;
  fv.kind = FeatureKind::Lbp;
  for (const Epoch* e : band_epochs) {
    auto part = extract_lbp_features(*e, p);
    fv.values.insert(fv.values.end(), part.values.begin(), part.values.end());
  }
  return fv;
}

inline constexpr double kDeVarianceFloor = 1e-12;

/// Gaussian differential entropy 0.5 * ln(2 pi e var) with the unbiased
/// variance, floored at 1e-12.
template <typename T>
double differential_entropy(std::span<const T> x) {
  if (x.size() < 2) throw DomainError("differential_entropy: need at least 2 samples");
  double mean = 0.0;
  for (T v : x) mean += static_cast<double>(v);
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (T v : x) {
    const double d = static_cast<double>(v) - mean;
    ss += d * d;
  }
  double var = ss / static_cast<double>(x.size() - 1);
  if (var < kDeVarianceFloor) {
    warn("differential_entropy: variance " + std::to_string(var) + " floored at 1e-12");
    var = kDeVarianceFloor;
  }
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * var);
}

/// Names of the bands DE is computed over, in feature order.
inline const std::vector<std::string>& de_band_names() {
  static const std::vector<std::string> names{"delta", "theta", "alpha", "beta", "gamma"};
  return names;
}

/// DE of every channel in every band: band-major, channel-minor.
/// `band_epochs` must hold the same epoch filtered through each named band.
inline FeatureVector extract_de_features(const std::map<std::string, Epoch>& band_epochs,
                                         const std::vector<std::string>& bands = de_band_names()) {
  FeatureVector fv;
  fv.kind = FeatureKind::De;
  const Epoch* first = nullptr;
  for (const auto& name : bands) {
    const auto it = band_epochs.find(name);
    if (it == band_epochs.end()) throw DomainError("extract_de_features: band '" + name + "' missing");
    const Epoch& e = it->second;
    if (first && (e.index != first->index || e.session_id != first->session_id ||
                  e.samples.rows() != first->samples.rows()))
      throw DomainError("extract_de_features: band epochs are not aligned");
    if (!first) first = &e;
    for (std::size_t ch = 0; ch < e.samples.rows(); ++ch)
      fv.values.push_back(differential_entropy(e.samples.row(ch)));
  }
  return fv;
}

}  // namespace vigil
