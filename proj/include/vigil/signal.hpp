#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/common.hpp"

namespace vigil {

/// Vigilance classes, ordered Awake < Tired < Drowsy.
enum class VigilanceClass : std::uint8_t { Awake = 0, Tired = 1, Drowsy = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<VigilanceClass, kNumClasses> kAllClasses{
    VigilanceClass::Awake, VigilanceClass::Tired, VigilanceClass::Drowsy};

constexpr std::size_t index_of(VigilanceClass c) noexcept { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(VigilanceClass c) noexcept {
  switch (c) {
    case VigilanceClass::Awake: return "awake";
    case VigilanceClass::Tired: return "tired";
    case VigilanceClass::Drowsy: return "drowsy";
  }
  return "?";
}

inline std::optional<VigilanceClass> class_from_string(std::string_view s) {
  for (auto c : kAllClasses)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline constexpr double kTiredThreshold = 0.35;
inline constexpr double kDrowsyThreshold = 0.7;

/// Awake below 0.35, Tired in [0.35, 0.7), Drowsy from 0.7 up.
inline VigilanceClass label_from_perclos(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("label_from_perclos: PERCLOS " + std::to_string(p) + " outside [0, 1]");
  if (p < kTiredThreshold) return VigilanceClass::Awake;
  if (p < kDrowsyThreshold) return VigilanceClass::Tired;
  return VigilanceClass::Drowsy;
}

/// Stored PERCLOS values are single precision, and 0.35f < 0.35. Comparing
/// against float thresholds keeps the boundaries inclusive for them.
inline VigilanceClass label_from_perclos(float p) {
  if (!(p >= 0.0f && p <= 1.0f))
    throw DomainError("label_from_perclos: PERCLOS " + std::to_string(p) + " outside [0, 1]");
  if (p < static_cast<float>(kTiredThreshold)) return VigilanceClass::Awake;
  if (p < static_cast<float>(kDrowsyThreshold)) return VigilanceClass::Tired;
  return VigilanceClass::Drowsy;
}

inline constexpr int kEpochSeconds = 8;

/// Posterior and temporal electrodes used for feature extraction, in table order.
inline const std::vector<std::string>& default_channels() {
  static const std::vector<std::string> labels{
      "FT7", "FT8", "T7",  "T8",  "TP7", "TP8", "CP1", "CP2", "P1",
      "PZ",  "P2",  "PO3", "POZ", "PO4", "O1",  "OZ",  "O2"};
  return labels;
}

/// A multi-channel recording. `data` is channels x samples in microvolts;
/// `perclos` holds one value per complete 8 s epoch.
struct Session {
  std::string subject_id;
  int fs = 0;
  std::vector<std::string> channels;
  Matrix<float> data;
  std::vector<float> perclos;

  std::size_t n_channels() const noexcept { return channels.size(); }
  std::size_t n_samples() const noexcept { return data.cols(); }
  std::size_t epoch_length() const noexcept { return static_cast<std::size_t>(kEpochSeconds) * static_cast<std::size_t>(fs); }
  std::size_t n_epochs() const noexcept { return fs > 0 ? n_samples() / epoch_length() : 0; }

  bool operator==(const Session&) const = default;
};

/// Throws DomainError describing the first broken invariant.
inline void validate(const Session& s) {
  if (s.fs <= 0) throw DomainError("session " + s.subject_id + ": fs must be positive");
  if (s.data.rows() != s.channels.size())
    throw DomainError("session " + s.subject_id + ": data has " + std::to_string(s.data.rows()) +
                      " rows for " + std::to_string(s.channels.size()) + " channels");
  if (s.perclos.size() != s.n_epochs())
    throw DomainError("session " + s.subject_id + ": " + std::to_string(s.perclos.size()) +
                      " perclos entries for " + std::to_string(s.n_epochs()) + " epochs");
  for (float p : s.perclos)
    if (!(p >= 0.0f && p <= 1.0f))
      throw DomainError("session " + s.subject_id + ": perclos value outside [0, 1]");
}

struct Epoch {
  std::string session_id;
  std::size_t index = 0;
  Matrix<float> samples;  // channels x (8 * fs)
  VigilanceClass label = VigilanceClass::Awake;
};

/// Non-overlapping 8 s windows; a trailing partial window is dropped.
inline std::vector<Epoch> segment_epochs(const Session& s) {
  validate(s);
  const std::size_t len = s.epoch_length();
  const std::size_t n = s.n_epochs();
  std::vector<Epoch> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Epoch e;
    e.session_id = s.subject_id;
    e.index = k;
    e.label = label_from_perclos(s.perclos[k]);
    e.samples = Matrix<float>(s.n_channels(), len);
    for (std::size_t ch = 0; ch < s.n_channels(); ++ch) {
      auto src = s.data.row(ch).subspan(k * len, len);
      std::copy(src.begin(), src.end(), e.samples.row(ch).begin());
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<VigilanceClass> epoch_labels(const Session& s) {
  std::vector<VigilanceClass> out;
  out.reserve(s.perclos.size());
  for (float p : s.perclos) out.push_back(label_from_perclos(p));
  return out;
}

/// Keeps only the named channels, in the given order.
inline Session select_channels(const Session& s, const std::vector<std::string>& wanted) {
  Session out;
  out.subject_id = s.subject_id;
  out.fs = s.fs;
  out.perclos = s.perclos;
  out.channels = wanted;
  out.data = Matrix<float>(wanted.size(), s.n_samples());
  for (std::size_t i = 0; i < wanted.size(); ++i) {
    std::size_t src = s.channels.size();
    for (std::size_t j = 0; j < s.channels.size(); ++j)
      if (s.channels[j] == wanted[i]) src = j;
    if (src == s.channels.size())
      throw DomainError("session " + s.subject_id + " has no channel " + wanted[i]);
    auto from = s.data.row(src);
    std::copy(from.begin(), from.end(), out.data.row(i).begin());
  }
  return out;
}

}  // namespace vigil
