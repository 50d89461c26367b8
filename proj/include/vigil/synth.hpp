#pragma once

// Seeded synthetic EEG for desk-scale end-to-end runs.
//
// Each session walks Awake -> Tired -> Drowsy once, dwelling a jittered number
// of epochs in the first two states. Every channel is a sum of five
// band-limited AR(2) resonators (one per EEG rhythm) weighted by the current
// state's band power profile, plus pink noise. Channels not listed as
// informative always use the Awake profile.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/rng.hpp"
#include "vigil/signal.hpp"

namespace vigil {

inline constexpr std::size_t kNumRhythms = 5;
using BandPowers = std::array<double, kNumRhythms>;  // delta, theta, alpha, beta, gamma

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_epochs = 100;
  int fs = 200;
  std::string subject_id = "synth";
  std::vector<std::string> channels = default_channels();

  /// Mean dwell per class in epochs; Drowsy lasts until the end of the session.
  std::array<double, kNumClasses> state_dwell_epochs{35.0, 30.0, 35.0};
  std::array<BandPowers, kNumClasses> band_power_profile{{
      {1.0, 0.8, 1.6, 1.0, 0.5},
      {1.8, 1.6, 1.1, 0.7, 0.35},
      {4.0, 3.2, 0.7, 0.45, 0.25},
  }};
  /// Pink-noise RMS relative to the Awake-state signal RMS.
  double noise_floor = 0.3;
  /// Overall amplitude in microvolts.
  double amplitude_uv = 10.0;
  /// Channels whose spectrum follows the vigilance state. Empty means all.
  std::vector<std::string> informative_channels;
  /// Log-normal spread of per-subject band powers and resonator frequencies;
  /// 0 gives every subject the same generative parameters.
  double subject_variability = 0.0;
};

inline void check(const SynthConfig& cfg) {
  if (cfg.fs <= 0) throw DomainError("SynthConfig: fs must be positive");
  if (static_cast<double>(cfg.fs) / 2.0 <= 50.0)
    throw DomainError("SynthConfig: fs must exceed 100 Hz to hold the gamma band");
  if (cfg.channels.empty()) throw DomainError("SynthConfig: no channels");
  for (double d : cfg.state_dwell_epochs)
    if (!(d >= 1.0)) throw DomainError("SynthConfig: dwell must be >= 1 epoch");
  for (const auto& prof : cfg.band_power_profile)
    for (double p : prof)
      if (!(p >= 0.0)) throw DomainError("SynthConfig: band powers must be non-negative");
  if (!(cfg.noise_floor >= 0.0)) throw DomainError("SynthConfig: noise_floor must be non-negative");
  if (!(cfg.subject_variability >= 0.0)) throw DomainError("SynthConfig: subject_variability must be non-negative");
}

/// Centre and bandwidth (Hz) of the resonator that stands in for each rhythm.
inline constexpr std::array<std::array<double, 2>, kNumRhythms> kRhythmResonators{{
    {2.5, 3.0}, {6.0, 4.0}, {11.0, 6.0}, {22.5, 17.0}, {40.5, 19.0}}};

namespace detail {

/// x[t] = a1 x[t-1] + a2 x[t-2] + e[t], rescaled to unit stationary variance.
class Resonator {
public:
  Resonator(double centre_hz, double bandwidth_hz, double fs) {
    const double r = std::exp(-std::numbers::pi * bandwidth_hz / fs);
    a1_ = 2.0 * r * std::cos(2.0 * std::numbers::pi * centre_hz / fs);
    a2_ = -r * r;
    const double var = (1.0 - a2_) / ((1.0 + a2_) * ((1.0 - a2_) * (1.0 - a2_) - a1_ * a1_));
    gain_ = 1.0 / std::sqrt(var);
  }
  double step(double e) {
    const double x = a1_ * x1_ + a2_ * x2_ + e;
    x2_ = x1_;
    x1_ = x;
    return x * gain_;
  }

private:
  double a1_, a2_, gain_;
  double x1_ = 0.0, x2_ = 0.0;
};

/// Paul Kellet's economy pink-noise filter, roughly unit RMS.
class PinkNoise {
public:
  double step(double white) {
    b0_ = 0.99765 * b0_ + white * 0.0990460;
    b1_ = 0.96300 * b1_ + white * 0.2965164;
    b2_ = 0.57000 * b2_ + white * 1.0526913;
    return (b0_ + b1_ + b2_ + white * 0.1848) * 0.2;
  }

private:
  double b0_ = 0.0, b1_ = 0.0, b2_ = 0.0;
};

inline float draw_perclos(VigilanceClass c, Rng& rng) {
  switch (c) {
    case VigilanceClass::Awake: return static_cast<float>(rng.uniform(0.0, 0.34));
    case VigilanceClass::Tired: return static_cast<float>(rng.uniform(0.36, 0.68));
    case VigilanceClass::Drowsy: return static_cast<float>(rng.uniform(0.72, 1.0));
  }
  return 0.0f;
}

}  // namespace detail

/// Epoch-level class sequence: Awake for a jittered dwell, then Tired, then Drowsy.
inline std::vector<VigilanceClass> synth_states(const SynthConfig& cfg, Rng& rng) {
  std::vector<VigilanceClass> states;
  states.reserve(cfg.n_epochs);
  for (std::size_t c = 0; c + 1 < kNumClasses; ++c) {
    const double mean = cfg.state_dwell_epochs[c];
    const auto dwell = static_cast<std::size_t>(std::max(1.0, std::round(mean * rng.uniform(0.5, 1.5))));
    for (std::size_t k = 0; k < dwell && states.size() < cfg.n_epochs; ++k) states.push_back(kAllClasses[c]);
  }
  while (states.size() < cfg.n_epochs) states.push_back(VigilanceClass::Drowsy);
  return states;
}

inline Session synth_session(const SynthConfig& cfg) {
  check(cfg);
  Rng rng(cfg.seed);
  Rng subject_rng = rng.fork(1);
  Rng state_rng = rng.fork(2);
  Rng signal_rng = rng.fork(3);

  // Per-subject perturbation of the generative parameters.
  // Band powers are jittered per class; resonator frequencies per channel,
  // which gives each subject a distinct spectral signature.
  auto profile = cfg.band_power_profile;
  std::vector<std::array<double, kNumRhythms>> freq_scale(cfg.channels.size());
  for (auto& f : freq_scale) f.fill(1.0);
  if (cfg.subject_variability > 0.0) {
    for (auto& prof : profile)
      for (double& p : prof) p *= std::exp(cfg.subject_variability * subject_rng.normal());
    for (auto& ch : freq_scale)
      for (double& f : ch) f = std::exp(0.25 * cfg.subject_variability * subject_rng.normal());
  }

  const auto states = synth_states(cfg, state_rng);

  Session s;
  s.subject_id = cfg.subject_id;
  s.fs = cfg.fs;
  s.channels = cfg.channels;
  const std::size_t len = static_cast<std::size_t>(kEpochSeconds) * static_cast<std::size_t>(cfg.fs);
  const std::size_t n = cfg.n_epochs * len;
  s.data = Matrix<float>(cfg.channels.size(), n);
  for (auto c : states) s.perclos.push_back(detail::draw_perclos(c, state_rng));

  double awake_rms = 0.0;
  for (double p : profile[0]) awake_rms += p;
  awake_rms = std::sqrt(awake_rms);

  std::array<std::array<double, kNumRhythms>, kNumClasses> weights{};
  for (std::size_t c = 0; c < kNumClasses; ++c)
    for (std::size_t b = 0; b < kNumRhythms; ++b) weights[c][b] = std::sqrt(profile[c][b]);

  const double nyquist_guard = 0.45 * cfg.fs;
  for (std::size_t ch = 0; ch < cfg.channels.size(); ++ch) {
    const bool informative =
        cfg.informative_channels.empty() ||
        std::find(cfg.informative_channels.begin(), cfg.informative_channels.end(), cfg.channels[ch]) !=
            cfg.informative_channels.end();
    Rng ch_rng = signal_rng.fork(ch);
    std::vector<detail::Resonator> osc;
    for (std::size_t b = 0; b < kNumRhythms; ++b)
      osc.emplace_back(std::min(kRhythmResonators[b][0] * freq_scale[ch][b], nyquist_guard), kRhythmResonators[b][1],
                       cfg.fs);
    detail::PinkNoise pink;
    // Let the resonators reach their stationary state before recording.
    for (std::size_t t = 0; t < len; ++t)
      for (auto& o : osc) o.step(ch_rng.normal());

    auto row = s.data.row(ch);
    for (std::size_t t = 0; t < n; ++t) {
      const auto state = informative ? states[t / len] : VigilanceClass::Awake;
      const auto& w = weights[index_of(state)];
      double v = 0.0;
      for (std::size_t b = 0; b < kNumRhythms; ++b) v += w[b] * osc[b].step(ch_rng.normal());
      v += cfg.noise_floor * awake_rms * pink.step(ch_rng.normal());
      row[t] = static_cast<float>(cfg.amplitude_uv * v);
    }
  }
  return s;
}

/// `n_users` sessions with seeds derived from cfg.seed; ids user00, user01, ...
inline std::vector<Session> synth_cohort(const SynthConfig& cfg, std::size_t n_users) {
  std::vector<Session> out;
  out.reserve(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    SynthConfig c = cfg;
    c.seed = derive_seed(cfg.seed, u);
    c.subject_id = (u < 10 ? "user0" : "user") + std::to_string(u);
    out.push_back(synth_session(c));
  }
  return out;
}

}  // namespace vigil
