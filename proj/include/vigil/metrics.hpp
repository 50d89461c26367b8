#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/signal.hpp"

namespace vigil {

/// Rows are ground truth, columns predictions, classes in vigilance order.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const noexcept {
    std::uint64_t t = 0;
    for (const auto& r : counts)
      for (auto c : r) t += c;
    return t;
  }
  std::uint64_t operator()(VigilanceClass truth, VigilanceClass pred) const noexcept {
    return counts[index_of(truth)][index_of(pred)];
  }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) noexcept {
    for (std::size_t i = 0; i < kNumClasses; ++i)
      for (std::size_t j = 0; j < kNumClasses; ++j) counts[i][j] += o.counts[i][j];
    return *this;
  }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const VigilanceClass> truth, std::span<const VigilanceClass> pred) {
  if (truth.size() != pred.size())
    throw DomainError("confusion: sequence lengths differ (" + std::to_string(truth.size()) + " vs " +
                      std::to_string(pred.size()) + ")");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index_of(truth[i])][index_of(pred[i])];
  return cm;
}

/// Mean over classes of the one-vs-rest accuracy (TP + TN) / total.
inline double accuracy_eq6(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw DomainError("accuracy: empty confusion matrix");
  double sum = 0.0;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    std::uint64_t wrong = 0;  // FP + FN for class k
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      if (j == k) continue;
      wrong += cm.counts[k][j] + cm.counts[j][k];
    }
    sum += static_cast<double>(total - wrong) / static_cast<double>(total);
  }
  return sum / static_cast<double>(kNumClasses);
}

/// trace / total.
inline double accuracy_plain(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw DomainError("accuracy: empty confusion matrix");
  std::uint64_t diag = 0;
  for (std::size_t k = 0; k < kNumClasses; ++k) diag += cm.counts[k][k];
  return static_cast<double>(diag) / static_cast<double>(total);
}

enum class TransitionKind : std::uint8_t { AT = 0, TD = 1 };

inline std::string to_string(TransitionKind k) { return k == TransitionKind::AT ? "AT" : "TD"; }

struct TransitionEvent {
  TransitionKind kind = TransitionKind::AT;
  std::size_t t_change = 0;  // first epoch of the new class
  std::size_t t_end = 0;     // last epoch before the next ground-truth change
  std::optional<std::size_t> t_hit;

  bool operator==(const TransitionEvent&) const = default;
};

/// Awake->Tired and Tired->Drowsy changes. Awake->Drowsy and backward
/// changes are not events.
inline std::vector<TransitionEvent> detect_transitions(std::span<const VigilanceClass> truth) {
  std::vector<TransitionEvent> out;
  for (std::size_t t = 1; t < truth.size(); ++t) {
    if (truth[t] == truth[t - 1]) continue;
    std::optional<TransitionKind> kind;
    if (truth[t - 1] == VigilanceClass::Awake && truth[t] == VigilanceClass::Tired) kind = TransitionKind::AT;
    if (truth[t - 1] == VigilanceClass::Tired && truth[t] == VigilanceClass::Drowsy) kind = TransitionKind::TD;
    if (!kind) continue;
    std::size_t end = t;
    while (end + 1 < truth.size() && truth[end + 1] == truth[t]) ++end;
    out.push_back({*kind, t, end, std::nullopt});
  }
  return out;
}

/// First epoch in [t_change, t_end] where the prediction equals the new class.
inline void locate_hits(std::vector<TransitionEvent>& events, std::span<const VigilanceClass> truth,
                        std::span<const VigilanceClass> pred) {
  for (auto& e : events) {
    e.t_hit.reset();
    for (std::size_t t = e.t_change; t <= e.t_end; ++t) {
      if (pred[t] == truth[e.t_change]) {
        e.t_hit = t;
        break;
      }
    }
  }
}

/// Additive sufficient statistics for the temporal metrics, so reports from
/// sessions, folds and repeats can be pooled in any order.
struct TemporalCounts {
  struct Kind {
    std::uint64_t n = 0;
    std::uint64_t hits = 0;
    std::uint64_t zero_delay_hits = 0;
    std::uint64_t delay_epochs = 0;  // summed over hits

    bool operator==(const Kind&) const = default;
  };
  std::array<Kind, 2> kinds{};
  std::uint64_t awake = 0;
  std::uint64_t awake_as_tired = 0;
  std::uint64_t awake_as_drowsy = 0;

  TemporalCounts& operator+=(const TemporalCounts& o) noexcept {
    for (std::size_t k = 0; k < 2; ++k) {
      kinds[k].n += o.kinds[k].n;
      kinds[k].hits += o.kinds[k].hits;
      kinds[k].zero_delay_hits += o.kinds[k].zero_delay_hits;
      kinds[k].delay_epochs += o.kinds[k].delay_epochs;
    }
    awake += o.awake;
    awake_as_tired += o.awake_as_tired;
    awake_as_drowsy += o.awake_as_drowsy;
    return *this;
  }
  bool operator==(const TemporalCounts&) const = default;
};

inline TemporalCounts temporal_counts(std::span<const VigilanceClass> truth, std::span<const VigilanceClass> pred) {
  if (truth.size() != pred.size())
    throw DomainError("temporal_report: sequence lengths differ (" + std::to_string(truth.size()) + " vs " +
                      std::to_string(pred.size()) + ")");
  TemporalCounts c;
  auto events = detect_transitions(truth);
  locate_hits(events, truth, pred);
  for (const auto& e : events) {
    auto& k = c.kinds[static_cast<std::size_t>(e.kind)];
    ++k.n;
    if (!e.t_hit) continue;
    ++k.hits;
    if (*e.t_hit == e.t_change) ++k.zero_delay_hits;
    k.delay_epochs += *e.t_hit - e.t_change;
  }
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t] != VigilanceClass::Awake) continue;
    ++c.awake;
    if (pred[t] == VigilanceClass::Tired) ++c.awake_as_tired;
    if (pred[t] == VigilanceClass::Drowsy) ++c.awake_as_drowsy;
  }
  return c;
}

/// Temporal counts over a sequence whose predictions may have gaps: each
/// maximal run of predicted epochs is scored on its own.
inline TemporalCounts temporal_counts(std::span<const VigilanceClass> truth,
                                      std::span<const std::optional<VigilanceClass>> pred) {
  if (truth.size() != pred.size()) throw DomainError("temporal_report: sequence lengths differ");
  TemporalCounts total;
  std::size_t t = 0;
  while (t < truth.size()) {
    if (!pred[t]) {
      ++t;
      continue;
    }
    std::size_t end = t;
    std::vector<VigilanceClass> seg;
    while (end < truth.size() && pred[end]) seg.push_back(*pred[end++]);
    total += temporal_counts(truth.subspan(t, end - t), seg);
    t = end;
  }
  return total;
}

struct TransitionStats {
  std::uint64_t n = 0;
  double hit_rate = 0.0;
  double zero_delay_rate = 0.0;
  std::optional<double> mean_delay_s;  // absent when there are no hits
};

struct FalseHitRates {
  std::uint64_t n_awake = 0;
  double tired = 0.0;
  double drowsy = 0.0;
  double either = 0.0;
};

struct TemporalReport {
  std::optional<TransitionStats> at;  // absent when the truth has no AT transition
  std::optional<TransitionStats> td;
  /// (H_AT + H_TD) / (n_AT + n_TD).
  std::optional<double> combined_hit_rate;
  /// H_AT/n_AT + H_TD/n_TD, the sum of the two per-kind rates (range [0, 2]).
  std::optional<double> summed_hit_rate;
  /// Summed delay over all hits of both kinds divided by the hit count.
  std::optional<double> combined_mean_delay_s;
  std::optional<FalseHitRates> false_hit;
  TemporalCounts counts;
};

inline TemporalReport make_temporal_report(const TemporalCounts& c, double epoch_seconds = kEpochSeconds) {
  TemporalReport r;
  r.counts = c;
  std::uint64_t n_all = 0, hits_all = 0, delay_all = 0;
  double summed = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& s = c.kinds[k];
    if (s.n == 0) continue;
    TransitionStats st;
    st.n = s.n;
    st.hit_rate = static_cast<double>(s.hits) / static_cast<double>(s.n);
    st.zero_delay_rate = static_cast<double>(s.zero_delay_hits) / static_cast<double>(s.n);
    if (s.hits > 0)
      st.mean_delay_s = static_cast<double>(s.delay_epochs) * epoch_seconds / static_cast<double>(s.hits);
    (k == 0 ? r.at : r.td) = st;
    n_all += s.n;
    hits_all += s.hits;
    delay_all += s.delay_epochs;
    summed += st.hit_rate;
  }
  if (n_all > 0) {
    r.combined_hit_rate = static_cast<double>(hits_all) / static_cast<double>(n_all);
    r.summed_hit_rate = summed;
  }
  if (hits_all > 0)
    r.combined_mean_delay_s = static_cast<double>(delay_all) * epoch_seconds / static_cast<double>(hits_all);
  if (c.awake > 0) {
    FalseHitRates f;
    f.n_awake = c.awake;
    const double n = static_cast<double>(c.awake);
    f.tired = static_cast<double>(c.awake_as_tired) / n;
    f.drowsy = static_cast<double>(c.awake_as_drowsy) / n;
    f.either = static_cast<double>(c.awake_as_tired + c.awake_as_drowsy) / n;
    r.false_hit = f;
  }
  return r;
}

inline TemporalReport temporal_report(std::span<const VigilanceClass> truth, std::span<const VigilanceClass> pred,
                                      double epoch_seconds = kEpochSeconds) {
  return make_temporal_report(temporal_counts(truth, pred), epoch_seconds);
}

inline constexpr double kZ95 = 1.96;

inline double standard_error(double p, std::uint64_t n) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("standard_error: proportion outside [0, 1]");
  if (n == 0) throw DomainError("margin_of_error: sample count must be >= 1");
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

/// z * sqrt(p (1 - p) / n).
inline double margin_of_error(double p, std::uint64_t n, double z = kZ95) { return z * standard_error(p, n); }

}  // namespace vigil
