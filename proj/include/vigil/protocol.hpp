#pragma once

// Experiment orchestration: band ablation, channel ablation, and the
// user-specific / generic-users study.
//
// Ablations pool every user's epochs and run stratified k-fold CV. The user
// study splits users first: k-fold CV runs over the training users' epochs,
// and each fold model is also scored on the held-out users.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/config.hpp"
#include "vigil/metrics.hpp"
#include "vigil/pipeline.hpp"
#include "vigil/rng.hpp"
#include "vigil/signal.hpp"
#include "vigil/svm.hpp"

namespace vigil {

/// Mean and sample standard deviation (n - 1 denominator; 0 when n == 1).
struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

struct ExperimentResult {
  std::map<std::string, Summary> metrics;
  std::map<std::string, std::vector<double>> samples;  // raw per-fold values
  ConfusionMatrix confusion;                            // summed over all evaluations
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t audited_partitions = 0;

  void add(const std::string& metric, double v) { samples[metric].push_back(v); }
  void finalize() {
    metrics.clear();
    for (const auto& [k, v] : samples) metrics[k] = summarize(v);
  }
};

/// Stratified folds of indices into `labels`. Each class is shuffled and dealt
/// round-robin, continuing the rotation across classes, so per-class fold
/// sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> kfold_epoch_split(std::span<const VigilanceClass> labels, int k,
                                                               std::uint64_t seed) {
  if (k < 2) throw DomainError("kfold: need at least 2 folds");
  if (static_cast<std::size_t>(k) > labels.size())
    throw DomainError("kfold: " + std::to_string(k) + " folds for " + std::to_string(labels.size()) + " epochs");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t next = 0;
  for (auto c : kAllClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(i);
    shuffle(idx, rng);
    for (auto i : idx) {
      folds[next].push_back(i);
      next = (next + 1) % folds.size();
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// Per-feature z-scoring fitted on a training partition.
class Standardizer {
public:
  explicit Standardizer(const Matrix<double>& train) : mean_(train.cols(), 0.0), inv_sd_(train.cols(), 1.0) {
    const double n = static_cast<double>(train.rows());
    for (std::size_t j = 0; j < train.cols(); ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < train.rows(); ++i) m += train(i, j);
      m /= n;
      double ss = 0.0;
      for (std::size_t i = 0; i < train.rows(); ++i) ss += (train(i, j) - m) * (train(i, j) - m);
      const double sd = train.rows() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      mean_[j] = m;
      inv_sd_[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
  }
  void apply(Matrix<double>& x) const {
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) = (x(i, j) - mean_[j]) * inv_sd_[j];
  }

private:
  std::vector<double> mean_, inv_sd_;
};

namespace detail {

inline std::pair<Matrix<double>, std::vector<VigilanceClass>> gather(const std::vector<EpochFeature>& rows,
                                                                     std::span<const std::size_t> idx) {
  Matrix<double> x;
  std::vector<VigilanceClass> y;
  y.reserve(idx.size());
  for (auto i : idx) {
    x.append_row(rows[i].values);
    y.push_back(rows[i].label);
  }
  return {std::move(x), std::move(y)};
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

inline KernelSpec kernel_for(const ExperimentConfig& cfg, std::size_t dim) {
  if (cfg.kernel == KernelKind::Linear) return KernelSpec::linear();
  return cfg.rbf_scale > 0.0 ? KernelSpec::rbf(cfg.rbf_scale) : KernelSpec::rbf_for_dimension(dim);
}

using ProvenanceKey = std::pair<std::string, std::size_t>;

/// Throws if any test epoch also sits in the training partition.
inline void audit_epochs(const std::vector<EpochFeature>& rows, std::span<const std::size_t> train,
                         std::span<const std::size_t> test) {
  std::set<ProvenanceKey> seen;
  for (auto i : train) seen.emplace(rows[i].session, rows[i].epoch);
  for (auto i : test)
    if (seen.count({rows[i].session, rows[i].epoch}))
      throw std::logic_error("leakage: epoch " + rows[i].session + "#" + std::to_string(rows[i].epoch) +
                             " is in both training and test partitions");
}

/// Throws if a test session also contributes training epochs.
inline void audit_sessions(const std::vector<EpochFeature>& train_rows, std::span<const std::size_t> train,
                           const std::vector<EpochFeature>& test_rows) {
  std::set<std::string> seen;
  for (auto i : train) seen.insert(train_rows[i].session);
  for (const auto& r : test_rows)
    if (seen.count(r.session))
      throw std::logic_error("leakage: user " + r.session + " is in both training and test partitions");
}

struct FoldModel {
  OvoModel model;
  std::optional<Standardizer> scaler;

  std::vector<VigilanceClass> predict(Matrix<double> x) const {
    if (scaler) scaler->apply(x);
    return predict_ovo(model, x);
  }
};

inline FoldModel fit(const std::vector<EpochFeature>& rows, std::span<const std::size_t> train,
                     const ExperimentConfig& cfg, std::uint64_t seed) {
  auto [x, y] = gather(rows, train);
  FoldModel fm;
  if (cfg.standardize) {
    fm.scaler.emplace(x);
    fm.scaler->apply(x);
  }
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  fm.model = train_ovo(x, y, kernel_for(cfg, x.cols()), tc);
  return fm;
}

inline void score(ExperimentResult& r, const std::string& prefix, std::span<const VigilanceClass> truth,
                  std::span<const VigilanceClass> pred) {
  const auto cm = confusion(truth, pred);
  r.confusion += cm;
  r.add(prefix + "accuracy_eq6", accuracy_eq6(cm));
  r.add(prefix + "accuracy_plain", accuracy_plain(cm));
}

inline std::vector<std::size_t> complement(std::size_t n, std::span<const std::size_t> sorted_test) {
  std::vector<std::size_t> out;
  out.reserve(n - sorted_test.size());
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t < sorted_test.size() && sorted_test[t] == i) {
      ++t;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

inline void require_per_class(std::span<const VigilanceClass> labels, int k, const std::string& what) {
  std::array<std::size_t, kNumClasses> counts{};
  for (auto c : labels) ++counts[index_of(c)];
  for (auto c : kAllClasses)
    if (counts[index_of(c)] < static_cast<std::size_t>(k))
      throw DomainError(what + ": insufficient data, class " + std::string(to_string(c)) + " has " +
                        std::to_string(counts[index_of(c)]) + " epochs for " + std::to_string(k) + " folds");
}

}  // namespace detail

/// Stratified k-fold CV over pooled feature rows, repeated `cfg.repeats`
/// times with fresh folds. One sample per fold per repeat.
inline ExperimentResult cross_validate(const std::vector<EpochFeature>& rows, const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<VigilanceClass> labels;
  for (const auto& r : rows) labels.push_back(r.label);
  detail::require_per_class(labels, cfg.folds, "cross_validate");

  ExperimentResult res;
  res.config_hash = config_hash(cfg);
  res.seed = cfg.seed;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const auto rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    const auto folds = kfold_epoch_split(labels, cfg.folds, rep_seed);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto train = detail::complement(rows.size(), folds[f]);
      detail::audit_epochs(rows, train, folds[f]);
      ++res.audited_partitions;
      const auto fm = detail::fit(rows, train, cfg, derive_seed(rep_seed, 1000 + f));
      auto [xt, yt] = detail::gather(rows, folds[f]);
      detail::score(res, "", yt, fm.predict(std::move(xt)));
    }
  }
  res.finalize();
  return res;
}

inline FeatureSettings feature_settings(const ExperimentConfig& cfg) {
  FeatureSettings fs;
  fs.kind = cfg.feature;
  fs.p = cfg.p;
  fs.band = cfg.band;
  fs.concat_bands = cfg.concat_bands;
  return fs;
}

inline std::vector<Session> apply_channel_selection(const std::vector<Session>& sessions,
                                                    const ExperimentConfig& cfg) {
  if (cfg.channels.empty()) return sessions;
  std::vector<Session> out;
  for (const auto& s : sessions) out.push_back(select_channels(s, cfg.channels));
  return out;
}

inline std::vector<EpochFeature> pooled_features(const std::vector<Session>& sessions, const FeatureSettings& fs) {
  std::vector<EpochFeature> rows;
  for (const auto& s : sessions) {
    auto part = extract_features(s, fs);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return rows;
}

struct BandAblationCell {
  std::string band;
  KernelKind kernel = KernelKind::Rbf;
  int p = 2;
  ExperimentResult result;
};

/// Every requested band x {linear, RBF} x {P=2, P=4}, LBP features.
inline std::vector<BandAblationCell> run_band_ablation(const std::vector<Session>& sessions,
                                                       const ExperimentConfig& cfg) {
  validate(cfg);
  const auto selected = apply_channel_selection(sessions, cfg);
  std::vector<BandAblationCell> out;
  for (const auto& band : cfg.bands) {
    for (int p : {2, 4}) {
      FeatureSettings fs;
      fs.kind = FeatureKind::Lbp;
      fs.p = p;
      fs.band = band;
      const auto rows = pooled_features(selected, fs);
      for (auto kernel : {KernelKind::Linear, KernelKind::Rbf}) {
        ExperimentConfig c = cfg;
        c.feature = FeatureKind::Lbp;
        c.p = p;
        c.band = band;
        c.kernel = kernel;
        c.concat_bands = false;
        out.push_back({band, kernel, p, cross_validate(rows, c)});
      }
    }
  }
  // Table order: band, then kernel, then P.
  std::stable_sort(out.begin(), out.end(), [&](const BandAblationCell& a, const BandAblationCell& b) {
    const auto ia = std::find(cfg.bands.begin(), cfg.bands.end(), a.band) - cfg.bands.begin();
    const auto ib = std::find(cfg.bands.begin(), cfg.bands.end(), b.band) - cfg.bands.begin();
    if (ia != ib) return ia < ib;
    if (a.kernel != b.kernel) return a.kernel < b.kernel;
    return a.p < b.p;
  });
  return out;
}

struct ChannelAblationRow {
  std::string channel;
  ExperimentResult result;
};

/// One CV run per channel using only that channel's feature block.
inline std::vector<ChannelAblationRow> run_channel_ablation(const std::vector<Session>& sessions,
                                                            const ExperimentConfig& cfg) {
  validate(cfg);
  if (sessions.empty()) throw DomainError("channel ablation: no sessions");
  const auto selected = apply_channel_selection(sessions, cfg);
  const auto fs = feature_settings(cfg);
  const auto rows = pooled_features(selected, fs);
  const auto& channels = selected.front().channels;
  std::vector<ChannelAblationRow> out;
  for (std::size_t ch = 0; ch < channels.size(); ++ch) {
    const auto sub = select_columns(rows, channel_columns(fs, channels.size(), ch));
    out.push_back({channels[ch], cross_validate(sub, cfg)});
  }
  return out;
}

/// Temporal metrics gathered one sample per (session, repeat).
struct TemporalSummary {
  std::map<std::string, Summary> metrics;
  std::map<std::string, std::vector<double>> samples;
  TemporalCounts pooled;

  void add_session(const TemporalCounts& c) {
    pooled += c;
    const auto r = make_temporal_report(c);
    auto put = [&](const std::string& k, std::optional<double> v) {
      if (v) samples[k].push_back(*v);
    };
    if (r.at) {
      put("AT.hit_rate", r.at->hit_rate);
      put("AT.zero_delay_rate", r.at->zero_delay_rate);
      put("AT.mean_delay_s", r.at->mean_delay_s);
    }
    if (r.td) {
      put("TD.hit_rate", r.td->hit_rate);
      put("TD.zero_delay_rate", r.td->zero_delay_rate);
      put("TD.mean_delay_s", r.td->mean_delay_s);
    }
    put("combined_hit_rate", r.combined_hit_rate);
    if (r.false_hit) {
      put("false_hit.tired", r.false_hit->tired);
      put("false_hit.drowsy", r.false_hit->drowsy);
      put("false_hit.either", r.false_hit->either);
    }
  }
  void finalize() {
    metrics.clear();
    for (const auto& [k, v] : samples) metrics[k] = summarize(v);
  }
};

struct UserStudyResult {
  ExperimentResult user_specific;
  ExperimentResult generic_users;
  TemporalSummary user_specific_temporal;
  TemporalSummary generic_temporal;
  std::size_t train_users = 0;
  std::size_t test_users = 0;
};

/// Users held out per repeat: round(split * n) for training, clamped so both
/// sides keep at least one user.
inline std::size_t training_user_count(std::size_t n_users, double split) {
  if (n_users < 2) throw DomainError("user study: need at least 2 users, got " + std::to_string(n_users));
  const auto k = static_cast<std::size_t>(std::llround(split * static_cast<double>(n_users)));
  return std::clamp<std::size_t>(k, 1, n_users - 1);
}

inline UserStudyResult run_user_study(const std::vector<Session>& sessions, const ExperimentConfig& cfg) {
  validate(cfg);
  const auto selected = apply_channel_selection(sessions, cfg);
  const std::size_t n_users = selected.size();
  {
    std::set<std::string> ids;
    for (const auto& s : selected)
      if (!ids.insert(s.subject_id).second) throw DomainError("user study: duplicate subject id " + s.subject_id);
  }
  const std::size_t n_train = training_user_count(n_users, cfg.user_split);

  const auto fs = feature_settings(cfg);
  std::vector<std::vector<EpochFeature>> per_user;
  for (const auto& s : selected) per_user.push_back(extract_features(s, fs));

  UserStudyResult res;
  res.train_users = n_train;
  res.test_users = n_users - n_train;
  for (auto* r : {&res.user_specific, &res.generic_users}) {
    r->config_hash = config_hash(cfg);
    r->seed = cfg.seed;
  }

  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const auto rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    Rng rng(rep_seed);
    auto order = permutation(n_users, rng);
    std::vector<std::size_t> train_users(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_users(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_users.begin(), train_users.end());
    std::sort(test_users.begin(), test_users.end());

    std::vector<EpochFeature> pool;
    for (auto u : train_users) pool.insert(pool.end(), per_user[u].begin(), per_user[u].end());
    std::vector<VigilanceClass> pool_labels;
    for (const auto& r : pool) pool_labels.push_back(r.label);
    detail::require_per_class(pool_labels, cfg.folds, "user study");

    // Out-of-fold predictions per (session, epoch) for the temporal metrics.
    std::map<std::string, std::vector<std::optional<VigilanceClass>>> oof;
    for (auto u : train_users)
      oof[selected[u].subject_id].assign(per_user[u].size(), std::nullopt);

    const auto folds = kfold_epoch_split(pool_labels, cfg.folds, derive_seed(rep_seed, 1));
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto train = detail::complement(pool.size(), folds[f]);
      detail::audit_epochs(pool, train, folds[f]);
      for (auto u : test_users) detail::audit_sessions(pool, train, per_user[u]);
      ++res.user_specific.audited_partitions;
      ++res.generic_users.audited_partitions;

      const auto fm = detail::fit(pool, train, cfg, derive_seed(rep_seed, 1000 + f));

      auto [xv, yv] = detail::gather(pool, folds[f]);
      const auto pv = fm.predict(std::move(xv));
      detail::score(res.user_specific, "", yv, pv);
      for (std::size_t i = 0; i < folds[f].size(); ++i) {
        const auto& row = pool[folds[f][i]];
        oof[row.session][row.epoch] = pv[i];
      }

      std::vector<VigilanceClass> gt, gp;
      for (auto u : test_users) {
        const auto& rows = per_user[u];
        auto [xg, yg] = detail::gather(rows, detail::all_indices(rows.size()));
        const auto pg = fm.predict(std::move(xg));
        res.generic_temporal.add_session(temporal_counts(yg, pg));
        gt.insert(gt.end(), yg.begin(), yg.end());
        gp.insert(gp.end(), pg.begin(), pg.end());
      }
      detail::score(res.generic_users, "", gt, gp);
    }

    for (auto u : train_users) {
      const auto truth = epoch_labels(selected[u]);
      res.user_specific_temporal.add_session(
          temporal_counts(std::span<const VigilanceClass>(truth),
                          std::span<const std::optional<VigilanceClass>>(oof[selected[u].subject_id])));
    }
  }
  res.user_specific.finalize();
  res.generic_users.finalize();
  res.user_specific_temporal.finalize();
  res.generic_temporal.finalize();
  return res;
}

}  // namespace vigil
