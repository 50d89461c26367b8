#pragma once

// JSON, Markdown and CSV renderings of metrics and experiment results.

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vigil/config.hpp"
#include "vigil/metrics.hpp"
#include "vigil/protocol.hpp"

namespace vigil {

inline nlohmann::json to_json(const ConfusionMatrix& cm) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : cm.counts) j.push_back(row);
  return j;
}

inline nlohmann::json to_json(const Summary& s) { return {{"mean", s.mean}, {"sd", s.sd}, {"n", s.n}}; }

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const TemporalReport& r) {
  nlohmann::json j;
  j["transitions"] = nlohmann::json::object();
  auto kind = [](const std::optional<TransitionStats>& s) {
    return nlohmann::json{{"n", s->n},
                          {"hit_rate", s->hit_rate},
                          {"zero_delay_rate", s->zero_delay_rate},
                          {"mean_delay_s", optional_json(s->mean_delay_s)}};
  };
  if (r.at) j["transitions"]["AT"] = kind(r.at);
  if (r.td) j["transitions"]["TD"] = kind(r.td);
  j["combined_hit_rate"] = optional_json(r.combined_hit_rate);
  j["summed_hit_rate"] = optional_json(r.summed_hit_rate);
  j["combined_mean_delay_s"] = optional_json(r.combined_mean_delay_s);
  if (r.false_hit)
    j["false_hit"] = {{"n_awake", r.false_hit->n_awake},
                      {"tired", r.false_hit->tired},
                      {"drowsy", r.false_hit->drowsy},
                      {"either", r.false_hit->either}};
  else
    j["false_hit"] = nullptr;

  nlohmann::json moe = nlohmann::json::object();
  if (r.false_hit) moe["awake_false_hit"] = margin_of_error(r.false_hit->either, r.false_hit->n_awake);
  if (r.at) moe["AT_hit_rate"] = margin_of_error(r.at->hit_rate, r.at->n);
  if (r.td) moe["TD_hit_rate"] = margin_of_error(r.td->hit_rate, r.td->n);
  j["moe"] = moe;
  return j;
}

/// Full evaluation report for one prediction sequence.
inline nlohmann::json evaluation_report(std::span<const VigilanceClass> truth, std::span<const VigilanceClass> pred,
                                        double epoch_seconds = kEpochSeconds) {
  const auto cm = confusion(truth, pred);
  auto j = to_json(temporal_report(truth, pred, epoch_seconds));
  j["confusion"] = to_json(cm);
  j["accuracy_eq6"] = cm.total() ? nlohmann::json(accuracy_eq6(cm)) : nlohmann::json(nullptr);
  j["accuracy_plain"] = cm.total() ? nlohmann::json(accuracy_plain(cm)) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["metrics"] = nlohmann::json::object();
  for (const auto& [k, s] : r.metrics) j["metrics"][k] = to_json(s);
  j["confusion"] = to_json(r.confusion);
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["audited_partitions"] = r.audited_partitions;
  return j;
}

inline nlohmann::json to_json(const TemporalSummary& t) {
  nlohmann::json j;
  j["per_session"] = nlohmann::json::object();
  for (const auto& [k, s] : t.metrics) j["per_session"][k] = to_json(s);
  j["pooled"] = to_json(make_temporal_report(t.pooled));
  return j;
}

inline nlohmann::json to_json(const UserStudyResult& r) {
  return {{"user_specific", to_json(r.user_specific)},
          {"generic_users", to_json(r.generic_users)},
          {"temporal", {{"user_specific", to_json(r.user_specific_temporal)},
                        {"generic_users", to_json(r.generic_temporal)}}},
          {"train_users", r.train_users},
          {"test_users", r.test_users}};
}

inline nlohmann::json to_json(const std::vector<BandAblationCell>& cells) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : cells)
    j.push_back({{"band", c.band}, {"kernel", to_string(c.kernel)}, {"p", c.p}, {"result", to_json(c.result)}});
  return j;
}

inline nlohmann::json to_json(const std::vector<ChannelAblationRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) j.push_back({{"channel", r.channel}, {"result", to_json(r.result)}});
  return j;
}

namespace detail {

inline std::string fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// "mean ± sd" with values scaled by `scale` (100 for percentages).
inline std::string pm(const Summary& s, double scale = 100.0) {
  return fixed(s.mean * scale) + " ± " + fixed(s.sd * scale);
}

inline const Summary* find_metric(const std::map<std::string, Summary>& m, const std::string& k) {
  const auto it = m.find(k);
  return it == m.end() ? nullptr : &it->second;
}

inline std::string cell(const std::map<std::string, Summary>& m, const std::string& k, double scale = 100.0) {
  const auto* s = find_metric(m, k);
  return s ? pm(*s, scale) : "n/a";
}

inline std::string csv_cell(const std::map<std::string, Summary>& m, const std::string& k, double scale = 100.0) {
  const auto* s = find_metric(m, k);
  return s ? fixed(s->mean * scale, 4) + "," + fixed(s->sd * scale, 4) : ",";
}

}  // namespace detail

/// Rows are bands; columns linear/RBF x P=2/P=4; accuracy (mean of
/// one-vs-rest accuracies) in percent.
inline std::string band_ablation_markdown(const std::vector<BandAblationCell>& cells) {
  std::vector<std::string> bands;
  for (const auto& c : cells)
    if (std::find(bands.begin(), bands.end(), c.band) == bands.end()) bands.push_back(c.band);
  std::string out = "| Band | Linear P=2 | Linear P=4 | RBF P=2 | RBF P=4 |\n|---|---|---|---|---|\n";
  for (const auto& b : bands) {
    out += "| " + b + " |";
    for (auto k : {KernelKind::Linear, KernelKind::Rbf})
      for (int p : {2, 4}) {
        std::string v = "n/a";
        for (const auto& c : cells)
          if (c.band == b && c.kernel == k && c.p == p) v = detail::cell(c.result.metrics, "accuracy_eq6");
        out += " " + v + " |";
      }
    out += '\n';
  }
  return out;
}

inline std::string band_ablation_csv(const std::vector<BandAblationCell>& cells) {
  std::string out = "band,kernel,p,accuracy_mean,accuracy_sd\n";
  for (const auto& c : cells)
    out += c.band + "," + to_string(c.kernel) + "," + std::to_string(c.p) + "," +
           detail::csv_cell(c.result.metrics, "accuracy_eq6") + "\n";
  return out;
}

inline std::string channel_ablation_markdown(const std::vector<ChannelAblationRow>& rows) {
  std::string out = "| Channel | k-fold accuracy [%] |\n|---|---|\n";
  for (const auto& r : rows) out += "| " + r.channel + " | " + detail::cell(r.result.metrics, "accuracy_eq6") + " |\n";
  return out;
}

inline std::string channel_ablation_csv(const std::vector<ChannelAblationRow>& rows) {
  std::string out = "channel,accuracy_mean,accuracy_sd\n";
  for (const auto& r : rows) out += r.channel + "," + detail::csv_cell(r.result.metrics, "accuracy_eq6") + "\n";
  return out;
}

/// Accuracy table, AT and TD response tables, and false hit rates.
inline std::string user_study_markdown(const UserStudyResult& r) {
  const auto& us = r.user_specific_temporal.metrics;
  const auto& gu = r.generic_temporal.metrics;
  std::string out;
  out += "### Accuracy [%]\n\n| Test | Accuracy | Plain accuracy |\n|---|---|---|\n";
  out += "| User-specific | " + detail::cell(r.user_specific.metrics, "accuracy_eq6") + " | " +
         detail::cell(r.user_specific.metrics, "accuracy_plain") + " |\n";
  out += "| Generic users | " + detail::cell(r.generic_users.metrics, "accuracy_eq6") + " | " +
         detail::cell(r.generic_users.metrics, "accuracy_plain") + " |\n";
  for (const char* kind : {"AT", "TD"}) {
    const std::string k = kind;
    out += "\n### " + std::string(k == "AT" ? "Awake to tired" : "Tired to drowsy") +
           "\n\n| Metric | User-specific | Generic users |\n|---|---|---|\n";
    out += "| Hit rate [%] | " + detail::cell(us, k + ".hit_rate") + " | " + detail::cell(gu, k + ".hit_rate") + " |\n";
    out += "| 0-delay hit rate [%] | " + detail::cell(us, k + ".zero_delay_rate") + " | " +
           detail::cell(gu, k + ".zero_delay_rate") + " |\n";
    out += "| Mean hit delay [s] | " + detail::cell(us, k + ".mean_delay_s", 1.0) + " | " +
           detail::cell(gu, k + ".mean_delay_s", 1.0) + " |\n";
  }
  out += "\n### False hit rates [%]\n\n| Case | User-specific | Generic users |\n|---|---|---|\n";
  out += "| Tired instead of awake | " + detail::cell(us, "false_hit.tired") + " | " + detail::cell(gu, "false_hit.tired") + " |\n";
  out += "| Drowsy instead of awake | " + detail::cell(us, "false_hit.drowsy") + " | " +
         detail::cell(gu, "false_hit.drowsy") + " |\n";
  out += "| Tired or drowsy instead of awake | " + detail::cell(us, "false_hit.either") + " | " +
         detail::cell(gu, "false_hit.either") + " |\n";
  return out;
}

inline std::string user_study_csv(const UserStudyResult& r) {
  std::string out = "branch,metric,mean,sd\n";
  auto dump = [&](const std::string& branch, const std::map<std::string, Summary>& m) {
    for (const auto& [k, s] : m) out += branch + "," + k + "," + detail::fixed(s.mean, 6) + "," + detail::fixed(s.sd, 6) + "\n";
  };
  dump("user_specific", r.user_specific.metrics);
  dump("generic_users", r.generic_users.metrics);
  dump("user_specific_temporal", r.user_specific_temporal.metrics);
  dump("generic_users_temporal", r.generic_temporal.metrics);
  return out;
}

}  // namespace vigil
