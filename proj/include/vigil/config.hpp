#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vigil/common.hpp"
#include "vigil/features.hpp"
#include "vigil/filter.hpp"
#include "vigil/svm.hpp"

namespace vigil {

struct ExperimentConfig {
  FeatureKind feature = FeatureKind::Lbp;
  int p = 2;
  KernelKind kernel = KernelKind::Rbf;
  /// RBF scale; 0 means sqrt(feature dimension).
  double rbf_scale = 0.0;
  /// Analysis band for single-band runs.
  std::string band = "total";
  /// Bands swept by the band ablation.
  std::vector<std::string> bands{"delta", "theta", "alpha", "beta", "gamma", "total"};
  /// LBP over the five rhythm bands concatenated, instead of one band.
  bool concat_bands = false;
  /// Channel subset; empty keeps every channel of the sessions.
  std::vector<std::string> channels;
  int folds = 5;
  int repeats = 20;
  double user_split = 0.8;
  std::uint64_t seed = 0;
  /// z-score features with training-partition statistics.
  bool standardize = false;
  TrainConfig train;
};

/// Every violated constraint, in field order. Empty when the config is valid.
inline std::vector<std::string> validation_errors(const ExperimentConfig& c) {
  std::vector<std::string> errs;
  if (c.feature == FeatureKind::Lbp && (c.p < 2 || c.p > 16 || c.p % 2 != 0))
    errs.push_back("p: must be an even integer in [2, 16]");
  if (c.rbf_scale < 0.0) errs.push_back("rbf_scale: must be >= 0 (0 selects sqrt(n))");
  auto known_band = [](const std::string& b) {
    for (const auto& d : default_bands())
      if (d.name == b) return true;
    return false;
  };
  if (!known_band(c.band)) errs.push_back("band: unknown band '" + c.band + "'");
  for (const auto& b : c.bands)
    if (!known_band(b)) errs.push_back("bands: unknown band '" + b + "'");
  if (c.folds < 2) errs.push_back("folds: must be >= 2");
  if (c.repeats < 1) errs.push_back("repeats: must be >= 1");
  if (!(c.user_split > 0.0 && c.user_split < 1.0)) errs.push_back("split: must lie strictly between 0 and 1");
  if (!(c.train.C > 0.0)) errs.push_back("C: must be positive");
  if (!(c.train.tol > 0.0)) errs.push_back("tol: must be positive");
  if (c.train.max_passes < 1) errs.push_back("max_passes: must be >= 1");
  return errs;
}

inline void validate(const ExperimentConfig& c) {
  const auto errs = validation_errors(c);
  if (errs.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errs) msg += "\n  " + e;
  throw ConfigError(msg);
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {
      {"feature", to_string(c.feature)},
      {"p", c.p},
      {"kernel", to_string(c.kernel)},
      {"rbf_scale", c.rbf_scale},
      {"band", c.band},
      {"bands", c.bands},
      {"concat_bands", c.concat_bands},
      {"channels", c.channels},
      {"folds", c.folds},
      {"repeats", c.repeats},
      {"split", c.user_split},
      {"seed", c.seed},
      {"standardize", c.standardize},
      {"C", c.train.C},
      {"tol", c.train.tol},
      {"max_passes", c.train.max_passes},
  };
}

/// Reads a JSON object over `base`. Unknown keys and type errors are all
/// collected into one ConfigError, followed by the value checks.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  std::vector<std::string> errs;
  if (!j.is_object()) throw ConfigError("invalid configuration:\n  top level must be a JSON object");

  auto get = [&](const char* key, auto& dst, auto check_type) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!check_type(v)) {
      errs.push_back(std::string(key) + ": wrong type");
      return;
    }
    v.get_to(dst);
  };
  auto is_num = [](const nlohmann::json& v) { return v.is_number(); };
  auto is_int = [](const nlohmann::json& v) { return v.is_number_integer(); };
  auto is_uint = [](const nlohmann::json& v) { return v.is_number_unsigned(); };
  auto is_str = [](const nlohmann::json& v) { return v.is_string(); };
  auto is_bool = [](const nlohmann::json& v) { return v.is_boolean(); };
  auto is_str_list = [](const nlohmann::json& v) {
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!e.is_string()) return false;
    return true;
  };

  static const std::vector<std::string> known{"feature", "p",      "kernel",  "rbf_scale", "band",        "bands",
                                              "concat_bands", "channels", "folds", "repeats", "split", "seed",
                                              "standardize",  "C",        "tol",   "max_passes"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) errs.push_back(key + ": unknown key");

  if (j.contains("feature")) {
    const auto& v = j.at("feature");
    if (v == "lbp")
      base.feature = FeatureKind::Lbp;
    else if (v == "de")
      base.feature = FeatureKind::De;
    else
      errs.push_back("feature: expected \"lbp\" or \"de\"");
  }
  if (j.contains("kernel")) {
    const auto& v = j.at("kernel");
    if (v == "linear")
      base.kernel = KernelKind::Linear;
    else if (v == "rbf")
      base.kernel = KernelKind::Rbf;
    else
      errs.push_back("kernel: expected \"linear\" or \"rbf\"");
  }
  get("p", base.p, is_int);
  get("rbf_scale", base.rbf_scale, is_num);
  get("band", base.band, is_str);
  get("bands", base.bands, is_str_list);
  get("concat_bands", base.concat_bands, is_bool);
  get("channels", base.channels, is_str_list);
  get("folds", base.folds, is_int);
  get("repeats", base.repeats, is_int);
  get("split", base.user_split, is_num);
  get("seed", base.seed, is_uint);
  get("standardize", base.standardize, is_bool);
  get("C", base.train.C, is_num);
  get("tol", base.train.tol, is_num);
  get("max_passes", base.train.max_passes, is_int);

  for (auto& e : validation_errors(base)) errs.push_back(std::move(e));
  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return base;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

/// Hash of the canonical (key-sorted, compact) JSON form.
inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

}  // namespace vigil
