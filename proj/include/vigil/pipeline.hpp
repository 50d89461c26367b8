#pragma once

// Session -> band-filtered epochs -> per-epoch feature rows.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vigil/common.hpp"
#include "vigil/features.hpp"
#include "vigil/filter.hpp"
#include "vigil/session_io.hpp"
#include "vigil/signal.hpp"

namespace vigil {

struct FeatureSettings {
  FeatureKind kind = FeatureKind::Lbp;
  int p = 2;
  /// Analysis band for LBP features.
  std::string band = "total";
  /// LBP only: concatenate the histograms of the five rhythm bands instead of
  /// using the single analysis band.
  bool concat_bands = false;
  int filter_order = kDefaultFilterOrder;
};

/// One epoch's feature row with its provenance.
struct EpochFeature {
  std::string session;
  std::size_t epoch = 0;
  VigilanceClass label = VigilanceClass::Awake;
  std::vector<double> values;
};

inline std::size_t feature_dimension(const FeatureSettings& fs, std::size_t n_channels) {
  if (fs.kind == FeatureKind::De) return de_band_names().size() * n_channels;
  const std::size_t per_band = LbpParams(fs.p).bins() * n_channels;
  return fs.concat_bands ? per_band * de_band_names().size() : per_band;
}

inline std::vector<EpochFeature> extract_features(const Session& s, const FeatureSettings& fs) {
  std::vector<BandSpec> bands;
  if (fs.kind == FeatureKind::Lbp && !fs.concat_bands) {
    bands.push_back(band_by_name(fs.band));
  } else {
    for (const auto& name : de_band_names()) bands.push_back(band_by_name(name));
  }
  const auto filtered = band_decompose(s, bands, fs.filter_order);

  std::map<std::string, std::vector<Epoch>> epochs;
  for (const auto& [name, sess] : filtered) epochs.emplace(name, segment_epochs(sess));
  const std::size_t n = s.n_epochs();

  std::vector<EpochFeature> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    EpochFeature row;
    row.session = s.subject_id;
    row.epoch = k;
    row.label = label_from_perclos(s.perclos[k]);
    if (fs.kind == FeatureKind::Lbp) {
      std::vector<const Epoch*> parts;
      for (const auto& b : bands) parts.push_back(&epochs.at(b.name)[k]);
      row.values = extract_lbp_features(parts, fs.p).values;
    } else {
      std::map<std::string, Epoch> per_band;
      for (const auto& b : bands) per_band.emplace(b.name, epochs.at(b.name)[k]);
      row.values = extract_de_features(per_band).values;
    }
    out.push_back(std::move(row));
  }
  return out;
}

/// Column indices belonging to channel `ch` out of `n_channels`.
inline std::vector<std::size_t> channel_columns(const FeatureSettings& fs, std::size_t n_channels, std::size_t ch) {
  std::vector<std::size_t> cols;
  if (fs.kind == FeatureKind::De) {
    for (std::size_t b = 0; b < de_band_names().size(); ++b) cols.push_back(b * n_channels + ch);
    return cols;
  }
  const std::size_t bins = LbpParams(fs.p).bins();
  const std::size_t blocks = fs.concat_bands ? de_band_names().size() : 1;
  for (std::size_t blk = 0; blk < blocks; ++blk)
    for (std::size_t k = 0; k < bins; ++k) cols.push_back(blk * bins * n_channels + ch * bins + k);
  return cols;
}

inline std::vector<EpochFeature> select_columns(const std::vector<EpochFeature>& rows,
                                                const std::vector<std::size_t>& cols) {
  std::vector<EpochFeature> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    EpochFeature e{r.session, r.epoch, r.label, {}};
    e.values.reserve(cols.size());
    for (auto c : cols) e.values.push_back(r.values.at(c));
    out.push_back(std::move(e));
  }
  return out;
}

/// "#feature=<kind>,p=<P>,band=<band>" then "session,epoch,label,f0..f{d-1}".
inline std::string encode_feature_csv(const std::vector<EpochFeature>& rows, const FeatureSettings& fs) {
  std::string out = "#feature=" + to_string(fs.kind);
  if (fs.kind == FeatureKind::Lbp) out += ",p=" + std::to_string(fs.p) + ",band=" + (fs.concat_bands ? "concat" : fs.band);
  out += "\nsession,epoch,label";
  const std::size_t d = rows.empty() ? 0 : rows.front().values.size();
  for (std::size_t j = 0; j < d; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& r : rows) {
    out += r.session + "," + std::to_string(r.epoch) + "," + std::string(to_string(r.label));
    for (double v : r.values) out += "," + detail::format_number(v);
    out += '\n';
  }
  return out;
}

inline void write_feature_csv(const std::filesystem::path& path, const std::vector<EpochFeature>& rows,
                              const FeatureSettings& fs) {
  detail::write_file(path, encode_feature_csv(rows, fs));
}

}  // namespace vigil
