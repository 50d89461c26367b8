#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vigil/vigil.hpp"

#ifndef VIGIL_VERSION
#define VIGIL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit code 2: the invocation itself is wrong (flags, config, unreadable input, unwritable output).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError(dir.string() + ": cannot create output directory");
  const auto probe = dir / ".vigil_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw UsageError(dir.string() + ": output directory is not writable");
  }
  fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  try {
    vigil::detail::write_file(path, text);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

std::string file_hash(const fs::path& p) { return vigil::hex64(vigil::fnv1a64(vigil::detail::read_file(p))); }

void write_provenance(const fs::path& dir, const std::string& command, const std::string& hash, std::uint64_t seed,
                      const json& config) {
  json j{{"tool", "vigil"},   {"version", VIGIL_VERSION}, {"command", command},
         {"config_hash", hash}, {"seed", seed},             {"config", config}};
  write_text(dir / "provenance.json", j.dump(2) + "\n");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = vigil::detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Session files named on the command line; directories expand to their
// .eegs and .csv files (perclos siblings excluded), sorted by name.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        const auto ext = e.path().extension();
        if (ext == ".eegs" || (ext == ".csv" && name.find(".perclos.") == std::string::npos)) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  if (out.empty()) throw UsageError("no session files given");
  return out;
}

std::vector<vigil::Session> load_all(const std::vector<fs::path>& paths) {
  std::vector<vigil::Session> out;
  for (const auto& p : paths) out.push_back(vigil::load_session(p, vigil::format_for(p)));
  return out;
}

// Flags shared by extract and run. Each one given on the command line
// overrides the matching key of the JSON config.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> feature, kernel, band, channels, standardize;
  std::optional<int> p, folds, repeats;
  std::optional<double> split, C;
  bool concat_bands = false;

  void add_to(CLI::App* app, bool protocol_flags) {
    app->add_option("--config", config_path, "JSON experiment config");
    app->add_option("--feature", feature, "lbp | de");
    app->add_option("--p", p, "LBP neighbour count");
    app->add_option("--band", band, "analysis band: delta theta alpha beta gamma total");
    app->add_option("--channels", channels, "comma-separated channel subset");
    app->add_flag("--concat-bands", concat_bands, "LBP over the five rhythm bands concatenated");
    if (!protocol_flags) return;
    app->add_option("--seed", seed, "master seed");
    app->add_option("--kernel", kernel, "linear | rbf");
    app->add_option("--folds", folds, "k in k-fold");
    app->add_option("--repeats", repeats, "protocol repetitions");
    app->add_option("--split", split, "fraction of users used for training");
    app->add_option("--standardize", standardize, "true | false");
    app->add_option("--C", C, "SVM box constraint");
  }

  vigil::ExperimentConfig resolve(json& merged) const {
    merged = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw vigil::ConfigError(config_path + ": cannot open config");
      try {
        merged = json::parse(in);
      } catch (const json::parse_error& e) {
        throw vigil::ConfigError(config_path + ": " + e.what());
      }
      if (!merged.is_object()) throw vigil::ConfigError("invalid configuration:\n  top level must be a JSON object");
    }
    if (seed) merged["seed"] = *seed;
    if (feature) merged["feature"] = *feature;
    if (kernel) merged["kernel"] = *kernel;
    if (band) merged["band"] = *band;
    if (channels) merged["channels"] = split_list(*channels);
    if (p) merged["p"] = *p;
    if (folds) merged["folds"] = *folds;
    if (repeats) merged["repeats"] = *repeats;
    if (split) merged["split"] = *split;
    if (C) merged["C"] = *C;
    if (concat_bands) merged["concat_bands"] = true;
    if (standardize) {
      if (*standardize == "true" || *standardize == "1")
        merged["standardize"] = true;
      else if (*standardize == "false" || *standardize == "0")
        merged["standardize"] = false;
      else
        merged["standardize"] = *standardize;  // reported as a type error below
    }
    return vigil::config_from_json(merged);
  }
};

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t users = 4;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  std::string out;
  int fs = 200;
  double variability = 0.0;
  std::string format = "binary";
};

// Dwell times scaled to the session length so short sessions still visit
// every vigilance state.
vigil::SynthConfig scaled_synth(std::size_t epochs) {
  vigil::SynthConfig cfg;
  cfg.n_epochs = epochs;
  const double f = static_cast<double>(epochs) / 100.0;
  for (double& d : cfg.state_dwell_epochs) d = std::max(1.0, d * f);
  return cfg;
}

json synth_params(const SynthArgs& a) {
  return {{"users", a.users},   {"epochs", a.epochs},           {"seed", a.seed},
          {"fs", a.fs},         {"variability", a.variability}, {"format", a.format}};
}

int cmd_synth(const SynthArgs& a) {
  if (a.format != "binary" && a.format != "csv") throw UsageError("--format must be binary or csv");
  auto cfg = scaled_synth(a.epochs);
  cfg.seed = a.seed;
  cfg.fs = a.fs;
  cfg.subject_variability = a.variability;
  try {
    vigil::check(cfg);
  } catch (const vigil::DomainError& e) {
    throw UsageError(e.what());
  }
  if (a.epochs == 0) vigil::warn("synth: --epochs 0 writes sessions without any samples");

  const fs::path dir(a.out);
  prepare_out_dir(dir);
  const auto fmt = a.format == "csv" ? vigil::SessionFormat::Csv : vigil::SessionFormat::Binary;
  const auto sessions = vigil::synth_cohort(cfg, a.users);

  json files = json::array();
  for (const auto& s : sessions) {
    const auto path = dir / (s.subject_id + (fmt == vigil::SessionFormat::Csv ? ".csv" : ".eegs"));
    try {
      vigil::write_session(path, s, fmt);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
    files.push_back({{"file", path.filename().string()},
                     {"subject_id", s.subject_id},
                     {"epochs", s.n_epochs()},
                     {"fnv1a64", file_hash(path)}});
  }
  const auto params = synth_params(a);
  write_text(dir / "manifest.json", json{{"params", params}, {"sessions", files}}.dump(2) + "\n");
  write_provenance(dir, "synth", vigil::hex64(vigil::fnv1a64(params.dump())), a.seed, params);
  std::cout << "wrote " << sessions.size() << " sessions to " << dir.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ExtractArgs {
  ConfigFlags flags;
  std::vector<std::string> inputs;
  std::string out;
};

int cmd_extract(const ExtractArgs& a) {
  json merged;
  const auto cfg = a.flags.resolve(merged);
  const fs::path dir(a.out);
  prepare_out_dir(dir);
  const auto paths = expand_inputs(a.inputs);
  auto sessions = vigil::apply_channel_selection(load_all(paths), cfg);
  const auto settings = vigil::feature_settings(cfg);

  std::vector<vigil::EpochFeature> rows;
  for (const auto& s : sessions) {
    auto part = vigil::extract_features(s, settings);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  write_text(dir / "features.csv", vigil::encode_feature_csv(rows, settings));
  write_provenance(dir, "extract", vigil::config_hash(cfg), cfg.seed, vigil::to_json(cfg));
  std::cout << rows.size() << " rows x " << (rows.empty() ? 0 : rows.front().values.size()) << " features -> "
            << (dir / "features.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  ConfigFlags flags;
  std::vector<std::string> inputs;
  std::string out;
  // Synthetic cohort instead of session files.
  std::size_t synth_users = 0;
  std::size_t synth_epochs = 100;
  double synth_variability = 0.0;
};

// Accuracy [%] reported for the original EEG recordings, used only as a
// side-by-side comparison column.
struct ReferenceCell {
  const char* band;
  double linear_p2, linear_p4, rbf_p2, rbf_p4;
};
constexpr ReferenceCell kReferenceBandTable[] = {
    {"delta", 48.75, 48.31, 51.74, 49.30}, {"theta", 43.73, 44.08, 46.98, 45.21},
    {"alpha", 47.12, 46.58, 52.57, 50.26}, {"beta", 54.65, 54.42, 60.94, 58.11},
    {"gamma", 51.93, 52.15, 57.80, 55.81}, {"total", 63.81, 65.02, 73.78, 72.95},
};

std::string band_comparison_markdown(const std::vector<vigil::BandAblationCell>& cells) {
  std::string out = "| Band | Kernel | P | Measured [%] | Reference [%] | Difference |\n|---|---|---|---|---|---|\n";
  for (const auto& c : cells) {
    const ReferenceCell* ref = nullptr;
    for (const auto& r : kReferenceBandTable)
      if (c.band == r.band) ref = &r;
    const auto it = c.result.metrics.find("accuracy_eq6");
    if (!ref || it == c.result.metrics.end()) continue;
    const bool lin = c.kernel == vigil::KernelKind::Linear;
    const double want = lin ? (c.p == 2 ? ref->linear_p2 : ref->linear_p4) : (c.p == 2 ? ref->rbf_p2 : ref->rbf_p4);
    const double got = 100.0 * it->second.mean;
    out += "| " + c.band + " | " + vigil::to_string(c.kernel) + " | " + std::to_string(c.p) + " | " +
           vigil::detail::fixed(got) + " | " + vigil::detail::fixed(want) + " | " + vigil::detail::fixed(got - want) +
           " |\n";
  }
  return out;
}

int cmd_run(const std::string& protocol, const RunArgs& a) {
  json merged;
  const auto cfg = a.flags.resolve(merged);
  const fs::path dir(a.out);
  prepare_out_dir(dir);

  std::vector<vigil::Session> sessions;
  json data_source;
  if (a.synth_users > 0) {
    if (!a.inputs.empty()) throw UsageError("give either session inputs or --synth-users, not both");
    auto sc = scaled_synth(a.synth_epochs);
    sc.seed = vigil::derive_seed(cfg.seed, 0x5e55);
    sc.subject_variability = a.synth_variability;
    sessions = vigil::synth_cohort(sc, a.synth_users);
    data_source = {{"synthetic", {{"users", a.synth_users}, {"epochs", a.synth_epochs},
                                  {"variability", a.synth_variability}}}};
  } else {
    const auto paths = expand_inputs(a.inputs);
    sessions = load_all(paths);
    json files = json::array();
    for (const auto& p : paths) files.push_back({{"file", p.filename().string()}, {"fnv1a64", file_hash(p)}});
    data_source = {{"files", files}};
  }

  json report{{"protocol", protocol}, {"config", vigil::to_json(cfg)}, {"data", data_source}};
  std::string md = "# " + protocol + "\n\n", csv;
  if (protocol == "band-ablation") {
    const auto cells = vigil::run_band_ablation(sessions, cfg);
    report["cells"] = vigil::to_json(cells);
    md += vigil::band_ablation_markdown(cells);
    csv = vigil::band_ablation_csv(cells);
    write_text(dir / "comparison.md", band_comparison_markdown(cells));
  } else if (protocol == "channel-ablation") {
    const auto rows = vigil::run_channel_ablation(sessions, cfg);
    report["channels"] = vigil::to_json(rows);
    md += vigil::channel_ablation_markdown(rows);
    csv = vigil::channel_ablation_csv(rows);
  } else {
    const auto res = vigil::run_user_study(sessions, cfg);
    report["result"] = vigil::to_json(res);
    md += vigil::user_study_markdown(res);
    csv = vigil::user_study_csv(res);
  }

  json prov_config = vigil::to_json(cfg);
  prov_config["data"] = data_source;
  const auto hash = vigil::hex64(vigil::fnv1a64(prov_config.dump()));
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_text(dir / "report.md", md);
  write_text(dir / "report.csv", csv);
  write_provenance(dir, "run " + protocol, hash, cfg.seed, prov_config);
  std::cout << md;
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_stats_moe(const std::string& p_text, std::uint64_t n) {
  double p = 0.0;
  const auto slash = p_text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      p = std::stod(p_text, &used);
      if (used != p_text.size()) throw std::invalid_argument(p_text);
    } else {
      const std::string num = p_text.substr(0, slash), den = p_text.substr(slash + 1);
      const double a = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(p_text);
      const double b = std::stod(den, &used);
      if (used != den.size() || b == 0.0) throw std::invalid_argument(p_text);
      p = a / b;
    }
  } catch (const std::logic_error&) {
    throw UsageError("--p: expected a proportion such as 0.34 or 114/333, got '" + p_text + "'");
  }
  double moe = 0.0;
  try {
    moe = vigil::margin_of_error(p, n);
  } catch (const vigil::DomainError& e) {
    throw UsageError(e.what());
  }
  std::printf("%.4f\n", moe);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG vigilance estimation toolkit"};
  app.set_version_flag("--version", std::string(VIGIL_VERSION));
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress warnings");
  app.fallthrough();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a seeded synthetic cohort");
  synth_cmd->add_option("--users", synth.users, "number of sessions");
  synth_cmd->add_option("--epochs", synth.epochs, "8 s epochs per session");
  synth_cmd->add_option("--seed", synth.seed, "master seed");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->add_option("--fs", synth.fs, "sampling rate [Hz]");
  synth_cmd->add_option("--variability", synth.variability, "between-subject spread (0 = identical subjects)");
  synth_cmd->add_option("--format", synth.format, "binary | csv");

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "write per-epoch feature rows as CSV");
  extract.flags.add_to(extract_cmd, false);
  extract_cmd->add_option("--out", extract.out, "output directory")->required();
  extract_cmd->add_option("inputs", extract.inputs, "session files or directories")->required();

  auto* run_cmd = app.add_subcommand("run", "run an experiment protocol");
  run_cmd->require_subcommand(1);
  run_cmd->fallthrough();
  RunArgs run;
  std::string run_protocol;
  for (const char* name : {"band-ablation", "channel-ablation", "user-study"}) {
    auto* sub = run_cmd->add_subcommand(name);
    run.flags.add_to(sub, true);
    sub->add_option("--out", run.out, "output directory")->required();
    sub->add_option("--synth-users", run.synth_users, "use a synthetic cohort of this many users");
    sub->add_option("--synth-epochs", run.synth_epochs, "epochs per synthetic session");
    sub->add_option("--synth-variability", run.synth_variability, "between-subject spread of the synthetic cohort");
    sub->add_option("inputs", run.inputs, "session files or directories");
    sub->callback([&run_protocol, name] { run_protocol = name; });
  }
  std::string moe_p;
  std::uint64_t moe_n = 0;
  auto* moe_cmd = run_cmd->add_subcommand("stats-moe", "95% margin of error of a proportion");
  moe_cmd->add_option("--p", moe_p, "proportion, e.g. 0.34 or 114/333")->required();
  moe_cmd->add_option("--n", moe_n, "sample count")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (quiet) vigil::set_warning_sink([](const std::string&) {});

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*extract_cmd) return cmd_extract(extract);
    if (*moe_cmd) return cmd_stats_moe(moe_p, moe_n);
    return cmd_run(run_protocol, run);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vigil::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vigil::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
