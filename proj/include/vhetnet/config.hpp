#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhetnet/cell_switching.hpp"
#include "vhetnet/error.hpp"
#include "vhetnet/estimators.hpp"
#include "vhetnet/power_model.hpp"
#include "vhetnet/traffic_data.hpp"

namespace vhetnet {

enum class DataSource { Synthetic, Milan, Csv };
enum class OptimizerKind { Auto, Exhaustive, Greedy };

struct DataConfig {
  DataSource source = DataSource::Synthetic;
  std::vector<std::string> milan_files;
  std::string load_csv;
  std::string placements;
  ActivityWeights activity_weights = kUnitWeights;
  NormalizationMode normalization = NormalizationMode::GlobalMax;
};

struct SyntheticConfig {
  int grid_side = 30;
  double correlation_length_m = 1500.0;
  std::size_t bumps = 12;
  double floor = 0.1;
  double noise = 0.01;
};

struct SwitchingConfig {
  double mbs_base_load = 0.5;
  double haps_base_load = 0.7;
  OffloadScale scale;
  std::size_t exhaustive_cap = kExhaustiveCap;
  std::size_t exact_inner_limit = kExactInnerLimit;
  OptimizerKind optimizer = OptimizerKind::Auto;
};

struct SweepConfig {
  std::vector<std::size_t> neighbors{1, 2, 5, 10, 20, 30, 40, 50, 60, 70, 80};
  std::vector<unsigned> exponents{1, 3, 5, 10};
  std::vector<std::size_t> layers{1, 2, 3, 4, 5, 6, 7};
  std::vector<std::size_t> s_values{5, 10, 15};
  std::vector<std::size_t> decision_layers{1, 3, 5, 7};
  unsigned comparison_exponent = 1;
  std::optional<std::size_t> k_override = 3;
  std::size_t kmeans_max_iter = 100;
  double kmeans_tol = 1e-9;
  double distance_floor_m = 1.0;
};

struct ExperimentConfig {
  std::string profile = "desk";
  std::uint64_t seed = 1;
  std::size_t n_sbs = 100;
  std::size_t n_slots = 144;
  unsigned slot_minutes = 10;
  std::size_t n_days = 30;
  std::size_t iterations = 50;
  double sleep_fraction = 0.1;
  double epsilon = 1e-3;
  DataConfig data;
  SyntheticConfig synthetic;
  PowerParams haps = defaults::haps;
  PowerParams mbs = defaults::mbs;
  PowerParams sbs = defaults::sbs;
  SwitchingConfig switching;
  SweepConfig sweep;
  EstimatorConfig estimator = DistanceConfig{5, 5u, 1.0};

  // Sleepers drawn from a population of n.
  std::size_t sleepers_for(std::size_t n) const {
    const auto k = static_cast<std::size_t>(sleep_fraction * static_cast<double>(n) + 0.5);
    return std::max<std::size_t>(1, std::min(k, n));
  }

  void validate() const {
    if (n_sbs < 2) throw ConfigError("n_sbs must be at least 2");
    if (slot_minutes == 0 || kMinutesPerDay % slot_minutes != 0) throw ConfigError("slot_minutes must divide 1440");
    if (n_slots * slot_minutes != kMinutesPerDay) throw ConfigError("n_slots * slot_minutes must equal 1440");
    if (n_days == 0) throw ConfigError("n_days must be positive");
    if (iterations == 0) throw ConfigError("iterations must be positive");
    if (!(sleep_fraction > 0.0 && sleep_fraction < 1.0))
      throw ConfigError("sleep_fraction must lie strictly between 0 and 1");
    if (sleepers_for(n_sbs) >= n_sbs) throw ConfigError("sleep_fraction leaves no active SBS");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    try {
      haps.validate();
      mbs.validate();
      sbs.validate();
      vhetnet::validate(estimator);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    if (synthetic.grid_side < 1 || static_cast<std::size_t>(synthetic.grid_side * synthetic.grid_side) < n_sbs)
      throw ConfigError("synthetic.grid_side too small for n_sbs");
    if (!(synthetic.correlation_length_m > 0.0) || synthetic.bumps == 0 || !(synthetic.noise >= 0.0) ||
        !(synthetic.floor >= 0.0 && synthetic.floor <= 1.0))
      throw ConfigError("bad synthetic field settings");
    if (!(switching.mbs_base_load >= 0.0) || !(switching.haps_base_load >= 0.0))
      throw ConfigError("base loads must be non-negative");
    if (!(switching.scale.mbs >= 0.0) || !(switching.scale.haps >= 0.0))
      throw ConfigError("offload scales must be non-negative");
    if (switching.exhaustive_cap > 30) throw ConfigError("switching.exhaustive_cap above 30 is not supported");
    const std::size_t actives = n_sbs - sleepers_for(n_sbs);
    for (std::size_t n : sweep.neighbors)
      if (n < 1 || n > actives)
        throw ConfigError("sweep.neighbors value " + std::to_string(n) + " outside [1, " + std::to_string(actives) + "]");
    for (unsigned e : sweep.exponents)
      if (e < 1) throw ConfigError("sweep.exponents must be at least 1");
    for (std::size_t l : sweep.layers)
      if (l < 1) throw ConfigError("sweep.layers must be at least 1");
    for (std::size_t l : sweep.decision_layers)
      if (l < 1) throw ConfigError("sweep.decision_layers must be at least 1");
    for (std::size_t s : sweep.s_values)
      if (s < 1 || s > n_sbs) throw ConfigError("sweep.s_values must lie in [1, n_sbs]");
    if (sweep.comparison_exponent < 1) throw ConfigError("sweep.comparison_exponent must be at least 1");
    if (sweep.k_override && *sweep.k_override < 1) throw ConfigError("sweep.k_override must be at least 1");
    if (data.source == DataSource::Milan && data.milan_files.empty()) throw ConfigError("data.milan_files is empty");
    if (data.source == DataSource::Csv && (data.load_csv.empty() || data.placements.empty()))
      throw ConfigError("data.load_csv and data.placements are required for the csv source");
  }
};

// Full-size run (5000 SBSs, 300 iterations) versus a desk-sized run.
inline ExperimentConfig profile_defaults(const std::string& name) {
  ExperimentConfig c;
  if (name == "desk") return c;
  if (name == "paper") {
    c.profile = "paper";
    c.n_sbs = 5000;
    c.iterations = 300;
    c.synthetic.grid_side = 100;
    c.synthetic.correlation_length_m = 2500.0;
    c.synthetic.bumps = 60;
    c.sweep.neighbors = {1, 5, 10, 20, 50, 100, 200, 300, 400, 500};
    c.sweep.s_values = {10, 20, 30, 40, 50, 60, 70};
    return c;
  }
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace detail {

using json = nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError((path.empty() ? std::string("config") : path) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown config key: " + join_path(path, it.key()));
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + join_path(path, key) + " has the wrong type");
  }
}

inline void read_params(const json& obj, const std::string& path, PowerParams& p) {
  check_keys(obj, path, {"operational_w", "amplifier_slope", "transmit_w", "sleep_w"});
  read(obj, path, "operational_w", p.operational_power);
  read(obj, path, "amplifier_slope", p.amplifier_slope);
  read(obj, path, "transmit_w", p.transmit_power);
  read(obj, path, "sleep_w", p.sleep_power);
}

inline json params_json(const PowerParams& p) {
  return {{"operational_w", p.operational_power},
          {"amplifier_slope", p.amplifier_slope},
          {"transmit_w", p.transmit_power},
          {"sleep_w", p.sleep_power}};
}

inline json optional_json(const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); }

inline void read_optional(const json& obj, const std::string& path, const char* key, std::optional<std::size_t>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  std::size_t v = 0;
  read(obj, path, key, v);
  out = v;
}

inline void read_optional(const json& obj, const std::string& path, const char* key, std::optional<unsigned>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
    return;
  }
  unsigned v = 0;
  read(obj, path, key, v);
  out = v;
}

inline json estimator_json(const EstimatorConfig& c) {
  struct V {
    json operator()(const MlcConfig& m) const {
      return {{"kind", "mlc"},
              {"layers", m.layers},
              {"k_override", optional_json(m.k_override)},
              {"kmeans_max_iter", m.kmeans_max_iter},
              {"kmeans_tol", m.kmeans_tol},
              {"seed", m.seed}};
    }
    json operator()(const DistanceConfig& d) const {
      return {{"kind", "distance"},
              {"neighbors", d.neighbors},
              {"exponent", d.exponent ? json(*d.exponent) : json(nullptr)},
              {"distance_floor_m", d.distance_floor_m}};
    }
    json operator()(const RandomConfig& r) const {
      return {{"kind", "random"},
              {"neighbors", r.neighbors},
              {"exponent", r.exponent ? json(*r.exponent) : json(nullptr)},
              {"seed", r.seed},
              {"distance_floor_m", r.distance_floor_m}};
    }
  };
  return std::visit(V{}, c);
}

inline EstimatorConfig read_estimator(const json& obj, const std::string& path, const EstimatorConfig& current) {
  if (!obj.is_object()) throw ConfigError(path + " must be a JSON object");
  std::string kind;
  if (obj.contains("kind")) read(obj, path, "kind", kind);
  else kind = estimator_name(current).substr(0, estimator_name(current).find('_'));

  if (kind == "mlc") {
    check_keys(obj, path, {"kind", "layers", "k_override", "kmeans_max_iter", "kmeans_tol", "seed"});
    MlcConfig m = std::holds_alternative<MlcConfig>(current) ? std::get<MlcConfig>(current) : MlcConfig{};
    read(obj, path, "layers", m.layers);
    read_optional(obj, path, "k_override", m.k_override);
    read(obj, path, "kmeans_max_iter", m.kmeans_max_iter);
    read(obj, path, "kmeans_tol", m.kmeans_tol);
    read(obj, path, "seed", m.seed);
    return m;
  }
  if (kind == "distance") {
    check_keys(obj, path, {"kind", "neighbors", "exponent", "distance_floor_m"});
    DistanceConfig d = std::holds_alternative<DistanceConfig>(current) ? std::get<DistanceConfig>(current) : DistanceConfig{};
    read(obj, path, "neighbors", d.neighbors);
    read_optional(obj, path, "exponent", d.exponent);
    read(obj, path, "distance_floor_m", d.distance_floor_m);
    return d;
  }
  if (kind == "random") {
    check_keys(obj, path, {"kind", "neighbors", "exponent", "seed", "distance_floor_m"});
    RandomConfig r = std::holds_alternative<RandomConfig>(current) ? std::get<RandomConfig>(current) : RandomConfig{};
    read(obj, path, "neighbors", r.neighbors);
    read_optional(obj, path, "exponent", r.exponent);
    read(obj, path, "seed", r.seed);
    read(obj, path, "distance_floor_m", r.distance_floor_m);
    return r;
  }
  throw ConfigError(join_path(path, "kind") + " must be mlc, distance or random");
}

template <typename E>
E read_enum(const json& obj, const std::string& path, const char* key, E current,
            std::initializer_list<std::pair<const char*, E>> names) {
  if (!obj.contains(key)) return current;
  std::string v;
  read(obj, path, key, v);
  for (const auto& [n, e] : names)
    if (v == n) return e;
  throw ConfigError("config key " + join_path(path, key) + " has unsupported value '" + v + "'");
}

inline const char* source_name(DataSource s) {
  return s == DataSource::Synthetic ? "synthetic" : s == DataSource::Milan ? "milan" : "csv";
}
inline const char* optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::Auto ? "auto" : k == OptimizerKind::Exhaustive ? "exhaustive" : "greedy";
}

}  // namespace detail

// Overlays `j` on `base`. Unknown keys are rejected with their full path.
inline ExperimentConfig apply_config_json(ExperimentConfig c, const nlohmann::json& j) {
  using detail::read;
  detail::check_keys(j, "", {"profile", "seed", "n_sbs", "n_slots", "slot_minutes", "n_days", "iterations",
                             "sleep_fraction", "epsilon", "data", "synthetic", "power", "switching", "sweep",
                             "estimator"});
  read(j, "", "profile", c.profile);
  read(j, "", "seed", c.seed);
  read(j, "", "n_sbs", c.n_sbs);
  read(j, "", "n_slots", c.n_slots);
  read(j, "", "slot_minutes", c.slot_minutes);
  read(j, "", "n_days", c.n_days);
  read(j, "", "iterations", c.iterations);
  read(j, "", "sleep_fraction", c.sleep_fraction);
  read(j, "", "epsilon", c.epsilon);

  if (j.contains("data")) {
    const auto& d = j["data"];
    detail::check_keys(d, "data", {"source", "milan_files", "load_csv", "placements", "activity_weights", "normalization"});
    c.data.source = detail::read_enum(d, "data", "source", c.data.source,
                                      {{"synthetic", DataSource::Synthetic}, {"milan", DataSource::Milan}, {"csv", DataSource::Csv}});
    read(d, "data", "milan_files", c.data.milan_files);
    read(d, "data", "load_csv", c.data.load_csv);
    read(d, "data", "placements", c.data.placements);
    read(d, "data", "activity_weights", c.data.activity_weights);
    c.data.normalization = detail::read_enum(d, "data", "normalization", c.data.normalization,
                                             {{"global_max", NormalizationMode::GlobalMax},
                                              {"per_sbs_max", NormalizationMode::PerSbsMax}});
  }
  if (j.contains("synthetic")) {
    const auto& s = j["synthetic"];
    detail::check_keys(s, "synthetic", {"grid_side", "correlation_length_m", "bumps", "floor", "noise"});
    read(s, "synthetic", "grid_side", c.synthetic.grid_side);
    read(s, "synthetic", "correlation_length_m", c.synthetic.correlation_length_m);
    read(s, "synthetic", "bumps", c.synthetic.bumps);
    read(s, "synthetic", "floor", c.synthetic.floor);
    read(s, "synthetic", "noise", c.synthetic.noise);
  }
  if (j.contains("power")) {
    const auto& p = j["power"];
    detail::check_keys(p, "power", {"haps", "mbs", "sbs"});
    if (p.contains("haps")) detail::read_params(p["haps"], "power.haps", c.haps);
    if (p.contains("mbs")) detail::read_params(p["mbs"], "power.mbs", c.mbs);
    if (p.contains("sbs")) detail::read_params(p["sbs"], "power.sbs", c.sbs);
  }
  if (j.contains("switching")) {
    const auto& s = j["switching"];
    detail::check_keys(s, "switching", {"mbs_base_load", "haps_base_load", "offload_scale_mbs", "offload_scale_haps",
                                        "exhaustive_cap", "exact_inner_limit", "optimizer"});
    read(s, "switching", "mbs_base_load", c.switching.mbs_base_load);
    read(s, "switching", "haps_base_load", c.switching.haps_base_load);
    read(s, "switching", "offload_scale_mbs", c.switching.scale.mbs);
    read(s, "switching", "offload_scale_haps", c.switching.scale.haps);
    read(s, "switching", "exhaustive_cap", c.switching.exhaustive_cap);
    read(s, "switching", "exact_inner_limit", c.switching.exact_inner_limit);
    c.switching.optimizer = detail::read_enum(s, "switching", "optimizer", c.switching.optimizer,
                                              {{"auto", OptimizerKind::Auto},
                                               {"exhaustive", OptimizerKind::Exhaustive},
                                               {"greedy", OptimizerKind::Greedy}});
  }
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    detail::check_keys(s, "sweep", {"neighbors", "exponents", "layers", "s_values", "decision_layers",
                                    "comparison_exponent", "k_override", "kmeans_max_iter", "kmeans_tol",
                                    "distance_floor_m"});
    read(s, "sweep", "neighbors", c.sweep.neighbors);
    read(s, "sweep", "exponents", c.sweep.exponents);
    read(s, "sweep", "layers", c.sweep.layers);
    read(s, "sweep", "s_values", c.sweep.s_values);
    read(s, "sweep", "decision_layers", c.sweep.decision_layers);
    read(s, "sweep", "comparison_exponent", c.sweep.comparison_exponent);
    detail::read_optional(s, "sweep", "k_override", c.sweep.k_override);
    read(s, "sweep", "kmeans_max_iter", c.sweep.kmeans_max_iter);
    read(s, "sweep", "kmeans_tol", c.sweep.kmeans_tol);
    read(s, "sweep", "distance_floor_m", c.sweep.distance_floor_m);
  }
  if (j.contains("estimator")) c.estimator = detail::read_estimator(j["estimator"], "estimator", c.estimator);
  return c;
}

// Profile defaults (explicit profile argument, else the file's "profile",
// else desk) overlaid with the file contents.
inline ExperimentConfig load_config(const nlohmann::json& j, const std::optional<std::string>& profile = std::nullopt) {
  std::string name = "desk";
  if (j.is_object() && j.contains("profile") && j["profile"].is_string()) name = j["profile"].get<std::string>();
  if (profile) name = *profile;
  ExperimentConfig c = apply_config_json(profile_defaults(name), j);
  c.profile = name;
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json data = {{"source", detail::source_name(c.data.source)},
               {"milan_files", c.data.milan_files},
               {"load_csv", c.data.load_csv},
               {"placements", c.data.placements},
               {"activity_weights", c.data.activity_weights},
               {"normalization", c.data.normalization == NormalizationMode::GlobalMax ? "global_max" : "per_sbs_max"}};
  json synthetic = {{"grid_side", c.synthetic.grid_side},
                    {"correlation_length_m", c.synthetic.correlation_length_m},
                    {"bumps", c.synthetic.bumps},
                    {"floor", c.synthetic.floor},
                    {"noise", c.synthetic.noise}};
  json power = {{"haps", detail::params_json(c.haps)}, {"mbs", detail::params_json(c.mbs)}, {"sbs", detail::params_json(c.sbs)}};
  json switching = {{"mbs_base_load", c.switching.mbs_base_load},
                    {"haps_base_load", c.switching.haps_base_load},
                    {"offload_scale_mbs", c.switching.scale.mbs},
                    {"offload_scale_haps", c.switching.scale.haps},
                    {"exhaustive_cap", c.switching.exhaustive_cap},
                    {"exact_inner_limit", c.switching.exact_inner_limit},
                    {"optimizer", detail::optimizer_name(c.switching.optimizer)}};
  json sweep = {{"neighbors", c.sweep.neighbors},
                {"exponents", c.sweep.exponents},
                {"layers", c.sweep.layers},
                {"s_values", c.sweep.s_values},
                {"decision_layers", c.sweep.decision_layers},
                {"comparison_exponent", c.sweep.comparison_exponent},
                {"k_override", detail::optional_json(c.sweep.k_override)},
                {"kmeans_max_iter", c.sweep.kmeans_max_iter},
                {"kmeans_tol", c.sweep.kmeans_tol},
                {"distance_floor_m", c.sweep.distance_floor_m}};
  return {{"profile", c.profile},
          {"seed", c.seed},
          {"n_sbs", c.n_sbs},
          {"n_slots", c.n_slots},
          {"slot_minutes", c.slot_minutes},
          {"n_days", c.n_days},
          {"iterations", c.iterations},
          {"sleep_fraction", c.sleep_fraction},
          {"epsilon", c.epsilon},
          {"data", data},
          {"synthetic", synthetic},
          {"power", power},
          {"switching", switching},
          {"sweep", sweep},
          {"estimator", detail::estimator_json(c.estimator)}};
}

// FNV-1a over the canonical (key-sorted) JSON dump, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline PowerParams& power_slot(ExperimentConfig& c, StationKind k) {
  return k == StationKind::Haps ? c.haps : k == StationKind::Mbs ? c.mbs : c.sbs;
}

}  // namespace vhetnet
