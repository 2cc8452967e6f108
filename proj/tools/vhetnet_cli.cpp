// vhetnet: ingest CDR data, synthesize traffic, estimate sleeping-SBS loads,
// optimize switching states and run the experiment sweeps.
//
// Settings resolve as profile defaults < --config file < flags.
// Exit codes: 0 ok, 1 usage or configuration, 2 data, 3 infeasible.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vhetnet/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vhetnet;

namespace {

struct Common {
  std::string config_path;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string out = ".";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--profile", c.profile, "Preset: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  cmd->add_option("--seed", c.seed, "Base seed");
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output directory");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ExperimentConfig resolve(const Common& c) {
  json file = json::object();
  if (!c.config_path.empty()) file = read_json_file(c.config_path);
  ExperimentConfig cfg =
      load_config(file, c.profile.empty() ? std::nullopt : std::optional<std::string>(c.profile));
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path out_dir(const Common& c) {
  fs::path p(c.out);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string load_csv_text(const LoadSeries& s) {
  std::ostringstream os;
  write_load_csv(os, s);
  return os.str();
}

std::vector<std::size_t> parse_id_list(const std::string& text) {
  std::vector<std::size_t> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (detail::trim(item).empty()) continue;
    std::size_t v = 0;
    if (!detail::parse_number(item, v)) throw ConfigError("bad SBS id '" + item + "' in --sleepers");
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ConfigError("--sleepers lists an id twice");
  return ids;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> inputs;
  std::optional<std::size_t> n_sbs;
};

int cmd_ingest(const Common& common, const IngestArgs& a) {
  const ExperimentConfig cfg = resolve(common);
  ActivityAggregator agg(cfg.data.activity_weights, cfg.slot_minutes);
  json files = json::array();
  std::size_t records = 0;
  for (const auto& path : a.inputs) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    const CdrParseReport rep = parse_cdr(in, [&](const CdrRecord& r) { agg.add(r); });
    json issues = json::array();
    for (std::size_t i = 0; i < rep.malformed.size() && i < 20; ++i)
      issues.push_back({{"line", rep.malformed[i].line}, {"message", rep.malformed[i].message}});
    files.push_back({{"path", path},
                     {"lines", rep.lines},
                     {"records", rep.records},
                     {"header_skipped", rep.header_skipped},
                     {"malformed", rep.malformed.size()},
                     {"first_issues", issues}});
    records += rep.records;
  }
  if (records == 0) throw DataError("no CDR records in the input");
  ActivityMatrix m = agg.finish();

  std::vector<SbsPlacement> placements;
  if (a.n_sbs) {
    Rng rng(mix_seed(cfg.seed, detail::kDataStream));
    placements = place_sbs(m.squares, *a.n_sbs, rng);
  } else {
    for (std::size_t i = 0; i < m.squares.size(); ++i) placements.push_back({i, m.squares[i], square_center(m.squares[i])});
  }
  std::vector<int> squares;
  for (const auto& p : placements) squares.push_back(p.square_id);
  const ActivityMatrix sel = m.select(squares);
  const LoadSeries loads = normalize_loads(sel, cfg.data.normalization, cfg.slot_minutes);

  const fs::path dir = out_dir(common);
  write_text(dir / "loads.csv", load_csv_text(loads));
  write_json(dir / "placements.json", placements_to_json(placements));
  write_json(dir / "ingest_report.json", {{"files", files},
                                          {"records", records},
                                          {"squares_seen", m.squares.size()},
                                          {"sbs", loads.sbs_count()},
                                          {"slots", loads.slot_count()},
                                          {"slot_minutes", cfg.slot_minutes},
                                          {"epoch_ms", m.epoch_ms},
                                          {"duplicate_cells", m.duplicate_cells},
                                          {"missing_cells", m.missing_cells},
                                          {"config_hash", config_hash(cfg)}});
  std::cout << "ingested " << records << " records into " << loads.sbs_count() << " SBSs x " << loads.slot_count()
            << " slots (" << m.duplicate_cells << " duplicate cells summed, " << m.missing_cells
            << " missing cells zero-filled)\n";
  return 0;
}

int cmd_synth(const Common& common) {
  ExperimentConfig cfg = resolve(common);
  cfg.data.source = DataSource::Synthetic;
  cfg.validate();
  const Dataset d = build_dataset(cfg);
  const fs::path dir = out_dir(common);
  write_text(dir / "loads.csv", load_csv_text(d.history));
  write_json(dir / "placements.json", placements_to_json(d.placements));
  std::cout << "wrote " << d.history.sbs_count() << " SBSs x " << d.history.slot_count() << " slots to "
            << (dir / "loads.csv").string() << "\n";
  return 0;
}

struct EstimateArgs {
  std::optional<std::string> estimator;
  std::optional<std::size_t> neighbors;
  std::optional<unsigned> exponent;
  std::optional<std::size_t> layers;
  std::size_t slot = 0;
  std::optional<std::string> sleepers;
};

int cmd_estimate(const Common& common, const EstimateArgs& a) {
  ExperimentConfig cfg = resolve(common);
  if (a.estimator) {
    json e = {{"kind", *a.estimator}};
    cfg.estimator = detail::read_estimator(e, "estimator", cfg.estimator);
  }
  std::visit(
      [&](auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MlcConfig>) {
          if (a.layers) e.layers = *a.layers;
        } else {
          if (a.neighbors) e.neighbors = *a.neighbors;
          if (a.exponent) e.exponent = *a.exponent;
        }
      },
      cfg.estimator);
  cfg.validate();
  const Dataset d = build_dataset(cfg);
  if (a.slot >= d.day.slot_count()) throw ConfigError("--slot outside the day");

  std::vector<std::size_t> sleepers =
      a.sleepers ? parse_id_list(*a.sleepers) : detail::draw_sleepers(cfg.seed, d.day.sbs_count(), cfg.sleepers_for(d.day.sbs_count()));
  const MaskedSlot ms = mask_sleepers(d.day.slot_loads(a.slot), sleepers, a.slot);
  EstimatorConfig est = cfg.estimator;
  if (auto* r = std::get_if<RandomConfig>(&est)) r->seed = mix_seed(cfg.seed, a.slot);
  if (auto* m = std::get_if<MlcConfig>(&est)) m->seed = mix_seed(cfg.seed, a.slot);
  const EstimateResult res = estimate(est, ms.snapshot, d.placements, &d.history);

  json rows = json::array();
  ErrorAccumulator acc;
  for (std::size_t k = 0; k < res.estimates.size(); ++k) {
    const auto& e = res.estimates[k];
    acc.add(ms.truth[k], e.value, cfg.epsilon);
    rows.push_back({{"sbs_id", e.sbs_id}, {"estimate", e.value}, {"actual", ms.truth[k]}, {"neighbors", e.neighbors}});
  }
  const json report = {{"estimator", estimator_name(est)},
                       {"slot", a.slot},
                       {"sleepers", sleepers},
                       {"estimates", rows},
                       {"mean_error", acc.scored ? json(acc.mean()) : json(nullptr)},
                       {"scored", acc.scored},
                       {"excluded", acc.excluded},
                       {"seed", cfg.seed},
                       {"config_hash", config_hash(cfg)},
                       {"config", config_to_json(cfg)}};
  const fs::path path = out_dir(common) / ("estimate_" + cfg.profile + "_" + std::to_string(cfg.seed) + ".json");
  write_json(path, report);
  std::cout << estimator_name(est) << ": " << res.estimates.size() << " sleepers estimated";
  if (acc.scored) std::cout << ", mean error " << acc.mean();
  std::cout << " -> " << path.string() << "\n";
  return 0;
}

SwitchingProblem problem_from_instance(const json& j, const ExperimentConfig& cfg) {
  detail::check_keys(j, "instance", {"loads", "mbs_base_load", "haps_base_load", "offload_scale_mbs",
                                     "offload_scale_haps", "power"});
  std::vector<double> loads;
  if (!j.contains("loads")) throw ConfigError("instance.loads is required");
  detail::read(j, "instance", "loads", loads);
  ExperimentConfig c = cfg;
  detail::read(j, "instance", "mbs_base_load", c.switching.mbs_base_load);
  detail::read(j, "instance", "haps_base_load", c.switching.haps_base_load);
  detail::read(j, "instance", "offload_scale_mbs", c.switching.scale.mbs);
  detail::read(j, "instance", "offload_scale_haps", c.switching.scale.haps);
  if (j.contains("power")) {
    const auto& p = j["power"];
    detail::check_keys(p, "instance.power", {"haps", "mbs", "sbs"});
    if (p.contains("haps")) detail::read_params(p["haps"], "instance.power.haps", c.haps);
    if (p.contains("mbs")) detail::read_params(p["mbs"], "instance.power.mbs", c.mbs);
    if (p.contains("sbs")) detail::read_params(p["sbs"], "instance.power.sbs", c.sbs);
  }
  for (double l : loads)
    if (!(l >= 0.0 && l <= 1.0)) throw DataError("instance load outside [0,1]");
  if (loads.empty()) throw DataError("instance has no SBS loads");
  return make_problem(c, std::move(loads));
}

struct OptimizeArgs {
  std::string instance;
  std::optional<std::string> optimizer;
  std::size_t slot = 0;
  std::size_t s = 10;
};

int cmd_optimize(const Common& common, const OptimizeArgs& a) {
  ExperimentConfig cfg = resolve(common);
  if (a.optimizer) cfg.switching.optimizer = detail::read_enum(json{{"optimizer", *a.optimizer}}, "switching", "optimizer",
                                                               cfg.switching.optimizer,
                                                               {{"auto", OptimizerKind::Auto},
                                                                {"exhaustive", OptimizerKind::Exhaustive},
                                                                {"greedy", OptimizerKind::Greedy}});
  cfg.validate();
  SwitchingProblem p;
  std::string origin;
  if (!a.instance.empty()) {
    p = problem_from_instance(read_json_file(a.instance), cfg);
    origin = a.instance;
  } else {
    const Dataset d = build_dataset(cfg);
    if (a.slot >= d.day.slot_count()) throw ConfigError("--slot outside the day");
    if (a.s < 1 || a.s > d.day.sbs_count()) throw ConfigError("--s outside [1, n_sbs]");
    const auto loads = d.day.slot_loads(a.slot);
    p = make_problem(cfg, std::vector<double>(loads.begin(), loads.begin() + static_cast<std::ptrdiff_t>(a.s)));
    origin = d.source + " slot " + std::to_string(a.slot);
  }
  const SwitchingSolution sol = optimize(p, cfg.switching);
  json report = solution_to_json(sol);
  report["instance"] = origin;
  report["loads"] = p.loads;
  report["config_hash"] = config_hash(cfg);
  const fs::path path = out_dir(common) / ("optimize_" + cfg.profile + "_" + std::to_string(cfg.seed) + ".json");
  write_json(path, report);
  std::cout << sol.optimizer << ": state " << sol.state.bitstring() << ", power " << sol.power << " W"
            << (sol.feasible ? "" : " (infeasible)") << " -> " << path.string() << "\n";
  if (!sol.feasible) throw InfeasibleError("no switching state satisfies the MBS/HAPS capacity limits");
  return 0;
}

int cmd_sweep(const Common& common, const std::string& experiment) {
  const ExperimentConfig cfg = resolve(common);
  cfg.validate();
  const fs::path dir = out_dir(common);
  const std::vector<std::string> names =
      experiment == "all" ? experiment_names() : std::vector<std::string>{experiment};
  const std::string hash = config_hash(cfg);
  for (const auto& name : names) {
    const Report rep = run_experiment(name, cfg, common.workers);
    const std::string stem = report_stem(name, cfg);
    std::ostringstream csv;
    write_csv(csv, rep.table, hash);
    write_text(dir / (stem + ".csv"), csv.str());
    write_json(dir / (stem + ".json"), rep.metadata);
    std::cout << name << ": " << rep.table.rows.size() << " rows -> " << (dir / (stem + ".csv")).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sleeping-SBS load estimation and cell switching in a HAPS-assisted network"};
  app.require_subcommand(1);

  Common common;
  IngestArgs ingest;
  EstimateArgs est;
  OptimizeArgs opt;
  std::string experiment = "all";

  auto* c_ingest = app.add_subcommand("ingest", "Aggregate CDR files into a normalized load CSV");
  add_common(c_ingest, common);
  c_ingest->add_option("inputs", ingest.inputs, "CDR text files")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--n-sbs", ingest.n_sbs, "Number of squares to keep (default: all)");

  auto* c_synth = app.add_subcommand("synth", "Generate synthetic spatially correlated traffic");
  add_common(c_synth, common);

  auto* c_est = app.add_subcommand("estimate", "Estimate sleeping-SBS loads at one slot");
  add_common(c_est, common);
  c_est->add_option("--estimator", est.estimator, "mlc, distance or random")
      ->check(CLI::IsMember({"mlc", "distance", "random"}));
  c_est->add_option("--neighbors", est.neighbors, "Neighbor count N");
  c_est->add_option("--exponent", est.exponent, "Weighting exponent n");
  c_est->add_option("--layers", est.layers, "MLC layers L");
  c_est->add_option("--slot", est.slot, "Slot of the representative day");
  c_est->add_option("--sleepers", est.sleepers, "Comma-separated sleeping SBS ids (default: random draw)");

  auto* c_opt = app.add_subcommand("optimize", "Solve one cell-switching instance");
  add_common(c_opt, common);
  c_opt->add_option("--instance", opt.instance, "Instance JSON with loads and optional overrides")
      ->check(CLI::ExistingFile);
  c_opt->add_option("--optimizer", opt.optimizer, "auto, exhaustive or greedy");
  c_opt->add_option("--slot", opt.slot, "Slot of the representative day (without --instance)");
  c_opt->add_option("--s", opt.s, "Number of SBSs taken from the dataset (without --instance)");

  auto* c_sweep = app.add_subcommand("sweep", "Run experiment sweeps and write CSV/JSON reports");
  add_common(c_sweep, common);
  c_sweep->add_option("--experiment", experiment, "fig2, fig3, fig4, fig5 or all")
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(common, ingest);
    if (c_synth->parsed()) return cmd_synth(common);
    if (c_est->parsed()) return cmd_estimate(common, est);
    if (c_opt->parsed()) return cmd_optimize(common, opt);
    if (c_sweep->parsed()) return cmd_sweep(common, experiment);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
