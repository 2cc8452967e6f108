#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "vhetnet/cell_switching.hpp"
#include "vhetnet/config.hpp"
#include "vhetnet/estimators.hpp"
#include "vhetnet/traffic_data.hpp"
#include "vhetnet/traffic_io.hpp"

namespace vhetnet {

// ---------------------------------------------------------------------------
// Dataset

struct Dataset {
  LoadSeries history;  // raw days, oldest first
  LoadSeries day;      // representative day: slot-wise mean over the history
  std::vector<SbsPlacement> placements;
  std::string source;
};

namespace detail {

inline constexpr std::uint64_t kDataStream = 0xda7a;

inline Dataset finish_dataset(LoadSeries raw, std::vector<SbsPlacement> placements, const ExperimentConfig& cfg,
                              std::string source) {
  const std::size_t spd = raw.slots_per_day();
  if (raw.sbs_count() != cfg.n_sbs)
    throw DataError(source + " data has " + std::to_string(raw.sbs_count()) + " SBSs, config wants " +
                    std::to_string(cfg.n_sbs));
  if (placements.size() != raw.sbs_count()) throw DataError("placements do not match the load series");
  Dataset d;
  d.source = std::move(source);
  d.placements = std::move(placements);
  if (raw.slot_count() == spd) {
    d.day = raw;
    d.history = std::move(raw);
    return d;
  }
  if (raw.slot_count() < cfg.n_days * spd)
    throw DataError("load series covers " + std::to_string(raw.slot_count()) + " slots, need " +
                    std::to_string(cfg.n_days * spd));
  d.history = raw.truncated(cfg.n_days * spd);
  d.day = daily_average(d.history, cfg.n_days);
  return d;
}

inline Dataset synthetic_dataset(const ExperimentConfig& cfg) {
  SynthOptions o;
  o.seed = mix_seed(cfg.seed, kDataStream);
  o.n_sbs = cfg.n_sbs;
  o.grid_side = cfg.synthetic.grid_side;
  o.correlation_length_m = cfg.synthetic.correlation_length_m;
  o.bumps = cfg.synthetic.bumps;
  o.floor = cfg.synthetic.floor;
  o.noise = cfg.synthetic.noise;
  o.slot_minutes = cfg.slot_minutes;
  o.diurnal_profile = default_diurnal_profile(cfg.n_slots);
  o.days = cfg.n_days;
  auto t = synthesize_traffic(o);
  return finish_dataset(std::move(t.loads), std::move(t.placements), cfg, "synthetic");
}

inline Dataset milan_dataset(const ExperimentConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, kDataStream));
  std::vector<int> all(kMilanSquares);
  for (int i = 0; i < kMilanSquares; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  auto placements = place_sbs(all, cfg.n_sbs, rng);
  std::vector<int> squares;
  for (const auto& p : placements) squares.push_back(p.square_id);

  ActivityAggregator agg(cfg.data.activity_weights, cfg.slot_minutes, std::nullopt, squares);
  for (const auto& path : cfg.data.milan_files) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    parse_cdr(in, [&](const CdrRecord& r) { agg.add(r); });
  }
  const ActivityMatrix m = agg.finish();
  if (m.squares.empty()) throw DataError("no activity records for the placed SBSs");
  return finish_dataset(normalize_loads(m.select(squares), cfg.data.normalization, cfg.slot_minutes),
                        std::move(placements), cfg, "milan");
}

inline Dataset csv_dataset(const ExperimentConfig& cfg) {
  std::ifstream in(cfg.data.load_csv);
  if (!in) throw DataError("cannot open " + cfg.data.load_csv);
  LoadSeries raw = read_load_csv(in, cfg.slot_minutes);
  std::ifstream pin(cfg.data.placements);
  if (!pin) throw DataError("cannot open " + cfg.data.placements);
  nlohmann::json pj;
  try {
    pj = nlohmann::json::parse(pin);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("placement file: ") + e.what());
  }
  return finish_dataset(std::move(raw), placements_from_json(pj), cfg, "csv");
}

}  // namespace detail

inline Dataset build_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.data.source) {
    case DataSource::Synthetic: return detail::synthetic_dataset(cfg);
    case DataSource::Milan: return detail::milan_dataset(cfg);
    case DataSource::Csv: return detail::csv_dataset(cfg);
  }
  throw ConfigError("unknown data source");
}

// ---------------------------------------------------------------------------
// Iteration runner

// Runs task(i) for i in [0, n) on up to `workers` threads. Results land in
// iteration order, so any reduction over them is worker-count invariant.
template <typename R>
std::vector<R> run_iterations(std::size_t n, std::size_t workers, const std::function<R(std::size_t)>& task) {
  std::vector<R> out(n);
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = task(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double min = 0.0;
  double max = 0.0;
};

inline Stats describe(std::span<const double> xs) {
  Stats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.min = *lo;
  s.max = *hi;
  return s;
}

// ---------------------------------------------------------------------------
// Estimation-error sweeps

enum class ErrorAxis { Neighbors, Exponent, Layers };

struct ErrorPoint {
  EstimatorConfig estimator;
  std::string method;
  std::optional<std::size_t> neighbors;
  std::optional<unsigned> exponent;
  std::optional<std::size_t> layers;
  ErrorAccumulator pooled;               // over all iterations, slots and sleepers
  std::vector<double> per_iteration;     // mean error of each iteration
  std::vector<std::size_t> excluded_per_iteration;

  Stats iteration_stats() const { return describe(per_iteration); }
};

struct ErrorSweepResult {
  std::string experiment;
  std::vector<ErrorPoint> points;

  const ErrorPoint* find(const std::string& method, std::optional<std::size_t> neighbors,
                         std::optional<unsigned> exponent, std::optional<std::size_t> layers) const {
    for (const auto& p : points)
      if (p.method == method && p.neighbors == neighbors && p.exponent == exponent && p.layers == layers) return &p;
    return nullptr;
  }
};

namespace detail {

inline ErrorPoint distance_point(std::size_t n, std::optional<unsigned> e, double floor) {
  ErrorPoint p;
  p.estimator = DistanceConfig{n, e, floor};
  p.method = estimator_name(p.estimator);
  p.neighbors = n;
  p.exponent = e;
  return p;
}

inline ErrorPoint random_point(std::size_t n, std::optional<unsigned> e, double floor) {
  ErrorPoint p;
  p.estimator = RandomConfig{n, e, 0, floor};
  p.method = estimator_name(p.estimator);
  p.neighbors = n;
  p.exponent = e;
  return p;
}

inline ErrorPoint mlc_point(std::size_t layers, const SweepConfig& sw) {
  ErrorPoint p;
  p.estimator = MlcConfig{layers, sw.k_override, sw.kmeans_max_iter, sw.kmeans_tol, 0, 8};
  p.method = "mlc";
  p.layers = layers;
  return p;
}

// Sweep points for one axis. Neighbors: weighted distance at every (n, N).
// Exponent: the same grid ordered by n. Layers: every method side by side,
// MLC over the layer list and the neighbor-based methods over N.
inline std::vector<ErrorPoint> error_points(const ExperimentConfig& cfg, ErrorAxis axis) {
  const auto& sw = cfg.sweep;
  std::vector<ErrorPoint> pts;
  switch (axis) {
    case ErrorAxis::Neighbors:
      for (unsigned e : sw.exponents)
        for (std::size_t n : sw.neighbors) pts.push_back(distance_point(n, e, sw.distance_floor_m));
      break;
    case ErrorAxis::Exponent:
      for (std::size_t n : sw.neighbors)
        for (unsigned e : sw.exponents) pts.push_back(distance_point(n, e, sw.distance_floor_m));
      break;
    case ErrorAxis::Layers:
      for (std::size_t l : sw.layers) pts.push_back(mlc_point(l, sw));
      for (std::size_t n : sw.neighbors) {
        pts.push_back(distance_point(n, std::nullopt, sw.distance_floor_m));
        pts.push_back(distance_point(n, sw.comparison_exponent, sw.distance_floor_m));
        pts.push_back(random_point(n, std::nullopt, sw.distance_floor_m));
        pts.push_back(random_point(n, sw.comparison_exponent, sw.distance_floor_m));
      }
      break;
  }
  return pts;
}

// Sleeping set of iteration `iter`: uniform without replacement, ascending.
inline std::vector<std::size_t> draw_sleepers(std::uint64_t iter_seed, std::size_t n, std::size_t count) {
  Rng rng(iter_seed);
  auto ids = rng.sample_indices(n, count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace detail

// Iteration i draws one sleeping set from seed (base + i) and scores every
// sweep point on all slots of the representative day.
inline ErrorSweepResult run_error_sweep(const ExperimentConfig& cfg, const Dataset& data, ErrorAxis axis,
                                        std::size_t workers = 1) {
  cfg.validate();
  ErrorSweepResult res;
  res.experiment = axis == ErrorAxis::Layers ? "fig3" : "fig2";
  res.points = detail::error_points(cfg, axis);
  const std::size_t n = data.day.sbs_count();
  const std::size_t spd = data.day.slot_count();
  const std::size_t n_sleep = cfg.sleepers_for(n);

  std::size_t max_layers = 0;
  for (const auto& p : res.points)
    if (p.layers) max_layers = std::max(max_layers, *p.layers);

  using Accs = std::vector<ErrorAccumulator>;
  const std::function<Accs(std::size_t)> task = [&](std::size_t it) {
    const std::uint64_t seed = cfg.seed + it;
    const auto sleepers = detail::draw_sleepers(seed, n, n_sleep);
    Accs accs(res.points.size());
    std::vector<EstimateResult> mlc_layers;
    for (std::size_t t = 0; t < spd; ++t) {
      const auto loads = data.day.slot_loads(t);
      const MaskedSlot ms = mask_sleepers(loads, sleepers, t);
      if (max_layers > 0) {
        MlcConfig m = std::get<MlcConfig>(detail::mlc_point(max_layers, cfg.sweep).estimator);
        m.seed = mix_seed(seed, t);
        mlc_layers = mlc_estimate_layers(ms.snapshot, &data.history, m);
      }
      for (std::size_t p = 0; p < res.points.size(); ++p) {
        const auto& pt = res.points[p];
        EstimateResult er;
        if (pt.layers) {
          er = mlc_layers[*pt.layers - 1];
        } else if (std::holds_alternative<RandomConfig>(pt.estimator)) {
          RandomConfig rc = std::get<RandomConfig>(pt.estimator);
          rc.seed = mix_seed(seed, t);
          er = estimate(rc, ms.snapshot, data.placements);
        } else {
          er = estimate(pt.estimator, ms.snapshot, data.placements);
        }
        for (std::size_t k = 0; k < ms.sleeping.size(); ++k) accs[p].add(ms.truth[k], er.estimates[k].value, cfg.epsilon);
      }
    }
    return accs;
  };
  const auto per_iter = run_iterations<Accs>(cfg.iterations, workers, task);
  for (const auto& accs : per_iter) {
    for (std::size_t p = 0; p < res.points.size(); ++p) {
      res.points[p].pooled.merge(accs[p]);
      res.points[p].per_iteration.push_back(accs[p].mean());
      res.points[p].excluded_per_iteration.push_back(accs[p].excluded);
    }
  }
  for (const auto& p : res.points)
    if (p.pooled.scored == 0) throw DataError("every sleeper load fell below epsilon for " + p.method);
  return res;
}

// ---------------------------------------------------------------------------
// Decision-change and power sweeps

struct SwitchingPoint {
  std::size_t s = 0;
  std::string estimator;  // "perfect" or "mlc"
  std::size_t layers = 0;  // 0 for perfect estimates
  std::string optimizer;
  std::vector<double> change;          // decision change rate per iteration
  std::vector<double> power_actual;    // optimum at actual loads
  std::vector<double> power_deployed;  // estimated-load decision priced at actual loads
  std::vector<double> power_naive;     // estimated-load decision priced at estimated loads
  std::vector<double> gap;             // deployed - actual
  std::vector<double> gap_relative;    // gap / actual
  ErrorAccumulator estimation;         // error of the sleeper estimates fed to the optimizer
  std::size_t retargeted = 0;
  std::size_t woken = 0;
  std::size_t infeasible_actual = 0;
};

struct SwitchingSweepResult {
  std::string experiment;
  std::vector<SwitchingPoint> points;

  const SwitchingPoint* find(std::size_t s, const std::string& estimator, std::size_t layers) const {
    for (const auto& p : points)
      if (p.s == s && p.estimator == estimator && p.layers == layers) return &p;
    return nullptr;
  }
};

inline bool use_exhaustive(const SwitchingConfig& sc, std::size_t s) {
  switch (sc.optimizer) {
    case OptimizerKind::Exhaustive: return true;
    case OptimizerKind::Greedy: return false;
    case OptimizerKind::Auto: return s <= sc.exhaustive_cap;
  }
  return false;
}

inline SwitchingSolution optimize(const SwitchingProblem& p, const SwitchingConfig& sc) {
  return use_exhaustive(sc, p.size()) ? optimize_exhaustive(p, sc.exhaustive_cap, sc.exact_inner_limit)
                                      : optimize_greedy(p);
}

inline SwitchingProblem make_problem(const ExperimentConfig& cfg, std::vector<double> loads) {
  SwitchingProblem p;
  p.power = NetworkPowerConfig::homogeneous(loads.size(), cfg.haps, cfg.mbs, cfg.sbs);
  p.loads = std::move(loads);
  p.mbs_base_load = cfg.switching.mbs_base_load;
  p.haps_base_load = cfg.switching.haps_base_load;
  p.scale = cfg.switching.scale;
  return p;
}

namespace detail {

struct SwitchingSample {
  double change = 0.0, actual = 0.0, deployed = 0.0, naive = 0.0;
  ErrorAccumulator err;
  bool retargeted = false;
  std::size_t woken = 0;
  bool infeasible = false;
};

}  // namespace detail

// Iteration i (seed base + i) picks a slot of the representative day and a
// random SBS order; the network of size s is the first s SBSs of that order.
// Within it sleepers_for(s) SBSs sleep, MLC estimates them from the whole
// population, and the optimizer runs on actual and on estimated loads. The
// "perfect" rows feed the actual loads through the estimated-load path.
inline SwitchingSweepResult run_switching_sweep(const ExperimentConfig& cfg, const Dataset& data,
                                                std::string experiment, std::size_t workers = 1) {
  cfg.validate();
  const auto& sw = cfg.sweep;
  const std::size_t n = data.day.sbs_count();
  const std::size_t spd = data.day.slot_count();
  std::size_t max_s = 0, max_l = 0;
  for (std::size_t s : sw.s_values) max_s = std::max(max_s, s);
  for (std::size_t l : sw.decision_layers) max_l = std::max(max_l, l);

  SwitchingSweepResult res;
  res.experiment = std::move(experiment);
  for (std::size_t s : sw.s_values) {
    const std::string opt = use_exhaustive(cfg.switching, s) ? "exhaustive" : "greedy";
    res.points.push_back({s, "perfect", 0, opt, {}, {}, {}, {}, {}, {}, {}, 0, 0, 0});
    for (std::size_t l : sw.decision_layers) res.points.push_back({s, "mlc", l, opt, {}, {}, {}, {}, {}, {}, {}, 0, 0, 0});
  }
  const std::size_t per_s = 1 + sw.decision_layers.size();

  using Samples = std::vector<detail::SwitchingSample>;
  const std::function<Samples(std::size_t)> task = [&](std::size_t it) {
    const std::uint64_t seed = cfg.seed + it;
    Rng rng(seed);
    const std::size_t slot = static_cast<std::size_t>(rng.uniform_index(spd));
    const auto order = rng.sample_indices(n, max_s);
    const auto loads = data.day.slot_loads(slot);
    Samples out(res.points.size());

    for (std::size_t si = 0; si < sw.s_values.size(); ++si) {
      const std::size_t s = sw.s_values[si];
      std::vector<std::size_t> members(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s));
      std::sort(members.begin(), members.end());
      std::vector<std::size_t> sleepers;
      for (std::size_t pos : rng.sample_indices(s, std::min(cfg.sleepers_for(s), s))) sleepers.push_back(members[pos]);
      std::sort(sleepers.begin(), sleepers.end());

      std::vector<double> actual_loads(s);
      for (std::size_t j = 0; j < s; ++j) actual_loads[j] = loads[members[j]];
      const SwitchingProblem actual = make_problem(cfg, actual_loads);
      const SwitchingSolution best = optimize(actual, cfg.switching);

      const MaskedSlot ms = mask_sleepers(loads, sleepers, slot);
      MlcConfig m{max_l, sw.k_override, sw.kmeans_max_iter, sw.kmeans_tol, mix_seed(seed, s), 8};
      const auto layers = mlc_estimate_layers(ms.snapshot, &data.history, m);

      for (std::size_t li = 0; li < per_s; ++li) {
        std::vector<double> est_loads = actual_loads;
        auto& smp = out[si * per_s + li];
        if (li > 0) {
          const auto& er = layers[sw.decision_layers[li - 1] - 1];
          for (std::size_t k = 0; k < sleepers.size(); ++k) {
            const std::size_t j = static_cast<std::size_t>(
                std::lower_bound(members.begin(), members.end(), sleepers[k]) - members.begin());
            est_loads[j] = er.estimates[k].value;
            smp.err.add(ms.truth[k], er.estimates[k].value, cfg.epsilon);
          }
        }
        const SwitchingSolution decided = optimize(make_problem(cfg, est_loads), cfg.switching);
        const DeployedCost dc = price_decision(decided.state, actual, cfg.switching.exact_inner_limit);
        smp.change = decision_change_rate(best.state, decided.state);
        smp.actual = best.power;
        smp.deployed = dc.solution.power;
        smp.naive = decided.power;
        smp.retargeted = dc.retargeted;
        smp.woken = dc.woken;
        smp.infeasible = !best.feasible;
      }
    }
    return out;
  };

  const auto per_iter = run_iterations<Samples>(cfg.iterations, workers, task);
  for (const auto& samples : per_iter) {
    for (std::size_t p = 0; p < res.points.size(); ++p) {
      auto& pt = res.points[p];
      const auto& smp = samples[p];
      pt.change.push_back(smp.change);
      pt.power_actual.push_back(smp.actual);
      pt.power_deployed.push_back(smp.deployed);
      pt.power_naive.push_back(smp.naive);
      pt.gap.push_back(smp.deployed - smp.actual);
      pt.gap_relative.push_back((smp.deployed - smp.actual) / smp.actual);
      pt.estimation.merge(smp.err);
      pt.retargeted += smp.retargeted ? 1 : 0;
      pt.woken += smp.woken;
      pt.infeasible_actual += smp.infeasible ? 1 : 0;
    }
  }
  return res;
}

inline SwitchingSweepResult run_decision_sweep(const ExperimentConfig& cfg, const Dataset& data, std::size_t workers = 1) {
  return run_switching_sweep(cfg, data, "fig4", workers);
}

inline SwitchingSweepResult run_power_sweep(const ExperimentConfig& cfg, const Dataset& data, std::size_t workers = 1) {
  return run_switching_sweep(cfg, data, "fig5", workers);
}

// ---------------------------------------------------------------------------
// Reports

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string opt_str(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : ""; }
inline std::string opt_str(const std::optional<unsigned>& v) { return v ? std::to_string(*v) : ""; }

}  // namespace detail

inline Table error_table(const ErrorSweepResult& r) {
  Table t;
  t.columns = {"method", "neighbors", "exponent", "layers", "mean_error", "iteration_mean", "iteration_stddev",
               "iteration_min", "iteration_max", "scored", "excluded"};
  for (const auto& p : r.points) {
    const Stats st = p.iteration_stats();
    t.rows.push_back({p.method, detail::opt_str(p.neighbors), detail::opt_str(p.exponent), detail::opt_str(p.layers),
                      format_double(p.pooled.mean()), format_double(st.mean), format_double(st.stddev),
                      format_double(st.min), format_double(st.max), std::to_string(p.pooled.scored),
                      std::to_string(p.pooled.excluded)});
  }
  return t;
}

inline Table switching_table(const SwitchingSweepResult& r) {
  Table t;
  const bool power = r.experiment == "fig5";
  t.columns = {"s", "estimator", "layers", "optimizer", "iterations"};
  const std::vector<std::string> decision_cols{"decision_change_mean", "decision_change_stddev", "estimation_error",
                                               "excluded"};
  const std::vector<std::string> power_cols{"power_actual_w",  "power_deployed_w", "power_naive_w",
                                            "gap_w",           "gap_stddev_w",     "gap_relative",
                                            "retargeted",      "woken",            "infeasible_actual"};
  for (const auto& c : power ? power_cols : decision_cols) t.columns.push_back(c);
  for (const auto& p : r.points) {
    std::vector<std::string> row{std::to_string(p.s), p.estimator, p.layers ? std::to_string(p.layers) : "",
                                 p.optimizer, std::to_string(p.change.size())};
    if (power) {
      const Stats g = describe(p.gap);
      for (auto v : {describe(p.power_actual).mean, describe(p.power_deployed).mean, describe(p.power_naive).mean,
                     g.mean, g.stddev, describe(p.gap_relative).mean})
        row.push_back(format_double(v));
      row.push_back(std::to_string(p.retargeted));
      row.push_back(std::to_string(p.woken));
      row.push_back(std::to_string(p.infeasible_actual));
    } else {
      const Stats c = describe(p.change);
      row.push_back(format_double(c.mean));
      row.push_back(format_double(c.stddev));
      row.push_back(p.estimation.scored ? format_double(p.estimation.mean()) : "");
      row.push_back(std::to_string(p.estimation.excluded));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// One row per sweep point; the trailing config_hash column ties every row to
// the resolved configuration.
inline void write_csv(std::ostream& out, const Table& t, const std::string& hash) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << t.columns[c] << ',';
  out << "config_hash\n";
  for (const auto& row : t.rows) {
    for (const auto& cell : row) out << cell << ',';
    out << hash << '\n';
  }
}

inline nlohmann::json table_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) o[t.columns[c]] = row[c];
    rows.push_back(std::move(o));
  }
  return rows;
}

struct Report {
  std::string experiment;
  Table table;
  nlohmann::json metadata;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "fig4", "fig5"};
  return names;
}

inline Report run_experiment(const std::string& name, const ExperimentConfig& cfg, std::size_t workers = 1) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset data = build_dataset(cfg);
  Report rep;
  rep.experiment = name;
  std::vector<std::string> optimizers;
  if (name == "fig2") {
    rep.table = error_table(run_error_sweep(cfg, data, ErrorAxis::Neighbors, workers));
  } else if (name == "fig3") {
    rep.table = error_table(run_error_sweep(cfg, data, ErrorAxis::Layers, workers));
  } else if (name == "fig4" || name == "fig5") {
    const auto r = name == "fig4" ? run_decision_sweep(cfg, data, workers) : run_power_sweep(cfg, data, workers);
    for (const auto& p : r.points)
      if (std::find(optimizers.begin(), optimizers.end(), p.optimizer) == optimizers.end()) optimizers.push_back(p.optimizer);
    rep.table = switching_table(r);
  } else {
    throw ConfigError("unknown experiment '" + name + "' (expected fig2, fig3, fig4 or fig5)");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.metadata = {{"experiment", name},
                  {"profile", cfg.profile},
                  {"seed", cfg.seed},
                  {"config_hash", config_hash(cfg)},
                  {"data_source", data.source},
                  {"sleepers_per_iteration", cfg.sleepers_for(cfg.n_sbs)},
                  {"epsilon", cfg.epsilon},
                  {"optimizers", optimizers},
                  {"wall_clock_s", secs},
                  {"config", config_to_json(cfg)},
                  {"rows", table_json(rep.table)}};
  return rep;
}

inline std::string report_stem(const std::string& experiment, const ExperimentConfig& cfg) {
  return experiment + "_" + cfg.profile + "_" + std::to_string(cfg.seed);
}

}  // namespace vhetnet
