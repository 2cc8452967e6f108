#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "vhetnet/kmeans.hpp"
#include "vhetnet/rng.hpp"
#include "vhetnet/traffic_data.hpp"

namespace vhetnet {

// Multi-level k-means clustering.
struct MlcConfig {
  std::size_t layers = 1;
  std::optional<std::size_t> k_override;  // otherwise chosen by the elbow rule per cluster
  std::size_t kmeans_max_iter = 100;
  double kmeans_tol = 1e-9;
  std::uint64_t seed = 0;
  std::size_t elbow_k_max = 8;
};

// N nearest active SBSs, optionally inverse-distance weighted with exponent n.
struct DistanceConfig {
  std::size_t neighbors = 1;
  std::optional<unsigned> exponent;
  double distance_floor_m = 1.0;
};

// N active SBSs drawn uniformly without replacement.
struct RandomConfig {
  std::size_t neighbors = 1;
  std::optional<unsigned> exponent;
  std::uint64_t seed = 0;
  double distance_floor_m = 1.0;
};

using EstimatorConfig = std::variant<MlcConfig, DistanceConfig, RandomConfig>;

inline std::string estimator_name(const EstimatorConfig& c) {
  struct V {
    std::string operator()(const MlcConfig&) const { return "mlc"; }
    std::string operator()(const DistanceConfig& d) const { return d.exponent ? "distance_weighted" : "distance"; }
    std::string operator()(const RandomConfig& r) const { return r.exponent ? "random_weighted" : "random"; }
  };
  return std::visit(V{}, c);
}

inline void validate(const EstimatorConfig& c) {
  struct V {
    void operator()(const MlcConfig& m) const {
      if (m.layers < 1) throw std::invalid_argument("MLC needs at least one layer");
      if (m.k_override && *m.k_override < 1) throw std::invalid_argument("k override must be at least 1");
      if (m.kmeans_max_iter < 1 || !(m.kmeans_tol >= 0.0)) throw std::invalid_argument("bad k-means settings");
      if (m.elbow_k_max < 3) throw std::invalid_argument("elbow k range must reach at least 3");
    }
    void operator()(const DistanceConfig& d) const { check(d.neighbors, d.exponent, d.distance_floor_m); }
    void operator()(const RandomConfig& r) const { check(r.neighbors, r.exponent, r.distance_floor_m); }
    static void check(std::size_t n, const std::optional<unsigned>& e, double floor) {
      if (n < 1) throw std::invalid_argument("at least one neighbor required");
      if (e && *e < 1) throw std::invalid_argument("weighting exponent must be at least 1");
      if (!(floor > 0.0)) throw std::invalid_argument("distance floor must be positive");
    }
  };
  std::visit(V{}, c);
}

struct SleeperEstimate {
  std::size_t sbs_id = 0;
  double value = 0.0;
  std::vector<std::size_t> neighbors;  // contributing active SBSs
  std::vector<double> weights;         // normalized to sum to 1
};

struct EstimateResult {
  std::vector<SleeperEstimate> estimates;  // ascending sbs_id

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(estimates.size());
    for (const auto& e : estimates) v.push_back(e.value);
    return v;
  }
};

// Raw inverse-distance weights d_max / d^n.
inline std::vector<double> idw_weights(std::span<const double> distances, unsigned exponent, double d_max) {
  std::vector<double> w(distances.size());
  for (std::size_t j = 0; j < distances.size(); ++j) w[j] = d_max / std::pow(distances[j], static_cast<double>(exponent));
  return w;
}

namespace detail {

// Plain mean, or inverse-distance weighted mean. Weights are formed in the
// log domain so large exponents cannot overflow; the common factor d_max
// cancels. The value is clamped to the neighbor range to absorb rounding.
inline void combine_neighbors(SleeperEstimate& out, std::span<const double> loads, std::span<const double> distances,
                              const std::optional<unsigned>& exponent) {
  const std::size_t n = loads.size();
  out.weights.assign(n, 0.0);
  double value = 0.0;
  if (!exponent) {
    double sum = 0.0;
    for (double l : loads) sum += l;
    value = sum / static_cast<double>(n);
    std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(n));
  } else {
    const double e = static_cast<double>(*exponent);
    std::vector<double> lw(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      lw[j] = -e * std::log(distances[j]);
      top = std::max(top, lw[j]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      lw[j] = std::exp(lw[j] - top);
      num += loads[j] * lw[j];
      den += lw[j];
    }
    value = num / den;
    for (std::size_t j = 0; j < n; ++j) out.weights[j] = lw[j] / den;
  }
  const auto [lo, hi] = std::minmax_element(loads.begin(), loads.end());
  out.value = std::clamp(value, *lo, *hi);
}

inline void check_inputs(const LoadSnapshot& snap, std::span<const SbsPlacement> placements) {
  if (snap.size() > 0 && snap.active_ids().empty())
    throw std::invalid_argument("every SBS is sleeping; nothing to interpolate from");
  if (placements.size() < snap.size()) throw std::invalid_argument("placements do not cover every SBS");
  for (std::size_t i = 0; i < snap.size(); ++i)
    if (placements[i].sbs_id != i) throw std::invalid_argument("placements must be indexed by sbs_id");
}

inline double floored_distance(const SbsPlacement& a, const SbsPlacement& b, double floor) {
  return std::max(distance(a.position, b.position), floor);
}

}  // namespace detail

// Each sleeper is estimated from its N nearest active SBSs (ties broken by
// lower id): plain mean without an exponent, inverse-distance weighted mean
// with one.
inline EstimateResult distance_estimate(const LoadSnapshot& snap, std::span<const SbsPlacement> placements,
                                        std::size_t neighbors, std::optional<unsigned> exponent,
                                        double distance_floor_m = 1.0) {
  validate(DistanceConfig{neighbors, exponent, distance_floor_m});
  EstimateResult res;
  const auto sleeping = snap.sleeping_ids();
  if (sleeping.empty()) return res;
  detail::check_inputs(snap, placements);
  const auto active = snap.active_ids();
  if (active.size() < neighbors)
    throw std::invalid_argument("only " + std::to_string(active.size()) + " active SBSs for " +
                                std::to_string(neighbors) + " neighbors");

  std::vector<std::pair<double, std::size_t>> ranked(active.size());
  std::vector<double> loads(neighbors), dists(neighbors);
  for (std::size_t s : sleeping) {
    for (std::size_t a = 0; a < active.size(); ++a)
      ranked[a] = {detail::floored_distance(placements[s], placements[active[a]], distance_floor_m), active[a]};
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(neighbors), ranked.end());
    SleeperEstimate e;
    e.sbs_id = s;
    for (std::size_t j = 0; j < neighbors; ++j) {
      e.neighbors.push_back(ranked[j].second);
      dists[j] = ranked[j].first;
      loads[j] = snap.load(ranked[j].second);
    }
    detail::combine_neighbors(e, loads, dists, exponent);
    res.estimates.push_back(std::move(e));
  }
  return res;
}

// Draw procedure: one Rng(seed) per call; sleepers in ascending id each take
// a partial Fisher-Yates draw of N from the ascending list of active ids.
inline EstimateResult random_estimate(const LoadSnapshot& snap, std::span<const SbsPlacement> placements,
                                      std::size_t neighbors, std::optional<unsigned> exponent, std::uint64_t seed,
                                      double distance_floor_m = 1.0) {
  validate(RandomConfig{neighbors, exponent, seed, distance_floor_m});
  EstimateResult res;
  const auto sleeping = snap.sleeping_ids();
  if (sleeping.empty()) return res;
  detail::check_inputs(snap, placements);
  const auto active = snap.active_ids();
  if (active.size() < neighbors)
    throw std::invalid_argument("only " + std::to_string(active.size()) + " active SBSs for " +
                                std::to_string(neighbors) + " neighbors");

  Rng rng(seed);
  std::vector<double> loads(neighbors), dists(neighbors);
  for (std::size_t s : sleeping) {
    std::vector<std::size_t> pool = active;
    rng.partial_shuffle(std::span<std::size_t>(pool), neighbors);
    SleeperEstimate e;
    e.sbs_id = s;
    for (std::size_t j = 0; j < neighbors; ++j) {
      e.neighbors.push_back(pool[j]);
      dists[j] = detail::floored_distance(placements[s], placements[pool[j]], distance_floor_m);
      loads[j] = snap.load(pool[j]);
    }
    detail::combine_neighbors(e, loads, dists, exponent);
    res.estimates.push_back(std::move(e));
  }
  return res;
}

// Clustering feature of a sleeping SBS before any estimate exists: its load
// at the same slot of the most recent day in `history`, else the mean of the
// active loads.
inline double mlc_initial_feature(const LoadSnapshot& snap, const LoadSeries& history, std::size_t sbs) {
  const std::size_t spd = history.slots_per_day();
  const std::size_t slot = snap.slot_of_day();
  if (sbs < history.sbs_count() && slot < spd && history.slot_count() > slot) {
    const std::size_t day = (history.slot_count() - 1 - slot) / spd;
    return history(sbs, day * spd + slot);
  }
  double sum = 0.0;
  const auto active = snap.active_ids();
  for (std::size_t a : active) sum += snap.load(a);
  return sum / static_cast<double>(active.size());
}

// Multi-level clustering. Layer 1 runs k-means over every SBS (actives by
// their current load, sleepers by their initial feature) and gives each
// sleeper the mean load of the active members of its cluster. Each further
// layer re-clusters every cluster that still holds a sleeper and refines the
// estimate from the active members of the finer cluster. A sleeper whose
// cluster has no active member keeps its previous estimate.
//
// Returns the estimates after every layer; element l-1 is the L = l result.
inline std::vector<EstimateResult> mlc_estimate_layers(const LoadSnapshot& snap, const LoadSeries* history,
                                                       const MlcConfig& cfg) {
  validate(cfg);
  std::vector<EstimateResult> out;
  const auto sleeping = snap.sleeping_ids();
  if (sleeping.empty()) {
    out.resize(cfg.layers);
    return out;
  }
  if (snap.active_ids().empty()) throw std::invalid_argument("every SBS is sleeping; nothing to interpolate from");
  if (history == nullptr) throw std::invalid_argument("MLC needs a load history for sleeping SBSs");

  const std::size_t n = snap.size();
  std::vector<double> feature(n);
  std::vector<SleeperEstimate> est(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (snap.known(i)) {
      feature[i] = snap.load(i);
    } else {
      feature[i] = mlc_initial_feature(snap, *history, i);
      est[i].sbs_id = i;
      est[i].value = feature[i];
    }
  }

  std::vector<std::vector<std::size_t>> frontier(1);
  frontier[0].resize(n);
  std::iota(frontier[0].begin(), frontier[0].end(), std::size_t{0});

  for (std::size_t layer = 1; layer <= cfg.layers; ++layer) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& node : frontier) {
      std::vector<double> xs(node.size());
      for (std::size_t m = 0; m < node.size(); ++m) xs[m] = feature[node[m]];
      std::vector<double> distinct = xs;
      std::sort(distinct.begin(), distinct.end());
      const std::size_t n_distinct = static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());

      const PointSet pts = PointSet::from_scalars(xs);
      std::size_t k = 1;
      if (cfg.k_override) {
        k = *cfg.k_override;
      } else if (node.size() >= 3) {
        k = elbow_select_k(pts, 1, std::min(cfg.elbow_k_max, node.size()), cfg.kmeans_max_iter, cfg.kmeans_tol, cfg.seed);
      }
      k = std::max<std::size_t>(1, std::min(k, n_distinct));

      std::vector<std::vector<std::size_t>> children(k);
      if (k == 1) {
        children[0] = node;
      } else {
        const ClusteringState cs = kmeans_fit(pts, k, cfg.kmeans_max_iter, cfg.kmeans_tol, cfg.seed);
        for (std::size_t m = 0; m < node.size(); ++m) children[cs.assignments[m]].push_back(node[m]);
      }

      for (auto& child : children) {
        std::vector<std::size_t> act;
        bool has_sleeper = false;
        for (std::size_t id : child) {
          if (snap.known(id)) act.push_back(id);
          else has_sleeper = true;
        }
        if (!has_sleeper || act.empty()) continue;  // nothing further to learn in this branch
        double sum = 0.0;
        for (std::size_t a : act) sum += snap.load(a);
        const double mean = sum / static_cast<double>(act.size());
        for (std::size_t id : child) {
          if (snap.known(id)) continue;
          est[id].value = mean;
          est[id].neighbors = act;
          est[id].weights.assign(act.size(), 1.0 / static_cast<double>(act.size()));
        }
        next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);

    EstimateResult r;
    for (std::size_t s : sleeping) r.estimates.push_back(est[s]);
    out.push_back(std::move(r));
  }
  return out;
}

inline EstimateResult mlc_estimate(const LoadSnapshot& snap, const LoadSeries* history, const MlcConfig& cfg) {
  auto layers = mlc_estimate_layers(snap, history, cfg);
  return std::move(layers.back());
}

// Fills in every sleeping SBS with the configured estimator.
inline EstimateResult estimate(const EstimatorConfig& config, const LoadSnapshot& snap,
                               std::span<const SbsPlacement> placements, const LoadSeries* history = nullptr) {
  validate(config);
  if (snap.size() > 0 && snap.active_ids().empty())
    throw std::invalid_argument("every SBS is sleeping; nothing to interpolate from");
  struct V {
    const LoadSnapshot& snap;
    std::span<const SbsPlacement> placements;
    const LoadSeries* history;
    EstimateResult operator()(const MlcConfig& c) const { return mlc_estimate(snap, history, c); }
    EstimateResult operator()(const DistanceConfig& c) const {
      return distance_estimate(snap, placements, c.neighbors, c.exponent, c.distance_floor_m);
    }
    EstimateResult operator()(const RandomConfig& c) const {
      return random_estimate(snap, placements, c.neighbors, c.exponent, c.seed, c.distance_floor_m);
    }
  };
  return std::visit(V{snap, placements, history}, config);
}

// ---------------------------------------------------------------------------
// Estimation error

// Running sum of |actual - estimate| / actual over entries with
// actual >= epsilon; smaller actual loads are counted as excluded.
struct ErrorAccumulator {
  double sum = 0.0;
  std::size_t scored = 0;
  std::size_t excluded = 0;

  void add(double actual, double estimated, double epsilon) {
    if (actual < epsilon) {
      ++excluded;
      return;
    }
    sum += std::abs(actual - estimated) / actual;
    ++scored;
  }

  void merge(const ErrorAccumulator& o) {
    sum += o.sum;
    scored += o.scored;
    excluded += o.excluded;
  }

  double mean() const { return scored == 0 ? 0.0 : sum / static_cast<double>(scored); }
};

struct ErrorSummary {
  double mean = 0.0;
  std::size_t scored = 0;
  std::size_t excluded = 0;
};

inline ErrorSummary estimation_error(std::span<const double> actual, std::span<const double> estimated,
                                     double epsilon = 1e-3) {
  if (actual.size() != estimated.size()) throw std::invalid_argument("actual/estimated length mismatch");
  ErrorAccumulator acc;
  for (std::size_t i = 0; i < actual.size(); ++i) acc.add(actual[i], estimated[i], epsilon);
  if (acc.scored == 0) throw std::invalid_argument("every sleeper fell below the error threshold");
  return {acc.mean(), acc.scored, acc.excluded};
}

}  // namespace vhetnet
