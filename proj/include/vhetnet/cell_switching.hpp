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
#include <vector>

#include <nlohmann/json.hpp>

#include "vhetnet/error.hpp"
#include "vhetnet/power_model.hpp"
#include "vhetnet/state.hpp"

namespace vhetnet {

// Fraction of MBS/HAPS capacity consumed per unit of offloaded SBS load.
struct OffloadScale {
  double mbs = 0.05;
  double haps = 0.02;
};

struct CapacityState {
  double mbs_base = 0.0;
  double haps_base = 0.0;
  double mbs_offloaded = 0.0;
  double haps_offloaded = 0.0;
  double mbs_load = 0.0;
  double haps_load = 0.0;
  bool feasible = true;
};

// One switching decision instance: per-SBS loads at a slot, the intrinsic
// MBS/HAPS loads, and the power/offload models.
struct SwitchingProblem {
  std::vector<double> loads;
  double mbs_base_load = 0.0;
  double haps_base_load = 0.0;
  NetworkPowerConfig power;
  OffloadScale scale;

  std::size_t size() const { return loads.size(); }

  void validate() const {
    if (loads.empty()) throw std::invalid_argument("switching problem needs at least one SBS");
    if (power.sbs_count() != loads.size()) throw std::invalid_argument("power config does not match SBS count");
    power.validate();
    for (double l : loads) detail::check_load(l);
    // Base loads above 1 are representable; such instances have no feasible state.
    if (!(mbs_base_load >= 0.0) || !(haps_base_load >= 0.0) || !std::isfinite(mbs_base_load) ||
        !std::isfinite(haps_base_load))
      throw std::domain_error("base loads must be finite and non-negative");
    if (!(scale.mbs >= 0.0) || !(scale.haps >= 0.0)) throw std::invalid_argument("offload scales must be non-negative");
  }
};

// Offloaded load is summed over OFF SBSs in index order, then added to the
// base load.
inline CapacityState apply_offloads(double base_mbs, double base_haps, std::span<const double> loads,
                                    const StateVector& state, const OffloadScale& scale) {
  if (loads.size() != state.size()) throw std::invalid_argument("state/load length mismatch");
  if (!state.valid()) throw std::invalid_argument("offload targets must be set exactly for OFF SBSs");
  CapacityState c;
  c.mbs_base = base_mbs;
  c.haps_base = base_haps;
  for (std::size_t j = 0; j < loads.size(); ++j) {
    if (state.on_off[j]) continue;
    if (*state.offload_target[j] == OffloadTarget::Mbs) c.mbs_offloaded += scale.mbs * loads[j];
    else c.haps_offloaded += scale.haps * loads[j];
  }
  c.mbs_load = base_mbs + c.mbs_offloaded;
  c.haps_load = base_haps + c.haps_offloaded;
  c.feasible = c.mbs_load <= 1.0 && c.haps_load <= 1.0 && c.mbs_load >= 0.0 && c.haps_load >= 0.0;
  return c;
}

// Network power of a state with post-offload MBS/HAPS loads. Evaluable for
// infeasible states as well; callers check capacity.feasible.
inline double objective(const StateVector& state, std::span<const double> loads, const CapacityState& capacity,
                        const NetworkPowerConfig& power) {
  if (loads.size() != power.sbs_count() || state.size() != power.sbs_count())
    throw std::invalid_argument("state/load length does not match network size");
  for (double l : loads) detail::check_load(l);
  return detail::sum_network(power, capacity.haps_load, capacity.mbs_load, loads, state.on_off);
}

struct SwitchingSolution {
  StateVector state;
  double power = 0.0;
  bool feasible = false;
  CapacityState capacity;
  std::string optimizer;
};

namespace detail {

// Evaluates fixed ON/OFF masks with the same arithmetic, in the same order,
// as apply_offloads + objective.
class MaskEvaluator {
 public:
  explicit MaskEvaluator(const SwitchingProblem& p) : p_(p), s_(p.size()), on_term_(s_), contrib_m_(s_), contrib_h_(s_) {
    for (std::size_t j = 0; j < s_; ++j) {
      on_term_[j] = active_power(p.power.sbs[j], p.loads[j]);
      contrib_m_[j] = p.scale.mbs * p.loads[j];
      contrib_h_[j] = p.scale.haps * p.loads[j];
    }
    cost_m_ = p.power.mbs.amplifier_slope * p.power.mbs.transmit_power;
    cost_h_ = p.power.haps.amplifier_slope * p.power.haps.transmit_power;
  }

  struct Best {
    std::vector<bool> on_off;
    std::vector<std::uint8_t> haps;  // per SBS: 1 when offloaded to HAPS
    double power = std::numeric_limits<double>::infinity();
    bool found = false;
  };

  // Lowest-power feasible target assignment for the mask. Exact enumeration
  // (Mbs before Haps, earlier SBS most significant) when at most
  // `exact_limit` SBSs are OFF, best-fit otherwise.
  Best best_for_mask(const std::vector<bool>& on_off, std::size_t exact_limit) const {
    std::vector<std::size_t> off;
    for (std::size_t j = 0; j < s_; ++j)
      if (!on_off[j]) off.push_back(j);

    Best best;
    best.on_off = on_off;
    std::vector<std::uint8_t> haps(s_, 0);
    if (cheapest_tiers(off, haps)) {
      consider(on_off, off, haps, best);
      if (best.found) return best;
      std::fill(haps.begin(), haps.end(), 0);
    }
    if (off.size() <= exact_limit) {
      const std::uint64_t combos = std::uint64_t{1} << off.size();
      for (std::uint64_t t = 0; t < combos; ++t) {
        for (std::size_t i = 0; i < off.size(); ++i) haps[off[i]] = (t >> (off.size() - 1 - i)) & 1U;
        consider(on_off, off, haps, best);
      }
    } else {
      std::vector<std::size_t> order = off;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_.loads[a] > p_.loads[b]; });
      double m = p_.mbs_base_load, h = p_.haps_base_load;
      for (std::size_t j : order) {
        const bool prefer_haps = cost_h_ * contrib_h_[j] < cost_m_ * contrib_m_[j];
        const bool fits_m = m + contrib_m_[j] <= 1.0, fits_h = h + contrib_h_[j] <= 1.0;
        if (prefer_haps ? fits_h : !fits_m && fits_h) {
          haps[j] = 1;
          h += contrib_h_[j];
        } else if (fits_m) {
          haps[j] = 0;
          m += contrib_m_[j];
        } else {
          return best;
        }
      }
      consider(on_off, off, haps, best);
    }
    return best;
  }

 private:
  // Offload cost is additive, so every OFF SBS on its cheaper tier is the
  // unconstrained optimum. When each choice wins by far more than the rounding
  // in a power sum and the assignment fits, full enumeration returns the same
  // assignment. Returns false when some choice is within the margin.
  bool cheapest_tiers(const std::vector<std::size_t>& off, std::vector<std::uint8_t>& haps) const {
    constexpr double kMargin = 1e-9;
    for (std::size_t j : off) {
      const double via_m = cost_m_ * contrib_m_[j], via_h = cost_h_ * contrib_h_[j];
      if (!(std::abs(via_m - via_h) > kMargin)) return false;
      haps[j] = via_h < via_m ? 1 : 0;
    }
    return true;
  }

  void consider(const std::vector<bool>& on_off, const std::vector<std::size_t>& off,
                const std::vector<std::uint8_t>& haps, Best& best) const {
    double off_m = 0.0, off_h = 0.0;
    for (std::size_t j : off) {
      if (haps[j]) off_h += contrib_h_[j];
      else off_m += contrib_m_[j];
    }
    const double lm = p_.mbs_base_load + off_m, lh = p_.haps_base_load + off_h;
    if (!(lm <= 1.0 && lh <= 1.0)) return;
    double total = active_power(p_.power.haps, lh) + active_power(p_.power.mbs, lm);
    for (std::size_t j = 0; j < s_; ++j) total += on_off[j] ? on_term_[j] : p_.power.sbs[j].sleep_power;
    if (total < best.power) {
      best.power = total;
      best.haps = haps;
      best.found = true;
    }
  }

  const SwitchingProblem& p_;
  std::size_t s_;
  std::vector<double> on_term_, contrib_m_, contrib_h_;
  double cost_m_ = 0.0, cost_h_ = 0.0;
};

inline StateVector to_state(const std::vector<bool>& on_off, const std::vector<std::uint8_t>& haps) {
  StateVector st(on_off.size());
  for (std::size_t j = 0; j < on_off.size(); ++j)
    if (!on_off[j]) st.switch_off(j, haps[j] ? OffloadTarget::Haps : OffloadTarget::Mbs);
  return st;
}

inline SwitchingSolution finish(const SwitchingProblem& p, StateVector st, std::string name) {
  SwitchingSolution sol;
  sol.capacity = apply_offloads(p.mbs_base_load, p.haps_base_load, p.loads, st, p.scale);
  sol.power = objective(st, p.loads, sol.capacity, p.power);
  sol.feasible = sol.capacity.feasible;
  sol.state = std::move(st);
  sol.optimizer = std::move(name);
  return sol;
}

}  // namespace detail

inline constexpr std::size_t kExhaustiveCap = 20;
inline constexpr std::size_t kExactInnerLimit = 10;

// Global minimum over all ON/OFF vectors and offload assignments subject to
// the MBS/HAPS capacity constraints. Among equal-power optima the
// lexicographically smallest ON/OFF vector (OFF < ON, SBS 0 first) wins,
// then Mbs-before-Haps targets. If even all-ON is infeasible the returned
// solution is all-ON with feasible = false.
inline SwitchingSolution optimize_exhaustive(const SwitchingProblem& p, std::size_t cap = kExhaustiveCap,
                                             std::size_t exact_limit = kExactInnerLimit) {
  p.validate();
  const std::size_t s = p.size();
  if (s > cap || s >= 63)
    throw std::invalid_argument("exhaustive search limited to " + std::to_string(cap) + " SBSs, got " + std::to_string(s));

  const detail::MaskEvaluator eval(p);
  detail::MaskEvaluator::Best best;
  std::vector<bool> on_off(s);
  const std::uint64_t masks = std::uint64_t{1} << s;
  for (std::uint64_t m = 0; m < masks; ++m) {
    for (std::size_t j = 0; j < s; ++j) on_off[j] = (m >> (s - 1 - j)) & 1U;
    auto cand = eval.best_for_mask(on_off, exact_limit);
    if (cand.found && cand.power < best.power) best = std::move(cand);
  }
  if (!best.found) return detail::finish(p, StateVector::all_on(s), "exhaustive");
  return detail::finish(p, detail::to_state(best.on_off, best.haps), "exhaustive");
}

// Visits SBSs in ascending load order (lower id first on ties) and switches
// each OFF onto its cheaper feasible tier while total power strictly drops;
// stops at the first candidate that does not improve.
inline SwitchingSolution optimize_greedy(const SwitchingProblem& p) {
  p.validate();
  const std::size_t s = p.size();
  StateVector st = StateVector::all_on(s);
  CapacityState cap = apply_offloads(p.mbs_base_load, p.haps_base_load, p.loads, st, p.scale);
  if (!cap.feasible) return detail::finish(p, std::move(st), "greedy");
  double power = objective(st, p.loads, cap, p.power);

  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p.loads[a] < p.loads[b]; });

  for (std::size_t j : order) {
    std::optional<OffloadTarget> pick;
    double pick_power = power;
    for (OffloadTarget t : {OffloadTarget::Mbs, OffloadTarget::Haps}) {
      StateVector trial = st;
      trial.switch_off(j, t);
      const CapacityState c = apply_offloads(p.mbs_base_load, p.haps_base_load, p.loads, trial, p.scale);
      if (!c.feasible) continue;
      const double pw = objective(trial, p.loads, c, p.power);
      if (pw < pick_power) {
        pick_power = pw;
        pick = t;
      }
    }
    if (!pick) break;
    st.switch_off(j, *pick);
    power = pick_power;
  }
  return detail::finish(p, std::move(st), "greedy");
}

// Fraction of SBSs whose ON/OFF decision differs. Offload targets are ignored.
inline double decision_change_rate(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("state vectors differ in length");
  if (a.size() == 0) throw std::invalid_argument("empty state vectors");
  std::size_t diff = 0;
  for (std::size_t j = 0; j < a.size(); ++j) diff += a.on_off[j] != b.on_off[j] ? 1 : 0;
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

struct DeployedCost {
  SwitchingSolution solution;
  bool retargeted = false;  // offload targets re-chosen at the actual loads
  std::size_t woken = 0;    // OFF SBSs switched back ON to restore capacity
};

// Cost of deploying a decision made on estimated loads once the actual loads
// materialize. A state that stays feasible is priced as is. Otherwise the
// targets of the OFF set are re-chosen at the actual loads, and if that still
// overloads a tier, OFF SBSs are woken in descending actual load until it fits.
inline DeployedCost price_decision(const StateVector& decided, const SwitchingProblem& actual,
                                   std::size_t exact_limit = kExactInnerLimit) {
  actual.validate();
  if (decided.size() != actual.size()) throw std::invalid_argument("decision does not match network size");
  DeployedCost out;
  out.solution = detail::finish(actual, decided, "deployed");
  if (out.solution.feasible) return out;

  const detail::MaskEvaluator eval(actual);
  std::vector<bool> on_off = decided.on_off;
  std::vector<std::size_t> off;
  for (std::size_t j = 0; j < on_off.size(); ++j)
    if (!on_off[j]) off.push_back(j);
  std::stable_sort(off.begin(), off.end(), [&](std::size_t a, std::size_t b) { return actual.loads[a] > actual.loads[b]; });

  out.retargeted = true;
  for (std::size_t next = 0;; ++next) {
    auto best = eval.best_for_mask(on_off, exact_limit);
    if (best.found) {
      out.solution = detail::finish(actual, detail::to_state(on_off, best.haps), "deployed");
      return out;
    }
    if (next == off.size()) break;
    on_off[off[next]] = true;
    ++out.woken;
  }
  out.solution = detail::finish(actual, StateVector::all_on(actual.size()), "deployed");
  return out;
}

inline nlohmann::json capacity_to_json(const CapacityState& c) {
  return {{"mbs_base", c.mbs_base},         {"haps_base", c.haps_base}, {"mbs_offloaded", c.mbs_offloaded},
          {"haps_offloaded", c.haps_offloaded}, {"mbs_load", c.mbs_load}, {"haps_load", c.haps_load},
          {"feasible", c.feasible}};
}

inline nlohmann::json solution_to_json(const SwitchingSolution& s) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : s.state.offload_target) targets.push_back(t ? nlohmann::json(to_string(*t)) : nlohmann::json(nullptr));
  return {{"on_off", s.state.bitstring()}, {"targets", targets},  {"power_w", s.power},
          {"feasible", s.feasible},        {"optimizer", s.optimizer}, {"capacity", capacity_to_json(s.capacity)}};
}

}  // namespace vhetnet
