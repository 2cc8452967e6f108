#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vhetnet/state.hpp"

namespace vhetnet {

enum class StationKind { Haps, Mbs, Sbs };

// EARTH-model coefficients of one station, all in watts except the
// dimensionless amplifier slope.
struct PowerParams {
  double operational_power = 0.0;  // circuit power while ON
  double amplifier_slope = 0.0;    // multiplies load * transmit power
  double transmit_power = 0.0;
  double sleep_power = 0.0;

  void validate() const {
    if (!(operational_power >= 0.0) || !(amplifier_slope >= 0.0) || !(transmit_power >= 0.0) ||
        !(sleep_power >= 0.0))
      throw std::domain_error("power parameters must be non-negative");
    if (sleep_power > operational_power)
      throw std::domain_error("sleep power must not exceed operational power");
  }

  friend bool operator==(const PowerParams&, const PowerParams&) = default;
};

// Illustrative defaults with EARTH-style magnitudes. HAPS and MBS draw roughly
// an order of magnitude more than an SBS. These are not measured values.
namespace defaults {
inline constexpr PowerParams haps{250.0, 5.0, 40.0, 150.0};
inline constexpr PowerParams mbs{130.0, 4.7, 20.0, 75.0};
inline constexpr PowerParams sbs{6.8, 4.0, 0.13, 4.3};
}  // namespace defaults

struct NetworkPowerConfig {
  PowerParams haps = defaults::haps;
  PowerParams mbs = defaults::mbs;
  std::vector<PowerParams> sbs;

  static NetworkPowerConfig homogeneous(std::size_t s, const PowerParams& haps = defaults::haps,
                                        const PowerParams& mbs = defaults::mbs,
                                        const PowerParams& sbs = defaults::sbs) {
    return NetworkPowerConfig{haps, mbs, std::vector<PowerParams>(s, sbs)};
  }

  std::size_t sbs_count() const { return sbs.size(); }

  void validate() const {
    if (sbs.empty()) throw std::invalid_argument("network needs at least one SBS");
    haps.validate();
    mbs.validate();
    for (const auto& p : sbs) p.validate();
  }
};

namespace detail {

// Active branch without range checks; the switching objective evaluates
// infeasible states where the MBS/HAPS load exceeds 1.
inline double active_power(const PowerParams& p, double load) {
  return p.operational_power + p.amplifier_slope * load * p.transmit_power;
}

inline void check_load(double load) {
  if (!(load >= 0.0 && load <= 1.0)) throw std::domain_error("load factor outside [0,1]");
}

inline double sbs_term(const PowerParams& p, double load, bool on) {
  return on ? active_power(p, load) : p.sleep_power;
}

// Canonical summation order: (HAPS + MBS), then SBS terms in index order.
// The switching optimizer relies on this order for exact tie-breaking.
inline double sum_network(const NetworkPowerConfig& config, double haps_load, double mbs_load,
                          std::span<const double> sbs_loads, const std::vector<bool>& on_off) {
  double total = active_power(config.haps, haps_load) + active_power(config.mbs, mbs_load);
  for (std::size_t j = 0; j < sbs_loads.size(); ++j)
    total += sbs_term(config.sbs[j], sbs_loads[j], on_off[j]);
  return total;
}

}  // namespace detail

// Power draw of a single station. An ON station with zero load draws the
// operational power; OFF draws sleep power regardless of load.
inline double station_power(const PowerParams& params, double load, bool is_on) {
  params.validate();
  detail::check_load(load);
  return detail::sbs_term(params, load, is_on);
}

// Total instantaneous network power. HAPS and MBS are always ON.
inline double network_power(const NetworkPowerConfig& config, double haps_load, double mbs_load,
                            std::span<const double> sbs_loads, const StateVector& state) {
  config.validate();
  if (sbs_loads.size() != config.sbs_count() || state.size() != config.sbs_count())
    throw std::invalid_argument("SBS load/state length does not match network size");
  detail::check_load(haps_load);
  detail::check_load(mbs_load);
  for (double l : sbs_loads) detail::check_load(l);
  return detail::sum_network(config, haps_load, mbs_load, sbs_loads, state.on_off);
}

}  // namespace vhetnet
