// Estimates the loads of two sleeping SBSs in a small synthetic network and
// compares the switching decision made on those estimates with the one made
// on the true loads.

#include <iostream>

#include "vhetnet/cell_switching.hpp"
#include "vhetnet/estimators.hpp"
#include "vhetnet/traffic_data.hpp"

using namespace vhetnet;

int main() {
  SynthOptions opt;
  opt.n_sbs = 40;
  opt.grid_side = 12;
  opt.days = 2;
  const SyntheticTraffic traffic = synthesize_traffic(opt);
  const LoadSeries day = daily_average(traffic.loads, opt.days);

  const std::size_t slot = 80;  // early afternoon
  const std::vector<std::size_t> sleeping{3, 17};
  const auto loads = day.slot_loads(slot);
  const MaskedSlot ms = mask_sleepers(loads, sleeping, slot);

  const EstimateResult idw = distance_estimate(ms.snapshot, traffic.placements, 5, 3u);
  MlcConfig mlc_cfg;
  mlc_cfg.layers = 5;
  mlc_cfg.k_override = 3;
  const EstimateResult mlc = mlc_estimate(ms.snapshot, &traffic.loads, mlc_cfg);

  std::cout << "sbs  actual  idw(N=5,n=3)  mlc(L=5)\n";
  for (std::size_t k = 0; k < sleeping.size(); ++k)
    std::cout << sleeping[k] << "    " << ms.truth[k] << "  " << idw.estimates[k].value << "  " << mlc.estimates[k].value
              << "\n";

  // A ten-SBS network that includes both sleepers.
  std::vector<std::size_t> members{0, 1, 2, 3, 4, 5, 6, 7, 8, 17};
  SwitchingProblem actual;
  SwitchingProblem estimated;
  for (std::size_t id : members) actual.loads.push_back(loads[id]);
  estimated.loads = actual.loads;
  estimated.loads[3] = mlc.estimates[0].value;
  estimated.loads[9] = mlc.estimates[1].value;
  for (SwitchingProblem* p : {&actual, &estimated}) {
    p->mbs_base_load = 0.5;
    p->haps_base_load = 0.7;
    p->power = NetworkPowerConfig::homogeneous(members.size());
  }

  const SwitchingSolution best = optimize_exhaustive(actual);
  const SwitchingSolution decided = optimize_exhaustive(estimated);
  const DeployedCost deployed = price_decision(decided.state, actual);
  std::cout << "optimal state   " << best.state.bitstring() << "  " << best.power << " W\n";
  std::cout << "estimated state " << decided.state.bitstring() << "  " << deployed.solution.power << " W at actual loads\n";
  std::cout << "decision change " << decision_change_rate(best.state, decided.state) << "\n";
}
