#include <gtest/gtest.h>

#include <sstream>

#include "vhetnet/experiments.hpp"

using namespace vhetnet;

namespace {

ExperimentConfig small_config() {
  auto c = profile_defaults("desk");
  c.n_sbs = 30;
  c.n_days = 3;
  c.iterations = 4;
  c.synthetic.grid_side = 10;
  c.sweep.neighbors = {1, 5};
  c.sweep.exponents = {1, 3};
  c.sweep.layers = {1, 2, 3};
  c.sweep.s_values = {5, 8};
  c.sweep.decision_layers = {1, 3};
  return c;
}

std::string csv_of(const Report& r, const ExperimentConfig& c) {
  std::ostringstream out;
  write_csv(out, r.table, config_hash(c));
  return out.str();
}

}  // namespace

TEST(Describe, SampleStatistics) {
  const auto s = describe(std::vector<double>{1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(5.0 / 3.0));
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_DOUBLE_EQ(describe(std::vector<double>{7}).stddev, 0.0);
}

TEST(RunIterations, OrderedAndPropagatesFailures) {
  const std::function<std::size_t(std::size_t)> sq = [](std::size_t i) { return i * i; };
  const auto out = run_iterations<std::size_t>(50, 4, sq);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(out[i], i * i);
  const std::function<int(std::size_t)> bad = [](std::size_t i) -> int {
    if (i == 7) throw DataError("boom");
    return 0;
  };
  EXPECT_THROW(run_iterations<int>(20, 3, bad), DataError);
}

TEST(Dataset, SyntheticShapes) {
  const auto c = small_config();
  const auto d = build_dataset(c);
  EXPECT_EQ(d.day.sbs_count(), 30u);
  EXPECT_EQ(d.day.slot_count(), 144u);
  EXPECT_EQ(d.history.slot_count(), 3u * 144u);
  EXPECT_EQ(d.placements.size(), 30u);
  EXPECT_EQ(d.source, "synthetic");
}

TEST(ErrorSweep, ShapesAndAggregation) {
  const auto c = small_config();
  const auto d = build_dataset(c);
  const auto r = run_error_sweep(c, d, ErrorAxis::Neighbors);
  EXPECT_EQ(r.experiment, "fig2");
  ASSERT_NE(r.find("distance_weighted", 5, 3u, std::nullopt), nullptr);
  for (const auto& p : r.points) {
    ASSERT_EQ(p.per_iteration.size(), c.iterations);
    const auto st = p.iteration_stats();
    EXPECT_LE(st.min, st.mean);
    EXPECT_GE(st.max, st.mean);
    EXPECT_EQ(p.pooled.scored + p.pooled.excluded, c.iterations * 144 * c.sleepers_for(30));
  }
  const auto layers = run_error_sweep(c, d, ErrorAxis::Layers);
  EXPECT_EQ(layers.experiment, "fig3");
  EXPECT_NE(layers.find("mlc", std::nullopt, std::nullopt, 3), nullptr);
}

TEST(SwitchingSweep, PerfectEstimatesChangeNothing) {
  const auto c = small_config();
  const auto d = build_dataset(c);
  const auto r = run_power_sweep(c, d);
  for (std::size_t s : c.sweep.s_values) {
    const auto* p = r.find(s, "perfect", 0);
    ASSERT_NE(p, nullptr);
    for (double x : p->change) EXPECT_EQ(x, 0.0);
    for (double g : p->gap) EXPECT_EQ(g, 0.0);
  }
  for (const auto& p : r.points)
    for (std::size_t i = 0; i < p.gap.size(); ++i) {
      EXPECT_GE(p.gap[i], -1e-9);
      EXPECT_DOUBLE_EQ(p.gap[i], p.power_deployed[i] - p.power_actual[i]);
    }
}

TEST(Experiments, OutputIndependentOfWorkerCount) {
  const auto c = small_config();
  for (const auto& name : experiment_names()) {
    const auto a = run_experiment(name, c, 1), b = run_experiment(name, c, 4);
    EXPECT_EQ(csv_of(a, c), csv_of(b, c)) << name;
  }
}

TEST(Experiments, SeedChangesTheDraw) {
  auto c = small_config();
  const auto a = csv_of(run_experiment("fig2", c), c);
  c.seed = 2;
  EXPECT_NE(a, csv_of(run_experiment("fig2", c), c));
}

TEST(Experiments, CsvRowsCarryTheHash) {
  const auto c = small_config();
  const auto rep = run_experiment("fig4", c);
  const std::string csv = csv_of(rep, c);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "config_hash");
  const auto commas = std::count(line.begin(), line.end(), ',');
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), commas);
    EXPECT_EQ(line.substr(line.rfind(',') + 1), config_hash(c));
  }
  EXPECT_EQ(rows, rep.table.rows.size());
  EXPECT_EQ(rep.metadata.at("config_hash"), config_hash(c));
  EXPECT_EQ(report_stem("fig4", c), "fig4_desk_1");
}

TEST(Experiments, UnknownNameIsAConfigError) {
  EXPECT_THROW(run_experiment("fig9", small_config()), ConfigError);
}
