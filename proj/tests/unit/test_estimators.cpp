#include <gtest/gtest.h>

#include "vhetnet/estimators.hpp"

using namespace vhetnet;

namespace {

std::vector<SbsPlacement> on_line(std::initializer_list<double> xs) {
  std::vector<SbsPlacement> out;
  for (double x : xs) out.push_back({out.size(), 0, {x, 0.0}});
  return out;
}

std::vector<SbsPlacement> random_placements(Rng& rng, std::size_t n) {
  std::vector<SbsPlacement> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({i, 0, {rng.uniform(0, 5000), rng.uniform(0, 5000)}});
  return out;
}

LoadSeries constant_history(std::span<const double> loads, std::size_t slots = 144) {
  LoadSeries h(loads.size(), slots);
  for (std::size_t i = 0; i < loads.size(); ++i)
    for (std::size_t t = 0; t < slots; ++t) h(i, t) = loads[i];
  return h;
}

}  // namespace

TEST(Idw, NearestNeighborDominatesAsExponentGrows) {
  // Sleeper at 0; loads 1 at distance 1 and 0 at distance 2.
  const auto pl = on_line({0.0, 1.0, 2.0});
  const auto ms = mask_sleepers(std::vector<double>{0.5, 1.0, 0.0}, std::vector<std::size_t>{0});
  EXPECT_NEAR(distance_estimate(ms.snapshot, pl, 2, 1u).estimates[0].value, 2.0 / 3.0, 1e-15);
  EXPECT_GE(distance_estimate(ms.snapshot, pl, 2, 10u).estimates[0].value, 0.999);
  EXPECT_DOUBLE_EQ(distance_estimate(ms.snapshot, pl, 2, std::nullopt).estimates[0].value, 0.5);
}

TEST(Idw, RawWeightsScaleWithDmaxButNormalizedDoNot) {
  const std::vector<double> d{1.0, 2.0, 4.0};
  const auto a = idw_weights(d, 2, 1.0), b = idw_weights(d, 2, 4.0);
  EXPECT_DOUBLE_EQ(a[1], 0.25);
  EXPECT_DOUBLE_EQ(b[1], 1.0);
  const double sa = a[0] + a[1] + a[2], sb = b[0] + b[1] + b[2];
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a[j] / sa, b[j] / sb, 1e-15);
}

TEST(Idw, EquidistantNeighborsGiveThePlainMean) {
  std::vector<SbsPlacement> pl{{0, 0, {0, 0}}, {1, 0, {300, 0}}, {2, 0, {-300, 0}}, {3, 0, {0, 300}}, {4, 0, {0, -300}}};
  const std::vector<double> loads{0.0, 0.1, 0.7, 0.4, 0.25};
  const auto ms = mask_sleepers(loads, std::vector<std::size_t>{0});
  const double plain = distance_estimate(ms.snapshot, pl, 4, std::nullopt).estimates[0].value;
  for (unsigned e : {1u, 3u, 5u, 10u}) EXPECT_DOUBLE_EQ(distance_estimate(ms.snapshot, pl, 4, e).estimates[0].value, plain);
}

TEST(Idw, TiesBrokenByLowerId) {
  const std::vector<SbsPlacement> pl{{0, 0, {0, 0}}, {1, 0, {-5, 0}}, {2, 0, {5, 0}}};
  const auto ms = mask_sleepers(std::vector<double>{0, 0.2, 0.8}, std::vector<std::size_t>{0});
  const auto r = distance_estimate(ms.snapshot, pl, 1, std::nullopt);
  EXPECT_EQ(r.estimates[0].neighbors, std::vector<std::size_t>{1});
  EXPECT_DOUBLE_EQ(r.estimates[0].value, 0.2);
}

TEST(Idw, LargeExponentAtCityDistancesStaysFinite) {
  const auto pl = on_line({0.0, 4000.0, 9000.0});
  const auto ms = mask_sleepers(std::vector<double>{0, 0.3, 0.6}, std::vector<std::size_t>{0});
  const double v = distance_estimate(ms.snapshot, pl, 2, 10u).estimates[0].value;
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, (0.3 + 0.6 * std::pow(4.0 / 9.0, 10)) / (1 + std::pow(4.0 / 9.0, 10)), 1e-15);
}

TEST(Idw, Preconditions) {
  const auto pl = on_line({0.0, 1.0, 2.0});
  const auto ms = mask_sleepers(std::vector<double>{0, 0.3, 0.6}, std::vector<std::size_t>{0});
  EXPECT_THROW(distance_estimate(ms.snapshot, pl, 3, 1u), std::invalid_argument);
  EXPECT_THROW(distance_estimate(ms.snapshot, pl, 0, 1u), std::invalid_argument);
  EXPECT_THROW(distance_estimate(ms.snapshot, pl, 1, 0u), std::invalid_argument);
  const LoadSnapshot all(std::vector<double>(3, 0.0), std::vector<bool>(3, false));
  EXPECT_THROW(distance_estimate(all, pl, 1, 1u), std::invalid_argument);
  EXPECT_TRUE(distance_estimate(LoadSnapshot::fully_known({0.1, 0.2}), pl, 1, 1u).estimates.empty());
}

TEST(Estimators, StayInsideTheNeighborRange) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(30);
    const auto pl = random_placements(rng, n);
    std::vector<double> loads(n);
    for (auto& l : loads) l = rng.uniform01();
    const std::size_t n_sleep = 1 + rng.uniform_index(n / 2);
    const auto ids = rng.sample_indices(n, n_sleep);
    const auto ms = mask_sleepers(loads, ids);
    const std::size_t nb = 1 + rng.uniform_index(n - n_sleep);
    const std::optional<unsigned> e = rng.uniform01() < 0.3 ? std::nullopt : std::optional<unsigned>(1 + rng.uniform_index(10));
    for (const auto& r : {distance_estimate(ms.snapshot, pl, nb, e), random_estimate(ms.snapshot, pl, nb, e, rng.next())}) {
      for (const auto& est : r.estimates) {
        double lo = 1.0, hi = 0.0, wsum = 0.0;
        for (std::size_t a : est.neighbors) {
          EXPECT_TRUE(ms.snapshot.known(a));
          lo = std::min(lo, loads[a]);
          hi = std::max(hi, loads[a]);
        }
        for (double w : est.weights) wsum += w;
        EXPECT_NEAR(wsum, 1.0, 1e-12);
        EXPECT_GE(est.value, lo);
        EXPECT_LE(est.value, hi);
      }
    }
  }
}

TEST(RandomEstimator, ReplaysItsDraw) {
  Rng rng(4);
  const auto pl = random_placements(rng, 20);
  std::vector<double> loads(20);
  for (auto& l : loads) l = rng.uniform01();
  const std::vector<std::size_t> sleepers{2, 9, 15};
  const auto ms = mask_sleepers(loads, sleepers);
  const auto r = random_estimate(ms.snapshot, pl, 4, std::nullopt, 1234);

  Rng replay(1234);
  const auto active = ms.snapshot.active_ids();
  for (std::size_t k = 0; k < sleepers.size(); ++k) {
    std::vector<std::size_t> pool = active;
    replay.partial_shuffle(std::span<std::size_t>(pool), 4);
    EXPECT_EQ(r.estimates[k].neighbors, std::vector<std::size_t>(pool.begin(), pool.begin() + 4));
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) sum += loads[pool[j]];
    EXPECT_DOUBLE_EQ(r.estimates[k].value, sum / 4.0);
  }
  EXPECT_EQ(random_estimate(ms.snapshot, pl, 4, 2u, 99).values(), random_estimate(ms.snapshot, pl, 4, 2u, 99).values());
}

TEST(Mlc, UniformActivesAreAFixedPoint) {
  const std::vector<double> loads{0.4, 0.4, 0.9, 0.4, 0.4, 0.1};
  const auto ms = mask_sleepers(loads, std::vector<std::size_t>{2, 5});
  const LoadSeries hist = constant_history(std::vector<double>(loads.size(), 0.4));
  MlcConfig cfg;
  cfg.layers = 4;
  for (const auto& layer : mlc_estimate_layers(ms.snapshot, &hist, cfg))
    for (const auto& e : layer.estimates) EXPECT_DOUBLE_EQ(e.value, 0.4);
}

TEST(Mlc, SleeperJoinsTheGroupItsHistoryPointsTo) {
  const std::vector<double> loads{0.1, 0.12, 0.08, 0.9, 0.88, 0.92, 0.5, 0.11};
  const auto ms = mask_sleepers(loads, std::vector<std::size_t>{6, 7});
  std::vector<double> past = loads;
  past[6] = 0.87;
  past[7] = 0.1;
  const LoadSeries hist = constant_history(past);
  MlcConfig cfg;
  cfg.k_override = 2;
  const auto r = mlc_estimate(ms.snapshot, &hist, cfg);
  EXPECT_NEAR(r.estimates[0].value, 0.9, 1e-15);
  EXPECT_NEAR(r.estimates[1].value, 0.1, 1e-15);
  EXPECT_EQ(r.estimates[0].neighbors, (std::vector<std::size_t>{3, 4, 5}));
}

TEST(Mlc, DeeperLayersOnlyNarrowTheCluster) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(40);
    std::vector<double> loads(n);
    for (auto& l : loads) l = rng.uniform01();
    const auto ids = rng.sample_indices(n, 1 + rng.uniform_index(4));
    const auto ms = mask_sleepers(loads, ids);
    const LoadSeries hist = constant_history(loads);
    MlcConfig cfg;
    cfg.layers = 6;
    cfg.seed = rng.next();
    const auto layers = mlc_estimate_layers(ms.snapshot, &hist, cfg);
    ASSERT_EQ(layers.size(), 6u);
    for (std::size_t l = 1; l < layers.size(); ++l)
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const auto& prev = layers[l - 1].estimates[k].neighbors;
        for (std::size_t a : layers[l].estimates[k].neighbors)
          EXPECT_TRUE(std::find(prev.begin(), prev.end(), a) != prev.end());
      }
  }
}

TEST(Mlc, ScalesWithTheLoads) {
  Rng rng(23);
  std::vector<double> loads(30), half(30);
  for (std::size_t i = 0; i < 30; ++i) {
    loads[i] = rng.uniform01();
    half[i] = loads[i] * 0.5;
  }
  const std::vector<std::size_t> ids{4, 11, 25};
  const auto a = mask_sleepers(loads, ids), b = mask_sleepers(half, ids);
  const LoadSeries ha = constant_history(loads), hb = constant_history(half);
  MlcConfig cfg;
  cfg.layers = 3;
  cfg.k_override = 3;
  const auto ra = mlc_estimate(a.snapshot, &ha, cfg), rb = mlc_estimate(b.snapshot, &hb, cfg);
  for (std::size_t k = 0; k < ids.size(); ++k) EXPECT_NEAR(rb.estimates[k].value, 0.5 * ra.estimates[k].value, 1e-15);
}

TEST(Mlc, InitialFeatureUsesTheLatestDay) {
  LoadSeries hist(2, 288);
  hist(1, 10) = 0.2;
  hist(1, 154) = 0.6;
  const auto ms = mask_sleepers(std::vector<double>{0.3, 0.0}, std::vector<std::size_t>{1}, 10);
  EXPECT_DOUBLE_EQ(mlc_initial_feature(ms.snapshot, hist, 1), 0.6);
  const LoadSeries none(1, 144);
  EXPECT_DOUBLE_EQ(mlc_initial_feature(ms.snapshot, none, 1), 0.3);
}

TEST(Mlc, Preconditions) {
  const auto ms = mask_sleepers(std::vector<double>{0.3, 0.1}, std::vector<std::size_t>{1});
  EXPECT_THROW(mlc_estimate(ms.snapshot, nullptr, MlcConfig{}), std::invalid_argument);
  MlcConfig zero;
  zero.layers = 0;
  const LoadSeries h(2, 144);
  EXPECT_THROW(mlc_estimate(ms.snapshot, &h, zero), std::invalid_argument);
}

TEST(Dispatch, RoutesToEachEstimator) {
  const auto pl = on_line({0.0, 1.0, 2.0, 3.0});
  const std::vector<double> loads{0.5, 0.2, 0.4, 0.6};
  const auto ms = mask_sleepers(loads, std::vector<std::size_t>{0});
  EXPECT_DOUBLE_EQ(estimate(DistanceConfig{2, std::nullopt, 1.0}, ms.snapshot, pl).estimates[0].value, 0.3);
  const auto r = estimate(RandomConfig{3, std::nullopt, 5, 1.0}, ms.snapshot, pl);
  EXPECT_NEAR(r.estimates[0].value, 0.4, 1e-15);
  const LoadSeries h = constant_history(loads);
  EXPECT_NO_THROW(estimate(MlcConfig{}, ms.snapshot, pl, &h));
  EXPECT_EQ(estimator_name(DistanceConfig{}), "distance");
}

TEST(EstimationError, HandValuesAndExclusion) {
  const auto s = estimation_error(std::vector<double>{0.5, 0.0005, 0.2}, std::vector<double>{0.25, 1.0, 0.3});
  EXPECT_EQ(s.scored, 2u);
  EXPECT_EQ(s.excluded, 1u);
  EXPECT_NEAR(s.mean, 0.5, 1e-15);
  EXPECT_THROW(estimation_error(std::vector<double>{0.0}, std::vector<double>{0.1}), std::invalid_argument);
  EXPECT_THROW(estimation_error(std::vector<double>{0.1}, std::vector<double>{}), std::invalid_argument);
}

TEST(EstimationError, MergedAccumulatorsMatchOnePass) {
  Rng rng(3);
  ErrorAccumulator whole, left, right;
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform01(), e = rng.uniform01();
    whole.add(a, e, 0.05);
    (i < 40 ? left : right).add(a, e, 0.05);
  }
  left.merge(right);
  EXPECT_EQ(left.scored, whole.scored);
  EXPECT_EQ(left.excluded, whole.excluded);
  EXPECT_NEAR(left.mean(), whole.mean(), 1e-12);
}
