#include <gtest/gtest.h>

#include <functional>

#include "vhetnet/kmeans.hpp"

using namespace vhetnet;

namespace {

// Nine 2-D points: three tight blobs on an equilateral triangle of side 10.
PointSet three_blobs() {
  const double h = 10.0 * std::sqrt(3.0) / 2.0;
  const double cx[3] = {0.0, 10.0, 5.0}, cy[3] = {0.0, 0.0, h};
  const double off[3][2] = {{0.0, 0.0}, {0.1, 0.05}, {-0.05, 0.1}};
  PointSet p(2);
  for (int b = 0; b < 3; ++b)
    for (const auto& o : off) p.push_back(std::vector<double>{cx[b] + o[0], cy[b] + o[1]});
  return p;
}

double brute_sse(const PointSet& pts, const std::vector<std::size_t>& labels, std::size_t k) {
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> mean(pts.dim(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (labels[i] == c) {
        for (std::size_t d = 0; d < pts.dim(); ++d) mean[d] += pts[i][d];
        ++n;
      }
    if (n == 0) continue;
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (labels[i] == c)
        for (std::size_t d = 0; d < pts.dim(); ++d) total += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
  }
  return total;
}

// Minimum SSE over every partition of the points into exactly k non-empty
// groups (restricted-growth strings).
double optimal_sse(const PointSet& pts, std::size_t k) {
  std::vector<std::size_t> labels(pts.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (pts.size() - i < k - used) return;
    if (i == pts.size()) {
      if (used == k) best = std::min(best, brute_sse(pts, labels, k));
      return;
    }
    for (std::size_t c = 0; c <= used && c < k; ++c) {
      labels[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

PointSet random_points(Rng& rng, std::size_t n, std::size_t dim) {
  PointSet p(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform(0.0, 1.0);
    p.push_back(x);
  }
  return p;
}

}  // namespace

TEST(Sse, HandValues) {
  const PointSet pts = PointSet::from_scalars(std::vector<double>{0.0, 2.0});
  const PointSet one = PointSet::from_scalars(std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(compute_sse(pts, std::vector<std::size_t>{0, 0}, one), 2.0);
  const PointSet own = PointSet::from_scalars(std::vector<double>{0.0, 2.0});
  EXPECT_DOUBLE_EQ(compute_sse(pts, std::vector<std::size_t>{0, 1}, own), 0.0);
}

TEST(Sse, Errors) {
  const PointSet pts = PointSet::from_scalars(std::vector<double>{0.0, 2.0});
  const PointSet c2(2, {0.0, 0.0});
  EXPECT_THROW(compute_sse(pts, std::vector<std::size_t>{0, 0}, c2), std::invalid_argument);
  const PointSet c1 = PointSet::from_scalars(std::vector<double>{1.0});
  EXPECT_THROW(compute_sse(pts, std::vector<std::size_t>{0, 1}, c1), std::out_of_range);
}

TEST(KMeans, SingleClusterIsMean) {
  const PointSet pts = PointSet::from_scalars(std::vector<double>{1.0, 2.0, 6.0});
  const auto st = kmeans_fit(pts, 1);
  EXPECT_DOUBLE_EQ(st.centroids[0][0], 3.0);
  EXPECT_DOUBLE_EQ(st.sse, 4.0 + 1.0 + 9.0);
}

TEST(KMeans, TwoPointsTwoClusters) {
  const PointSet pts = PointSet::from_scalars(std::vector<double>{0.25, 0.75});
  const auto st = kmeans_fit(pts, 2);
  EXPECT_NE(st.assignments[0], st.assignments[1]);
  EXPECT_DOUBLE_EQ(st.sse, 0.0);
}

TEST(KMeans, Preconditions) {
  EXPECT_THROW(kmeans_fit(PointSet(1), 1), std::invalid_argument);
  const PointSet pts = PointSet::from_scalars(std::vector<double>{1.0});
  EXPECT_THROW(kmeans_fit(pts, 2), std::invalid_argument);
  EXPECT_THROW(kmeans_fit(pts, 0), std::invalid_argument);
}

TEST(KMeans, BlobAssignmentMatchesExhaustiveOptimum) {
  const PointSet pts = three_blobs();
  // Every labelling of 9 points with 3 labels.
  std::vector<std::size_t> labels(pts.size()), best_labels;
  double best = std::numeric_limits<double>::infinity();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < pts.size(); ++i) combos *= 3;
  for (std::size_t code = 0; code < combos; ++code) {
    std::size_t c = code;
    for (auto& l : labels) {
      l = c % 3;
      c /= 3;
    }
    const double s = brute_sse(pts, labels, 3);
    if (s < best - 1e-12) {
      best = s;
      best_labels = labels;
    }
  }
  // The optimum groups points blob by blob.
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j) EXPECT_EQ(best_labels[i] == best_labels[j], i / 3 == j / 3);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto st = kmeans_fit(pts, 3, 100, 1e-12, seed);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < pts.size(); ++j) EXPECT_EQ(st.assignments[i] == st.assignments[j], i / 3 == j / 3);
    EXPECT_NEAR(st.sse, best, 1e-12);
  }
}

TEST(KMeans, SseMatchesRecomputationAndNeverIncreases) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(40), dim = 1 + rng.uniform_index(3);
    const PointSet pts = random_points(rng, n, dim);
    const std::size_t k = 1 + rng.uniform_index(std::min<std::size_t>(n, 6));
    const auto st = kmeans_fit(pts, k, 100, 1e-12, rng.next());
    EXPECT_NEAR(st.sse, brute_sse(pts, st.assignments, k), 1e-9 * std::max(1.0, st.sse));
    for (std::size_t t = 1; t < st.sse_trace.size(); ++t) EXPECT_LE(st.sse_trace[t], st.sse_trace[t - 1] + 1e-12);
    std::vector<std::size_t> counts(k, 0);
    for (auto a : st.assignments) ++counts[a];
    for (auto c : counts) EXPECT_GT(c, 0u);
  }
}

TEST(KMeans, RepairsEmptyClustersFromDuplicates) {
  const PointSet pts = PointSet::from_scalars(std::vector<double>{0.0, 0.0, 0.0, 5.0});
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto st = kmeans_fit(pts, 3, 100, 1e-12, seed);
    std::vector<std::size_t> counts(3, 0);
    for (auto a : st.assignments) ++counts[a];
    for (auto c : counts) EXPECT_GT(c, 0u);
    EXPECT_DOUBLE_EQ(st.sse, 0.0);
  }
}

TEST(KMeans, SameSeedSameResult) {
  Rng rng(8);
  const PointSet pts = random_points(rng, 30, 2);
  const auto a = kmeans_fit(pts, 4, 100, 1e-9, 77), b = kmeans_fit(pts, 4, 100, 1e-9, 77);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.sse_trace, b.sse_trace);
}

TEST(Elbow, ThreeBlobsGiveThree) {
  const PointSet pts = three_blobs();
  // Independent check on the globally optimal SSE curve.
  std::vector<double> opt;
  for (std::size_t k = 1; k <= 5; ++k) opt.push_back(optimal_sse(pts, k));
  std::size_t arg = 0;
  double top = -1.0;
  for (std::size_t i = 1; i + 1 < opt.size(); ++i) {
    const double sd = opt[i - 1] - 2 * opt[i] + opt[i + 1];
    if (sd > top) {
      top = sd;
      arg = i + 1;
    }
  }
  EXPECT_EQ(arg, 3u);

  const auto r = elbow_analysis(pts, 1, 8);
  EXPECT_EQ(r.k, 3u);
  EXPECT_FALSE(r.flat);
  for (std::size_t k = 1; k <= 3; ++k) EXPECT_NEAR(r.sse_curve[k - 1], opt[k - 1], 1e-9);
  for (std::size_t k = 4; k <= 5; ++k) EXPECT_GE(r.sse_curve[k - 1], opt[k - 1] - 1e-9);
}

TEST(Elbow, IdenticalPointsFallBackToOne) {
  const PointSet pts = PointSet::from_scalars(std::vector<double>(10, 0.4));
  const auto r = elbow_analysis(pts, 1, 8);
  EXPECT_TRUE(r.flat);
  EXPECT_EQ(r.k, 1u);
}

TEST(Elbow, RangeChecks) {
  const PointSet pts = three_blobs();
  EXPECT_THROW(elbow_select_k(pts, 1, 2), std::invalid_argument);
  EXPECT_THROW(elbow_select_k(pts, 1, 10), std::invalid_argument);
  EXPECT_THROW(elbow_select_k(pts, 0, 4), std::invalid_argument);
}
