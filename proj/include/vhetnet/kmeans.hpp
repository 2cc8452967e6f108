#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "vhetnet/rng.hpp"

namespace vhetnet {

// Dense row-major set of equal-dimension feature vectors.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("point dimension must be positive");
  }
  PointSet(std::size_t dim, std::vector<double> flat) : dim_(dim), data_(std::move(flat)) {
    if (dim == 0 || data_.size() % dim != 0) throw std::invalid_argument("flat data is not a whole number of points");
  }

  static PointSet from_scalars(std::span<const double> xs) { return PointSet(1, std::vector<double>(xs.begin(), xs.end())); }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<double> operator[](std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> p) {
    if (p.size() != dim_) throw std::invalid_argument("point dimension mismatch");
    data_.insert(data_.end(), p.begin(), p.end());
  }

  const std::vector<double>& flat() const { return data_; }

 private:
  std::size_t dim_ = 1;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

struct ClusteringState {
  std::vector<std::size_t> assignments;
  PointSet centroids;
  double sse = 0.0;
  std::vector<double> sse_trace;  // SSE after each Lloyd iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t k() const { return centroids.size(); }
};

// Within-cluster sum of squared distances to the assigned centroid.
inline double compute_sse(const PointSet& points, std::span<const std::size_t> assignments, const PointSet& centroids) {
  if (assignments.size() != points.size()) throw std::invalid_argument("one assignment per point required");
  if (!points.empty() && points.dim() != centroids.dim()) throw std::invalid_argument("point/centroid dimension mismatch");
  double sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (assignments[i] >= centroids.size()) throw std::out_of_range("assignment refers to a missing centroid");
    sse += squared_distance(points[i], centroids[assignments[i]]);
  }
  return sse;
}

namespace detail {

inline std::size_t nearest_centroid(std::span<const double> p, const PointSet& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// First center uniform from the seed, each further center the point farthest
// from the centers chosen so far (lowest index on ties).
inline PointSet farthest_point_seeds(const PointSet& points, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  PointSet centers(points.dim());
  const std::size_t first = static_cast<std::size_t>(rng.uniform_index(points.size()));
  centers.push_back(points[first]);
  std::vector<double> min_d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) min_d[i] = squared_distance(points[i], centers[0]);
  while (centers.size() < k) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < points.size(); ++i)
      if (min_d[i] > min_d[pick]) pick = i;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i)
      min_d[i] = std::min(min_d[i], squared_distance(points[i], centers[centers.size() - 1]));
  }
  return centers;
}

// Moves the point farthest from its centroid (taken from a cluster with at
// least two members) into each empty cluster.
inline void repair_empty_clusters(const PointSet& points, std::vector<std::size_t>& assign, PointSet& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t a : assign) ++counts[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    std::size_t pick = points.size();
    double pick_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[assign[i]] < 2) continue;
      const double d = squared_distance(points[i], centroids[assign[i]]);
      if (d > pick_d) {
        pick_d = d;
        pick = i;
      }
    }
    --counts[assign[pick]];
    assign[pick] = c;
    counts[c] = 1;
    std::copy(points[pick].begin(), points[pick].end(), centroids[c].begin());
  }
}

// Returns the largest per-centroid displacement.
inline double update_means(const PointSet& points, std::span<const std::size_t> assign, PointSet& centroids) {
  const std::size_t k = centroids.size(), dim = points.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[assign[i]];
    for (std::size_t d = 0; d < dim; ++d) sums[assign[i] * dim + d] += points[i][d];
  }
  double moved = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double shift = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double m = sums[c * dim + d] / static_cast<double>(counts[c]);
      const double diff = m - centroids[c][d];
      shift += diff * diff;
      centroids[c][d] = m;
    }
    moved = std::max(moved, std::sqrt(shift));
  }
  return moved;
}

}  // namespace detail

// Lloyd's algorithm from farthest-point seeding. Stops once no centroid moves
// more than `tol` or after `max_iter` iterations. Every cluster is non-empty
// on return and centroids are the means of their members.
inline ClusteringState kmeans_fit(const PointSet& points, std::size_t k, std::size_t max_iter = 100, double tol = 1e-9,
                                  std::uint64_t seed = 0) {
  if (points.empty()) throw std::invalid_argument("k-means needs at least one point");
  if (k == 0 || k > points.size()) throw std::invalid_argument("k must lie in [1, number of points]");
  if (max_iter == 0) throw std::invalid_argument("max_iter must be positive");

  ClusteringState st;
  st.centroids = detail::farthest_point_seeds(points, k, seed);
  st.assignments.assign(points.size(), 0);
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < points.size(); ++i) st.assignments[i] = detail::nearest_centroid(points[i], st.centroids);
    detail::repair_empty_clusters(points, st.assignments, st.centroids);
    const double moved = detail::update_means(points, st.assignments, st.centroids);
    st.sse_trace.push_back(compute_sse(points, st.assignments, st.centroids));
    st.iterations = it + 1;
    if (moved <= tol) {
      st.converged = true;
      break;
    }
  }
  st.sse = st.sse_trace.back();
  return st;
}

struct ElbowResult {
  std::size_t k = 1;
  std::size_t k_lo = 1;
  std::vector<double> sse_curve;  // sse_curve[i] is SSE at k_lo + i
  bool flat = false;              // curve had no bend; fell back to k = 1
};

// Picks the k with the largest discrete second difference
// SSE(k-1) - 2 SSE(k) + SSE(k+1) over interior k of [k_lo, k_hi]. A curve
// whose largest second difference is below 1e-12 of its scale, or whose SSE
// is rounding noise next to the squared norm of the data, is flat and yields
// k = 1.
inline ElbowResult elbow_analysis(const PointSet& points, std::size_t k_lo, std::size_t k_hi,
                                  std::size_t max_iter = 100, double tol = 1e-9, std::uint64_t seed = 0) {
  if (k_lo < 1 || k_hi > points.size() || k_hi < k_lo) throw std::invalid_argument("k range outside [1, number of points]");
  if (k_hi - k_lo + 1 < 3) throw std::invalid_argument("elbow detection needs a k range spanning at least 3 values");
  ElbowResult r;
  r.k_lo = k_lo;
  for (std::size_t k = k_lo; k <= k_hi; ++k) r.sse_curve.push_back(kmeans_fit(points, k, max_iter, tol, seed).sse);

  const double scale = *std::max_element(r.sse_curve.begin(), r.sse_curve.end());
  double energy = 0.0;
  for (double v : points.flat()) energy += v * v;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < r.sse_curve.size(); ++i) {
    const double second = r.sse_curve[i - 1] - 2.0 * r.sse_curve[i] + r.sse_curve[i + 1];
    if (second > best) {
      best = second;
      r.k = k_lo + i;
    }
  }
  if (!(scale > 1e-20 * energy) || best < 1e-12 * scale) {
    r.flat = true;
    r.k = 1;
  }
  return r;
}

inline std::size_t elbow_select_k(const PointSet& points, std::size_t k_lo, std::size_t k_hi,
                                  std::size_t max_iter = 100, double tol = 1e-9, std::uint64_t seed = 0) {
  return elbow_analysis(points, k_lo, k_hi, max_iter, tol, seed).k;
}

}  // namespace vhetnet
