#ifndef MLCORE_KMEANS_HPP
#define MLCORE_KMEANS_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mlcore/matrix.hpp"
#include "mlcore/metrics.hpp"
#include "mlcore/rng.hpp"

namespace mlcore {

// Lloyd-style k-means with three policy axes: the distance metric, the
// initial partition, and what to do with clusters that empty out.  The
// expert form is the template
//
//   KMeans<ManhattanMetric, PlusPlusInit, AllowEmptyClusters> km;
//
// while KMeans<> runs standard Euclidean k-means.  kmeans_cluster() is the
// runtime-configured front door used by the CLI.
//
// The objective is the sum of squared metric distances from each point to
// its centroid, for every metric; with the Euclidean metric it is
// non-increasing across iterations under AllowEmptyClusters.

/// Clustering output.  objective_trace holds the per-iteration objective
/// (each measured against the centroids that produced the assignment);
/// reseed_iterations flags the 1-based iterations where an empty cluster
/// was reseeded, the only places monotonicity may break.
struct ClusteringResult {
  DataMatrix centroids;
  std::vector<std::size_t> assignments;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  std::vector<std::size_t> reseed_iterations;
};

/// Assigns every point to a uniform-random cluster and averages; redraws
/// the whole partition until no cluster is empty.
inline DataMatrix init_random_partition(const DataMatrix& data, std::size_t k,
                                        SeededRng& rng) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (k == 0 || k > n) {
    throw std::invalid_argument("init_random_partition: need 1 <= k <= n");
  }
  std::vector<std::size_t> assign(n);
  std::vector<std::size_t> counts(k);
  while (true) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = rng.next_below(k);
      ++counts[assign[i]];
    }
    if (std::find(counts.begin(), counts.end(), 0) == counts.end()) break;
  }
  DataMatrix centroids(k, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = data.row_ptr(i);
    double* c = centroids.row_ptr(assign[i]);
    for (std::size_t j = 0; j < d; ++j) c[j] += p[j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      centroids(c, j) /= static_cast<double>(counts[c]);
    }
  }
  return centroids;
}

/// D^2 seeding: the first centroid is a uniform-random point, each later
/// one a point drawn with probability proportional to its squared distance
/// to the nearest centroid chosen so far.
template <MetricPolicy M>
DataMatrix init_kmeanspp(const DataMatrix& data, std::size_t k,
                         const M& metric, SeededRng& rng) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (k == 0 || k > n) {
    throw std::invalid_argument("init_kmeanspp: need 1 <= k <= n");
  }
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  chosen.push_back(rng.next_below(n));
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  taken[chosen[0]] = 1;

  while (chosen.size() < k) {
    const double* last = data.row_ptr(chosen.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist =
          metric.root(metric.raw_distance(data.row_ptr(i), last, d));
      min_sq[i] = std::min(min_sq[i], dist * dist);
      total += min_sq[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.next_double() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += min_sq[i];
        if (r < cum) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // r landed on the last non-zero-weight point
        for (std::size_t i = n; i-- > 0;) {
          if (min_sq[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Only duplicates of already-chosen points remain.
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) open.push_back(i);
      }
      pick = open[rng.next_below(open.size())];
    }
    taken[pick] = 1;
    chosen.push_back(pick);
  }

  DataMatrix centroids(k, d);
  for (std::size_t c = 0; c < k; ++c) {
    const double* p = data.row_ptr(chosen[c]);
    std::copy(p, p + d, centroids.row_ptr(c));
  }
  return centroids;
}

struct RandomPartitionInit {
  static constexpr const char* name() { return "random"; }
  template <MetricPolicy M>
  DataMatrix operator()(const DataMatrix& data, std::size_t k, const M&,
                        SeededRng& rng) const {
    return init_random_partition(data, k, rng);
  }
};

struct PlusPlusInit {
  static constexpr const char* name() { return "kmeanspp"; }
  template <MetricPolicy M>
  DataMatrix operator()(const DataMatrix& data, std::size_t k, const M& metric,
                        SeededRng& rng) const {
    return init_kmeanspp(data, k, metric, rng);
  }
};

/// Leaves an emptied cluster's centroid where it is.
struct AllowEmptyClusters {
  static constexpr bool kReseeds = false;
};

/// Moves an emptied cluster's centroid onto the point furthest from it
/// inside the highest-variance cluster, and hands that point over.
struct ReseedFurthestCluster {
  static constexpr bool kReseeds = true;
};

template <MetricPolicy M>
struct LloydStep {
  std::vector<std::size_t> assignments;
  DataMatrix centroids;
  double objective = 0.0;
  double moved = 0.0;
  bool reseeded = false;
};

namespace detail {

template <MetricPolicy M>
double squared_distance(const M& metric, const double* a, const double* b,
                        std::size_t d) {
  const double t = metric.root(metric.raw_distance(a, b, d));
  return t * t;
}

// Moves each empty cluster's centroid onto a point donated by the cluster
// with the highest variance (mean squared distance to its centroid); the
// donor must keep at least one member.  Ties resolve toward the smaller
// cluster/point index.  Runs after the mean update, mutating assignments,
// counts and centroids in place.
template <MetricPolicy M>
void reseed_empty_clusters(const DataMatrix& data, const DataMatrix& old_centroids,
                           const M& metric, std::vector<std::size_t>& assign,
                           std::vector<std::size_t>& counts,
                           DataMatrix& centroids) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k = counts.size();
  for (std::size_t e = 0; e < k; ++e) {
    if (counts[e] != 0) continue;
    std::vector<double> sq_sum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sq_sum[assign[i]] += squared_distance(
          metric, data.row_ptr(i), centroids.row_ptr(assign[i]), d);
    }
    std::size_t donor = k;
    double best_var = -1.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] < 2) continue;
      const double var = sq_sum[c] / static_cast<double>(counts[c]);
      if (var > best_var) {
        best_var = var;
        donor = c;
      }
    }
    if (donor == k) break;  // nothing left to donate from
    std::size_t pick = n;
    double furthest = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] != donor) continue;
      const double dist = squared_distance(metric, data.row_ptr(i),
                                           old_centroids.row_ptr(e), d);
      if (dist > furthest) {
        furthest = dist;
        pick = i;
      }
    }
    const double* p = data.row_ptr(pick);
    std::copy(p, p + d, centroids.row_ptr(e));
    assign[pick] = e;
    counts[e] = 1;
    --counts[donor];
    // recompute the donor's mean without the departed point
    double* dc = centroids.row_ptr(donor);
    std::fill(dc, dc + d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] != donor) continue;
      const double* q = data.row_ptr(i);
      for (std::size_t j = 0; j < d; ++j) dc[j] += q[j];
    }
    for (std::size_t j = 0; j < d; ++j) {
      dc[j] /= static_cast<double>(counts[donor]);
    }
  }
}

}  // namespace detail

/// One Lloyd iteration: assign each point to its metric-nearest centroid
/// (ties toward the lower centroid index), average each cluster, and apply
/// the empty-cluster policy.  The returned objective is measured against
/// the input centroids and the assignments they produced, before any
/// reseeding; moved is the total metric displacement of the centroids.
template <MetricPolicy M, class EmptyPolicy>
LloydStep<M> lloyd_step(const DataMatrix& data, const DataMatrix& centroids,
                        const M& metric, EmptyPolicy) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  const std::size_t k = centroids.rows();
  detail::check_same_dim(centroids.cols(), d, "lloyd_step");

  LloydStep<M> step;
  step.assignments.resize(n);
  std::vector<std::size_t> counts(k, 0);
  DataMatrix sums(k, d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* p = data.row_ptr(i);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double raw = metric.raw_distance(p, centroids.row_ptr(c), d);
      if (raw < best) {
        best = raw;
        best_c = c;
      }
    }
    step.assignments[i] = best_c;
    ++counts[best_c];
    double* s = sums.row_ptr(best_c);
    for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
    const double t = metric.root(best);
    step.objective += t * t;
  }

  step.centroids = centroids;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;  // policy applies below
    double* out = step.centroids.row_ptr(c);
    const double* s = sums.row_ptr(c);
    for (std::size_t j = 0; j < d; ++j) {
      out[j] = s[j] / static_cast<double>(counts[c]);
    }
  }
  if constexpr (EmptyPolicy::kReseeds) {
    if (std::find(counts.begin(), counts.end(), std::size_t{0}) !=
        counts.end()) {
      step.reseeded = true;
      detail::reseed_empty_clusters(data, centroids, metric, step.assignments,
                                    counts, step.centroids);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    step.moved += metric.distance(centroids.row(c), step.centroids.row(c));
  }
  return step;
}

struct KMeansOptions {
  std::size_t max_iterations = 1000;
  double tolerance = 1e-6;  // on total centroid movement
  std::uint64_t seed = 0;
};

template <MetricPolicy M = EuclideanMetric, class Init = RandomPartitionInit,
          class EmptyPolicy = ReseedFurthestCluster>
class KMeans {
 public:
  explicit KMeans(KMeansOptions options = {}, M metric = {}, Init init = {})
      : options_(options), metric_(std::move(metric)), init_(std::move(init)) {
    if (options_.max_iterations == 0) {
      throw std::invalid_argument("KMeans: max_iterations must be >= 1");
    }
    if (!(options_.tolerance >= 0.0)) {
      throw std::invalid_argument("KMeans: tolerance must be >= 0");
    }
  }

  const M& metric() const { return metric_; }
  const KMeansOptions& options() const { return options_; }

  ClusteringResult cluster(const DataMatrix& data, std::size_t k) const {
    check_k(data, k);
    SeededRng rng(options_.seed);
    return run(data, init_(data, k, metric_, rng));
  }

  /// Clustering from caller-supplied starting centroids; no RNG involved.
  ClusteringResult cluster(const DataMatrix& data, std::size_t k,
                           const DataMatrix& initial) const {
    check_k(data, k);
    if (initial.rows() != k || initial.cols() != data.cols()) {
      throw std::invalid_argument(
          "KMeans: initial centroids must be k x d (" + std::to_string(k) +
          "x" + std::to_string(data.cols()) + "), got " +
          std::to_string(initial.rows()) + "x" +
          std::to_string(initial.cols()));
    }
    return run(data, initial);
  }

 private:
  static void check_k(const DataMatrix& data, std::size_t k) {
    if (k == 0 || k > data.rows()) {
      throw std::invalid_argument(
          "KMeans: k = " + std::to_string(k) + " must be in [1, " +
          std::to_string(data.rows()) + "]");
    }
  }

  ClusteringResult run(const DataMatrix& data, DataMatrix centroids) const {
    ClusteringResult res;
    std::vector<std::size_t> prev_assign;
    for (std::size_t it = 1; it <= options_.max_iterations; ++it) {
      auto step = lloyd_step(data, centroids, metric_, EmptyPolicy{});
      res.objective_trace.push_back(step.objective);
      if (step.reseeded) res.reseed_iterations.push_back(it);
      res.iterations = it;
      centroids = std::move(step.centroids);
      const bool stable = !prev_assign.empty() &&
                          prev_assign == step.assignments;
      prev_assign = std::move(step.assignments);
      if (step.moved <= options_.tolerance || stable) {
        res.converged = true;
        break;
      }
    }
    res.centroids = std::move(centroids);
    res.assignments = std::move(prev_assign);
    const std::size_t d = data.cols();
    for (std::size_t i = 0; i < data.rows(); ++i) {
      res.objective += detail::squared_distance(
          metric_, data.row_ptr(i), res.centroids.row_ptr(res.assignments[i]),
          d);
    }
    return res;
  }

  KMeansOptions options_;
  M metric_;
  Init init_;
};

// Runtime-configured interface over the policy templates.

enum class MetricKind { kEuclidean, kManhattan };
enum class InitKind { kRandomPartition, kPlusPlus, kGivenCentroids };
enum class EmptyClusterPolicy { kAllowEmpty, kReseedFurthest };

struct KMeansConfig {
  std::size_t k = 1;
  std::size_t max_iterations = 1000;
  double tolerance = 1e-6;
  MetricKind metric = MetricKind::kEuclidean;
  InitKind init = InitKind::kRandomPartition;
  EmptyClusterPolicy empty = EmptyClusterPolicy::kReseedFurthest;
  std::uint64_t seed = 0;
};

namespace detail {

template <MetricPolicy M, class EmptyPolicy>
ClusteringResult kmeans_dispatch_init(const DataMatrix& data,
                                      const KMeansConfig& config,
                                      const std::optional<DataMatrix>& initial,
                                      const M& metric) {
  const KMeansOptions opts{config.max_iterations, config.tolerance,
                           config.seed};
  // Explicit starting centroids override the configured initializer.
  if (initial.has_value()) {
    KMeans<M, RandomPartitionInit, EmptyPolicy> km(opts, metric);
    return km.cluster(data, config.k, *initial);
  }
  switch (config.init) {
    case InitKind::kRandomPartition: {
      KMeans<M, RandomPartitionInit, EmptyPolicy> km(opts, metric);
      return km.cluster(data, config.k);
    }
    case InitKind::kPlusPlus: {
      KMeans<M, PlusPlusInit, EmptyPolicy> km(opts, metric);
      return km.cluster(data, config.k);
    }
    case InitKind::kGivenCentroids:
      throw std::invalid_argument(
          "kmeans_cluster: init requires initial centroids but none given");
  }
  throw std::logic_error("kmeans_cluster: unreachable");
}

template <MetricPolicy M>
ClusteringResult kmeans_dispatch_empty(const DataMatrix& data,
                                       const KMeansConfig& config,
                                       const std::optional<DataMatrix>& initial,
                                       const M& metric) {
  if (config.empty == EmptyClusterPolicy::kAllowEmpty) {
    return kmeans_dispatch_init<M, AllowEmptyClusters>(data, config, initial,
                                                       metric);
  }
  return kmeans_dispatch_init<M, ReseedFurthestCluster>(data, config, initial,
                                                        metric);
}

}  // namespace detail

/// Runs policy-configured k-means; initial centroids, when given, override
/// config.init and make the run RNG-independent.
inline ClusteringResult kmeans_cluster(
    const DataMatrix& data, const KMeansConfig& config,
    const std::optional<DataMatrix>& initial = std::nullopt) {
  if (config.metric == MetricKind::kManhattan) {
    return detail::kmeans_dispatch_empty(data, config, initial,
                                         ManhattanMetric{});
  }
  return detail::kmeans_dispatch_empty(data, config, initial,
                                       EuclideanMetric{});
}

}  // namespace mlcore

#endif  // MLCORE_KMEANS_HPP
