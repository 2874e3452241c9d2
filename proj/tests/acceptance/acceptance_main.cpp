// Acceptance suite: runs every contract criterion end to end and prints
// one pass/fail line per criterion.  Exits with the number of failures.
//
// Usage: acceptance --cli <path-to-mlcore-binary>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mlcore/mlcore.hpp"
#include "../test_util.hpp"

namespace {

using mlcore::CoverTree;
using mlcore::DataMatrix;
using mlcore::EuclideanMetric;
using mlcore::FurthestNeighborSort;
using mlcore::KdTree;
using mlcore::ManhattanMetric;
using mlcore::NearestNeighborSort;
using mlcore::Traversal;

std::string g_cli;
std::filesystem::path g_scratch;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int run_cli(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct InstanceParams {
  std::size_t n, m, d, k;
  double p;
  bool self;
};

InstanceParams instance_params(std::size_t i, mlcore::SeededRng& rng,
                               std::size_t max_n) {
  static const std::size_t dims[] = {1, 2, 5, 10, 20};
  static const std::size_t ks[] = {1, 3, 10};
  static const double ps[] = {1.0, 2.0};
  InstanceParams params;
  params.d = dims[i % 5];
  params.k = ks[(i / 5) % 3];
  params.p = ps[(i / 15) % 2];
  params.self = (i % 2) == 0;
  params.n = params.k + 2 + rng.next_below(max_n - params.k - 1);
  params.m = params.self ? params.n : 1 + rng.next_below(500);
  return params;
}

// criterion 1: nearest-neighbor oracle equivalence across all four
// traversal/index combinations, p in {1,2}, with the 5-minute budget.
bool criterion_knn_oracle(std::string& detail) {
  const double start = now_seconds();
  mlcore::SeededRng rng(20120601);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto params = instance_params(i, rng, 2000);
    const auto ref = mlcore::generate_uniform(params.n, params.d, rng);
    const auto query = params.self
                           ? ref
                           : mlcore::generate_uniform(params.m, params.d, rng);
    const auto run = [&](auto metric) -> std::string {
      using M = decltype(metric);
      const auto oracle = testutil::oracle_knn(ref, query, params.k, metric,
                                               true, params.self);
      const KdTree kdtree(ref, 12);
      const CoverTree<M> ctree(ref, metric);
      for (const Traversal t : {Traversal::kSingle, Traversal::kDual}) {
        const auto kd_res =
            params.self
                ? mlcore::knn_search_self<NearestNeighborSort>(kdtree, params.k,
                                                               t, metric)
                : mlcore::knn_search<NearestNeighborSort>(kdtree, query,
                                                          params.k, t, metric);
        auto err = testutil::compare_neighbors(kd_res, oracle);
        if (!err.empty()) return "kd " + err;
        const auto cv_res =
            params.self
                ? mlcore::knn_search_self<NearestNeighborSort>(ctree, params.k,
                                                               t)
                : mlcore::knn_search<NearestNeighborSort>(ctree, query,
                                                          params.k, t);
        err = testutil::compare_neighbors(cv_res, oracle);
        if (!err.empty()) return "cover " + err;
      }
      return {};
    };
    const std::string err = params.p == 1.0 ? run(ManhattanMetric{})
                                            : run(EuclideanMetric{});
    if (!err.empty()) {
      detail = "instance " + std::to_string(i) + " (n=" +
               std::to_string(params.n) + " d=" + std::to_string(params.d) +
               " k=" + std::to_string(params.k) + " p=" +
               std::to_string(params.p) + "): " + err;
      return false;
    }
  }
  const double elapsed = now_seconds() - start;
  detail = "100 instances in " + std::to_string(elapsed) + " s";
  return elapsed < 300.0;
}

// criterion 2: furthest-neighbor and range-search results match the
// exhaustive oracles exactly, same instance family.
bool criterion_furthest_and_range(std::string& detail) {
  mlcore::SeededRng rng(19840909);
  for (std::size_t i = 0; i < 60; ++i) {
    const auto params = instance_params(i, rng, 1200);
    const auto ref = mlcore::generate_uniform(params.n, params.d, rng);
    const auto query = params.self
                           ? ref
                           : mlcore::generate_uniform(params.m, params.d, rng);
    const auto run = [&](auto metric) -> std::string {
      using M = decltype(metric);
      const auto oracle = testutil::oracle_knn(ref, query, params.k, metric,
                                               false, params.self);
      const KdTree kdtree(ref, 12);
      const CoverTree<M> ctree(ref, metric);
      for (const Traversal t : {Traversal::kSingle, Traversal::kDual}) {
        const auto kd_res =
            params.self ? mlcore::knn_search_self<FurthestNeighborSort>(
                              kdtree, params.k, t, metric)
                        : mlcore::knn_search<FurthestNeighborSort>(
                              kdtree, query, params.k, t, metric);
        auto err = testutil::compare_neighbors(kd_res, oracle, 0.0);
        if (!err.empty()) return "kd furthest " + err;
        const auto cv_res =
            params.self
                ? mlcore::knn_search_self<FurthestNeighborSort>(ctree,
                                                                params.k, t)
                : mlcore::knn_search<FurthestNeighborSort>(ctree, query,
                                                           params.k, t);
        err = testutil::compare_neighbors(cv_res, oracle, 0.0);
        if (!err.empty()) return "cover furthest " + err;
      }

      // range window spanning a representative distance scale
      const double high = 0.15 * static_cast<double>(params.d);
      const double low = high * 0.3;
      const auto range_oracle =
          testutil::oracle_range(ref, query, low, high, metric, params.self);
      const auto kd_range =
          params.self
              ? mlcore::range_search_self(kdtree, low, high, metric)
              : mlcore::range_search(kdtree, query, low, high, metric);
      const auto cover_range =
          params.self ? mlcore::range_search_self(ctree, low, high)
                      : mlcore::range_search(ctree, query, low, high);
      for (const auto* got : {&kd_range, &cover_range}) {
        for (std::size_t q = 0; q < range_oracle.size(); ++q) {
          if (got->matches[q].size() != range_oracle[q].size()) {
            return "range size mismatch at query " + std::to_string(q);
          }
          for (std::size_t j = 0; j < range_oracle[q].size(); ++j) {
            if (got->matches[q][j].first != range_oracle[q][j].first ||
                got->matches[q][j].second != range_oracle[q][j].second) {
              return "range entry mismatch at query " + std::to_string(q);
            }
          }
        }
      }
      return {};
    };
    const std::string err = params.p == 1.0 ? run(ManhattanMetric{})
                                            : run(EuclideanMetric{});
    if (!err.empty()) {
      detail = "instance " + std::to_string(i) + ": " + err;
      return false;
    }
  }
  detail = "60 instances, exact match";
  return true;
}

// criterion 3: structural invariants on >= 50 random trees.
bool criterion_tree_invariants(std::string& detail) {
  std::size_t trees = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    mlcore::SeededRng rng(seed * 101 + 7);
    const std::size_t n = 1 + rng.next_below(1000);
    const std::size_t d = 1 + rng.next_below(10);
    const std::size_t leaf = 1 + rng.next_below(32);
    const auto data = mlcore::generate_uniform(n, d, rng);
    const KdTree tree(data, leaf);
    const auto err = testutil::check_kdtree(tree);
    if (!err.empty()) {
      detail = "kd seed " + std::to_string(seed) + ": " + err;
      return false;
    }
    ++trees;
  }
  for (const double base : {1.3, 2.0}) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      mlcore::SeededRng rng(seed * 77 + 13);
      const std::size_t n = 1 + rng.next_below(1000);
      const std::size_t d = 1 + rng.next_below(6);
      const auto data = mlcore::generate_uniform(n, d, rng);
      const CoverTree<EuclideanMetric> tree(data, {}, base);
      const auto err = testutil::check_cover_tree(tree);
      if (!err.empty()) {
        detail = "cover base " + std::to_string(base) + " seed " +
                 std::to_string(seed) + ": " + err;
        return false;
      }
      ++trees;
    }
  }
  detail = std::to_string(trees) + " trees checked";
  return trees >= 50;
}

// criterion 4: with given starting centroids the clustering matches an
// independent plain-Lloyd oracle, and the Euclidean objective never
// increases under the allow-empty policy.
bool criterion_kmeans_oracle(std::string& detail) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    mlcore::SeededRng rng(seed * 997 + 11);
    const std::size_t n = 30 + rng.next_below(400);
    const std::size_t d = 1 + rng.next_below(5);
    const std::size_t k = 2 + rng.next_below(7);
    const auto data = mlcore::generate_uniform(n, d, rng);
    DataMatrix initial(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t pick = rng.next_below(n);
      for (std::size_t j = 0; j < d; ++j) initial(c, j) = data(pick, j);
    }
    const mlcore::KMeans<EuclideanMetric, mlcore::RandomPartitionInit,
                         mlcore::AllowEmptyClusters>
        km(mlcore::KMeansOptions{1000, 1e-6, 0});
    const auto res = km.cluster(data, k, initial);
    const auto oracle = testutil::plain_lloyd(data, initial, 1000, 1e-6);
    if (res.assignments != oracle.assignments) {
      detail = "assignments differ at seed " + std::to_string(seed);
      return false;
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        const double want = oracle.centroids[c][j];
        if (std::fabs(res.centroids(c, j) - want) >
            1e-9 * std::max(1.0, std::fabs(want))) {
          detail = "centroid mismatch at seed " + std::to_string(seed);
          return false;
        }
      }
    }
    for (std::size_t t = 1; t < res.objective_trace.size(); ++t) {
      if (res.objective_trace[t] > res.objective_trace[t - 1] + 1e-9) {
        detail = "objective increased at iteration " + std::to_string(t + 1) +
                 ", seed " + std::to_string(seed);
        return false;
      }
    }
  }
  detail = "20 instances, exact assignment match";
  return true;
}

// criterion 5: k-means++ conditional selection frequencies on {0, 1, 10}
// match the analytic D^2 distribution within 2% absolute.
bool criterion_kmeanspp_stats(std::string& detail) {
  const auto data = DataMatrix::from_rows({{0.0}, {1.0}, {10.0}});
  // counts[first][second], indices into {0, 1, 10}
  std::size_t counts[3][3] = {};
  const auto point_index = [](double v) {
    return v == 0.0 ? 0 : (v == 1.0 ? 1 : 2);
  };
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    mlcore::SeededRng rng(seed);
    const auto centroids =
        mlcore::init_kmeanspp(data, 2, EuclideanMetric{}, rng);
    ++counts[point_index(centroids(0, 0))][point_index(centroids(1, 0))];
  }
  // analytic conditional probabilities given the first pick
  const double expected[3][3] = {
      {0.0, 1.0 / 101.0, 100.0 / 101.0},
      {1.0 / 82.0, 0.0, 81.0 / 82.0},
      {100.0 / 181.0, 81.0 / 181.0, 0.0},
  };
  std::ostringstream obs;
  for (int f = 0; f < 3; ++f) {
    const double total = static_cast<double>(counts[f][0] + counts[f][1] +
                                             counts[f][2]);
    if (total < 2000) {
      detail = "first-pick bucket " + std::to_string(f) + " is undersampled";
      return false;
    }
    for (int s = 0; s < 3; ++s) {
      const double freq = static_cast<double>(counts[f][s]) / total;
      if (std::fabs(freq - expected[f][s]) > 0.02) {
        detail = "conditional frequency off: first=" + std::to_string(f) +
                 " second=" + std::to_string(s) + " freq=" +
                 std::to_string(freq) + " want=" +
                 std::to_string(expected[f][s]);
        return false;
      }
    }
    obs << (f ? " " : "") << "P(10|" << f << ")~"
        << static_cast<double>(counts[f][2]) / total;
  }
  detail = "10000 runs, all conditionals within 2%: " + obs.str();
  return true;
}

// criterion 6: on a 100k x 10 uniform dataset, dual-tree kd k-NN with
// k = 3 beats the naive mode by >= 5x and the whole run stays under
// 120 seconds.  Runs through the bench harness.
bool criterion_relative_speedup(std::string& detail) {
  const double start = now_seconds();
  auto manifest = mlcore::parse_manifest_text(
      "randu100k_dual, knn, gen:100000x10:42, 3, tree=kd, traversal=dual\n"
      "randu100k_naive, knn, gen:100000x10:42, 3, traversal=naive\n");
  manifest.trials = 1;
  const auto report = mlcore::run_bench(manifest);
  const double elapsed = now_seconds() - start;
  if (report.rows[0].failed || report.rows[1].failed) {
    detail = "bench row failed";
    return false;
  }
  const double dual_total =
      report.rows[0].build_mean + report.rows[0].task_mean;
  const double naive_total = report.rows[1].task_mean;
  const double speedup = naive_total / dual_total;
  detail = "dual " + std::to_string(dual_total) + " s (build " +
           std::to_string(report.rows[0].build_mean) + " s), naive " +
           std::to_string(naive_total) + " s, speedup " +
           std::to_string(speedup) + "x, wall " + std::to_string(elapsed) +
           " s";
  return report.rows[0].task_mean < naive_total && speedup >= 5.0 &&
         elapsed < 120.0;
}

// criterion 7: five trials with reported means, and dataset loading time
// demonstrably excluded from the timings.
bool criterion_protocol_fidelity(std::string& detail) {
  auto manifest = mlcore::parse_manifest_text(
      "proto_knn, knn, gen:300x4:5, 3\n"
      "proto_km, kmeans, gen:300x4:5, 4, seed=9\n");
  manifest.trials = 5;
  const auto report = mlcore::run_bench(manifest);
  for (const auto& row : report.rows) {
    if (row.failed) {
      detail = "row failed: " + row.error;
      return false;
    }
    if (row.task_seconds.size() != 5) {
      detail = "row '" + row.name + "' has " +
               std::to_string(row.task_seconds.size()) + " trials";
      return false;
    }
    double sum = 0.0;
    for (const double v : row.task_seconds) sum += v;
    if (std::fabs(row.task_mean - sum / 5.0) >
        1e-12 * std::max(1.0, std::fabs(sum))) {
      detail = "mean is not the arithmetic mean of the trials";
      return false;
    }
  }

  auto slow = mlcore::parse_manifest_text("slow, knn, gen:60x2:3, 1\n");
  slow.trials = 2;
  const auto slow_loader = [](const mlcore::BenchEntry& entry) {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    return mlcore::default_dataset_loader(entry);
  };
  const auto slow_report = mlcore::run_bench(slow, slow_loader);
  for (const double v : slow_report.rows[0].task_seconds) {
    if (v > 0.25) {
      detail = "slow loading leaked into the task timing";
      return false;
    }
  }
  detail = "5 trials per entry, means verified, load time excluded";
  return true;
}

// criterion 8: CLI exit-code matrix plus byte-identical naive/dual output
// on ten random datasets.
bool criterion_cli_contract(std::string& detail) {
  const auto p = [&](const std::string& name) {
    return (g_scratch / name).string();
  };
  {
    std::ofstream f(g_scratch / "three.csv");
    f << "0,0\n1,0\n4,0\n";
  }
  const std::string three = p("three.csv");

  const std::vector<std::pair<std::string, int>> matrix = {
      {"knn --reference " + p("missing.csv") + " --k 1", 2},
      {"knn --reference " + three + " --k 0", 1},
      {"knn --reference " + three + " --k 9 --neighbors-out " + p("n.csv") +
           " --distances-out " + p("d.csv"),
       1},
      {"knn --reference " + three + " --k 1 --frobnicate", 1},
      {"range --reference " + three + " --low 3 --high 1 --out " + p("r.txt"),
       1},
      {"range --reference " + p("missing.csv") + " --low 0 --high 1 --out " +
           p("r.txt"),
       2},
      {"kmeans --input " + three + " --clusters 0", 1},
      {"kmeans --input " + p("missing.csv") + " --clusters 2", 2},
      {"gen --rows 0 --cols 2 --out " + p("g.csv"), 1},
      {"bench --manifest " + p("missing.manifest"), 2},
      {"nonsense", 1},
      {"--help", 0},
  };
  for (const auto& [args, want] : matrix) {
    const int got = run_cli(args);
    if (got != want) {
      detail = "`" + args + "` exited " + std::to_string(got) + ", want " +
               std::to_string(want);
      return false;
    }
  }

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::string data = p("data" + std::to_string(seed) + ".csv");
    if (run_cli("gen --rows 200 --cols 3 --seed " + std::to_string(seed) +
                " --out " + data) != 0) {
      detail = "gen failed";
      return false;
    }
    const std::string n1 = p("n1.csv"), d1 = p("d1.csv");
    const std::string n2 = p("n2.csv"), d2 = p("d2.csv");
    if (run_cli("knn --reference " + data +
                " --k 3 --traversal naive --neighbors-out " + n1 +
                " --distances-out " + d1) != 0 ||
        run_cli("knn --reference " + data +
                " --k 3 --traversal dual --neighbors-out " + n2 +
                " --distances-out " + d2) != 0) {
      detail = "knn run failed";
      return false;
    }
    if (read_file(n1) != read_file(n2) || read_file(d1) != read_file(d2)) {
      detail = "naive and dual outputs differ at seed " + std::to_string(seed);
      return false;
    }
  }
  detail = "exit-code matrix and 10 byte-identical naive/dual runs";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];
  }
  if (g_cli.empty()) {
    std::cerr << "usage: acceptance --cli <path-to-mlcore-binary>\n";
    return 64;
  }
  g_scratch = std::filesystem::temp_directory_path() /
              ("mlcore_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(g_scratch);

  using Criterion = std::pair<const char*, std::function<bool(std::string&)>>;
  const std::vector<Criterion> criteria = {
      {"oracle equivalence (k-NN)", criterion_knn_oracle},
      {"oracle equivalence (furthest & range)", criterion_furthest_and_range},
      {"tree invariants", criterion_tree_invariants},
      {"k-means reproducibility", criterion_kmeans_oracle},
      {"k-means++ statistics", criterion_kmeanspp_stats},
      {"relative speedup (dual vs naive)", criterion_relative_speedup},
      {"protocol fidelity (5 trials, load excluded)",
       criterion_protocol_fidelity},
      {"CLI contract", criterion_cli_contract},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (ok) {
      std::cout << "[PASS] " << name;
    } else {
      std::cout << "[FAIL] " << name;
      ++failures;
    }
    if (!detail.empty()) std::cout << ": " << detail;
    std::cout << std::endl;
  }

  std::filesystem::remove_all(g_scratch);
  return failures;
}
