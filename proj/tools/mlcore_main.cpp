// mlcore command-line tools: one binary, one subcommand per method.
//
// Exit codes: 0 success, 1 usage error, 2 data error.  All informational
// output goes to stderr; files and stdout carry only machine-readable
// results.  Indices in every output file are 0-based.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlcore/mlcore.hpp"

namespace {

using mlcore::DataMatrix;
using mlcore::Traversal;

std::string format_double(double v) {
  std::string out;
  mlcore::detail::append_double(out, v);
  return out;
}

Traversal parse_traversal(const std::string& name) {
  if (name == "single") return Traversal::kSingle;
  if (name == "naive") return Traversal::kNaive;
  return Traversal::kDual;
}

struct SearchArgs {
  std::string reference;
  std::string query;
  std::size_t k = 0;
  std::string tree = "kd";
  std::string traversal = "dual";
  std::string metric = "l2";
  std::size_t leaf_size = mlcore::kDefaultLeafSize;
  double base = mlcore::kDefaultCoverBase;
  bool header = false;
  std::string neighbors_out = "neighbors.csv";
  std::string distances_out = "distances.csv";
};

template <class Policy, mlcore::MetricPolicy M>
mlcore::NeighborResult run_search(const DataMatrix& ref,
                                  const DataMatrix* query,
                                  const SearchArgs& args, const M& metric) {
  const Traversal traversal = parse_traversal(args.traversal);
  if (traversal == Traversal::kNaive) {
    return query ? mlcore::brute_force_search<Policy>(ref, *query, args.k,
                                                      metric)
                 : mlcore::brute_force_search_self<Policy>(ref, args.k, metric);
  }
  if (args.tree == "cover") {
    const mlcore::CoverTree<M> tree(ref, metric, args.base);
    return query ? mlcore::knn_search<Policy>(tree, *query, args.k, traversal)
                 : mlcore::knn_search_self<Policy>(tree, args.k, traversal);
  }
  const mlcore::KdTree tree(ref, args.leaf_size);
  return query
             ? mlcore::knn_search<Policy>(tree, *query, args.k, traversal,
                                          metric)
             : mlcore::knn_search_self<Policy>(tree, args.k, traversal, metric);
}

template <class Policy>
int run_neighbor_command(const SearchArgs& args) {
  const DataMatrix ref = mlcore::load_csv(args.reference, args.header);
  std::optional<DataMatrix> query;
  if (!args.query.empty()) query = mlcore::load_csv(args.query, args.header);

  mlcore::NeighborResult result =
      args.metric == "l1"
          ? run_search<Policy>(ref, query ? &*query : nullptr, args,
                               mlcore::ManhattanMetric{})
          : run_search<Policy>(ref, query ? &*query : nullptr, args,
                               mlcore::EuclideanMetric{});

  mlcore::IndexMatrix neighbors(result.query_count);
  for (std::size_t q = 0; q < result.query_count; ++q) {
    neighbors[q].resize(result.k);
    for (std::size_t j = 0; j < result.k; ++j) {
      neighbors[q][j] = result.index(q, j);
    }
  }
  mlcore::save_csv(neighbors, args.neighbors_out);
  mlcore::save_csv(DataMatrix(result.query_count, result.k,
                              std::move(result.distances)),
                   args.distances_out);
  std::cerr << "wrote " << args.neighbors_out << " and " << args.distances_out
            << " (" << result.query_count << "x" << result.k << ")\n";
  return 0;
}

struct RangeArgs {
  std::string reference;
  std::string query;
  double low = 0.0;
  double high = 0.0;
  std::string tree = "kd";
  std::string metric = "l2";
  std::size_t leaf_size = mlcore::kDefaultLeafSize;
  double base = mlcore::kDefaultCoverBase;
  bool header = false;
  std::string out = "ranges.txt";
};

int run_range_command(const RangeArgs& args) {
  if (args.low > args.high) {
    throw std::invalid_argument("range: --low must not exceed --high");
  }
  const DataMatrix ref = mlcore::load_csv(args.reference, args.header);
  std::optional<DataMatrix> query;
  if (!args.query.empty()) query = mlcore::load_csv(args.query, args.header);

  mlcore::RangeResult result;
  if (args.tree == "cover") {
    if (args.metric == "l1") {
      const mlcore::CoverTree<mlcore::ManhattanMetric> tree(
          ref, mlcore::ManhattanMetric{}, args.base);
      result = query ? mlcore::range_search(tree, *query, args.low, args.high)
                     : mlcore::range_search_self(tree, args.low, args.high);
    } else {
      const mlcore::CoverTree<mlcore::EuclideanMetric> tree(
          ref, mlcore::EuclideanMetric{}, args.base);
      result = query ? mlcore::range_search(tree, *query, args.low, args.high)
                     : mlcore::range_search_self(tree, args.low, args.high);
    }
  } else {
    const mlcore::KdTree tree(ref, args.leaf_size);
    if (args.metric == "l1") {
      result = query ? mlcore::range_search(tree, *query, args.low, args.high,
                                            mlcore::ManhattanMetric{})
                     : mlcore::range_search_self(tree, args.low, args.high,
                                                 mlcore::ManhattanMetric{});
    } else {
      result = query ? mlcore::range_search(tree, *query, args.low, args.high,
                                            mlcore::EuclideanMetric{})
                     : mlcore::range_search_self(tree, args.low, args.high,
                                                 mlcore::EuclideanMetric{});
    }
  }

  std::ofstream f(args.out, std::ios::binary);
  if (!f) throw mlcore::DataError(args.out + ": cannot write file");
  for (const auto& matches : result.matches) {
    for (std::size_t i = 0; i < matches.size(); ++i) {
      if (i) f << ',';
      f << matches[i].first << ':' << format_double(matches[i].second);
    }
    f << '\n';
  }
  std::cerr << "wrote " << args.out << " (" << result.matches.size()
            << " queries)\n";
  return 0;
}

struct KmeansArgs {
  std::string input;
  std::size_t clusters = 0;
  std::string initial_centroids;
  std::string init = "random";
  std::string empty = "reseed";
  std::string metric = "l2";
  std::size_t max_iterations = 1000;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  bool header = false;
  std::string centroids_out = "centroids.csv";
  std::string assignments_out = "assignments.csv";
};

int run_kmeans_command(const KmeansArgs& args) {
  const DataMatrix data = mlcore::load_csv(args.input, args.header);

  mlcore::KMeansConfig config;
  config.k = args.clusters;
  config.max_iterations = args.max_iterations;
  config.tolerance = args.tolerance;
  config.seed = args.seed;
  config.metric = args.metric == "l1" ? mlcore::MetricKind::kManhattan
                                      : mlcore::MetricKind::kEuclidean;
  config.init = args.init == "kmeanspp" ? mlcore::InitKind::kPlusPlus
                                        : mlcore::InitKind::kRandomPartition;
  config.empty = args.empty == "allow"
                     ? mlcore::EmptyClusterPolicy::kAllowEmpty
                     : mlcore::EmptyClusterPolicy::kReseedFurthest;

  std::optional<DataMatrix> initial;
  if (!args.initial_centroids.empty()) {
    initial = mlcore::load_csv(args.initial_centroids, args.header);
  }

  const mlcore::ClusteringResult result =
      mlcore::kmeans_cluster(data, config, initial);

  mlcore::save_csv(result.centroids, args.centroids_out);
  mlcore::IndexMatrix assignments(result.assignments.size());
  for (std::size_t i = 0; i < result.assignments.size(); ++i) {
    assignments[i] = {result.assignments[i]};
  }
  mlcore::save_csv(assignments, args.assignments_out);

  std::cout << "objective=" << format_double(result.objective) << '\n'
            << "iterations=" << result.iterations << '\n'
            << "converged=" << (result.converged ? "true" : "false") << '\n';
  std::cerr << "wrote " << args.centroids_out << " and " << args.assignments_out
            << '\n';
  return 0;
}

struct GenArgs {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen_command(const GenArgs& args) {
  mlcore::SeededRng rng(args.seed);
  mlcore::save_csv(mlcore::generate_uniform(args.rows, args.cols, rng),
                   args.out);
  std::cerr << "wrote " << args.out << " (" << args.rows << "x" << args.cols
            << ")\n";
  return 0;
}

struct BenchArgs {
  std::string manifest;
  std::size_t trials = 5;
  std::string format = "markdown";
};

int run_bench_command(const BenchArgs& args) {
  mlcore::BenchManifest manifest = mlcore::parse_manifest(args.manifest);
  manifest.trials = args.trials;
  const mlcore::BenchReport report = mlcore::run_bench(manifest);
  for (const auto& row : report.rows) {
    if (row.failed) {
      std::cerr << "entry '" << row.name << "' failed: " << row.error << '\n';
    }
  }
  std::cout << mlcore::emit_report(report,
                                   args.format == "csv"
                                       ? mlcore::ReportFormat::kCsv
                                       : mlcore::ReportFormat::kMarkdown);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mlcore: exact tree-based neighbor search, range search and "
               "k-means clustering over dense CSV datasets"};
  app.require_subcommand(1);

  SearchArgs knn_args;
  SearchArgs fnn_args;
  RangeArgs range_args;
  KmeansArgs kmeans_args;
  GenArgs gen_args;
  BenchArgs bench_args;
  int rc = 0;

  const auto add_search_options = [](CLI::App* cmd, SearchArgs& args) {
    cmd->add_option("--reference", args.reference,
                    "Reference dataset CSV (one point per row)")
        ->required();
    cmd->add_option("--query", args.query,
                    "Query dataset CSV; omitted means query = reference with "
                    "self-neighbors excluded");
    cmd->add_option("--k", args.k, "Number of neighbors")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tree", args.tree, "Index structure")
        ->check(CLI::IsMember({"kd", "cover"}))
        ->capture_default_str();
    cmd->add_option("--traversal", args.traversal, "Traversal strategy")
        ->check(CLI::IsMember({"single", "dual", "naive"}))
        ->capture_default_str();
    cmd->add_option("--metric", args.metric, "Distance metric")
        ->check(CLI::IsMember({"l1", "l2"}))
        ->capture_default_str();
    cmd->add_option("--leaf-size", args.leaf_size, "kd-tree leaf size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--base", args.base, "cover-tree expansion base (> 1)")
        ->check(CLI::Range(1.0 + 1e-9, 1e9))
        ->capture_default_str();
    cmd->add_flag("--header", args.header, "Skip a header row in input CSVs");
    cmd->add_option("--neighbors-out", args.neighbors_out,
                    "Output CSV of 0-based neighbor indices")
        ->capture_default_str();
    cmd->add_option("--distances-out", args.distances_out,
                    "Output CSV of neighbor distances")
        ->capture_default_str();
  };

  CLI::App* knn = app.add_subcommand("knn", "k-nearest-neighbor search");
  add_search_options(knn, knn_args);
  knn->callback([&] {
    rc = run_neighbor_command<mlcore::NearestNeighborSort>(knn_args);
  });

  CLI::App* fnn = app.add_subcommand("fnn", "k-furthest-neighbor search");
  add_search_options(fnn, fnn_args);
  fnn->callback([&] {
    rc = run_neighbor_command<mlcore::FurthestNeighborSort>(fnn_args);
  });

  CLI::App* range = app.add_subcommand("range", "range search in [low, high]");
  range->add_option("--reference", range_args.reference,
                    "Reference dataset CSV (one point per row)")
      ->required();
  range->add_option("--query", range_args.query,
                    "Query dataset CSV; omitted means query = reference with "
                    "the query point itself excluded");
  range->add_option("--low", range_args.low, "Lower distance bound")
      ->required()
      ->check(CLI::NonNegativeNumber);
  range->add_option("--high", range_args.high, "Upper distance bound")
      ->required()
      ->check(CLI::NonNegativeNumber);
  range->add_option("--tree", range_args.tree, "Index structure")
      ->check(CLI::IsMember({"kd", "cover"}))
      ->capture_default_str();
  range->add_option("--metric", range_args.metric, "Distance metric")
      ->check(CLI::IsMember({"l1", "l2"}))
      ->capture_default_str();
  range->add_option("--leaf-size", range_args.leaf_size, "kd-tree leaf size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  range->add_option("--base", range_args.base,
                    "cover-tree expansion base (> 1)")
      ->check(CLI::Range(1.0 + 1e-9, 1e9))
      ->capture_default_str();
  range->add_flag("--header", range_args.header,
                  "Skip a header row in input CSVs");
  range->add_option("--out", range_args.out,
                    "Output file: per query one line of index:distance pairs")
      ->capture_default_str();
  range->callback([&] { rc = run_range_command(range_args); });

  CLI::App* kmeans = app.add_subcommand("kmeans", "k-means clustering");
  kmeans->add_option("--input", kmeans_args.input,
                     "Input dataset CSV (one point per row)")
      ->required();
  kmeans->add_option("--clusters", kmeans_args.clusters, "Cluster count")
      ->required()
      ->check(CLI::PositiveNumber);
  kmeans->add_option("--initial-centroids", kmeans_args.initial_centroids,
                     "CSV of k starting centroids (overrides --init)");
  kmeans->add_option("--init", kmeans_args.init, "Initialization policy")
      ->check(CLI::IsMember({"random", "kmeanspp"}))
      ->capture_default_str();
  kmeans->add_option("--empty", kmeans_args.empty, "Empty-cluster policy")
      ->check(CLI::IsMember({"allow", "reseed"}))
      ->capture_default_str();
  kmeans->add_option("--metric", kmeans_args.metric, "Distance metric")
      ->check(CLI::IsMember({"l1", "l2"}))
      ->capture_default_str();
  kmeans->add_option("--max-iterations", kmeans_args.max_iterations,
                     "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  kmeans->add_option("--tolerance", kmeans_args.tolerance,
                     "Convergence threshold on total centroid movement")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  kmeans->add_option("--seed", kmeans_args.seed, "RNG seed")
      ->capture_default_str();
  kmeans->add_flag("--header", kmeans_args.header,
                   "Skip a header row in input CSVs");
  kmeans->add_option("--centroids-out", kmeans_args.centroids_out,
                     "Output CSV of k centroids")
      ->capture_default_str();
  kmeans->add_option("--assignments-out", kmeans_args.assignments_out,
                     "Output CSV of per-point cluster indices")
      ->capture_default_str();
  kmeans->callback([&] { rc = run_kmeans_command(kmeans_args); });

  CLI::App* gen = app.add_subcommand("gen", "generate a uniform dataset CSV");
  gen->add_option("--rows", gen_args.rows, "Point count")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--cols", gen_args.cols, "Dimension count")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_args.seed, "RNG seed")->capture_default_str();
  gen->add_option("--out", gen_args.out, "Output CSV path")->required();
  gen->callback([&] { rc = run_gen_command(gen_args); });

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark manifest");
  bench->add_option("--manifest", bench_args.manifest,
                    "Manifest file: name, task, source, k[, key=value ...]")
      ->required();
  bench->add_option("--trials", bench_args.trials, "Trials per entry")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--format", bench_args.format, "Report format")
      ->check(CLI::IsMember({"markdown", "csv"}))
      ->capture_default_str();
  bench->callback([&] { rc = run_bench_command(bench_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const mlcore::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
