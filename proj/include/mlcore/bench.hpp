#ifndef MLCORE_BENCH_HPP
#define MLCORE_BENCH_HPP

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mlcore/cover_tree.hpp"
#include "mlcore/csv.hpp"
#include "mlcore/errors.hpp"
#include "mlcore/kdtree.hpp"
#include "mlcore/kmeans.hpp"
#include "mlcore/matrix.hpp"
#include "mlcore/neighbor_search.hpp"

namespace mlcore {

// Benchmark harness: timed k-NN and k-means runs over a dataset manifest.
// Each entry is run `trials` times and the arithmetic mean reported.
// Dataset loading is never part of the timed section; k-NN entries time
// tree build and query separately, k-means entries time the whole
// clustering run with starting centroids fixed once per entry so every
// trial (and every tool reading the emitted centroids) starts identically.

enum class BenchTask { kKnn, kKmeans };
enum class ReportFormat { kMarkdown, kCsv };

struct BenchEntry {
  std::string name;
  BenchTask task = BenchTask::kKnn;
  std::string source;  // CSV path, or "gen:ROWSxCOLS:SEED"
  bool generated = false;
  std::size_t gen_rows = 0, gen_cols = 0;
  std::uint64_t gen_seed = 0;
  std::size_t k = 1;  // neighbors or clusters
  std::map<std::string, std::string> variant;
};

struct BenchManifest {
  std::vector<BenchEntry> entries;
  std::size_t trials = 5;
};

struct BenchRow {
  BenchTask task = BenchTask::kKnn;
  std::string name;
  std::size_t k = 1;
  std::string variant;
  bool failed = false;
  std::string error;
  std::vector<double> build_seconds;  // empty for k-means and naive rows
  std::vector<double> task_seconds;
  double build_mean = 0.0;
  double task_mean = 0.0;
  std::vector<std::size_t> iterations;  // k-means only
};

struct BenchReport {
  std::size_t trials = 5;
  std::vector<BenchRow> rows;
};

using DatasetLoader = std::function<DataMatrix(const BenchEntry&)>;

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::size_t parse_count(std::string_view s, const std::string& what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value == 0) {
    throw DataError(what + ": expected positive integer, got '" +
                    std::string(s) + "'");
  }
  return value;
}

inline void parse_gen_spec(BenchEntry& entry) {
  // gen:ROWSxCOLS:SEED
  const auto parts = split(std::string_view(entry.source).substr(4), ':');
  if (parts.size() != 2) {
    throw DataError("manifest: bad gen spec '" + entry.source + "'");
  }
  const auto shape = split(parts[0], 'x');
  if (shape.size() != 2) {
    throw DataError("manifest: bad gen shape in '" + entry.source + "'");
  }
  entry.generated = true;
  entry.gen_rows = parse_count(shape[0], "manifest gen rows");
  entry.gen_cols = parse_count(shape[1], "manifest gen cols");
  std::uint64_t seed = 0;
  const auto [ptr, ec] =
      std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), seed);
  if (ec != std::errc() || ptr != parts[1].data() + parts[1].size()) {
    throw DataError("manifest: bad gen seed in '" + entry.source + "'");
  }
  entry.gen_seed = seed;
}

inline void check_variant_keys(const BenchEntry& entry) {
  static const std::map<BenchTask, std::vector<std::string>> allowed = {
      {BenchTask::kKnn, {"tree", "traversal", "metric", "leaf", "base"}},
      {BenchTask::kKmeans,
       {"metric", "init", "empty", "seed", "tol", "maxiter"}}};
  for (const auto& [key, value] : entry.variant) {
    const auto& keys = allowed.at(entry.task);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw DataError("manifest: unknown variant flag '" + key + "' for '" +
                      entry.name + "'");
    }
  }
}

inline double seconds_since(
    std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

inline std::string variant_label(const BenchEntry& entry) {
  std::string label = "k=" + std::to_string(entry.k);
  for (const auto& [key, value] : entry.variant) {
    label += " " + key + "=" + value;
  }
  return label;
}

inline std::string variant_get(const BenchEntry& entry, const std::string& key,
                               const std::string& fallback) {
  const auto it = entry.variant.find(key);
  return it == entry.variant.end() ? fallback : it->second;
}

template <MetricPolicy M>
void run_knn_entry(const DataMatrix& data, const BenchEntry& entry,
                   std::size_t trials, const M& metric, BenchRow& row) {
  const std::string tree_kind = variant_get(entry, "tree", "kd");
  const std::string traversal_name = variant_get(entry, "traversal", "dual");
  Traversal traversal = Traversal::kDual;
  if (traversal_name == "single") {
    traversal = Traversal::kSingle;
  } else if (traversal_name == "naive") {
    traversal = Traversal::kNaive;
  } else if (traversal_name != "dual") {
    throw DataError("manifest: bad traversal '" + traversal_name + "'");
  }
  const std::size_t leaf =
      parse_count(variant_get(entry, "leaf", "20"), "manifest leaf");
  const double base = std::stod(variant_get(entry, "base", "2.0"));

  for (std::size_t t = 0; t < trials; ++t) {
    if (traversal == Traversal::kNaive) {
      const auto t0 = std::chrono::steady_clock::now();
      brute_force_search_self<NearestNeighborSort>(data, entry.k, metric);
      row.task_seconds.push_back(seconds_since(t0));
    } else if (tree_kind == "cover") {
      const auto t0 = std::chrono::steady_clock::now();
      const CoverTree<M> tree(data, metric, base);
      const auto t1 = std::chrono::steady_clock::now();
      knn_search_self<NearestNeighborSort>(tree, entry.k, traversal);
      row.build_seconds.push_back(
          std::chrono::duration<double>(t1 - t0).count());
      row.task_seconds.push_back(seconds_since(t1));
    } else if (tree_kind == "kd") {
      const auto t0 = std::chrono::steady_clock::now();
      const KdTree tree(data, leaf);
      const auto t1 = std::chrono::steady_clock::now();
      knn_search_self<NearestNeighborSort>(tree, entry.k, traversal, metric);
      row.build_seconds.push_back(
          std::chrono::duration<double>(t1 - t0).count());
      row.task_seconds.push_back(seconds_since(t1));
    } else {
      throw DataError("manifest: bad tree kind '" + tree_kind + "'");
    }
  }
}

inline void run_kmeans_entry(const DataMatrix& data, const BenchEntry& entry,
                             std::size_t trials, BenchRow& row) {
  KMeansConfig config;
  config.k = entry.k;
  config.metric = variant_get(entry, "metric", "l2") == "l1"
                      ? MetricKind::kManhattan
                      : MetricKind::kEuclidean;
  config.empty = variant_get(entry, "empty", "reseed") == "allow"
                     ? EmptyClusterPolicy::kAllowEmpty
                     : EmptyClusterPolicy::kReseedFurthest;
  config.seed = std::stoull(variant_get(entry, "seed", "0"));
  config.tolerance = std::stod(variant_get(entry, "tol", "1e-6"));
  config.max_iterations =
      parse_count(variant_get(entry, "maxiter", "1000"), "manifest maxiter");

  // Starting centroids are drawn once and shared by every trial.
  SeededRng rng(config.seed);
  DataMatrix initial =
      variant_get(entry, "init", "random") == "kmeanspp"
          ? (config.metric == MetricKind::kManhattan
                 ? init_kmeanspp(data, entry.k, ManhattanMetric{}, rng)
                 : init_kmeanspp(data, entry.k, EuclideanMetric{}, rng))
          : init_random_partition(data, entry.k, rng);

  for (std::size_t t = 0; t < trials; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    const ClusteringResult result = kmeans_cluster(data, config, initial);
    row.task_seconds.push_back(seconds_since(t0));
    row.iterations.push_back(result.iterations);
  }
}

inline double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

inline std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

inline std::string join4(const std::vector<double>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(sep);
    out += fmt4(values[i]);
  }
  return out;
}

}  // namespace detail

/// Line format: `name, task, csv-path|gen:ROWSxCOLS:SEED, k[, key=value ...]`.
/// Blank lines and lines starting with '#' are ignored.
inline BenchManifest parse_manifest_text(const std::string& text) {
  BenchManifest manifest;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = mlcore::detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = detail::split(trimmed, ',');
    if (fields.size() < 4) {
      throw DataError("manifest: expected `name, task, source, k[, flags]`: '" +
                      std::string(trimmed) + "'");
    }
    BenchEntry entry;
    entry.name = std::string(mlcore::detail::trim(fields[0]));
    const auto task = mlcore::detail::trim(fields[1]);
    if (task == "knn") {
      entry.task = BenchTask::kKnn;
    } else if (task == "kmeans") {
      entry.task = BenchTask::kKmeans;
    } else {
      throw DataError("manifest: unknown task '" + std::string(task) + "'");
    }
    entry.source = std::string(mlcore::detail::trim(fields[2]));
    if (entry.source.starts_with("gen:")) detail::parse_gen_spec(entry);
    entry.k = detail::parse_count(mlcore::detail::trim(fields[3]),
                                  "manifest k for '" + entry.name + "'");
    for (std::size_t i = 4; i < fields.size(); ++i) {
      const auto flag = mlcore::detail::trim(fields[i]);
      if (flag.empty()) continue;
      const std::size_t eq = flag.find('=');
      if (eq == std::string_view::npos) {
        throw DataError("manifest: variant flag must be key=value: '" +
                        std::string(flag) + "'");
      }
      entry.variant[std::string(flag.substr(0, eq))] =
          std::string(flag.substr(eq + 1));
    }
    detail::check_variant_keys(entry);
    for (const auto& other : manifest.entries) {
      if (other.name == entry.name) {
        throw DataError("manifest: duplicate entry name '" + entry.name + "'");
      }
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

inline BenchManifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open manifest");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest_text(buf.str());
}

inline DataMatrix default_dataset_loader(const BenchEntry& entry) {
  if (entry.generated) {
    SeededRng rng(entry.gen_seed);
    return generate_uniform(entry.gen_rows, entry.gen_cols, rng);
  }
  return load_csv(entry.source);
}

/// Runs every manifest entry `trials` times.  Loading is untimed; a
/// missing or unloadable dataset marks the row failed and the run
/// continues.
inline BenchReport run_bench(const BenchManifest& manifest,
                             const DatasetLoader& loader = {}) {
  BenchReport report;
  report.trials = manifest.trials;
  for (const auto& entry : manifest.entries) {
    BenchRow row;
    row.task = entry.task;
    row.name = entry.name;
    row.k = entry.k;
    row.variant = detail::variant_label(entry);
    try {
      const DataMatrix data =
          loader ? loader(entry) : default_dataset_loader(entry);
      if (entry.task == BenchTask::kKnn) {
        const std::string metric = detail::variant_get(entry, "metric", "l2");
        if (metric == "l1") {
          detail::run_knn_entry(data, entry, manifest.trials,
                                ManhattanMetric{}, row);
        } else if (metric == "l2") {
          detail::run_knn_entry(data, entry, manifest.trials,
                                EuclideanMetric{}, row);
        } else {
          throw DataError("manifest: bad metric '" + metric + "'");
        }
      } else {
        detail::run_kmeans_entry(data, entry, manifest.trials, row);
      }
      row.build_mean = detail::mean_of(row.build_seconds);
      row.task_mean = detail::mean_of(row.task_seconds);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
      for (char& c : row.error) {
        if (c == ',' || c == '\n') c = ';';
      }
      row.build_seconds.clear();
      row.task_seconds.clear();
      row.iterations.clear();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

/// One table per task; seconds with four decimal places, stable columns.
inline std::string emit_report(const BenchReport& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << "task,dataset,k,variant,status,build_mean,task_mean,ntrials,"
           "build_trials,task_trials,iterations,error\n";
    for (const auto& row : report.rows) {
      out << (row.task == BenchTask::kKnn ? "knn" : "kmeans") << ','
          << row.name << ',' << row.k << ',' << row.variant << ','
          << (row.failed ? "failed" : "ok") << ',';
      if (!row.failed) {
        if (!row.build_seconds.empty()) out << detail::fmt4(row.build_mean);
        out << ',' << detail::fmt4(row.task_mean) << ','
            << row.task_seconds.size() << ','
            << detail::join4(row.build_seconds, '|') << ','
            << detail::join4(row.task_seconds, '|') << ',';
        for (std::size_t i = 0; i < row.iterations.size(); ++i) {
          if (i) out << '|';
          out << row.iterations[i];
        }
        out << ',';
      } else {
        out << ",,0,,,," << row.error;
      }
      out << '\n';
    }
    return out.str();
  }

  out << "## k-NN (seconds)\n\n"
      << "| dataset | variant | build | query | per-trial query |\n"
      << "|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    if (row.task != BenchTask::kKnn) continue;
    if (row.failed) {
      out << "| " << row.name << " | " << row.variant << " | failed: "
          << row.error << " | | |\n";
      continue;
    }
    out << "| " << row.name << " | " << row.variant << " | "
        << (row.build_seconds.empty() ? std::string("-")
                                      : detail::fmt4(row.build_mean))
        << " | " << detail::fmt4(row.task_mean) << " | "
        << detail::join4(row.task_seconds, ';') << " |\n";
  }
  out << "\n## k-means (seconds)\n\n"
      << "| dataset | variant | cluster | per-trial cluster | iterations |\n"
      << "|---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    if (row.task != BenchTask::kKmeans) continue;
    if (row.failed) {
      out << "| " << row.name << " | " << row.variant << " | failed: "
          << row.error << " | | |\n";
      continue;
    }
    out << "| " << row.name << " | " << row.variant << " | "
        << detail::fmt4(row.task_mean) << " | "
        << detail::join4(row.task_seconds, ';') << " | ";
    for (std::size_t i = 0; i < row.iterations.size(); ++i) {
      if (i) out << ';';
      out << row.iterations[i];
    }
    out << " |\n";
  }
  return out.str();
}

/// Inverse of emit_report(:, kCsv), for report round-trips.
inline BenchReport parse_report_csv(const std::string& text) {
  BenchReport report;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (mlcore::detail::trim(line).empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 12) {
      throw DataError("report csv: expected 12 fields, got " +
                      std::to_string(f.size()));
    }
    BenchRow row;
    row.task = f[0] == "kmeans" ? BenchTask::kKmeans : BenchTask::kKnn;
    row.name = std::string(f[1]);
    row.k = detail::parse_count(f[2], "report csv k");
    row.variant = std::string(f[3]);
    row.failed = f[4] == "failed";
    if (row.failed) {
      row.error = std::string(f[11]);
    } else {
      auto parse_list = [](std::string_view s, std::vector<double>& out) {
        if (s.empty()) return;
        for (const auto part : detail::split(s, '|')) {
          out.push_back(std::stod(std::string(part)));
        }
      };
      parse_list(f[8], row.build_seconds);
      parse_list(f[9], row.task_seconds);
      if (!f[10].empty()) {
        for (const auto part : detail::split(f[10], '|')) {
          row.iterations.push_back(detail::parse_count(part, "report csv"));
        }
      }
      row.build_mean = f[5].empty() ? 0.0 : std::stod(std::string(f[5]));
      row.task_mean = std::stod(std::string(f[6]));
    }
    report.rows.push_back(std::move(row));
    if (!report.rows.back().task_seconds.empty()) {
      report.trials = report.rows.back().task_seconds.size();
    }
  }
  return report;
}

}  // namespace mlcore

#endif  // MLCORE_BENCH_HPP
