#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wasubench/executor.hpp"

namespace wasubench {

inline constexpr int kResultsSchemaVersion = 1;

struct HostInfo {
  std::string os;
  std::string arch;
  std::string hostname;

  static HostInfo current();

  bool operator==(const HostInfo&) const = default;
};

struct ResultsFile {
  int schema_version = kResultsSchemaVersion;
  std::string created_utc;
  HostInfo host;
  RunConfig config;
  std::vector<RunResult> results;

  bool operator==(const ResultsFile&) const = default;
};

/// Aggregate over the ok runs of one (group, benchmark, runtime, subruntime).
/// Every statistic is absent when n_ok == 0.
struct Summary {
  std::string group;
  std::string benchmark_id;
  std::string runtime;
  std::optional<std::string> subruntime;
  std::size_t n_ok = 0;
  std::optional<double> mean_time_ns;
  std::optional<double> min_time_ns;
  std::optional<double> max_time_ns;
  std::optional<double> stddev_time_ns;  // sample (n-1); 0 when n_ok == 1
  std::optional<double> mean_rss_bytes;
  std::optional<double> mean_vms_bytes;
  std::optional<double> mean_score;

  /// `runtime` or `runtime:subruntime`.
  std::string runtime_label() const;
};

std::string results_to_json(const ResultsFile& file);
ResultsFile results_from_json(const std::string& text);  // throws SchemaError

void save_results(const ResultsFile& file, const std::filesystem::path& path);
ResultsFile load_results(const std::filesystem::path& path);

inline constexpr const char* kResultsCsvHeader =
    "group,benchmark,runtime,subruntime,repetition,status,exit_code,wall_time_ns,"
    "peak_rss_bytes,peak_vms_bytes,score";

std::string export_csv(const ResultsFile& file);

/// Sorted by (group, benchmark, runtime, subruntime); absent subruntime first.
std::vector<Summary> summarize(const ResultsFile& file);

}  // namespace wasubench
