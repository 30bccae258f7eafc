#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wasubench/executor.hpp"
#include "wasubench/registry.hpp"

namespace wasubench {

enum class Verdict { supported, unsupported, error };

std::string_view to_string(Verdict v);

/// ok -> supported; nonzero_exit / timeout / output_mismatch -> unsupported;
/// spawn_error -> error.
Verdict verdict_for(RunStatus status);

inline constexpr std::int64_t kDefaultCheckTimeoutMs = 10'000;

struct FeatureReport {
  std::string payload_set;
  std::vector<std::string> engines;   // `runtime` or `runtime:sub`
  std::vector<std::string> payloads;  // benchmark ids
  std::vector<std::vector<Verdict>> support;    // [engine][payload]
  std::vector<std::vector<bool>> timed_out;     // [engine][payload]
  std::vector<std::vector<std::string>> stderr_excerpts;  // [engine][payload]
};

using EngineSelection = std::pair<RuntimeSpec, std::optional<std::string>>;

/// One run per (engine, payload) cell, sequentially. Repetitions are forced
/// to 1 and a missing timeout defaults to kDefaultCheckTimeoutMs.
FeatureReport run_feature_checks(const std::vector<EngineSelection>& engines,
                                 const BenchmarkGroup& set, RunConfig cfg);

/// Rows are payloads, columns engines; cells `yes` / `no` / `err`. Cells
/// that timed out carry a `*` and a footnote line.
std::string render_matrix(const FeatureReport& report);

/// `payload,engine,verdict`, one row per cell.
std::string matrix_csv(const FeatureReport& report);

}  // namespace wasubench
