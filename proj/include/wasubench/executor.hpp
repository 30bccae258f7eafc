#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wasubench/registry.hpp"

namespace wasubench {

struct RunConfig {
  int repetitions = 1;
  std::optional<std::int64_t> timeout_ms;
  bool track_memory = true;
  int sample_interval_ms = 10;
  std::size_t capture_output_limit_bytes = 65536;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

enum class RunStatus { ok, timeout, nonzero_exit, output_mismatch, spawn_error };

std::string_view to_string(RunStatus s);
std::optional<RunStatus> parse_run_status(std::string_view s);

/// Grace period between SIGTERM and SIGKILL when a run times out.
inline constexpr std::int64_t kKillGraceMs = 1000;

/// Output kept for validation and score extraction; the rest is drained.
inline constexpr std::size_t kMaxInspectedOutputBytes = 16u << 20;

inline constexpr std::string_view kTruncationMarker = "…[truncated]";

/// What one child process did. Only ok / timeout / nonzero_exit /
/// spawn_error can appear here; output_mismatch is decided by run_benchmark.
struct RawRun {
  RunStatus status = RunStatus::spawn_error;
  std::optional<int> exit_code;
  std::int64_t wall_time_ns = 0;
  std::optional<std::uint64_t> peak_rss_bytes;
  std::optional<std::uint64_t> peak_vms_bytes;
  std::string stdout_text;  // capped at kMaxInspectedOutputBytes
  std::string stderr_text;
  std::string spawn_error_message;
};

struct RunResult {
  std::string group;
  std::string benchmark_id;
  std::string runtime;
  std::optional<std::string> subruntime;
  int repetition = 0;
  RunStatus status = RunStatus::ok;
  std::optional<int> exit_code;
  std::int64_t wall_time_ns = 0;
  std::optional<std::uint64_t> peak_rss_bytes;
  std::optional<std::uint64_t> peak_vms_bytes;
  std::optional<double> score;
  std::string stdout_excerpt;
  std::string stderr_excerpt;
  std::string timestamp_utc;

  bool operator==(const RunResult&) const = default;
};

/// Spawns `cmd` in its own process group and supervises it to completion.
///
/// Wall time runs from just before spawn to reap on the steady clock. With
/// `track_memory`, `/proc/<pid>/status` is sampled every
/// `sample_interval_ms` (VmHWM/VmRSS, VmPeak/VmSize) and the kernel's
/// `ru_maxrss` from the reap is folded in. On timeout the whole group gets
/// SIGTERM, then SIGKILL after kKillGraceMs. Never throws for child failures.
RawRun run_once(const CommandLine& cmd, const RunConfig& cfg);

/// First match of `pattern` in `output`; capture group 1 parsed as a decimal real.
std::optional<double> extract_score(std::string_view output, const ScoreRule& rule);

/// exact: equality after trimming trailing newlines on both sides.
/// regex: pattern matches anywhere.
bool validate_output(std::string_view output, const ExpectedOutput& rule);

/// Keeps at most `limit` bytes, appending kTruncationMarker when cut.
std::string truncate_excerpt(std::string_view text, std::size_t limit);

/// Runs `cfg.repetitions` sequential repetitions; a failed repetition does
/// not stop the rest.
std::vector<RunResult> run_benchmark(const RuntimeSpec& rt, const std::optional<std::string>& sub,
                                     const BenchmarkSpec& bench, const RunConfig& cfg);

}  // namespace wasubench
