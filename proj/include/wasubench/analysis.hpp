#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wasubench/results.hpp"

namespace wasubench {

struct StaticTotals {
  std::uint64_t functions = 0;
  std::uint64_t instructions = 0;
  std::uint64_t blocks = 0;
};

/// One instrumented instruction site and how often it executed.
struct SiteCount {
  std::uint32_t func = 0;
  std::uint64_t offset = 0;
  std::string opcode;
  std::uint64_t count = 0;
};

enum class BlockKind { block, loop, if_ };

struct BlockCount {
  std::uint32_t func = 0;
  std::uint64_t block = 0;
  BlockKind kind = BlockKind::block;
  std::uint64_t count = 0;
};

/// Output of an instrumenting engine for one benchmark run.
struct ProfileData {
  std::string benchmark_id;
  std::string group;
  StaticTotals static_totals;
  std::vector<SiteCount> sites;
  std::vector<BlockCount> blocks;
};

/// Throws MalformedProfile for schema problems and duplicate sites/blocks,
/// InvariantViolation when the counters exceed the static totals.
ProfileData parse_profile_json(std::string_view text, const std::string& where = "profile");
ProfileData parse_profile(const std::filesystem::path& path);

/// Checks the ProfileData invariants on an in-memory value.
void validate_profile(const ProfileData& p, const std::string& where = "profile");

enum class OpClass { GlobalRead, GlobalWrite, MemRead, MemWrite, IndirectCall, Int, Float, Other };

inline constexpr std::size_t kOpClassCount = 8;

/// First matching rule wins: global.get, global.set, *.load*, *.store*,
/// call_indirect, i32./i64. prefix, f32./f64. prefix, otherwise Other.
OpClass classify_opcode(std::string_view mnemonic);

inline constexpr std::array<int, 6> kReachPercents{50, 75, 90, 95, 99, 100};

/// Smallest number of sites, hottest first (ties by (func, offset)), whose
/// cumulative count reaches `percent`% of the total. `percent` must be one
/// of kReachPercents. Throws EmptyProfile when every count is 0.
std::uint64_t compute_reach(std::span<const SiteCount> sites, int percent);

struct Coverage {
  double instr_cov = 0;
  double block_cov = 0;
  double func_cov = 0;
  std::uint64_t exec_funcs = 0;
};

/// Throws DegenerateModule when any static total is 0.
Coverage compute_coverage(const ProfileData& p);

struct MetricsRow {
  std::string benchmark_id;
  std::string group;

  std::uint64_t reach_50 = 0, reach_75 = 0, reach_90 = 0, reach_95 = 0, reach_99 = 0,
                reach_100 = 0;
  double instr_cov = 0, block_cov = 0, func_cov = 0;
  std::uint64_t exec_funcs = 0;
  std::uint64_t exec_inst = 0;
  std::uint64_t total_funcs = 0;
  std::uint64_t g_reads = 0, g_writes = 0, int_ops = 0, float_ops = 0, ind_call = 0, writes = 0,
                reads = 0;
  double in_first = 0;
  std::uint64_t total_cycles = 0;
  std::optional<double> time_ns, rss, vms;

  /// Every opcode-class tally, including Other, indexed by OpClass.
  std::array<std::uint64_t, kOpClassCount> class_tallies{};
};

/// `summaries` are the per-runtime summaries of this benchmark; their means
/// are averaged unweighted, skipping runtimes without ok runs.
MetricsRow compute_metrics_row(const ProfileData& p, std::span<const Summary> summaries);

/// Points (i / exec_funcs, cumulative_count_i / exec_inst) over executed
/// functions, hottest first. The last point is exactly (1, 1).
std::vector<std::pair<double, double>> function_time_cdf(const ProfileData& p);

/// The 24 metric names in table order.
const std::array<std::string_view, 24>& metric_names();

/// benchmark_id, group, then the 24 metrics; absent values are empty fields.
std::string metrics_table(std::span<const MetricsRow> rows);

}  // namespace wasubench
