#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "profile_gen.hpp"
#include "test_support.hpp"
#include "wasubench/analysis.hpp"
#include "wasubench/error.hpp"
#include "wasubench/text.hpp"

using namespace wasubench;

namespace {

std::vector<SiteCount> sites_with(std::vector<std::uint64_t> counts) {
  std::vector<SiteCount> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.push_back({0, i, "i32.add", counts[i]});
  }
  return out;
}

// Independent oracle: try every k and sum the k largest counts directly.
std::uint64_t brute_reach(const std::vector<SiteCount>& sites, int percent) {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& s : sites) {
    counts.push_back(s.count);
    total += s.count;
  }
  std::sort(counts.rbegin(), counts.rend());
  for (std::size_t k = 1; k <= counts.size(); ++k) {
    std::uint64_t top = 0;
    for (std::size_t i = 0; i < k; ++i) top += counts[i];
    if (top * 100 >= static_cast<std::uint64_t>(percent) * total) return k;
  }
  return counts.size();
}

ProfileData two_function_profile() {
  ProfileData p;
  p.benchmark_id = "b";
  p.group = "g";
  p.static_totals = {2, 10, 8};
  p.sites = {{0, 0, "i32.add", 60}, {0, 4, "f64.mul", 30}, {1, 0, "i32.load", 10}};
  p.blocks = {{0, 0, BlockKind::loop, 7}, {0, 1, BlockKind::block, 3}, {1, 0, BlockKind::loop, 0}};
  return p;
}

Summary summary_with(double time, std::optional<double> rss) {
  Summary s;
  s.n_ok = 1;
  s.mean_time_ns = time;
  s.mean_rss_bytes = rss;
  return s;
}

}  // namespace

TEST_CASE("minimal profile parses") {
  const ProfileData p = parse_profile_json(R"({
    "benchmark_id": "fib", "group": "g",
    "static_totals": {"functions": 1, "instructions": 3, "blocks": 1},
    "sites": [{"func": 0, "offset": 2, "opcode": "i32.add", "count": 5}],
    "blocks": [{"func": 0, "block": 0, "kind": "loop", "count": 2}]})");
  CHECK(p.benchmark_id == "fib");
  CHECK(p.static_totals.instructions == 3);
  REQUIRE(p.sites.size() == 1);
  CHECK(p.sites[0].count == 5);
  CHECK(p.blocks[0].kind == BlockKind::loop);
  CHECK(compute_metrics_row(p, {}).exec_inst == 5);
}

TEST_CASE("profile errors") {
  const std::string head = R"({"benchmark_id":"b","group":"g",
    "static_totals":{"functions":1,"instructions":3,"blocks":1},)";
  CHECK_THROWS_AS(parse_profile_json(head + R"("sites":[
      {"func":0,"offset":1,"opcode":"nop","count":1},
      {"func":0,"offset":1,"opcode":"nop","count":2}],"blocks":[]})"),
                  MalformedProfile);
  CHECK_THROWS_AS(parse_profile_json(head + R"("sites":[
      {"func":0,"offset":1,"opcode":"nop","count":1},{"func":0,"offset":2,"opcode":"nop","count":1},
      {"func":0,"offset":3,"opcode":"nop","count":1},{"func":0,"offset":4,"opcode":"nop","count":1}],
      "blocks":[]})"),
                  InvariantViolation);
  CHECK_THROWS_AS(parse_profile_json(head + R"("sites":[
      {"func":0,"offset":1,"opcode":"nop","count":-1}],"blocks":[]})"),
                  MalformedProfile);
  CHECK_THROWS_AS(parse_profile_json(head + R"("sites":[
      {"func":0,"offset":1,"opcode":"nop","count":1}],
      "blocks":[{"func":0,"block":0,"kind":"switch","count":1}]})"),
                  MalformedProfile);
  CHECK_THROWS_AS(parse_profile_json(head + R"("sites":[
      {"func":0,"offset":1,"opcode":"nop","count":1},{"func":1,"offset":1,"opcode":"nop","count":1}],
      "blocks":[]})"),
                  InvariantViolation);
  CHECK_THROWS_AS(parse_profile_json("not json"), MalformedProfile);
  CHECK_THROWS_AS(parse_profile_json(head + R"("sites":[],"blocks":[],"extra":1})"),
                  MalformedProfile);
  CHECK_THROWS_AS(parse_profile("/nonexistent/profile.json"), IoError);
}

TEST_CASE("classify_opcode priority rules") {
  CHECK(classify_opcode("i32.add") == OpClass::Int);
  CHECK(classify_opcode("f64.mul") == OpClass::Float);
  CHECK(classify_opcode("i32.load8_u") == OpClass::MemRead);
  CHECK(classify_opcode("f32.store") == OpClass::MemWrite);
  CHECK(classify_opcode("i64.atomic.store32") == OpClass::MemWrite);
  CHECK(classify_opcode("global.get") == OpClass::GlobalRead);
  CHECK(classify_opcode("global.set") == OpClass::GlobalWrite);
  CHECK(classify_opcode("call_indirect") == OpClass::IndirectCall);
  CHECK(classify_opcode("call") == OpClass::Other);
  CHECK(classify_opcode("") == OpClass::Other);
  CHECK(classify_opcode("i32") == OpClass::Other);
}

TEST_CASE("compute_reach examples") {
  const auto s = sites_with({50, 30, 20});
  CHECK(compute_reach(s, 50) == 1);
  CHECK(compute_reach(s, 75) == 2);
  CHECK(compute_reach(s, 90) == 3);
  CHECK(compute_reach(sites_with({50, 30, 20, 0}), 100) == 3);
  CHECK_THROWS_AS(compute_reach(sites_with({0, 0}), 50), EmptyProfile);
  CHECK_THROWS_AS(compute_reach(s, 60), std::invalid_argument);
}

TEST_CASE("compute_reach agrees with the brute-force oracle") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 500; ++iter) {
    const ProfileData p = testing::random_profile(rng, 20);
    std::uint64_t previous = 0;
    for (int pct : kReachPercents) {
      const std::uint64_t r = compute_reach(p.sites, pct);
      CHECK(r == brute_reach(p.sites, pct));
      CHECK(r >= previous);
      previous = r;
    }
    const auto covered = static_cast<std::uint64_t>(std::count_if(
        p.sites.begin(), p.sites.end(), [](const SiteCount& s) { return s.count > 0; }));
    CHECK(previous == covered);
  }
}

TEST_CASE("compute_coverage") {
  ProfileData p;
  p.static_totals = {2, 10, 8};
  p.sites = {{0, 0, "nop", 1}, {0, 1, "nop", 1}, {0, 2, "nop", 1}, {0, 3, "nop", 1},
             {1, 0, "nop", 0}};
  p.blocks = {{0, 0, BlockKind::block, 1}, {0, 1, BlockKind::block, 4}, {1, 0, BlockKind::if_, 0}};
  Coverage c = compute_coverage(p);
  CHECK(c.instr_cov == 40.0);
  CHECK(c.func_cov == 50.0);
  CHECK(c.block_cov == 25.0);
  CHECK(c.exec_funcs == 1);

  p.static_totals = {1, 4, 2};
  p.sites.pop_back();
  p.blocks.pop_back();
  c = compute_coverage(p);
  CHECK(c.instr_cov == 100.0);
  CHECK(c.block_cov == 100.0);
  CHECK(c.func_cov == 100.0);

  p.static_totals.blocks = 0;
  p.blocks.clear();
  CHECK_THROWS_AS(compute_coverage(p), DegenerateModule);
}

TEST_CASE("metrics row") {
  const ProfileData p = two_function_profile();
  const std::vector<Summary> summaries = {summary_with(100, 10), summary_with(300, std::nullopt),
                                          Summary{}};
  const MetricsRow m = compute_metrics_row(p, summaries);
  CHECK(m.exec_inst == 100);
  CHECK(m.int_ops == 60);
  CHECK(m.float_ops == 30);
  CHECK(m.reads == 10);
  CHECK(m.writes == 0);
  CHECK(m.in_first == 90.0);
  CHECK(m.total_cycles == 7);
  CHECK(m.total_funcs == 2);
  CHECK(m.exec_funcs == 2);
  CHECK(m.reach_50 == 1);
  CHECK(m.reach_90 == 2);
  CHECK(m.reach_100 == 3);
  CHECK(m.instr_cov == 30.0);
  CHECK(m.block_cov == 25.0);
  CHECK(m.time_ns == 200.0);
  CHECK(m.rss == 10.0);
  CHECK_FALSE(m.vms.has_value());

  const MetricsRow bare = compute_metrics_row(p, {});
  CHECK_FALSE(bare.time_ns.has_value());
}

TEST_CASE("int ops tally") {
  ProfileData p;
  p.static_totals = {1, 10, 1};
  for (std::uint64_t i = 0; i < 4; ++i) p.sites.push_back({0, i, "i32.add", 250});
  const MetricsRow m = compute_metrics_row(p, {});
  CHECK(m.int_ops == 1000);
  CHECK(m.float_ops == 0);
}

TEST_CASE("function_time_cdf") {
  ProfileData p;
  p.static_totals = {3, 10, 1};
  p.sites = {{1, 0, "nop", 10}, {0, 0, "nop", 90}, {2, 0, "nop", 0}};
  auto cdf = function_time_cdf(p);
  REQUIRE(cdf.size() == 2);
  CHECK(cdf[0] == std::pair{0.5, 0.9});
  CHECK(cdf[1] == std::pair{1.0, 1.0});

  p.sites = {{0, 0, "nop", 5}};
  CHECK(function_time_cdf(p) == std::vector<std::pair<double, double>>{{1.0, 1.0}});

  p.sites = {{0, 0, "nop", 50}, {1, 0, "nop", 50}};
  CHECK(function_time_cdf(p) == std::vector<std::pair<double, double>>{{0.5, 0.5}, {1.0, 1.0}});

  p.sites = {{0, 0, "nop", 0}};
  CHECK_THROWS_AS(function_time_cdf(p), EmptyProfile);
}

TEST_CASE("partition and range properties on random profiles") {
  std::mt19937_64 rng(23);
  for (int iter = 0; iter < 500; ++iter) {
    const ProfileData p = testing::random_profile(rng, 40);
    CHECK_NOTHROW(validate_profile(p));
    const MetricsRow m = compute_metrics_row(p, {});
    std::uint64_t sum = 0;
    for (auto t : m.class_tallies) sum += t;
    CHECK(sum == m.exec_inst);
    CHECK(m.g_reads + m.g_writes + m.int_ops + m.float_ops + m.ind_call + m.writes + m.reads <=
          m.exec_inst);
    for (double c : {m.instr_cov, m.block_cov, m.func_cov}) {
      CHECK(c >= 0.0);
      CHECK(c <= 100.0);
    }
    CHECK(m.in_first > 0.0);
    CHECK(m.in_first <= 100.0);
    CHECK(m.exec_funcs <= m.total_funcs);
    if (m.int_ops + m.float_ops > 0) {
      const double ratio =
          static_cast<double>(m.float_ops) / static_cast<double>(m.int_ops + m.float_ops);
      CHECK(ratio >= 0.0);
      CHECK(ratio <= 1.0);
    }
    const auto cdf = function_time_cdf(p);
    CHECK(cdf.back() == std::pair{1.0, 1.0});
    for (std::size_t i = 1; i < cdf.size(); ++i) {
      CHECK(cdf[i].first >= cdf[i - 1].first);
      CHECK(cdf[i].second >= cdf[i - 1].second);
    }
  }
}

TEST_CASE("metrics table") {
  CHECK(metric_names().size() == 24);
  CHECK(metric_names().front() == "reach_50");
  CHECK(metric_names().back() == "vms");

  const std::string empty = metrics_table({});
  CHECK(parse_csv(empty).size() == 1);
  CHECK(parse_csv(empty)[0].size() == 26);

  const MetricsRow m = compute_metrics_row(two_function_profile(), {});
  const std::vector<MetricsRow> rows = {m};
  const auto table = parse_csv(metrics_table(rows));
  REQUIRE(table.size() == 2);
  CHECK(table[1].size() == 26);
  CHECK(table[1][0] == "b");
  CHECK(table[1][1] == "g");
  CHECK(table[1][25].empty());
  const std::map<std::string, std::string> byname = [&] {
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < 26; ++i) out[table[0][i]] = table[1][i];
    return out;
  }();
  CHECK(byname.at("exec_inst") == "100");
  CHECK(byname.at("in_first") == "90");
  CHECK(byname.at("total_cycles") == "7");
}

TEST_CASE("bundled sample profiles are valid") {
  const auto dir = testing::kSourceDir / "samples/profiles";
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    const ProfileData p = parse_profile(e.path());
    CHECK_NOTHROW(compute_metrics_row(p, {}));
    ++n;
  }
  CHECK(n >= 8);
}
