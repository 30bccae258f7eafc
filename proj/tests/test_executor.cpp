#include <doctest.h>

#include <chrono>

#include "test_support.hpp"
#include "wasubench/executor.hpp"

using namespace wasubench;
using testing::kStubChild;

namespace {

CommandLine stub(std::vector<std::string> argv) {
  CommandLine cmd;
  cmd.exec = kStubChild;
  cmd.argv = std::move(argv);
  return cmd;
}

BenchmarkSpec bench(const std::string& id) {
  BenchmarkSpec b;
  b.id = id;
  b.group = "g";
  b.module_path = "/payloads/" + id + ".wasm";
  return b;
}

}  // namespace

TEST_CASE("successful child") {
  const RawRun r = run_once(stub({"echo", "hi"}), RunConfig{});
  CHECK(r.status == RunStatus::ok);
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text == "hi\n");
  CHECK(r.wall_time_ns > 0);
}

TEST_CASE("timeout kills the child") {
  RunConfig cfg;
  cfg.timeout_ms = 200;
  const auto start = std::chrono::steady_clock::now();
  const RawRun r = run_once(stub({"sleep", "5000"}), cfg);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(r.status == RunStatus::timeout);
  CHECK_FALSE(r.exit_code.has_value());
  CHECK(r.wall_time_ns >= 200'000'000);
  CHECK(elapsed < std::chrono::milliseconds(200 + 2 * cfg.sample_interval_ms + kKillGraceMs));
}

TEST_CASE("missing executable is a spawn error") {
  CommandLine cmd;
  cmd.exec = "/nonexistent/engine";
  const RawRun r = run_once(cmd, RunConfig{});
  CHECK(r.status == RunStatus::spawn_error);
  CHECK_FALSE(r.exit_code.has_value());
  CHECK_FALSE(r.spawn_error_message.empty());
}

TEST_CASE("exit codes and signals") {
  RawRun r = run_once(stub({"exit", "3"}), RunConfig{});
  CHECK(r.status == RunStatus::nonzero_exit);
  CHECK(r.exit_code == 3);

  r = run_once(stub({"engine", "crash.wasm"}), RunConfig{});
  CHECK(r.status == RunStatus::nonzero_exit);
  CHECK(r.exit_code == 128 + 11);
}

TEST_CASE("stderr is captured separately") {
  const RawRun r = run_once(stub({"stderr", "oops"}), RunConfig{});
  CHECK(r.stderr_text == "oops\n");
  CHECK(r.stdout_text.empty());
}

TEST_CASE("environment is minimal plus the resolved map") {
  ::setenv("WASUBENCH_TEST_LEAK", "1", 1);
  CommandLine cmd = stub({"env", "WASUBENCH_TEST_LEAK"});
  CHECK(run_once(cmd, RunConfig{}).status == RunStatus::nonzero_exit);
  cmd.env["WASUBENCH_TEST_LEAK"] = "set";
  const RawRun r = run_once(cmd, RunConfig{});
  CHECK(r.status == RunStatus::ok);
  CHECK(r.stdout_text == "set\n");
  CHECK(run_once(stub({"env", "PATH"}), RunConfig{}).status == RunStatus::ok);
}

TEST_CASE("stdin comes from the file or is empty") {
  testing::TempDir dir;
  testing::write_file(dir / "in.txt", "from file\n");
  CommandLine cmd = stub({"cat"});
  CHECK(run_once(cmd, RunConfig{}).stdout_text.empty());
  cmd.stdin_path = dir / "in.txt";
  CHECK(run_once(cmd, RunConfig{}).stdout_text == "from file\n");
  cmd.stdin_path = dir / "missing.txt";
  CHECK(run_once(cmd, RunConfig{}).status == RunStatus::spawn_error);
}

TEST_CASE("large output is drained without deadlock") {
  const RawRun r = run_once(stub({"spew", "3000000"}), RunConfig{});
  CHECK(r.status == RunStatus::ok);
  CHECK(r.stdout_text.size() == 3000000);
}

TEST_CASE("memory tracking") {
  RunConfig cfg;
  RawRun r = run_once(stub({"alloc", "32"}), cfg);
  REQUIRE(r.peak_rss_bytes.has_value());
  CHECK(*r.peak_rss_bytes >= (32u << 20));
  REQUIRE(r.peak_vms_bytes.has_value());
  CHECK(*r.peak_vms_bytes >= *r.peak_rss_bytes);

  cfg.track_memory = false;
  r = run_once(stub({"alloc", "1"}), cfg);
  CHECK_FALSE(r.peak_rss_bytes.has_value());
  CHECK_FALSE(r.peak_vms_bytes.has_value());
}

TEST_CASE("extract_score") {
  const ScoreRule rule{"score: ([0-9.]+)", true};
  CHECK(extract_score("Total score: 42.5 pts", rule) == 42.5);
  CHECK_FALSE(extract_score("no numbers here", rule).has_value());
  CHECK(extract_score("score: 10\nscore: 20", rule) == 10.0);
  CHECK_FALSE(extract_score("score: ...", rule).has_value());
  CHECK(extract_score("x = -3.5e2;", ScoreRule{"= (\\S+);", true}) == -350.0);
}

TEST_CASE("validate_output") {
  CHECK(validate_output("OK\n", {ExpectedOutput::Kind::exact, "OK"}));
  CHECK(validate_output("OK\r\n", {ExpectedOutput::Kind::exact, "OK\n"}));
  CHECK_FALSE(validate_output("FAIL", {ExpectedOutput::Kind::exact, "OK"}));
  CHECK_FALSE(validate_output(" OK", {ExpectedOutput::Kind::exact, "OK"}));
  CHECK(validate_output("result=9", {ExpectedOutput::Kind::regex, "result=\\d+"}));
  CHECK(validate_output("a\nresult=9\nb", {ExpectedOutput::Kind::regex, "result=\\d+"}));
  CHECK_FALSE(validate_output("result=x", {ExpectedOutput::Kind::regex, "result=\\d+"}));
}

TEST_CASE("regex search survives a 16 MiB stream") {
  std::string big(kMaxInspectedOutputBytes - 16, 'x');
  big += "score: 5";
  CHECK(extract_score(big, ScoreRule{"score: (\\d+)", true}) == 5.0);
  CHECK(validate_output(big, {ExpectedOutput::Kind::regex, "x+score"}));
}

TEST_CASE("truncate_excerpt") {
  CHECK(truncate_excerpt("abc", 3) == "abc");
  CHECK(truncate_excerpt("abcdef", 3) == std::string("abc") + std::string(kTruncationMarker));
  CHECK(truncate_excerpt("", 0) == "");
}

TEST_CASE("RunConfig validation") {
  RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.repetitions = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RunConfig{};
  cfg.sample_interval_ms = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RunConfig{};
  cfg.timeout_ms = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("run status names round-trip") {
  for (auto s : {RunStatus::ok, RunStatus::timeout, RunStatus::nonzero_exit,
                 RunStatus::output_mismatch, RunStatus::spawn_error}) {
    CHECK(parse_run_status(to_string(s)) == s);
  }
  CHECK_FALSE(parse_run_status("bogus").has_value());
}

TEST_CASE("run_benchmark repetitions") {
  RunConfig cfg;
  cfg.repetitions = 3;
  const auto results = run_benchmark(testing::stub_runtime("stub", {"engine"}), std::nullopt,
                                     bench("ok"), cfg);
  REQUIRE(results.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(results[static_cast<std::size_t>(i)].repetition == i);
    CHECK(results[static_cast<std::size_t>(i)].status == RunStatus::ok);
    CHECK(results[static_cast<std::size_t>(i)].runtime == "stub");
    CHECK(results[static_cast<std::size_t>(i)].benchmark_id == "ok");
    CHECK(results[static_cast<std::size_t>(i)].group == "g");
    CHECK_FALSE(results[static_cast<std::size_t>(i)].timestamp_utc.empty());
  }
}

TEST_CASE("run_benchmark failing engine") {
  RunConfig cfg;
  cfg.repetitions = 2;
  const auto results =
      run_benchmark(testing::stub_runtime("stub", {"exit", "1"}), std::nullopt, bench("b"), cfg);
  REQUIRE(results.size() == 2);
  for (const auto& r : results) {
    CHECK(r.status == RunStatus::nonzero_exit);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.score.has_value());
  }
}

TEST_CASE("run_benchmark score extraction") {
  RunConfig cfg;
  cfg.repetitions = 2;
  BenchmarkSpec b = bench("scored");
  b.score_rule = ScoreRule{"score: (\\d+)", true};
  // argv: echo score: 7 <module>
  const auto results =
      run_benchmark(testing::stub_runtime("stub", {"echo", "score:", "7"}), std::nullopt, b, cfg);
  for (const auto& r : results) {
    CHECK(r.status == RunStatus::ok);
    CHECK(r.score == 7.0);
  }
}

TEST_CASE("run_benchmark output validation") {
  BenchmarkSpec b = bench("v");
  b.expected_output = ExpectedOutput{ExpectedOutput::Kind::regex, "^ran "};
  auto results = run_benchmark(testing::stub_runtime("stub", {"engine"}), std::nullopt, b, {});
  CHECK(results.at(0).status == RunStatus::ok);
  b.expected_output = ExpectedOutput{ExpectedOutput::Kind::exact, "something else"};
  b.score_rule = ScoreRule{"ran (\\d+)", true};
  results = run_benchmark(testing::stub_runtime("stub", {"engine"}), std::nullopt, b, {});
  CHECK(results.at(0).status == RunStatus::output_mismatch);
  CHECK(results.at(0).exit_code == 0);
  CHECK_FALSE(results.at(0).score.has_value());
}

TEST_CASE("run_benchmark excerpt truncation and spawn errors") {
  RunConfig cfg;
  cfg.capture_output_limit_bytes = 10;
  auto results =
      run_benchmark(testing::stub_runtime("stub", {"spew", "100"}), std::nullopt, bench("b"), cfg);
  CHECK(results.at(0).stdout_excerpt == std::string(10, 'x') + std::string(kTruncationMarker));

  RuntimeSpec missing = testing::stub_runtime("gone", {});
  missing.exec = "/nonexistent/engine";
  results = run_benchmark(missing, std::nullopt, bench("b"), RunConfig{});
  CHECK(results.at(0).status == RunStatus::spawn_error);
  CHECK_FALSE(results.at(0).stderr_excerpt.empty());
}

TEST_CASE("repetitions never overlap") {
  // Each repetition sleeps 100 ms, so sequential execution takes >= 300 ms
  // and the recorded timestamps are ordered.
  RunConfig cfg;
  cfg.repetitions = 3;
  const auto start = std::chrono::steady_clock::now();
  const auto results =
      run_benchmark(testing::stub_runtime("stub", {"sleep", "100"}), std::nullopt, bench("b"), cfg);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= std::chrono::milliseconds(300));
  std::int64_t total = 0;
  for (const auto& r : results) total += r.wall_time_ns;
  CHECK(std::chrono::nanoseconds(total) <= elapsed);
  for (std::size_t i = 1; i < results.size(); ++i) {
    CHECK(results[i - 1].timestamp_utc <= results[i].timestamp_utc);
  }
}
