#include <doctest.h>

#include <sstream>

#include "test_support.hpp"
#include "wasubench/cli.hpp"
#include "wasubench/registry.hpp"
#include "wasubench/results.hpp"
#include "wasubench/text.hpp"

using namespace wasubench;
using testing::TempDir;
using testing::write_file;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Registry with one stub engine (plus a subruntime) and one two-benchmark group.
void seed_registry(const fs::path& dir) {
  write_file(dir / "runtimes/stub.json",
             "{\"name\":\"stub\",\"exec\":\"" + testing::kStubChild.string() +
                 "\",\"args_template\":[\"engine\",\"{module}\"],"
                 "\"subruntimes\":[{\"name\":\"stub-fast\",\"extra_args\":[\"--fast\"]}]}");
  write_file(dir / "benchmarks/g/group.json",
             R"({"name":"g","benchmarks":[
                  {"id":"alpha","module":"alpha_ok.wasm","expected_output":{"kind":"regex","value":"^ran"}},
                  {"id":"beta","module":"beta_fail.wasm"}]})");
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(call({}).code == kExitUsage);
  CHECK(call({"frobnicate"}).code == kExitUsage);
  const Outcome o = call({"run", "--no-such-flag"});
  CHECK(o.code == kExitUsage);
  CHECK(o.err.find("error:") != std::string::npos);
  CHECK(call({"pca"}).code == kExitUsage);
  CHECK(call({"check"}).code == kExitUsage);
}

TEST_CASE("help exits 0") {
  const Outcome o = call({"--help"});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("Subcommands") != std::string::npos);
}

TEST_CASE("benchmarks and runtimes listing") {
  TempDir dir;
  seed_registry(dir.path());
  const std::string reg = dir.path().string();
  Outcome o = call({"--registry", reg, "benchmarks", "list"});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("g/alpha") != std::string::npos);
  CHECK(o.out.find("g/beta") != std::string::npos);

  o = call({"--registry", reg, "runtimes", "list"});
  CHECK(o.out.find("stub:stub-fast") != std::string::npos);

  o = call({"--registry", reg, "runtimes", "show", "stub"});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("\"args_template\"") != std::string::npos);
  CHECK(call({"--registry", reg, "runtimes", "show", "nope"}).code == kExitFailure);

  o = call({"--registry", reg, "benchmarks", "show", "g/beta"});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("beta_fail.wasm") != std::string::npos);
}

TEST_CASE("registry directory from the environment") {
  TempDir dir;
  seed_registry(dir.path());
  ::setenv(kRegistryEnvVar, dir.path().c_str(), 1);
  const Outcome o = call({"runtimes", "list"});
  ::unsetenv(kRegistryEnvVar);
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("stub") != std::string::npos);
}

TEST_CASE("runtimes add / remove") {
  TempDir dir;
  const std::string reg = dir.path().string();
  Outcome o = call({"--registry", reg, "runtimes", "add", "eng", "--exec", "/usr/bin/true",
                    "--arg=--flag", "--arg", "{module}", "--env", "A=1", "--install-hint",
                    "apt install eng"});
  REQUIRE(o.code == kExitOk);
  const Registry r = load_registry(dir.path());
  REQUIRE(r.find_runtime("eng"));
  CHECK(r.find_runtime("eng")->args_template == std::vector<std::string>{"--flag", "{module}"});
  CHECK(r.find_runtime("eng")->env == EnvMap{{"A", "1"}});
  CHECK(r.find_runtime("eng")->install_hint == "apt install eng");

  CHECK(call({"--registry", reg, "runtimes", "add", "eng", "--exec", "/usr/bin/true"}).code ==
        kExitFailure);
  CHECK(call({"--registry", reg, "runtimes", "add", "bad", "--exec", "/usr/bin/true", "--arg",
              "x"})
            .code == kExitFailure);
  CHECK(call({"--registry", reg, "runtimes", "add", "noexec"}).code == kExitUsage);

  write_file(dir / "incoming/other.json",
             R"({"name":"other","exec":"bin/other","args_template":["{module}"]})");
  o = call({"--registry", reg, "runtimes", "add", "--from", (dir / "incoming/other.json").string()});
  REQUIRE(o.code == kExitOk);
  CHECK(load_registry(dir.path()).find_runtime("other")->exec == dir / "incoming/bin/other");

  CHECK(call({"--registry", reg, "runtimes", "remove", "eng"}).code == kExitOk);
  CHECK_FALSE(load_registry(dir.path()).find_runtime("eng"));
  CHECK(call({"--registry", reg, "runtimes", "remove", "eng"}).code == kExitFailure);
}

TEST_CASE("run, export and plot") {
  TempDir dir;
  seed_registry(dir.path());
  const std::string reg = dir.path().string();
  const std::string results = (dir / "r.json").string();

  Outcome o = call({"--registry", reg, "run", "--bench", "g/alpha", "--runtime", "stub", "-n",
                    "2", "-o", results});
  REQUIRE(o.code == kExitOk);
  ResultsFile f = load_results(results);
  REQUIRE(f.results.size() == 2);
  CHECK(f.results[0].status == RunStatus::ok);
  CHECK(f.results[1].repetition == 1);
  CHECK(f.config.repetitions == 2);

  o = call({"--registry", reg, "export", results});
  CHECK(o.code == kExitOk);
  CHECK(o.out.rfind(std::string(kResultsCsvHeader) + "\n", 0) == 0);
  CHECK(parse_csv(o.out).size() == 3);

  o = call({"--registry", reg, "run", "--runtime", "stub", "--runtime", "stub:stub-fast",
            "--output-dir", (dir / "out").string()});
  REQUIRE(o.code == kExitOk);
  fs::path written;
  for (const auto& e : fs::directory_iterator(dir / "out")) written = e.path();
  REQUIRE(written.filename().string().rfind("results-", 0) == 0);
  f = load_results(written);
  REQUIRE(f.results.size() == 4);
  // Benchmarks sorted, then runtimes sorted by label.
  CHECK(f.results[0].benchmark_id == "alpha");
  CHECK_FALSE(f.results[0].subruntime.has_value());
  CHECK(f.results[1].subruntime == "stub-fast");
  CHECK(f.results[2].benchmark_id == "beta");
  CHECK(f.results[2].status == RunStatus::nonzero_exit);

  const fs::path plots = dir / "plots";
  o = call({"plot", written.string(), "-o", plots.string()});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("mode: normalized") != std::string::npos);
  CHECK(fs::exists(plots / "time.svg"));
  CHECK(fs::exists(plots / "time_distribution.csv"));
}

TEST_CASE("selector validation happens before anything runs") {
  TempDir dir;
  seed_registry(dir.path());
  const std::string reg = dir.path().string();
  const std::string results = (dir / "r.json").string();
  CHECK(call({"--registry", reg, "run", "--runtime", "stub:nope", "-o", results}).code ==
        kExitFailure);
  CHECK(call({"--registry", reg, "run", "--runtime", "ghost", "-o", results}).code ==
        kExitFailure);
  CHECK(call({"--registry", reg, "run", "--bench", "g/ghost", "-o", results}).code ==
        kExitFailure);
  CHECK(call({"--registry", reg, "run", "--bench", "nogroup", "-o", results}).code == kExitUsage);
  CHECK_FALSE(fs::exists(results));
}

TEST_CASE("dry run prints command lines only") {
  TempDir dir;
  seed_registry(dir.path());
  const Outcome o = call({"--registry", dir.path().string(), "run", "--runtime",
                          "stub:stub-fast", "--dry-run", "--output-dir", (dir / "out").string()});
  CHECK(o.code == kExitOk);
  CHECK(o.out.find("--fast " + (dir / "benchmarks/g/alpha_ok.wasm").string()) !=
        std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("check prints a matrix") {
  TempDir dir;
  seed_registry(dir.path());
  const Outcome o = call({"--registry", dir.path().string(), "check", "--set", "g", "--csv",
                          (dir / "m.csv").string()});
  CHECK(o.code == kExitOk);
  CHECK(o.out ==
        "payload  stub\n"
        "alpha    yes\n"
        "beta     no\n");
  CHECK(testing::read_file(dir / "m.csv") ==
        "payload,engine,verdict\nalpha,stub,supported\nbeta,stub,unsupported\n");
}

TEST_CASE("analyze and pca on the bundled profiles") {
  TempDir dir;
  const std::string metrics = (dir / "metrics.csv").string();
  Outcome o = call({"analyze", "--profiles", (testing::kSourceDir / "samples/profiles").string(),
                    "-o", metrics, "--cdf", (dir / "cdf").string()});
  REQUIRE(o.code == kExitOk);
  const auto table = parse_csv(testing::read_file(metrics));
  CHECK(table.size() >= 9);
  CHECK(table[0].size() == 26);
  CHECK_FALSE(fs::is_empty(dir / "cdf"));

  o = call({"pca", metrics, "--components", "4", "-o", (dir / "pca").string()});
  REQUIRE(o.code == kExitOk);
  for (const char* f : {"loadings.csv", "scores.csv", "explained_variance.csv", "loadings.txt",
                        "scatter_pc1_pc2.svg", "scatter_pc3_pc4.svg"}) {
    CHECK_MESSAGE(fs::exists(dir / "pca" / f), f);
  }
  CHECK(o.out.find("components explain") != std::string::npos);
  CHECK(o.err.find("dropped column: time_ns") != std::string::npos);
}

TEST_CASE("operational failures exit 1") {
  TempDir dir;
  write_file(dir / "bad.json", "{}");
  CHECK(call({"export", (dir / "bad.json").string()}).code == kExitFailure);
  CHECK(call({"--registry", (dir / "missing").string(), "benchmarks", "list"}).code ==
        kExitFailure);
}
