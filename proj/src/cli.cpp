#include "wasubench/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <ostream>
#include <set>

#include "wasubench/analysis.hpp"
#include "wasubench/check.hpp"
#include "wasubench/error.hpp"
#include "wasubench/executor.hpp"
#include "wasubench/pca.hpp"
#include "wasubench/pca_io.hpp"
#include "wasubench/plot.hpp"
#include "wasubench/registry.hpp"
#include "wasubench/results.hpp"
#include "wasubench/text.hpp"

namespace wasubench {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeSelector {
  std::string runtime;
  std::optional<std::string> sub;

  std::string label() const { return sub ? runtime + ":" + *sub : runtime; }
  bool operator<(const RuntimeSelector& o) const { return label() < o.label(); }
};

RuntimeSelector parse_runtime_selector(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {text, std::nullopt};
  RuntimeSelector sel{text.substr(0, colon), text.substr(colon + 1)};
  if (sel.runtime.empty() || sel.sub->empty() || sel.sub->find(':') != std::string::npos) {
    throw UsageError("runtime selector must be R or R:SUB, got '" + text + "'");
  }
  return sel;
}

// Resolves every selector up front so a typo fails before anything runs.
std::vector<EngineSelection> resolve_engines(const Registry& reg,
                                             const std::vector<std::string>& selectors) {
  std::set<RuntimeSelector> chosen;
  if (selectors.empty()) {
    for (const auto& rt : reg.runtimes) chosen.insert({rt.name, std::nullopt});
  }
  for (const auto& s : selectors) chosen.insert(parse_runtime_selector(s));

  std::vector<EngineSelection> out;
  for (const auto& sel : chosen) {
    const RuntimeSpec* rt = reg.find_runtime(sel.runtime);
    if (!rt) throw UnknownRuntime("no runtime named '" + sel.runtime + "'");
    if (sel.sub && !rt->find_subruntime(*sel.sub)) {
      throw UnknownSubruntime(rt->name + " has no subruntime '" + *sel.sub + "'");
    }
    out.emplace_back(*rt, sel.sub);
  }
  return out;
}

std::vector<const BenchmarkSpec*> select_benchmarks(const Registry& reg,
                                                    const std::vector<std::string>& groups,
                                                    const std::vector<std::string>& benches) {
  std::map<std::pair<std::string, std::string>, const BenchmarkSpec*> chosen;
  auto add_group = [&](const BenchmarkGroup& g) {
    for (const auto& b : g.benchmarks) chosen[{g.name, b.id}] = &b;
  };
  if (groups.empty() && benches.empty()) {
    for (const auto& g : reg.groups) add_group(g);
  }
  for (const auto& name : groups) {
    const BenchmarkGroup* g = reg.find_group(name);
    if (!g) throw UnknownBenchmark("no benchmark group named '" + name + "'");
    add_group(*g);
  }
  for (const auto& sel : benches) {
    const auto slash = sel.find('/');
    if (slash == std::string::npos) throw UsageError("--bench expects GROUP/ID, got '" + sel + "'");
    const std::string group = sel.substr(0, slash), id = sel.substr(slash + 1);
    const BenchmarkGroup* g = reg.find_group(group);
    const BenchmarkSpec* b = g ? g->find(id) : nullptr;
    if (!b) throw UnknownBenchmark("no benchmark '" + sel + "'");
    chosen[{group, id}] = b;
  }
  std::vector<const BenchmarkSpec*> out;
  for (const auto& [key, b] : chosen) out.push_back(b);
  return out;
}

std::string shell_quote(const std::string& s) {
  if (!s.empty() && s.find_first_of(" \t\n'\"\\$`*?;&|<>()[]{}!#~") == std::string::npos) return s;
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  return out + "'";
}

std::string format_ms(std::int64_t ns) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f ms", static_cast<double>(ns) / 1e6);
  return buf;
}

std::vector<std::string> split_once(const std::string& s, char sep) {
  const auto at = s.find(sep);
  if (at == std::string::npos) return {s};
  return {s.substr(0, at), s.substr(at + 1)};
}

fs::path absolutize_exec(const std::string& exec) {
  if (exec.find('/') == std::string::npos) return exec;
  return fs::absolute(exec).lexically_normal();
}

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args);

 private:
  void build();

  void cmd_benchmarks_list();
  void cmd_benchmarks_show();
  void cmd_runtimes_list();
  void cmd_runtimes_add();
  void cmd_runtimes_remove();
  void cmd_runtimes_show();
  void cmd_run();
  void cmd_check();
  void cmd_export();
  void cmd_plot();
  void cmd_analyze();
  void cmd_pca();

  Registry registry() const { return load_registry(registry_dir_); }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"Benchmark WebAssembly engines and analyze their dynamic behavior.", "wasubench"};

  std::string registry_dir_;
  std::string output_dir_ = "out";

  // benchmarks / runtimes
  std::string show_target_;
  std::string rt_name_, rt_exec_, rt_from_, rt_hint_;
  std::vector<std::string> rt_args_, rt_env_;

  // run / check
  std::vector<std::string> groups_, benches_, runtimes_;
  int repetitions_ = 1;
  std::int64_t timeout_ms_ = 0;
  int sample_interval_ms_ = 10;
  bool no_mem_ = false, dry_run_ = false;
  std::string output_file_, set_name_, csv_path_;

  // export / plot / analyze / pca
  std::string input_;
  bool log_scale_ = false;
  std::string profiles_dir_, results_path_, cdf_dir_;
  int components_ = 4;

  CLI::Option* timeout_opt_ = nullptr;
  CLI::Option* output_dir_opt_ = nullptr;
};

void Cli::build() {
  app_.require_subcommand(1);
  app_.fallthrough();
  app_.add_option("--registry", registry_dir_,
                  std::string("registry directory (default $") + kRegistryEnvVar +
                      " or ./registry)");
  output_dir_opt_ = app_.add_option("--output-dir", output_dir_, "output directory")
                        ->capture_default_str();

  auto* benchmarks = app_.add_subcommand("benchmarks", "inspect benchmark groups");
  benchmarks->require_subcommand(1);
  benchmarks->add_subcommand("list", "list every benchmark")->callback([this] {
    cmd_benchmarks_list();
  });
  auto* bshow = benchmarks->add_subcommand("show", "show a group or GROUP/ID");
  bshow->add_option("target", show_target_)->required();
  bshow->callback([this] { cmd_benchmarks_show(); });

  auto* runtimes = app_.add_subcommand("runtimes", "manage registered engines");
  runtimes->require_subcommand(1);
  runtimes->add_subcommand("list", "list registered runtimes")->callback([this] {
    cmd_runtimes_list();
  });
  auto* add = runtimes->add_subcommand("add", "register an engine already on this system");
  add->add_option("name", rt_name_, "runtime name");
  add->add_option("--exec", rt_exec_, "engine executable");
  add->add_option("--arg", rt_args_, "args template token, repeatable (use --arg=VALUE for dashes)")
      ->allow_extra_args(false);
  add->add_option("--env", rt_env_, "KEY=VALUE, repeatable")->allow_extra_args(false);
  add->add_option("--install-hint", rt_hint_, "how to obtain the engine");
  add->add_option("--from", rt_from_, "runtime JSON file to register")->check(CLI::ExistingFile);
  add->callback([this] { cmd_runtimes_add(); });
  auto* remove = runtimes->add_subcommand("remove", "unregister a runtime");
  remove->add_option("name", rt_name_)->required();
  remove->callback([this] { cmd_runtimes_remove(); });
  auto* rshow = runtimes->add_subcommand("show", "print a runtime's configuration");
  rshow->add_option("name", rt_name_)->required();
  rshow->callback([this] { cmd_runtimes_show(); });

  auto* run = app_.add_subcommand("run", "run benchmarks (all of them when nothing is selected)");
  run->add_option("--group", groups_, "benchmark group, repeatable")->allow_extra_args(false);
  run->add_option("--bench", benches_, "GROUP/ID, repeatable")->allow_extra_args(false);
  run->add_option("--runtime", runtimes_, "R or R:SUB, repeatable")->allow_extra_args(false);
  run->add_option("-n,--repetitions", repetitions_)->check(CLI::PositiveNumber)->capture_default_str();
  timeout_opt_ = run->add_option("--timeout", timeout_ms_, "per-run timeout in ms")
                     ->check(CLI::PositiveNumber);
  run->add_option("--sample-interval", sample_interval_ms_, "memory sampling interval in ms")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run->add_flag("--no-mem", no_mem_, "do not track memory");
  run->add_flag("--dry-run", dry_run_, "print resolved command lines without running");
  run->add_option("-o,--output", output_file_, "results file");
  run->callback([this] { cmd_run(); });

  auto* check = app_.add_subcommand("check", "feature-support matrix for a payload set");
  check->add_option("--set", set_name_, "payload group")->required();
  check->add_option("--runtime", runtimes_, "R or R:SUB, repeatable")->allow_extra_args(false);
  auto* check_timeout = check->add_option("--timeout", timeout_ms_, "per-payload timeout in ms")
                            ->check(CLI::PositiveNumber);
  check->add_option("--csv", csv_path_, "also write payload,engine,verdict CSV");
  check->callback([this, check_timeout] {
    timeout_opt_ = check_timeout;
    cmd_check();
  });

  auto* exp = app_.add_subcommand("export", "convert a results file to CSV");
  exp->add_option("results", input_)->required()->check(CLI::ExistingFile);
  exp->add_option("-o,--output", output_file_, "CSV path (default: stdout)");
  exp->callback([this] { cmd_export(); });

  auto* plot = app_.add_subcommand("plot", "render SVG charts from a results file");
  plot->add_option("results", input_)->required()->check(CLI::ExistingFile);
  plot->add_flag("--log", log_scale_, "logarithmic value axis");
  plot->add_option("-o,--output", output_file_, "output directory");
  plot->callback([this] { cmd_plot(); });

  auto* analyze = app_.add_subcommand("analyze", "compute dynamic metrics from profiles");
  analyze->add_option("--profiles", profiles_dir_, "directory of profile JSON files")
      ->required()
      ->check(CLI::ExistingDirectory);
  analyze->add_option("--results", results_path_, "results file for time/rss/vms")
      ->check(CLI::ExistingFile);
  analyze->add_option("--cdf", cdf_dir_, "write per-benchmark function CDF charts here");
  analyze->add_option("-o,--output", output_file_, "metrics CSV path");
  analyze->callback([this] { cmd_analyze(); });

  auto* pca = app_.add_subcommand("pca", "principal component analysis of a metrics table");
  pca->add_option("metrics", input_)->required()->check(CLI::ExistingFile);
  pca->add_option("--components", components_, "components to report")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  pca->add_option("-o,--output", output_file_, "output directory");
  pca->callback([this] { cmd_pca(); });
}

int Cli::run(const std::vector<std::string>& args) {
  if (const char* env = std::getenv(kRegistryEnvVar); env && *env) {
    registry_dir_ = env;
  } else {
    registry_dir_ = "registry";
  }
  build();
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app_.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out_ << app_.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out_ << app_.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err_ << "error: " << e.what() << "\n\n" << app_.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err_ << "error: " << e.what() << "\n\n" << app_.help();
    return kExitUsage;
  } catch (const Error& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

void Cli::cmd_benchmarks_list() {
  const Registry reg = registry();
  for (const auto& g : reg.groups) {
    for (const auto& b : g.benchmarks) {
      out_ << g.name << "/" << b.id << "  " << b.module_path.string() << "\n";
    }
  }
}

void Cli::cmd_benchmarks_show() {
  const Registry reg = registry();
  const auto parts = split_once(show_target_, '/');
  const BenchmarkGroup* g = reg.find_group(parts[0]);
  if (!g) throw UnknownBenchmark("no benchmark group named '" + parts[0] + "'");
  if (parts.size() == 1) {
    out_ << group_to_json(*g);
    return;
  }
  const BenchmarkSpec* b = g->find(parts[1]);
  if (!b) throw UnknownBenchmark("no benchmark '" + show_target_ + "'");
  out_ << group_to_json(BenchmarkGroup{g->name, {*b}});
}

void Cli::cmd_runtimes_list() {
  const Registry reg = registry();
  for (const auto& rt : reg.runtimes) {
    out_ << rt.name << "  " << rt.exec.string() << "\n";
    for (const auto& sub : rt.subruntimes) out_ << "  " << rt.name << ":" << sub.name << "\n";
  }
}

void Cli::cmd_runtimes_add() {
  RuntimeSpec spec;
  if (!rt_from_.empty()) {
    if (!rt_name_.empty() || !rt_exec_.empty() || !rt_args_.empty() || !rt_env_.empty()) {
      throw UsageError("--from cannot be combined with other runtime fields");
    }
    spec = load_runtime_file(fs::absolute(rt_from_));
  } else {
    if (rt_name_.empty() || rt_exec_.empty()) {
      throw UsageError("runtimes add needs NAME and --exec (or --from FILE)");
    }
    spec.name = rt_name_;
    spec.exec = absolutize_exec(rt_exec_);
    spec.args_template = rt_args_.empty() ? std::vector<std::string>{kModulePlaceholder,
                                                                     kArgsPlaceholder}
                                          : rt_args_;
    for (const auto& kv : rt_env_) {
      const auto parts = split_once(kv, '=');
      if (parts.size() != 2 || parts[0].empty()) throw UsageError("--env expects KEY=VALUE");
      spec.env[parts[0]] = parts[1];
    }
    if (!rt_hint_.empty()) spec.install_hint = rt_hint_;
  }
  const fs::path file = register_runtime(registry_dir_, spec);
  out_ << "registered " << spec.name << " -> " << file.string() << "\n";
}

void Cli::cmd_runtimes_remove() {
  remove_runtime(registry_dir_, rt_name_);
  out_ << "removed " << rt_name_ << "\n";
}

void Cli::cmd_runtimes_show() {
  const Registry reg = registry();
  const RuntimeSpec* rt = reg.find_runtime(rt_name_);
  if (!rt) throw UnknownRuntime("no runtime named '" + rt_name_ + "'");
  out_ << runtime_to_json(*rt);
}

void Cli::cmd_run() {
  const Registry reg = registry();
  const auto engines = resolve_engines(reg, runtimes_);
  const auto benches = select_benchmarks(reg, groups_, benches_);
  if (engines.empty()) throw UnknownRuntime("no runtimes registered");

  RunConfig cfg;
  cfg.repetitions = repetitions_;
  if (timeout_opt_ && timeout_opt_->count() > 0) cfg.timeout_ms = timeout_ms_;
  cfg.track_memory = !no_mem_;
  cfg.sample_interval_ms = sample_interval_ms_;
  cfg.validate();

  if (dry_run_) {
    for (const auto* b : benches) {
      for (const auto& [rt, sub] : engines) {
        const CommandLine cmd = resolve_invocation(rt, sub, *b);
        out_ << b->group << "/" << b->id << " @ " << (sub ? rt.name + ":" + *sub : rt.name)
             << ": " << shell_quote(cmd.exec.string());
        for (const auto& a : cmd.argv) out_ << " " << shell_quote(a);
        if (cmd.stdin_path) out_ << " < " << shell_quote(cmd.stdin_path->string());
        out_ << "\n";
        for (const auto& [k, v] : cmd.env) out_ << "    " << k << "=" << shell_quote(v) << "\n";
      }
    }
    return;
  }

  ResultsFile file;
  const auto now = std::chrono::system_clock::now();
  file.created_utc = iso8601_utc(now);
  file.host = HostInfo::current();
  file.config = cfg;
  for (const auto* b : benches) {
    for (const auto& [rt, sub] : engines) {
      for (auto& r : run_benchmark(rt, sub, *b, cfg)) {
        out_ << r.group << "/" << r.benchmark_id << " @ "
             << (r.subruntime ? r.runtime + ":" + *r.subruntime : r.runtime) << " #"
             << r.repetition << ": " << to_string(r.status) << " " << format_ms(r.wall_time_ns);
        if (r.score) out_ << " score=" << format_real(*r.score);
        out_ << "\n";
        file.results.push_back(std::move(r));
      }
    }
  }
  const fs::path path = output_file_.empty()
                            ? fs::path(output_dir_) / ("results-" + compact_utc(now) + ".json")
                            : fs::path(output_file_);
  save_results(file, path);
  out_ << "wrote " << file.results.size() << " results to " << path.string() << "\n";
}

void Cli::cmd_check() {
  const Registry reg = registry();
  const BenchmarkGroup* set = reg.find_group(set_name_);
  if (!set) throw UnknownBenchmark("no payload set named '" + set_name_ + "'");
  const auto engines = resolve_engines(reg, runtimes_);
  if (engines.empty()) throw UnknownRuntime("no runtimes registered");

  RunConfig cfg;
  if (timeout_opt_ && timeout_opt_->count() > 0) cfg.timeout_ms = timeout_ms_;
  const FeatureReport report = run_feature_checks(engines, *set, cfg);
  out_ << render_matrix(report);
  if (!csv_path_.empty()) write_text_file(csv_path_, matrix_csv(report));
}

void Cli::cmd_export() {
  const std::string csv = export_csv(load_results(input_));
  if (output_file_.empty()) {
    out_ << csv;
  } else {
    write_text_file(output_file_, csv);
  }
}

void Cli::cmd_plot() {
  const ResultsFile file = load_results(input_);
  const auto summaries = summarize(file);
  const fs::path dir = output_file_.empty() ? fs::path(output_dir_) : fs::path(output_file_);
  const PlotMode mode = select_mode(summaries);
  out_ << "mode: " << (mode == PlotMode::normalized ? "normalized" : "absolute") << "\n";

  const std::pair<ValueKind, const char*> charts[] = {{ValueKind::time_ns, "time"},
                                                      {ValueKind::rss, "rss"},
                                                      {ValueKind::vms, "vms"},
                                                      {ValueKind::score, "score"}};
  for (const auto& [kind, name] : charts) {
    try {
      const PlotSeries series = build_series(summaries, kind, mode);
      const bool any = std::any_of(series.series.begin(), series.series.end(), [](const auto& s) {
        return std::any_of(s.values.begin(), s.values.end(), [](const auto& v) { return v.has_value(); });
      });
      if (!any) continue;
      const fs::path path = dir / (std::string(name) + ".svg");
      write_text_file(path, render_grouped_bars(series, name, log_scale_));
      out_ << "wrote " << path.string() << "\n";
    } catch (const NonPositiveValue& e) {
      err_ << "skipping " << name << " chart: " << e.what() << "\n";
    } catch (const EmptySeries&) {
    }
  }

  std::map<std::string, std::vector<double>> times, rss;
  for (const auto& r : file.results) {
    if (r.status != RunStatus::ok) continue;
    const std::string label = r.subruntime ? r.runtime + ":" + *r.subruntime : r.runtime;
    times[label].push_back(static_cast<double>(r.wall_time_ns));
    if (r.peak_rss_bytes) rss[label].push_back(static_cast<double>(*r.peak_rss_bytes));
  }
  for (const auto& [values, name] :
       {std::pair(&times, "time_distribution.csv"), std::pair(&rss, "rss_distribution.csv")}) {
    if (values->empty()) continue;
    const fs::path path = dir / name;
    write_text_file(path, export_distribution(*values));
    out_ << "wrote " << path.string() << "\n";
  }
}

void Cli::cmd_analyze() {
  std::map<std::pair<std::string, std::string>, std::vector<Summary>> by_bench;
  if (!results_path_.empty()) {
    for (auto& s : summarize(load_results(results_path_))) {
      by_bench[{s.group, s.benchmark_id}].push_back(std::move(s));
    }
  }

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(profiles_dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<MetricsRow> rows;
  for (const auto& f : files) {
    const ProfileData p = parse_profile(f);
    const auto it = by_bench.find({p.group, p.benchmark_id});
    const std::span<const Summary> sums =
        it == by_bench.end() ? std::span<const Summary>{} : std::span<const Summary>(it->second);
    rows.push_back(compute_metrics_row(p, sums));
    if (!cdf_dir_.empty()) {
      const fs::path path = fs::path(cdf_dir_) / ("cdf-" + p.group + "-" + p.benchmark_id + ".svg");
      write_text_file(path, render_cdf(function_time_cdf(p), p.group + "/" + p.benchmark_id));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.group, a.benchmark_id) < std::tie(b.group, b.benchmark_id);
  });

  const fs::path path =
      output_file_.empty() ? fs::path(output_dir_) / "metrics.csv" : fs::path(output_file_);
  write_text_file(path, metrics_table(rows));
  out_ << "analyzed " << rows.size() << " profiles -> " << path.string() << "\n";
}

void Cli::cmd_pca() {
  const pca::DataMatrix<double> x = pca::read_metrics_csv(read_text_file(input_));
  const pca::PcaModel<double> m = pca::fit_pca(x);
  for (const auto& r : m.dropped_rows) err_ << "dropped row with missing data: " << r << "\n";
  for (const auto& c : m.dropped_cols) err_ << "dropped column: " << c << "\n";

  const int k = static_cast<int>(m.components());
  int n = components_;
  if (n > k) {
    err_ << "only " << k << " components available; reporting " << k << "\n";
    n = k;
  }
  const fs::path dir =
      output_file_.empty() ? fs::path(output_dir_) / "pca" : fs::path(output_file_);
  write_text_file(dir / "loadings.csv", pca::loadings_csv(m));
  write_text_file(dir / "scores.csv", pca::scores_csv(m));
  write_text_file(dir / "explained_variance.csv", pca::explained_variance_csv(m));
  const std::string table = pca::render_loading_table(pca::loading_table(m, n));
  write_text_file(dir / "loadings.txt", table);
  out_ << table;

  // Scatter plots pair consecutive components: (1,2), (3,4), ...
  std::vector<std::pair<int, int>> pairs;
  for (int a = 1; a <= n; a += 2) {
    if (a + 1 > k) {
      if (a > 1) pairs.emplace_back(a - 1, a);
      break;
    }
    pairs.emplace_back(a, a + 1);
  }
  for (const auto& [a, b] : pairs) {
    const auto points = pca::scatter_data(m, a, b);
    const fs::path path =
        dir / ("scatter_pc" + std::to_string(a) + "_pc" + std::to_string(b) + ".svg");
    write_text_file(path, render_scatter(points, pc_axis_label(a, m.explained_ratio(a - 1)),
                                         pc_axis_label(b, m.explained_ratio(b - 1)),
                                         "PC" + std::to_string(a) + " vs PC" + std::to_string(b)));
    out_ << "wrote " << path.string() << "\n";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * pca::cumulative_variance(m, n));
  out_ << "first " << n << " components explain " << buf << " of the variance\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace wasubench
