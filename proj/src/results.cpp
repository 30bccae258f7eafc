#include "wasubench/results.hpp"

#include <sys/utsname.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <set>
#include <tuple>

#include "wasubench/error.hpp"
#include "wasubench/text.hpp"

namespace wasubench {

using nlohmann::json;
using nlohmann::ordered_json;

HostInfo HostInfo::current() {
  HostInfo h;
  struct utsname u {};
  if (::uname(&u) == 0) {
    h.os = u.sysname;
    h.arch = u.machine;
    h.hostname = u.nodename;
  }
  return h;
}

std::string Summary::runtime_label() const {
  return subruntime ? runtime + ":" + *subruntime : runtime;
}

namespace {

template <typename T>
ordered_json opt(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["repetitions"] = c.repetitions;
  j["timeout_ms"] = opt(c.timeout_ms);
  j["track_memory"] = c.track_memory;
  j["sample_interval_ms"] = c.sample_interval_ms;
  j["capture_output_limit_bytes"] = c.capture_output_limit_bytes;
  return j;
}

ordered_json result_json(const RunResult& r) {
  ordered_json j;
  j["group"] = r.group;
  j["benchmark_id"] = r.benchmark_id;
  j["runtime"] = r.runtime;
  j["subruntime"] = opt(r.subruntime);
  j["repetition"] = r.repetition;
  j["status"] = std::string(to_string(r.status));
  j["exit_code"] = opt(r.exit_code);
  j["wall_time_ns"] = r.wall_time_ns;
  j["peak_rss_bytes"] = opt(r.peak_rss_bytes);
  j["peak_vms_bytes"] = opt(r.peak_vms_bytes);
  j["score"] = opt(r.score);
  j["stdout_excerpt"] = r.stdout_excerpt;
  j["stderr_excerpt"] = r.stderr_excerpt;
  j["timestamp_utc"] = r.timestamp_utc;
  return j;
}

// Strict field access: wrong types and unknown keys are schema errors.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& why) const { throw SchemaError(where_ + ": " + why); }

  const json& req(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) fail(std::string("missing '") + key + "'");
    return *it;
  }

  std::string str(const char* key) {
    const json& v = req(key);
    if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  template <typename Int>
  Int integer(const char* key) {
    const json& v = req(key);
    if (!v.is_number_integer()) fail(std::string("'") + key + "' must be an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) return v.get<Int>();
      fail(std::string("'") + key + "' must be nonnegative");
    } else {
      return v.get<Int>();
    }
  }

  template <typename Int>
  std::optional<Int> opt_integer(const char* key) {
    if (req(key).is_null()) return std::nullopt;
    return integer<Int>(key);
  }

  bool boolean(const char* key) {
    const json& v = req(key);
    if (!v.is_boolean()) fail(std::string("'") + key + "' must be a boolean");
    return v.get<bool>();
  }

  std::optional<std::string> opt_str(const char* key) {
    if (req(key).is_null()) return std::nullopt;
    return str(key);
  }

  std::optional<double> opt_real(const char* key) {
    const json& v = req(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(std::string("'") + key + "' must be finite");
    return d;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

RunResult parse_result(const json& j, std::size_t i) {
  Fields f(j, "results[" + std::to_string(i) + "]");
  RunResult r;
  r.group = f.str("group");
  r.benchmark_id = f.str("benchmark_id");
  r.runtime = f.str("runtime");
  r.subruntime = f.opt_str("subruntime");
  r.repetition = f.integer<int>("repetition");
  const auto status = parse_run_status(f.str("status"));
  if (!status) f.fail("unknown status");
  r.status = *status;
  r.exit_code = f.opt_integer<int>("exit_code");
  r.wall_time_ns = f.integer<std::int64_t>("wall_time_ns");
  if (r.wall_time_ns < 0) f.fail("wall_time_ns must be nonnegative");
  r.peak_rss_bytes = f.opt_integer<std::uint64_t>("peak_rss_bytes");
  r.peak_vms_bytes = f.opt_integer<std::uint64_t>("peak_vms_bytes");
  r.score = f.opt_real("score");
  r.stdout_excerpt = f.str("stdout_excerpt");
  r.stderr_excerpt = f.str("stderr_excerpt");
  r.timestamp_utc = f.str("timestamp_utc");
  f.finish();
  return r;
}

}  // namespace

std::string results_to_json(const ResultsFile& file) {
  ordered_json j;
  j["schema_version"] = file.schema_version;
  j["created_utc"] = file.created_utc;
  j["host"] = {{"os", file.host.os}, {"arch", file.host.arch}, {"hostname", file.host.hostname}};
  j["config"] = config_json(file.config);
  ordered_json list = ordered_json::array();
  for (const auto& r : file.results) list.push_back(result_json(r));
  j["results"] = std::move(list);
  // Excerpts are raw process output and may not be valid UTF-8.
  return j.dump(2, ' ', false, ordered_json::error_handler_t::replace) + "\n";
}

ResultsFile results_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  Fields top(j, "results file");
  ResultsFile file;
  file.schema_version = top.integer<int>("schema_version");
  if (file.schema_version != kResultsSchemaVersion) {
    throw SchemaError("unsupported schema_version " + std::to_string(file.schema_version));
  }
  file.created_utc = top.str("created_utc");

  Fields host(top.req("host"), "host");
  file.host.os = host.str("os");
  file.host.arch = host.str("arch");
  file.host.hostname = host.str("hostname");
  host.finish();

  Fields cfg(top.req("config"), "config");
  file.config.repetitions = cfg.integer<int>("repetitions");
  file.config.timeout_ms = cfg.opt_integer<std::int64_t>("timeout_ms");
  file.config.track_memory = cfg.boolean("track_memory");
  file.config.sample_interval_ms = cfg.integer<int>("sample_interval_ms");
  file.config.capture_output_limit_bytes = cfg.integer<std::size_t>("capture_output_limit_bytes");
  cfg.finish();

  const json& list = top.req("results");
  if (!list.is_array()) top.fail("'results' must be an array");
  for (std::size_t i = 0; i < list.size(); ++i) file.results.push_back(parse_result(list[i], i));
  top.finish();
  return file;
}

void save_results(const ResultsFile& file, const std::filesystem::path& path) {
  write_text_file(path, results_to_json(file));
}

ResultsFile load_results(const std::filesystem::path& path) {
  return results_from_json(read_text_file(path));
}

std::string export_csv(const ResultsFile& file) {
  std::string out = std::string(kResultsCsvHeader) + "\n";
  for (const auto& r : file.results) {
    out += csv_line({r.group, r.benchmark_id, r.runtime, r.subruntime.value_or(""),
                     std::to_string(r.repetition), std::string(to_string(r.status)),
                     r.exit_code ? std::to_string(*r.exit_code) : "",
                     std::to_string(r.wall_time_ns), format_optional(r.peak_rss_bytes),
                     format_optional(r.peak_vms_bytes), format_optional(r.score)});
  }
  return out;
}

namespace {

double mean_of(const std::vector<double>& xs) {
  double sum = 0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

std::optional<double> mean_if_any(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  return mean_of(xs);
}

}  // namespace

std::vector<Summary> summarize(const ResultsFile& file) {
  using Key = std::tuple<std::string, std::string, std::string, std::optional<std::string>>;
  struct Acc {
    std::vector<double> times, rss, vms, scores;
  };
  std::map<Key, Acc> groups;
  for (const auto& r : file.results) {
    Acc& acc = groups[Key{r.group, r.benchmark_id, r.runtime, r.subruntime}];
    if (r.status != RunStatus::ok) continue;
    acc.times.push_back(static_cast<double>(r.wall_time_ns));
    if (r.peak_rss_bytes) acc.rss.push_back(static_cast<double>(*r.peak_rss_bytes));
    if (r.peak_vms_bytes) acc.vms.push_back(static_cast<double>(*r.peak_vms_bytes));
    if (r.score) acc.scores.push_back(*r.score);
  }

  std::vector<Summary> out;
  out.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    Summary s;
    std::tie(s.group, s.benchmark_id, s.runtime, s.subruntime) = key;
    s.n_ok = acc.times.size();
    if (s.n_ok > 0) {
      // Sorting first makes the sums independent of input order.
      std::sort(acc.times.begin(), acc.times.end());
      const double mean =
          std::clamp(mean_of(acc.times), acc.times.front(), acc.times.back());
      double ss = 0;
      for (double t : acc.times) ss += (t - mean) * (t - mean);
      s.mean_time_ns = mean;
      s.min_time_ns = acc.times.front();
      s.max_time_ns = acc.times.back();
      s.stddev_time_ns = s.n_ok > 1 ? std::sqrt(ss / static_cast<double>(s.n_ok - 1)) : 0.0;
      for (auto* v : {&acc.rss, &acc.vms, &acc.scores}) std::sort(v->begin(), v->end());
      s.mean_rss_bytes = mean_if_any(acc.rss);
      s.mean_vms_bytes = mean_if_any(acc.vms);
      s.mean_score = mean_if_any(acc.scores);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace wasubench
