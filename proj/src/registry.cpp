#include "wasubench/registry.hpp"

#include <algorithm>
#include <boost/regex.hpp>
#include <json.hpp>
#include <set>
#include <system_error>

#include "wasubench/error.hpp"
#include "wasubench/text.hpp"

namespace wasubench {

using nlohmann::json;

const SubruntimeSpec* RuntimeSpec::find_subruntime(std::string_view sub) const {
  for (const auto& s : subruntimes) {
    if (s.name == sub) return &s;
  }
  return nullptr;
}

const BenchmarkSpec* BenchmarkGroup::find(std::string_view id) const {
  for (const auto& b : benchmarks) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

const RuntimeSpec* Registry::find_runtime(std::string_view name) const {
  for (const auto& r : runtimes) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const BenchmarkGroup* Registry::find_group(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

namespace {

// Names double as file and directory names, and `/` and `:` are selector
// separators on the command line.
bool is_identifier(std::string_view s) {
  if (s.empty() || s.front() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

// Strict object reader: every key must be consumed, unknown keys are errors.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected a JSON object");
  }

  [[noreturn]] void fail(const std::string& reason) const {
    throw MalformedConfig(where_ + ": " + reason);
  }

  const json* get(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string string(const char* key) {
    const json* v = get(key);
    if (!v) fail(std::string("missing key '") + key + "'");
    return as_string(*v, key);
  }

  std::optional<std::string> opt_string(const char* key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return as_string(*v, key);
  }

  std::vector<std::string> string_list(const char* key, bool required) {
    const json* v = get(key);
    if (!v) {
      if (required) fail(std::string("missing key '") + key + "'");
      return {};
    }
    return as_string_list(*v, key);
  }

  std::optional<std::vector<std::string>> opt_string_list(const char* key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return as_string_list(*v, key);
  }

  EnvMap env(const char* key) {
    const json* v = get(key);
    EnvMap out;
    if (!v) return out;
    if (!v->is_object()) fail(std::string("'") + key + "' must be an object");
    for (const auto& [k, val] : v->items()) {
      if (!val.is_string()) fail(std::string("'") + key + "." + k + "' must be a string");
      out[k] = val.get<std::string>();
    }
    return out;
  }

  std::optional<bool> opt_bool(const char* key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) fail(std::string("'") + key + "' must be a boolean");
    return v->get<bool>();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  std::string as_string(const json& v, const char* key) const {
    if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<std::string> as_string_list(const json& v, const char* key) const {
    if (!v.is_array()) fail(std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(std::string("'") + key + "' must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json parse_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedConfig(path.string() + ": " + e.what());
  }
}

fs::path resolve_against(const fs::path& base, const fs::path& p) {
  if (p.is_absolute()) return p;
  return (base / p).lexically_normal();
}

// A bare command name (no directory part) is looked up on PATH at spawn time.
fs::path resolve_exec(const fs::path& base, const std::string& exec) {
  if (exec.find('/') == std::string::npos) return exec;
  return resolve_against(base, exec);
}

std::size_t count_token(const std::vector<std::string>& tokens, std::string_view tok) {
  return static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), tok));
}

RuntimeSpec parse_runtime(const json& j, const fs::path& file) {
  ObjectReader r(j, file.string());
  RuntimeSpec spec;
  spec.name = r.string("name");
  spec.exec = resolve_exec(file.parent_path(), r.string("exec"));
  spec.args_template = r.string_list("args_template", true);
  spec.env = r.env("env");
  spec.notes = r.opt_string("notes").value_or("");
  spec.install_hint = r.opt_string("install_hint");
  if (const json* subs = r.get("subruntimes")) {
    if (!subs->is_array()) r.fail("'subruntimes' must be an array");
    for (std::size_t i = 0; i < subs->size(); ++i) {
      ObjectReader sr((*subs)[i], file.string() + ": subruntimes[" + std::to_string(i) + "]");
      SubruntimeSpec sub;
      sub.name = sr.string("name");
      sub.args_template_override = sr.opt_string_list("args_template_override");
      sub.extra_args = sr.string_list("extra_args", false);
      sub.env_override = sr.env("env_override");
      sr.finish();
      spec.subruntimes.push_back(std::move(sub));
    }
  }
  r.finish();
  return spec;
}

std::size_t capture_groups(const std::string& pattern, const std::string& where) {
  try {
    return boost::regex(pattern).mark_count();
  } catch (const boost::regex_error& e) {
    throw MalformedConfig(where + ": invalid regular expression '" + pattern + "': " + e.what());
  }
}

BenchmarkSpec parse_benchmark(const json& j, const std::string& group, const fs::path& file,
                              std::size_t index) {
  const std::string where = file.string() + ": benchmarks[" + std::to_string(index) + "]";
  ObjectReader r(j, where);
  const fs::path base = file.parent_path();
  BenchmarkSpec b;
  b.group = group;
  b.id = r.string("id");
  if (b.id.empty() || b.id.find('/') != std::string::npos) {
    r.fail("benchmark id must be nonempty and contain no '/'");
  }
  b.module_path = resolve_against(base, r.string("module"));
  b.args = r.string_list("args", false);
  if (auto in = r.opt_string("stdin")) b.stdin_path = resolve_against(base, *in);

  if (const json* eo = r.get("expected_output")) {
    ObjectReader er(*eo, where + ".expected_output");
    const std::string kind = er.string("kind");
    ExpectedOutput out;
    if (kind == "exact") {
      out.kind = ExpectedOutput::Kind::exact;
    } else if (kind == "regex") {
      out.kind = ExpectedOutput::Kind::regex;
    } else {
      er.fail("kind must be 'exact' or 'regex'");
    }
    out.value = er.string("value");
    er.finish();
    if (out.kind == ExpectedOutput::Kind::regex) capture_groups(out.value, where);
    b.expected_output = std::move(out);
  }

  if (const json* sr = r.get("score_rule")) {
    ObjectReader rr(*sr, where + ".score_rule");
    ScoreRule rule;
    rule.pattern = rr.string("pattern");
    rule.higher_is_better = rr.opt_bool("higher_is_better").value_or(true);
    rr.finish();
    if (capture_groups(rule.pattern, where) != 1) {
      rr.fail("score_rule.pattern must have exactly one capture group");
    }
    b.score_rule = std::move(rule);
  }
  r.finish();
  return b;
}

BenchmarkGroup parse_group(const json& j, const fs::path& file) {
  ObjectReader r(j, file.string());
  BenchmarkGroup g;
  g.name = r.string("name");
  if (!is_identifier(g.name)) r.fail("invalid group name '" + g.name + "'");
  if (g.name != file.parent_path().filename().string()) {
    r.fail("group name '" + g.name + "' does not match its directory");
  }
  const json* list = r.get("benchmarks");
  if (!list) r.fail("missing key 'benchmarks'");
  if (!list->is_array()) r.fail("'benchmarks' must be an array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list->size(); ++i) {
    BenchmarkSpec b = parse_benchmark((*list)[i], g.name, file, i);
    if (!ids.insert(b.id).second) {
      throw DuplicateName(file.string() + ": benchmark id '" + b.id + "' appears twice");
    }
    g.benchmarks.push_back(std::move(b));
  }
  r.finish();
  return g;
}

std::vector<fs::path> sorted_entries(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) out.push_back(e.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

json env_to_json(const EnvMap& env) {
  json j = json::object();
  for (const auto& [k, v] : env) j[k] = v;
  return j;
}

}  // namespace

void validate_args_template(const std::vector<std::string>& tokens, const std::string& owner) {
  if (count_token(tokens, kModulePlaceholder) != 1) {
    throw MissingPlaceholder(owner + ": args template must contain exactly one {module}");
  }
  if (count_token(tokens, kArgsPlaceholder) > 1) {
    throw MalformedConfig(owner + ": args template may contain at most one {args}");
  }
}

void validate_runtime(const RuntimeSpec& spec) {
  if (!is_identifier(spec.name)) {
    throw MalformedConfig("invalid runtime name '" + spec.name + "'");
  }
  if (spec.exec.empty()) throw MalformedConfig(spec.name + ": exec must be nonempty");
  validate_args_template(spec.args_template, spec.name);
  std::set<std::string> names;
  for (const auto& sub : spec.subruntimes) {
    if (!is_identifier(sub.name)) {
      throw MalformedConfig(spec.name + ": invalid subruntime name '" + sub.name + "'");
    }
    if (sub.name == spec.name) {
      throw DuplicateName(spec.name + ": subruntime may not share the runtime's name");
    }
    if (!names.insert(sub.name).second) {
      throw DuplicateName(spec.name + ": subruntime '" + sub.name + "' appears twice");
    }
    if (sub.args_template_override) {
      validate_args_template(*sub.args_template_override, spec.name + ":" + sub.name);
    }
  }
}

RuntimeSpec load_runtime_file(const fs::path& file) {
  RuntimeSpec spec = parse_runtime(parse_json_file(file), file);
  validate_runtime(spec);
  return spec;
}

Registry load_registry(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("registry directory not found: " + dir.string());

  Registry reg;
  const fs::path rt_dir = dir / "runtimes";
  if (fs::is_directory(rt_dir, ec)) {
    std::set<std::string> names;
    for (const auto& file : sorted_entries(rt_dir)) {
      if (file.extension() != ".json") continue;
      RuntimeSpec spec = load_runtime_file(file);
      if (!names.insert(spec.name).second) {
        throw DuplicateName(file.string() + ": runtime '" + spec.name + "' already defined");
      }
      reg.runtimes.push_back(std::move(spec));
    }
  }

  const fs::path bench_dir = dir / "benchmarks";
  if (fs::is_directory(bench_dir, ec)) {
    for (const auto& sub : sorted_entries(bench_dir)) {
      const fs::path file = sub / "group.json";
      if (!fs::is_regular_file(file, ec)) continue;
      reg.groups.push_back(parse_group(parse_json_file(file), file));
    }
  }

  auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
  std::sort(reg.runtimes.begin(), reg.runtimes.end(), by_name);
  std::sort(reg.groups.begin(), reg.groups.end(), by_name);
  return reg;
}

CommandLine resolve_invocation(const RuntimeSpec& rt, const std::optional<std::string>& sub,
                               const BenchmarkSpec& bench) {
  std::vector<std::string> tmpl = rt.args_template;
  EnvMap env = rt.env;
  if (sub) {
    const SubruntimeSpec* s = rt.find_subruntime(*sub);
    if (!s) throw UnknownSubruntime(rt.name + " has no subruntime '" + *sub + "'");
    if (s->args_template_override) {
      tmpl = *s->args_template_override;
    } else if (!s->extra_args.empty()) {
      auto at = std::find(tmpl.begin(), tmpl.end(), kModulePlaceholder);
      tmpl.insert(at, s->extra_args.begin(), s->extra_args.end());
    }
    for (const auto& [k, v] : s->env_override) env[k] = v;
  }

  CommandLine cmd;
  cmd.exec = rt.exec;
  cmd.env = std::move(env);
  cmd.stdin_path = bench.stdin_path;
  cmd.argv.reserve(tmpl.size() + bench.args.size());
  for (const auto& tok : tmpl) {
    if (tok == kModulePlaceholder) {
      cmd.argv.push_back(bench.module_path.string());
    } else if (tok == kArgsPlaceholder) {
      cmd.argv.insert(cmd.argv.end(), bench.args.begin(), bench.args.end());
    } else {
      cmd.argv.push_back(tok);
    }
  }
  return cmd;
}

std::string runtime_to_json(const RuntimeSpec& spec) {
  json j = json::object();
  j["name"] = spec.name;
  j["exec"] = spec.exec.string();
  j["args_template"] = spec.args_template;
  if (!spec.env.empty()) j["env"] = env_to_json(spec.env);
  if (!spec.notes.empty()) j["notes"] = spec.notes;
  if (spec.install_hint) j["install_hint"] = *spec.install_hint;
  if (!spec.subruntimes.empty()) {
    json subs = json::array();
    for (const auto& s : spec.subruntimes) {
      json js = json::object();
      js["name"] = s.name;
      if (s.args_template_override) js["args_template_override"] = *s.args_template_override;
      if (!s.extra_args.empty()) js["extra_args"] = s.extra_args;
      if (!s.env_override.empty()) js["env_override"] = env_to_json(s.env_override);
      subs.push_back(std::move(js));
    }
    j["subruntimes"] = std::move(subs);
  }
  return j.dump(2) + "\n";
}

std::string group_to_json(const BenchmarkGroup& group) {
  json list = json::array();
  for (const auto& b : group.benchmarks) {
    json jb = json::object();
    jb["id"] = b.id;
    jb["module"] = b.module_path.string();
    if (!b.args.empty()) jb["args"] = b.args;
    if (b.stdin_path) jb["stdin"] = b.stdin_path->string();
    if (b.expected_output) {
      jb["expected_output"] = {
          {"kind", b.expected_output->kind == ExpectedOutput::Kind::exact ? "exact" : "regex"},
          {"value", b.expected_output->value}};
    }
    if (b.score_rule) {
      jb["score_rule"] = {{"pattern", b.score_rule->pattern},
                          {"higher_is_better", b.score_rule->higher_is_better}};
    }
    list.push_back(std::move(jb));
  }
  json j = {{"name", group.name}, {"benchmarks", std::move(list)}};
  return j.dump(2) + "\n";
}

fs::path register_runtime(const fs::path& dir, const RuntimeSpec& spec) {
  validate_runtime(spec);
  const fs::path rt_dir = dir / "runtimes";
  const fs::path file = rt_dir / (spec.name + ".json");
  std::error_code ec;
  if (fs::exists(file, ec)) throw DuplicateName("runtime '" + spec.name + "' already registered");
  if (fs::is_directory(dir, ec)) {
    const Registry existing = load_registry(dir);
    if (existing.find_runtime(spec.name)) {
      throw DuplicateName("runtime '" + spec.name + "' already registered");
    }
  }
  write_text_file(file, runtime_to_json(spec));
  return file;
}

void remove_runtime(const fs::path& dir, const std::string& name) {
  if (!is_identifier(name)) throw UnknownRuntime("no runtime named '" + name + "'");
  fs::path file = dir / "runtimes" / (name + ".json");
  std::error_code ec;
  if (!fs::is_regular_file(file, ec)) {
    // Hand-written configs need not be named after the runtime.
    file.clear();
    for (const auto& entry : fs::directory_iterator(dir / "runtimes", ec)) {
      if (entry.path().extension() != ".json") continue;
      try {
        if (load_runtime_file(entry.path()).name == name) {
          file = entry.path();
          break;
        }
      } catch (const Error&) {
      }
    }
    if (file.empty()) throw UnknownRuntime("no runtime named '" + name + "'");
  }
  if (!fs::remove(file, ec) || ec) {
    throw IoError("cannot remove " + file.string() + ": " + ec.message());
  }
}

}  // namespace wasubench
