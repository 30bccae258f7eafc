#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wasubench {

namespace fs = std::filesystem;

using EnvMap = std::map<std::string, std::string>;

inline constexpr const char* kModulePlaceholder = "{module}";
inline constexpr const char* kArgsPlaceholder = "{args}";

/// A named variant of an engine that reuses its executable with different
/// flags or environment.
struct SubruntimeSpec {
  std::string name;
  std::optional<std::vector<std::string>> args_template_override;
  std::vector<std::string> extra_args;  // inserted before `{module}` when no override
  EnvMap env_override;

  bool operator==(const SubruntimeSpec&) const = default;
};

/// How to invoke one engine executable on a wasm payload.
struct RuntimeSpec {
  std::string name;
  fs::path exec;
  std::vector<std::string> args_template;
  EnvMap env;
  std::vector<SubruntimeSpec> subruntimes;
  std::string notes;
  std::optional<std::string> install_hint;

  const SubruntimeSpec* find_subruntime(std::string_view sub) const;

  bool operator==(const RuntimeSpec&) const = default;
};

struct ExpectedOutput {
  enum class Kind { exact, regex };
  Kind kind = Kind::exact;
  std::string value;

  bool operator==(const ExpectedOutput&) const = default;
};

struct ScoreRule {
  std::string pattern;  // exactly one capture group
  bool higher_is_better = true;

  bool operator==(const ScoreRule&) const = default;
};

struct BenchmarkSpec {
  std::string id;
  std::string group;
  fs::path module_path;
  std::vector<std::string> args;
  std::optional<fs::path> stdin_path;
  std::optional<ExpectedOutput> expected_output;
  std::optional<ScoreRule> score_rule;

  bool operator==(const BenchmarkSpec&) const = default;
};

struct BenchmarkGroup {
  std::string name;
  std::vector<BenchmarkSpec> benchmarks;

  const BenchmarkSpec* find(std::string_view id) const;

  bool operator==(const BenchmarkGroup&) const = default;
};

/// A fully resolved process invocation: no placeholders remain in argv.
/// argv holds the arguments only; the program is `exec`.
struct CommandLine {
  fs::path exec;
  std::vector<std::string> argv;
  EnvMap env;
  std::optional<fs::path> stdin_path;

  bool operator==(const CommandLine&) const = default;
};

struct Registry {
  std::vector<RuntimeSpec> runtimes;   // sorted by name
  std::vector<BenchmarkGroup> groups;  // sorted by name

  const RuntimeSpec* find_runtime(std::string_view name) const;
  const BenchmarkGroup* find_group(std::string_view name) const;
};

/// Reads `<dir>/runtimes/*.json` and `<dir>/benchmarks/<group>/group.json`.
/// Missing `runtimes/` or `benchmarks/` subdirectories load as empty.
/// Relative paths inside a config resolve against that config's directory.
///
/// Throws MalformedConfig, DuplicateName, MissingPlaceholder or IoError.
Registry load_registry(const fs::path& dir);

/// Parses and validates one runtime config file (relative paths resolve
/// against its directory).
RuntimeSpec load_runtime_file(const fs::path& file);

/// Validates placeholder rules: exactly one `{module}`, at most one `{args}`.
void validate_args_template(const std::vector<std::string>& tokens, const std::string& owner);

/// Checks every RuntimeSpec invariant; throws on the first violation.
void validate_runtime(const RuntimeSpec& spec);

CommandLine resolve_invocation(const RuntimeSpec& rt, const std::optional<std::string>& sub,
                               const BenchmarkSpec& bench);

/// Writes `<dir>/runtimes/<name>.json`. Paths are written verbatim, so a
/// relative `exec` will resolve against `runtimes/` when loaded back.
fs::path register_runtime(const fs::path& dir, const RuntimeSpec& spec);

void remove_runtime(const fs::path& dir, const std::string& name);

// JSON text for one runtime file / one group file, in the on-disk schema.
std::string runtime_to_json(const RuntimeSpec& spec);
std::string group_to_json(const BenchmarkGroup& group);

}  // namespace wasubench
