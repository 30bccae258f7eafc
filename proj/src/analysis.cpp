#include "wasubench/analysis.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "wasubench/error.hpp"
#include "wasubench/text.hpp"

namespace wasubench {

using nlohmann::json;

namespace {

class ProfileReader {
 public:
  ProfileReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw MalformedProfile(where_ + ": " + why);
  }

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

  std::uint64_t count(const char* key) {
    const json& v = req(key);
    if (!v.is_number_unsigned()) {
      fail(std::string("'") + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
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

std::uint32_t func_index(ProfileReader& r) {
  const std::uint64_t f = r.count("func");
  if (f > UINT32_MAX) r.fail("'func' out of range");
  return static_cast<std::uint32_t>(f);
}

std::uint64_t total_count(std::span<const SiteCount> sites) {
  return std::accumulate(sites.begin(), sites.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const SiteCount& s) { return acc + s.count; });
}

// Dynamic count per function, over functions with a nonzero total.
std::map<std::uint32_t, std::uint64_t> per_function_counts(const ProfileData& p) {
  std::map<std::uint32_t, std::uint64_t> out;
  for (const auto& s : p.sites) {
    if (s.count > 0) out[s.func] += s.count;
  }
  return out;
}

}  // namespace

void validate_profile(const ProfileData& p, const std::string& where) {
  std::set<std::pair<std::uint32_t, std::uint64_t>> site_keys, block_keys;
  std::set<std::uint32_t> funcs;
  for (const auto& s : p.sites) {
    if (!site_keys.insert({s.func, s.offset}).second) {
      throw MalformedProfile(where + ": duplicate site (func " + std::to_string(s.func) +
                             ", offset " + std::to_string(s.offset) + ")");
    }
    funcs.insert(s.func);
  }
  for (const auto& b : p.blocks) {
    if (!block_keys.insert({b.func, b.block}).second) {
      throw MalformedProfile(where + ": duplicate block (func " + std::to_string(b.func) +
                             ", block " + std::to_string(b.block) + ")");
    }
    funcs.insert(b.func);
  }
  const auto& t = p.static_totals;
  if (p.sites.size() > t.instructions) {
    throw InvariantViolation(where + ": " + std::to_string(p.sites.size()) +
                             " sites but only " + std::to_string(t.instructions) +
                             " static instructions");
  }
  if (p.blocks.size() > t.blocks) {
    throw InvariantViolation(where + ": " + std::to_string(p.blocks.size()) +
                             " block entries but only " + std::to_string(t.blocks) +
                             " static blocks");
  }
  if (funcs.size() > t.functions) {
    throw InvariantViolation(where + ": " + std::to_string(funcs.size()) +
                             " functions referenced but only " + std::to_string(t.functions) +
                             " static functions");
  }
}

ProfileData parse_profile_json(std::string_view text, const std::string& where) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedProfile(where + ": " + e.what());
  }
  ProfileReader top(j, where);
  ProfileData p;
  p.benchmark_id = top.str("benchmark_id");
  p.group = top.str("group");

  ProfileReader totals(top.req("static_totals"), where + ": static_totals");
  p.static_totals.functions = totals.count("functions");
  p.static_totals.instructions = totals.count("instructions");
  p.static_totals.blocks = totals.count("blocks");
  totals.finish();

  const json& sites = top.req("sites");
  if (!sites.is_array()) top.fail("'sites' must be an array");
  p.sites.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    ProfileReader r(sites[i], where + ": sites[" + std::to_string(i) + "]");
    SiteCount s;
    s.func = func_index(r);
    s.offset = r.count("offset");
    s.opcode = r.str("opcode");
    s.count = r.count("count");
    r.finish();
    p.sites.push_back(std::move(s));
  }

  const json& blocks = top.req("blocks");
  if (!blocks.is_array()) top.fail("'blocks' must be an array");
  p.blocks.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    ProfileReader r(blocks[i], where + ": blocks[" + std::to_string(i) + "]");
    BlockCount b;
    b.func = func_index(r);
    b.block = r.count("block");
    const std::string kind = r.str("kind");
    if (kind == "block") {
      b.kind = BlockKind::block;
    } else if (kind == "loop") {
      b.kind = BlockKind::loop;
    } else if (kind == "if") {
      b.kind = BlockKind::if_;
    } else {
      r.fail("kind must be block, loop or if");
    }
    b.count = r.count("count");
    r.finish();
    p.blocks.push_back(b);
  }
  top.finish();
  validate_profile(p, where);
  return p;
}

ProfileData parse_profile(const std::filesystem::path& path) {
  return parse_profile_json(read_text_file(path), path.string());
}

OpClass classify_opcode(std::string_view m) {
  auto starts = [&](std::string_view prefix) { return m.substr(0, prefix.size()) == prefix; };
  if (m == "global.get") return OpClass::GlobalRead;
  if (m == "global.set") return OpClass::GlobalWrite;
  if (m.find(".load") != std::string_view::npos) return OpClass::MemRead;
  if (m.find(".store") != std::string_view::npos) return OpClass::MemWrite;
  if (m == "call_indirect") return OpClass::IndirectCall;
  if (starts("i32.") || starts("i64.")) return OpClass::Int;
  if (starts("f32.") || starts("f64.")) return OpClass::Float;
  return OpClass::Other;
}

std::uint64_t compute_reach(std::span<const SiteCount> sites, int percent) {
  if (std::find(kReachPercents.begin(), kReachPercents.end(), percent) == kReachPercents.end()) {
    throw std::invalid_argument("reach percent must be one of 50, 75, 90, 95, 99, 100");
  }
  const std::uint64_t total = total_count(sites);
  if (total == 0) throw EmptyProfile("no executed instructions");

  std::vector<std::uint64_t> counts;
  {
    std::vector<const SiteCount*> order;
    for (const auto& s : sites) {
      if (s.count > 0) order.push_back(&s);
    }
    std::sort(order.begin(), order.end(), [](const SiteCount* a, const SiteCount* b) {
      if (a->count != b->count) return a->count > b->count;
      return std::pair(a->func, a->offset) < std::pair(b->func, b->offset);
    });
    for (const auto* s : order) counts.push_back(s->count);
  }

  // cumulative / total >= percent / 100, in exact integer arithmetic.
  using Wide = unsigned __int128;
  const Wide target = static_cast<Wide>(total) * static_cast<Wide>(percent);
  Wide cumulative = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    cumulative += counts[k];
    if (cumulative * 100 >= target) return k + 1;
  }
  return counts.size();
}

Coverage compute_coverage(const ProfileData& p) {
  const auto& t = p.static_totals;
  if (t.functions == 0 || t.instructions == 0 || t.blocks == 0) {
    throw DegenerateModule(p.benchmark_id + ": static totals must all be positive");
  }
  const auto covered_sites = static_cast<std::uint64_t>(
      std::count_if(p.sites.begin(), p.sites.end(), [](const SiteCount& s) { return s.count > 0; }));
  const auto covered_blocks = static_cast<std::uint64_t>(std::count_if(
      p.blocks.begin(), p.blocks.end(), [](const BlockCount& b) { return b.count > 0; }));
  const auto exec_funcs = static_cast<std::uint64_t>(per_function_counts(p).size());

  Coverage c;
  c.instr_cov = 100.0 * static_cast<double>(covered_sites) / static_cast<double>(t.instructions);
  c.block_cov = 100.0 * static_cast<double>(covered_blocks) / static_cast<double>(t.blocks);
  c.func_cov = 100.0 * static_cast<double>(exec_funcs) / static_cast<double>(t.functions);
  c.exec_funcs = exec_funcs;
  return c;
}

MetricsRow compute_metrics_row(const ProfileData& p, std::span<const Summary> summaries) {
  MetricsRow row;
  row.benchmark_id = p.benchmark_id;
  row.group = p.group;

  row.exec_inst = total_count(p.sites);
  if (row.exec_inst == 0) throw EmptyProfile(p.benchmark_id + ": no executed instructions");

  const Coverage cov = compute_coverage(p);
  row.instr_cov = cov.instr_cov;
  row.block_cov = cov.block_cov;
  row.func_cov = cov.func_cov;
  row.exec_funcs = cov.exec_funcs;
  row.total_funcs = p.static_totals.functions;

  std::array<std::uint64_t*, 6> reach{&row.reach_50, &row.reach_75, &row.reach_90,
                                      &row.reach_95, &row.reach_99, &row.reach_100};
  for (std::size_t i = 0; i < kReachPercents.size(); ++i) {
    *reach[i] = compute_reach(p.sites, kReachPercents[i]);
  }

  for (const auto& s : p.sites) {
    row.class_tallies[static_cast<std::size_t>(classify_opcode(s.opcode))] += s.count;
  }
  auto tally = [&](OpClass c) { return row.class_tallies[static_cast<std::size_t>(c)]; };
  row.g_reads = tally(OpClass::GlobalRead);
  row.g_writes = tally(OpClass::GlobalWrite);
  row.reads = tally(OpClass::MemRead);
  row.writes = tally(OpClass::MemWrite);
  row.ind_call = tally(OpClass::IndirectCall);
  row.int_ops = tally(OpClass::Int);
  row.float_ops = tally(OpClass::Float);

  std::uint64_t hottest = 0;
  for (const auto& [f, c] : per_function_counts(p)) hottest = std::max(hottest, c);
  row.in_first = 100.0 * static_cast<double>(hottest) / static_cast<double>(row.exec_inst);

  for (const auto& b : p.blocks) {
    if (b.kind == BlockKind::loop) row.total_cycles += b.count;
  }

  std::vector<double> times, rss, vms;
  for (const auto& s : summaries) {
    if (s.n_ok == 0) continue;
    if (s.mean_time_ns) times.push_back(*s.mean_time_ns);
    if (s.mean_rss_bytes) rss.push_back(*s.mean_rss_bytes);
    if (s.mean_vms_bytes) vms.push_back(*s.mean_vms_bytes);
  }
  auto mean = [](const std::vector<double>& xs) -> std::optional<double> {
    if (xs.empty()) return std::nullopt;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  row.time_ns = mean(times);
  row.rss = mean(rss);
  row.vms = mean(vms);
  return row;
}

std::vector<std::pair<double, double>> function_time_cdf(const ProfileData& p) {
  const auto per_func = per_function_counts(p);
  if (per_func.empty()) throw EmptyProfile(p.benchmark_id + ": no executed instructions");

  std::vector<std::pair<std::uint32_t, std::uint64_t>> funcs(per_func.begin(), per_func.end());
  std::stable_sort(funcs.begin(), funcs.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::uint64_t total = 0;
  for (const auto& [f, c] : funcs) total += c;

  std::vector<std::pair<double, double>> points;
  points.reserve(funcs.size());
  std::uint64_t cumulative = 0;
  const auto n = static_cast<double>(funcs.size());
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    cumulative += funcs[i].second;
    points.emplace_back(static_cast<double>(i + 1) / n,
                        static_cast<double>(cumulative) / static_cast<double>(total));
  }
  return points;
}

const std::array<std::string_view, 24>& metric_names() {
  static constexpr std::array<std::string_view, 24> names{
      "reach_50",  "reach_75",  "reach_90",    "reach_95",   "reach_99",  "reach_100",
      "instr_cov", "block_cov", "func_cov",    "exec_funcs", "exec_inst", "total_funcs",
      "g_reads",   "g_writes",  "int_ops",     "float_ops",  "ind_call",  "writes",
      "reads",     "in_first",  "total_cycles", "time_ns",   "rss",       "vms"};
  return names;
}

std::string metrics_table(std::span<const MetricsRow> rows) {
  CsvRow header{"benchmark_id", "group"};
  for (auto name : metric_names()) header.emplace_back(name);
  std::string out = csv_line(header);

  for (const auto& r : rows) {
    auto u = [](std::uint64_t v) { return std::to_string(v); };
    out += csv_line({r.benchmark_id,       r.group,
                     u(r.reach_50),        u(r.reach_75),
                     u(r.reach_90),        u(r.reach_95),
                     u(r.reach_99),        u(r.reach_100),
                     format_real(r.instr_cov), format_real(r.block_cov),
                     format_real(r.func_cov),  u(r.exec_funcs),
                     u(r.exec_inst),       u(r.total_funcs),
                     u(r.g_reads),         u(r.g_writes),
                     u(r.int_ops),         u(r.float_ops),
                     u(r.ind_call),        u(r.writes),
                     u(r.reads),           format_real(r.in_first),
                     u(r.total_cycles),    format_optional(r.time_ns),
                     format_optional(r.rss), format_optional(r.vms)});
  }
  return out;
}

}  // namespace wasubench
