#include "wasubench/check.hpp"

#include <algorithm>

#include "wasubench/text.hpp"

namespace wasubench {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::supported: return "supported";
    case Verdict::unsupported: return "unsupported";
    case Verdict::error: return "error";
  }
  return "error";
}

Verdict verdict_for(RunStatus status) {
  switch (status) {
    case RunStatus::ok: return Verdict::supported;
    case RunStatus::timeout:
    case RunStatus::nonzero_exit:
    case RunStatus::output_mismatch: return Verdict::unsupported;
    case RunStatus::spawn_error: return Verdict::error;
  }
  return Verdict::error;
}

FeatureReport run_feature_checks(const std::vector<EngineSelection>& engines,
                                 const BenchmarkGroup& set, RunConfig cfg) {
  cfg.repetitions = 1;
  if (!cfg.timeout_ms) cfg.timeout_ms = kDefaultCheckTimeoutMs;

  FeatureReport report;
  report.payload_set = set.name;
  for (const auto& b : set.benchmarks) report.payloads.push_back(b.id);
  for (const auto& [rt, sub] : engines) {
    report.engines.push_back(sub ? rt.name + ":" + *sub : rt.name);
    std::vector<Verdict> row;
    std::vector<bool> timeouts;
    std::vector<std::string> errs;
    for (const auto& bench : set.benchmarks) {
      const RunResult r = run_benchmark(rt, sub, bench, cfg).front();
      row.push_back(verdict_for(r.status));
      timeouts.push_back(r.status == RunStatus::timeout);
      errs.push_back(r.stderr_excerpt);
    }
    report.support.push_back(std::move(row));
    report.timed_out.push_back(std::move(timeouts));
    report.stderr_excerpts.push_back(std::move(errs));
  }
  return report;
}

namespace {

std::string cell_text(Verdict v, bool timed_out) {
  std::string s = v == Verdict::supported ? "yes" : v == Verdict::unsupported ? "no" : "err";
  if (timed_out) s += "*";
  return s;
}

std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

}  // namespace

std::string render_matrix(const FeatureReport& report) {
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"payload"};
  header.insert(header.end(), report.engines.begin(), report.engines.end());
  table.push_back(std::move(header));

  bool any_timeout = false;
  for (std::size_t p = 0; p < report.payloads.size(); ++p) {
    std::vector<std::string> row{report.payloads[p]};
    for (std::size_t e = 0; e < report.engines.size(); ++e) {
      const bool t = report.timed_out.size() > e && report.timed_out[e].size() > p &&
                     report.timed_out[e][p];
      any_timeout = any_timeout || t;
      row.push_back(cell_text(report.support[e][p], t));
    }
    table.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }

  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += c + 1 == row.size() ? row[c] : pad(row[c], widths[c]);
    }
    out += line + "\n";
  }
  if (any_timeout) out += "* timed out; counted as unsupported\n";
  return out;
}

std::string matrix_csv(const FeatureReport& report) {
  std::string out = "payload,engine,verdict\n";
  for (std::size_t p = 0; p < report.payloads.size(); ++p) {
    for (std::size_t e = 0; e < report.engines.size(); ++e) {
      out += csv_line({report.payloads[p], report.engines[e],
                       std::string(to_string(report.support[e][p]))});
    }
  }
  return out;
}

}  // namespace wasubench
