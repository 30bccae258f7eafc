#include "wasubench/executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/syscall.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <boost/regex.hpp>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "wasubench/text.hpp"

extern char** environ;

namespace wasubench {

void RunConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (timeout_ms && *timeout_ms < 1) throw std::invalid_argument("timeout_ms must be positive");
  if (sample_interval_ms < 1) throw std::invalid_argument("sample_interval_ms must be >= 1");
  if (capture_output_limit_bytes < 1) {
    throw std::invalid_argument("capture_output_limit_bytes must be positive");
  }
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::timeout: return "timeout";
    case RunStatus::nonzero_exit: return "nonzero_exit";
    case RunStatus::output_mismatch: return "output_mismatch";
    case RunStatus::spawn_error: return "spawn_error";
  }
  return "spawn_error";
}

std::optional<RunStatus> parse_run_status(std::string_view s) {
  for (RunStatus st : {RunStatus::ok, RunStatus::timeout, RunStatus::nonzero_exit,
                       RunStatus::output_mismatch, RunStatus::spawn_error}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count();
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

bool make_pipe(Pipe& p) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) return false;
  p.read = Fd(fds[0]);
  p.write = Fd(fds[1]);
  return true;
}

class SpawnActions {
 public:
  SpawnActions() { posix_spawn_file_actions_init(&a_); }
  ~SpawnActions() { posix_spawn_file_actions_destroy(&a_); }
  posix_spawn_file_actions_t* get() { return &a_; }

 private:
  posix_spawn_file_actions_t a_;
};

class SpawnAttr {
 public:
  SpawnAttr() { posix_spawnattr_init(&a_); }
  ~SpawnAttr() { posix_spawnattr_destroy(&a_); }
  posix_spawnattr_t* get() { return &a_; }

 private:
  posix_spawnattr_t a_;
};

// Child environment: PATH, HOME and LANG from the harness, then the
// resolved command environment on top.
std::vector<std::string> child_environment(const EnvMap& overlay) {
  EnvMap env;
  for (const char* key : {"PATH", "HOME", "LANG"}) {
    if (const char* v = std::getenv(key)) env[key] = v;
  }
  for (const auto& [k, v] : overlay) env[k] = v;
  std::vector<std::string> out;
  out.reserve(env.size());
  for (const auto& [k, v] : env) out.push_back(k + "=" + v);
  return out;
}

std::vector<char*> c_strings(std::vector<std::string>& strings) {
  std::vector<char*> out;
  out.reserve(strings.size() + 1);
  for (auto& s : strings) out.push_back(s.data());
  out.push_back(nullptr);
  return out;
}

struct MemoryPeaks {
  std::optional<std::uint64_t> rss;
  std::optional<std::uint64_t> vms;

  void fold_rss(std::uint64_t v) { rss = std::max(rss.value_or(0), v); }
  void fold_vms(std::uint64_t v) { vms = std::max(vms.value_or(0), v); }
};

#if defined(__linux__)
// Reads VmHWM/VmRSS and VmPeak/VmSize (kB) from /proc/<pid>/status. A
// zombie no longer reports Vm* lines, so an exited child contributes nothing.
void sample_proc_status(pid_t pid, MemoryPeaks& peaks) {
  char path[64];
  std::snprintf(path, sizeof path, "/proc/%d/status", static_cast<int>(pid));
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    const bool rss = line.rfind("VmHWM:", 0) == 0 || line.rfind("VmRSS:", 0) == 0;
    const bool vms = line.rfind("VmPeak:", 0) == 0 || line.rfind("VmSize:", 0) == 0;
    if (!rss && !vms) continue;
    const char* p = line.c_str() + line.find(':') + 1;
    while (*p == ' ' || *p == '\t') ++p;
    std::uint64_t kb = 0;
    const char* end = line.c_str() + line.size();
    if (std::from_chars(p, end, kb).ec != std::errc{}) continue;
    if (rss) peaks.fold_rss(kb * 1024);
    if (vms) peaks.fold_vms(kb * 1024);
  }
}
#else
void sample_proc_status(pid_t, MemoryPeaks&) {}
#endif

std::uint64_t maxrss_bytes(const struct rusage& ru) {
#if defined(__APPLE__)
  return static_cast<std::uint64_t>(ru.ru_maxrss);
#else
  return static_cast<std::uint64_t>(ru.ru_maxrss) * 1024;
#endif
}

int open_pidfd(pid_t pid) {
#if defined(__linux__) && defined(SYS_pidfd_open)
  return static_cast<int>(::syscall(SYS_pidfd_open, pid, 0));
#else
  (void)pid;
  return -1;
#endif
}

// Appends whatever is readable without blocking. Returns false on EOF.
bool drain(int fd, std::string& sink) {
  std::array<char, 65536> buf;
  for (;;) {
    const ssize_t n = ::read(fd, buf.data(), buf.size());
    if (n > 0) {
      const std::size_t room = kMaxInspectedOutputBytes - std::min(sink.size(), kMaxInspectedOutputBytes);
      sink.append(buf.data(), std::min(room, static_cast<std::size_t>(n)));
      continue;
    }
    if (n == 0) return false;
    if (errno == EINTR) continue;
    return errno == EAGAIN || errno == EWOULDBLOCK;
  }
}

}  // namespace

RawRun run_once(const CommandLine& cmd, const RunConfig& cfg) {
  RawRun out;
  Pipe out_pipe, err_pipe;
  if (!make_pipe(out_pipe) || !make_pipe(err_pipe)) {
    out.spawn_error_message = std::string("pipe: ") + std::strerror(errno);
    return out;
  }

  SpawnActions actions;
  const std::string stdin_path = cmd.stdin_path ? cmd.stdin_path->string() : "/dev/null";
  posix_spawn_file_actions_addopen(actions.get(), STDIN_FILENO, stdin_path.c_str(), O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(actions.get(), out_pipe.write.get(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(actions.get(), err_pipe.write.get(), STDERR_FILENO);

  SpawnAttr attr;
  sigset_t none, defaults;
  sigemptyset(&none);
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigaddset(&defaults, SIGTERM);
  sigaddset(&defaults, SIGINT);
  posix_spawnattr_setsigmask(attr.get(), &none);
  posix_spawnattr_setsigdefault(attr.get(), &defaults);
  posix_spawnattr_setpgroup(attr.get(), 0);
  posix_spawnattr_setflags(attr.get(),
                           POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);

  std::vector<std::string> args;
  args.push_back(cmd.exec.string());
  args.insert(args.end(), cmd.argv.begin(), cmd.argv.end());
  std::vector<std::string> env = child_environment(cmd.env);
  std::vector<char*> argv_c = c_strings(args);
  std::vector<char*> env_c = c_strings(env);

  const bool search_path = args.front().find('/') == std::string::npos;
  pid_t pid = -1;
  const Clock::time_point start = Clock::now();
  const int rc = search_path
                     ? ::posix_spawnp(&pid, args.front().c_str(), actions.get(), attr.get(),
                                      argv_c.data(), env_c.data())
                     : ::posix_spawn(&pid, args.front().c_str(), actions.get(), attr.get(),
                                     argv_c.data(), env_c.data());
  if (rc != 0) {
    out.wall_time_ns = elapsed_ns(start, Clock::now());
    out.spawn_error_message = args.front() + ": " + std::strerror(rc);
    return out;
  }
  out_pipe.write.reset();
  err_pipe.write.reset();

  // ru_maxrss of the reaped child also carries the spawning process's own
  // high-water mark from before exec; only a value above ours is the child's.
  struct rusage self_usage {};
  ::getrusage(RUSAGE_SELF, &self_usage);
  const std::uint64_t harness_rss = maxrss_bytes(self_usage);

  Fd pidfd(open_pidfd(pid));
  for (const Fd* fd : {&out_pipe.read, &err_pipe.read}) {
    ::fcntl(fd->get(), F_SETFL, ::fcntl(fd->get(), F_GETFL) | O_NONBLOCK);
  }

  MemoryPeaks peaks;
  const auto interval = std::chrono::milliseconds(cfg.sample_interval_ms);
  Clock::time_point next_sample = start;
  if (cfg.track_memory) {
    sample_proc_status(pid, peaks);
    next_sample = Clock::now() + interval;
  }

  std::optional<Clock::time_point> deadline;
  if (cfg.timeout_ms) deadline = start + std::chrono::milliseconds(*cfg.timeout_ms);
  std::optional<Clock::time_point> kill_deadline;
  bool timed_out = false;
  bool out_open = true, err_open = true;
  int wait_status = 0;
  struct rusage child_usage {};
  Clock::time_point end;

  for (;;) {
    const pid_t w = ::wait4(pid, &wait_status, WNOHANG, &child_usage);
    if (w == pid) {
      end = Clock::now();
      break;
    }
    if (w < 0 && errno != EINTR) {
      end = Clock::now();
      break;
    }

    Clock::time_point now = Clock::now();
    if (deadline && !timed_out && now >= *deadline) {
      ::killpg(pid, SIGTERM);
      timed_out = true;
      kill_deadline = now + std::chrono::milliseconds(kKillGraceMs);
    }
    if (kill_deadline && now >= *kill_deadline) {
      ::killpg(pid, SIGKILL);
      kill_deadline.reset();
    }
    if (cfg.track_memory && now >= next_sample) {
      sample_proc_status(pid, peaks);
      next_sample = now + interval;
    }

    // Sleep until output, exit (pidfd), the next sample, or a deadline.
    Clock::time_point wake = now + std::chrono::milliseconds(pidfd.valid() ? 1000 : 1);
    if (cfg.track_memory) wake = std::min(wake, next_sample);
    if (deadline && !timed_out) wake = std::min(wake, *deadline);
    if (kill_deadline) wake = std::min(wake, *kill_deadline);
    const auto wait_ms = std::chrono::ceil<std::chrono::milliseconds>(wake - now).count();

    std::array<pollfd, 3> fds{};
    nfds_t n = 0;
    if (out_open) fds[n++] = {out_pipe.read.get(), POLLIN, 0};
    if (err_open) fds[n++] = {err_pipe.read.get(), POLLIN, 0};
    if (pidfd.valid()) fds[n++] = {pidfd.get(), POLLIN, 0};
    ::poll(fds.data(), n, static_cast<int>(std::max<std::int64_t>(wait_ms, 0)));
    if (out_open) out_open = drain(out_pipe.read.get(), out.stdout_text);
    if (err_open) err_open = drain(err_pipe.read.get(), out.stderr_text);
  }

  // Output already written by the child is still buffered in the pipes.
  if (out_open) drain(out_pipe.read.get(), out.stdout_text);
  if (err_open) drain(err_pipe.read.get(), out.stderr_text);
  // Stray descendants must not outlive the run.
  ::killpg(pid, SIGKILL);

  out.wall_time_ns = elapsed_ns(start, end);
  if (timed_out) {
    out.status = RunStatus::timeout;
  } else if (WIFEXITED(wait_status)) {
    out.exit_code = WEXITSTATUS(wait_status);
    out.status = *out.exit_code == 0 ? RunStatus::ok : RunStatus::nonzero_exit;
  } else if (WIFSIGNALED(wait_status)) {
    out.exit_code = 128 + WTERMSIG(wait_status);
    out.status = RunStatus::nonzero_exit;
  } else {
    out.status = RunStatus::nonzero_exit;
  }

  if (cfg.track_memory) {
    const std::uint64_t child_rss = maxrss_bytes(child_usage);
    if (child_rss > harness_rss) peaks.fold_rss(child_rss);
    out.peak_rss_bytes = peaks.rss;
    out.peak_vms_bytes = peaks.vms;
  }
  return out;
}

std::optional<double> extract_score(std::string_view output, const ScoreRule& rule) {
  boost::regex re;
  try {
    re.assign(rule.pattern);
  } catch (const boost::regex_error&) {
    return std::nullopt;
  }
  if (re.mark_count() < 1) return std::nullopt;
  boost::match_results<std::string_view::const_iterator> m;
  if (!boost::regex_search(output.begin(), output.end(), m, re)) return std::nullopt;
  if (!m[1].matched) return std::nullopt;
  const auto offset = static_cast<std::size_t>(m[1].first - output.begin());
  return parse_real(output.substr(offset, static_cast<std::size_t>(m[1].length())));
}

bool validate_output(std::string_view output, const ExpectedOutput& rule) {
  if (rule.kind == ExpectedOutput::Kind::exact) {
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
      return s;
    };
    return trim(output) == trim(rule.value);
  }
  try {
    const boost::regex re(rule.value);
    return boost::regex_search(output.begin(), output.end(), re);
  } catch (const boost::regex_error&) {
    return false;
  } catch (const std::runtime_error&) {
    // Boost reports pathological backtracking as a runtime error.
    return false;
  }
}

std::string truncate_excerpt(std::string_view text, std::size_t limit) {
  if (text.size() <= limit) return std::string(text);
  std::string out(text.substr(0, limit));
  out += kTruncationMarker;
  return out;
}

std::vector<RunResult> run_benchmark(const RuntimeSpec& rt, const std::optional<std::string>& sub,
                                     const BenchmarkSpec& bench, const RunConfig& cfg) {
  cfg.validate();
  const CommandLine cmd = resolve_invocation(rt, sub, bench);
  std::vector<RunResult> results;
  results.reserve(static_cast<std::size_t>(cfg.repetitions));
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    RunResult r;
    r.group = bench.group;
    r.benchmark_id = bench.id;
    r.runtime = rt.name;
    r.subruntime = sub;
    r.repetition = rep;
    r.timestamp_utc = iso8601_utc(std::chrono::system_clock::now());

    RawRun raw = run_once(cmd, cfg);
    r.status = raw.status;
    r.exit_code = raw.exit_code;
    r.wall_time_ns = raw.wall_time_ns;
    r.peak_rss_bytes = raw.peak_rss_bytes;
    r.peak_vms_bytes = raw.peak_vms_bytes;
    if (r.status == RunStatus::ok && bench.expected_output &&
        !validate_output(raw.stdout_text, *bench.expected_output)) {
      r.status = RunStatus::output_mismatch;
    }
    if (r.status == RunStatus::ok && bench.score_rule) {
      r.score = extract_score(raw.stdout_text, *bench.score_rule);
    }
    r.stdout_excerpt = truncate_excerpt(raw.stdout_text, cfg.capture_output_limit_bytes);
    std::string err = raw.status == RunStatus::spawn_error ? raw.spawn_error_message
                                                             : std::move(raw.stderr_text);
    r.stderr_excerpt = truncate_excerpt(err, cfg.capture_output_limit_bytes);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace wasubench
