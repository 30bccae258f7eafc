// Test helper standing in for an engine executable.
//
//   stub_child busy MS           spin for MS milliseconds
//   stub_child sleep MS          sleep for MS milliseconds
//   stub_child alloc MB [HOLD]   touch MB mebibytes, hold HOLD ms (default 200)
//   stub_child echo TEXT...      print TEXT joined by spaces
//   stub_child exit CODE         exit with CODE
//   stub_child stderr TEXT       print TEXT on stderr, exit 1
//   stub_child spew BYTES        write BYTES 'x' characters to stdout
//   stub_child env NAME          print the value of NAME
//   stub_child cat               copy stdin to stdout
//   stub_child engine ...        payload-dispatching fake engine, see below
//
// In `engine` mode the last argument is a payload path whose file name picks
// the behaviour: *ok* exits 0, *fail* exits 1, *hang* sleeps forever,
// *crash* dies from SIGSEGV. An engine flag `--hang-all` hangs on everything.
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

void busy(long ms) {
  const auto end = Clock::now() + std::chrono::milliseconds(ms);
  volatile unsigned long sink = 0;
  while (Clock::now() < end) {
    for (int i = 0; i < 1000; ++i) sink = sink + static_cast<unsigned long>(i);
  }
}

void sleep_ms(long ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }

int engine(int argc, char** argv) {
  bool hang_all = false;
  for (int i = 2; i < argc; ++i) {
    if (std::strcmp(argv[i], "--hang-all") == 0) hang_all = true;
  }
  const std::string payload = argv[argc - 1];
  const std::string base = payload.substr(payload.find_last_of('/') + 1);
  if (hang_all || base.find("hang") != std::string::npos) {
    for (;;) sleep_ms(1000);
  }
  if (base.find("crash") != std::string::npos) {
    std::raise(SIGSEGV);
    return 139;
  }
  if (base.find("fail") != std::string::npos) {
    std::cerr << "unsupported feature in " << base << "\n";
    return 1;
  }
  std::cout << "ran " << base << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: stub_child MODE [ARGS]\n";
    return 2;
  }
  const std::string mode = argv[1];
  if (mode == "busy" && argc >= 3) {
    busy(std::atol(argv[2]));
    return 0;
  }
  if (mode == "sleep" && argc >= 3) {
    sleep_ms(std::atol(argv[2]));
    return 0;
  }
  if (mode == "alloc" && argc >= 3) {
    const std::size_t bytes = static_cast<std::size_t>(std::atol(argv[2])) << 20;
    const long hold = argc >= 4 ? std::atol(argv[3]) : 200;
    std::vector<char> block(bytes);
    for (std::size_t i = 0; i < bytes; i += 4096) block[i] = static_cast<char>(i);
    sleep_ms(hold);
    volatile char keep = block[bytes / 2];
    (void)keep;
    return 0;
  }
  if (mode == "echo") {
    for (int i = 2; i < argc; ++i) {
      if (i > 2) std::cout << ' ';
      std::cout << argv[i];
    }
    std::cout << "\n";
    return 0;
  }
  if (mode == "exit" && argc >= 3) return std::atoi(argv[2]);
  if (mode == "stderr" && argc >= 3) {
    std::cerr << argv[2] << "\n";
    return 1;
  }
  if (mode == "spew" && argc >= 3) {
    const std::string chunk(4096, 'x');
    long left = std::atol(argv[2]);
    while (left > 0) {
      const long n = left < 4096 ? left : 4096;
      std::fwrite(chunk.data(), 1, static_cast<std::size_t>(n), stdout);
      left -= n;
    }
    return 0;
  }
  if (mode == "env" && argc >= 3) {
    const char* v = std::getenv(argv[2]);
    std::cout << (v ? v : "") << "\n";
    return v ? 0 : 1;
  }
  if (mode == "cat") {
    std::cout << std::cin.rdbuf();
    return 0;
  }
  if (mode == "engine" && argc >= 3) return engine(argc, argv);
  std::cerr << "stub_child: bad arguments\n";
  return 2;
}
