// regstyle-mock: serve the mock chat endpoint or the mock sidecar until
// interrupted. Prints the bound port on stdout.

#include <CLI11.hpp>
#include <csignal>
#include <iostream>
#include <memory>
#include <thread>

#include "mock_servers.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

void wait_for_signal() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock chat endpoint and scoring sidecar for offline runs"};
  app.require_subcommand(1);

  std::string mode = "stylist";
  int delay_ms = 0;
  int fail_first = 0;
  auto* chat = app.add_subcommand("chat", "OpenAI-compatible chat completions mock");
  chat->add_option("--mode", mode, "echo, stylist or empty")->check(CLI::IsMember({"echo", "stylist", "empty"}));
  chat->add_option("--delay-ms", delay_ms, "Delay before every reply");
  chat->add_option("--fail-first", fail_first, "Answer the first N requests with HTTP 500");

  auto* sidecar = app.add_subcommand("sidecar", "Scoring sidecar mock (/health, /embed, /score)");

  CLI11_PARSE(app, argc, argv);

  if (chat->parsed()) {
    regstyle::mock::ChatOptions opts;
    opts.mode = mode == "echo" ? regstyle::mock::ChatMode::Echo
                : mode == "empty" ? regstyle::mock::ChatMode::Empty
                                  : regstyle::mock::ChatMode::Stylist;
    opts.delay = std::chrono::milliseconds(delay_ms);
    opts.fail_first = fail_first;
    regstyle::mock::MockChatServer server(opts);
    std::cout << server.port() << std::endl;
    wait_for_signal();
    std::cerr << "served " << server.requests() << " requests\n";
  } else if (sidecar->parsed()) {
    regstyle::mock::MockSidecar server;
    std::cout << server.port() << std::endl;
    wait_for_signal();
  }
  return 0;
}
