// trustya-server: hosts multiplayer sessions over WebSocket with HTTP admin endpoints.

#include <pthread.h>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "trustya/server/net.hpp"

int main(int argc, char** argv) {
  using namespace trustya::server;

  CLI::App app{"Trust-ya game server"};
  ServerOptions options;
  std::string defaults_path;
  std::string archive_dir = "archive";
  app.add_option("--address", options.address, "Listen address")->capture_default_str();
  app.add_option("--port", options.port, "Listen port (0 = ephemeral)")->capture_default_str();
  app.add_option("--threads", options.threads, "I/O threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--defaults", defaults_path, "Session defaults JSON: {\"config\": {...}, \"timeouts\": {...}}")
      ->check(CLI::ExistingFile);
  app.add_option("--archive", archive_dir, "Directory for finished session logs")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    ManagerOptions manager_options;
    manager_options.archive_dir = archive_dir;
    if (!defaults_path.empty()) {
      std::ifstream in(defaults_path);
      manager_options.defaults = nlohmann::json::parse(in);
    }
    // Block before any I/O thread exists so sigwait below receives them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SessionManager manager(std::move(manager_options));
    Server server(manager, options);
    const auto port = server.start();
    std::printf("listening on %s:%u (ws path /ws)\n", options.address.c_str(), static_cast<unsigned>(port));
    std::fflush(stdout);
    server.run_in_background();

    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
