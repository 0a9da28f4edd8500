#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "trustya/server/session.hpp"

namespace trustya::server {

struct ServerOptions {
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks an ephemeral port
  unsigned threads = 1;
};

// WebSocket endpoint at /ws plus the admin HTTP endpoints:
//   POST /sessions            body = create request, returns the new session summary
//   GET  /sessions            list of session summaries
//   GET  /sessions/{id}       one summary
//   GET  /sessions/{id}/log   event log as JSON lines
// All frames and timers of one session run on that session's strand.
class Server {
 public:
  Server(SessionManager& manager, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting. Returns the bound port.
  std::uint16_t start();
  // Blocks the calling thread running the I/O loop until stop().
  void run();
  // Runs the loop on `options.threads` background threads.
  void run_in_background();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trustya::server
