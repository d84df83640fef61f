#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "hhrl/service/session_service.hpp"

namespace hhrl {

struct HttpOptions {
  std::string bind = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // How often idle sessions are swept.
  std::chrono::milliseconds sweep_interval = std::chrono::seconds(1);
};

// REST + Server-Sent Events front end for a SessionService. The routes and
// payloads are described in docs/service-api.md.
class HttpServer {
 public:
  HttpServer(SessionService& service, HttpOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds the listening socket. Throws IoError if the address is unavailable.
  // Returns the bound port.
  int bind();
  // Serves until stop(). Requires bind().
  void run();
  // Safe to call from another thread or a signal-watching thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hhrl
