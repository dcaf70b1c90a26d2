#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "evl/service.hpp"

namespace evl {

struct ServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  /// Served at "/" alongside the API (the built UI bundle).
  std::optional<std::filesystem::path> static_dir;
  std::size_t threads = 8;
};

/// Serves a Service over HTTP/1.1.
class HttpServer {
 public:
  HttpServer(Service& service, ServerOptions options);
  ~HttpServer();

  /// Binds and returns the port; throws std::runtime_error on failure.
  int bind();
  /// Blocks until stop().
  void run();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace evl
