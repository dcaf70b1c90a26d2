// evl-serve --replay fixtures/service --port 8080
//
// SIGINT/SIGTERM stop the server (and save a --record capture); SIGHUP reloads
// the safety policy file.

#include <csignal>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "evl/http_server.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Clean-view learning service"};
  std::string config_file, replay_dir, record_dir, host = "127.0.0.1", static_dir, policy_file, notes_db;
  int port = 8080;
  std::size_t threads = 8;
  app.add_option("--config", config_file, "Session config JSON");
  auto* replay = app.add_option("--replay", replay_dir, "Serve from recorded fixtures");
  app.add_option("--record", record_dir, "Live run; save interactions here on shutdown")->excludes(replay);
  app.add_option("--host", host);
  app.add_option("--port", port)->check(CLI::Range(0, 65535));
  app.add_option("--threads", threads)->check(CLI::Range(1, 256));
  app.add_option("--static-dir", static_dir, "Built UI bundle served at /");
  app.add_option("--policy", policy_file, "Safety policy JSON");
  app.add_option("--notes-db", notes_db, "SQLite file for notes");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGHUP);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  evl::SessionConfig config;
  std::unique_ptr<evl::Service> service;
  const bool record = !record_dir.empty();
  try {
    if (!config_file.empty()) config = evl::SessionConfig::load(config_file);
    evl::apply_env(config);
    if (!replay_dir.empty()) {
      config.mode = evl::RunMode::replay;
      config.fixture_dir = replay_dir;
    } else if (record) {
      config.mode = evl::RunMode::live;
      config.fixture_dir = record_dir;
    }
    if (!policy_file.empty()) config.safety_policy = policy_file;
    if (!notes_db.empty()) config.notes_db = notes_db;
    config.validate();
    service = evl::Service::create(config, record);
  } catch (const std::exception& e) {
    std::cerr << "evl-serve: " << e.what() << "\n";
    return 2;
  }

  std::mutex log_mutex;
  service->set_request_log([&](const std::string& line) {
    std::lock_guard lock(log_mutex);
    std::cerr << line << "\n";
  });

  evl::ServerOptions options;
  options.host = host;
  options.port = port;
  options.threads = threads;
  if (!static_dir.empty()) options.static_dir = fs::path(static_dir);
  evl::HttpServer server(*service, options);
  int bound = 0;
  try {
    bound = server.bind();
  } catch (const std::exception& e) {
    std::cerr << "evl-serve: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "listening on http://" << host << ":" << bound << "\n";
  std::thread loop([&] { server.run(); });

  for (;;) {
    int sig = 0;
    sigwait(&signals, &sig);
    if (sig != SIGHUP) break;
    if (!config.safety_policy) continue;
    try {
      service->policy().reload(*config.safety_policy);
      std::cerr << "reloaded safety policy\n";
    } catch (const std::exception& e) {
      std::cerr << "policy reload failed, keeping the previous one: " << e.what() << "\n";
    }
  }
  server.stop();
  loop.join();

  if (record) {
    try {
      evl::save_recording(service->pipeline(), record_dir);
      std::cerr << "saved interactions to " << record_dir << "\n";
    } catch (const std::exception& e) {
      std::cerr << "evl-serve: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
