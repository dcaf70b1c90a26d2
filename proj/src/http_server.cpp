#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "evl/http_server.hpp"

namespace evl {

struct HttpServer::Impl {
  Service& service;
  ServerOptions options;
  httplib::Server server;
  int port = -1;

  Impl(Service& s, ServerOptions o) : service(s), options(std::move(o)) {}

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    api.body = req.body;
    for (const auto& [k, v] : req.params) api.query.emplace(k, v);
    const auto out = service.handle(api);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (out.status != 204) res.set_content(out.body, out.content_type);
  }
};

HttpServer::HttpServer(Service& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto& srv = impl_->server;
  const auto threads = impl_->options.threads;
  srv.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  if (impl_->options.static_dir && !srv.set_mount_point("/", impl_->options.static_dir->string())) {
    throw std::runtime_error("static dir not found: " + impl_->options.static_dir->string());
  }
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->dispatch(req, res); };
  srv.Get(".*", handler);
  srv.Post(".*", handler);
  srv.Delete(".*", handler);
  srv.Put(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else {
    impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
  }
  if (impl_->port < 0) throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(o.port));
  return impl_->port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace evl
