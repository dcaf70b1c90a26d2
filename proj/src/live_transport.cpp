#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "evl/transport.hpp"

namespace evl {

HttpResponse LiveTransport::send(const HttpRequest& request) {
  const auto [origin, path] = split_url(request.url);
  httplib::Client client(origin);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_follow_location(true);

  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  httplib::Result result;
  if (request.method == "POST") {
    result = client.Post(path, headers, request.body, request.content_type);
  } else if (request.method == "DELETE") {
    result = client.Delete(path, headers);
  } else if (request.method == "GET") {
    result = client.Get(path, headers);
  } else {
    throw TransportError(request.source + ": unsupported method " + request.method);
  }
  if (!result) {
    throw TransportError(request.source + ": " + httplib::to_string(result.error()));
  }
  return {result->status, result->body, result->get_header_value("Content-Type")};
}

}  // namespace evl
