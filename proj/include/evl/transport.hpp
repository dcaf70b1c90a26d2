#pragma once

// Every external API call goes through a Transport. Live transports speak
// HTTP; the replay transport answers from a recorded fixture so tests and CI
// never touch the network.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evl {

struct HttpRequest {
  /// Logical API the request belongs to ("youtube", "wikipedia", ...).
  std::string source;
  /// Stable, credential-free identity of the request within its source. This
  /// is the fixture lookup key.
  std::string request_key;
  std::string method = "GET";
  std::string url;
  std::string body;
  std::string content_type;
  std::vector<std::pair<std::string, std::string>> headers;
  std::chrono::milliseconds timeout{5000};
};

struct HttpResponse {
  /// 0 means no HTTP response was received (connect failure, timeout).
  int status = 0;
  std::string body;
  std::string content_type;
};

/// Connection-level failure: nothing came back.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayMiss : public std::runtime_error {
 public:
  ReplayMiss(std::string source, std::string request_key);

  const std::string& source() const { return source_; }
  const std::string& request_key() const { return request_key_; }

 private:
  std::string source_;
  std::string request_key_;
};

class Transport {
 public:
  virtual ~Transport() = default;

  /// Throws TransportError when no response arrives, ReplayMiss in replay mode.
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// One recorded interaction.
struct FixtureEntry {
  std::string source;
  std::string request_key;
  int status = 0;
  std::string response_body;
  std::string content_type;  // optional on disk

  friend bool operator==(const FixtureEntry&, const FixtureEntry&) = default;
};

/// A set of recorded interactions. On disk: JSON array of
/// {source, request_key, status, response_body[, content_type]}.
class Fixture {
 public:
  Fixture() = default;
  explicit Fixture(std::vector<FixtureEntry> entries);

  static Fixture load(const std::filesystem::path& file);
  /// Loads `<dir>/interactions.json`; a missing file yields an empty fixture.
  static Fixture load_dir(const std::filesystem::path& dir);

  void save(const std::filesystem::path& file) const;
  std::string to_json_text() const;

  /// Later entries with the same (source, request_key) replace earlier ones.
  void add(FixtureEntry entry);
  const FixtureEntry* find(const std::string& source, const std::string& request_key) const;

  const std::vector<FixtureEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<FixtureEntry> entries_;
  std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(Fixture fixture);

  HttpResponse send(const HttpRequest& request) override;

  std::size_t request_count() const { return requests_.load(); }

 private:
  Fixture fixture_;
  std::atomic<std::size_t> requests_{0};
};

/// Forwards to another transport and keeps every interaction for saving.
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(std::shared_ptr<Transport> inner);

  HttpResponse send(const HttpRequest& request) override;

  Fixture fixture() const;

 private:
  std::shared_ptr<Transport> inner_;
  mutable std::mutex mutex_;
  Fixture recorded_;
};

/// Real HTTP(S) client. Connection failures and timeouts raise TransportError.
class LiveTransport : public Transport {
 public:
  HttpResponse send(const HttpRequest& request) override;
};

/// Splits "https://host:port/path?q" into ("https://host:port", "/path?q").
std::pair<std::string, std::string> split_url(const std::string& url);

std::string url_encode(std::string_view s);

}  // namespace evl
