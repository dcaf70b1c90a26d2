#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evl/transport.hpp"

namespace evl {

/// Knowledge sources, in the one order used everywhere.
enum class Source { wikipedia = 0, dbpedia = 1, wolfram = 2 };

inline constexpr std::array<Source, 3> kAllSources = {Source::wikipedia, Source::dbpedia, Source::wolfram};

std::string_view source_name(Source s);
std::optional<Source> parse_source(std::string_view name);

class SourceSet {
 public:
  constexpr SourceSet() = default;
  constexpr SourceSet(std::initializer_list<Source> sources) {
    for (auto s : sources) insert(s);
  }
  static constexpr SourceSet all() { return {Source::wikipedia, Source::dbpedia, Source::wolfram}; }

  constexpr void insert(Source s) { bits_ |= bit(s); }
  constexpr void erase(Source s) { bits_ &= static_cast<unsigned>(~bit(s)); }
  constexpr bool contains(Source s) const { return (bits_ & bit(s)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }

  /// Members in fixed source order.
  std::vector<Source> members() const;

  friend constexpr bool operator==(SourceSet, SourceSet) = default;

 private:
  static constexpr unsigned bit(Source s) { return 1u << static_cast<unsigned>(s); }
  unsigned bits_ = 0;
};

using TimePoint = std::chrono::system_clock::time_point;
using Clock = std::function<TimePoint()>;

/// Wall clock; replay runs use a fixed clock so outputs are reproducible.
Clock system_clock();
Clock fixed_clock(TimePoint t);

struct OntologyRecord {
  std::string entity_surface;
  Source source = Source::wikipedia;
  std::string label;
  std::vector<std::string> synonyms;
  std::string description;
  std::optional<std::string> image_ref;
  TimePoint fetched_at{};

  /// The unit counted by coverage reports.
  bool non_empty() const;

  friend bool operator==(const OntologyRecord&, const OntologyRecord&) = default;
};

nlohmann::ordered_json record_json(const OntologyRecord& r);
OntologyRecord record_from_json(const nlohmann::json& j);

struct EnrichmentBundle {
  std::string entity_surface;
  /// At most one per source, in fixed source order. A source that answered
  /// "nothing known" contributes an empty record; a failed source is absent.
  std::vector<OntologyRecord> records;

  const OntologyRecord* find(Source s) const;

  friend bool operator==(const EnrichmentBundle&, const EnrichmentBundle&) = default;
};

nlohmann::ordered_json bundle_json(const EnrichmentBundle& b);

/// Reasons a single source lookup failed.
class SourceError : public std::runtime_error {
 public:
  enum class Kind { auth_failure, quota_exceeded, network_failure, bad_response };

  SourceError(Source source, Kind kind, const std::string& detail);

  Source source() const { return source_; }
  Kind kind() const { return kind_; }

 private:
  Source source_;
  Kind kind_;
};

class AllSourcesFailed : public std::runtime_error {
 public:
  explicit AllSourcesFailed(const std::string& surface, std::vector<std::string> reasons);

  const std::vector<std::string>& reasons() const { return reasons_; }

 private:
  std::vector<std::string> reasons_;
};

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds timeout{5000};
};

/// One knowledge source behind a Transport.
class KnowledgeClient {
 public:
  virtual ~KnowledgeClient() = default;

  virtual Source source() const = 0;

  /// Returns the record (possibly empty) or throws SourceError / ReplayMiss.
  virtual OntologyRecord lookup(std::string_view surface, TimePoint now) = 0;
};

/// HTTP-backed client for Wikipedia (MediaWiki action API, redirects as synonyms),
/// DBpedia Lookup, or the Wolfram|Alpha short-answer API. The fixture
/// request key is the normalized surface.
class HttpKnowledgeClient final : public KnowledgeClient {
 public:
  HttpKnowledgeClient(Source source, std::shared_ptr<Transport> transport, std::string api_key = {},
                      RetryPolicy retry = {});

  Source source() const override { return source_; }
  OntologyRecord lookup(std::string_view surface, TimePoint now) override;

 private:
  HttpResponse fetch(const HttpRequest& req);
  HttpRequest make_request(const std::string& key, std::string_view surface) const;

  Source source_;
  std::shared_ptr<Transport> transport_;
  std::string api_key_;
  RetryPolicy retry_;
};

/// Interprets a source's raw response body. Status 404 (and 501 for Wolfram)
/// means nothing is known and yields an empty record.
OntologyRecord parse_source_response(Source source, std::string_view surface, const HttpResponse& res,
                                     TimePoint now);

/// Up to one client per source; a missing client means the source is disabled.
struct ClientSet {
  std::array<std::shared_ptr<KnowledgeClient>, 3> clients;

  KnowledgeClient* get(Source s) const { return clients[static_cast<std::size_t>(s)].get(); }
  void set(std::shared_ptr<KnowledgeClient> c) {
    const auto s = c->source();
    clients[static_cast<std::size_t>(s)] = std::move(c);
  }
  SourceSet enabled() const;
};

/// Clients for every source answering from one transport (typically replay).
ClientSet client_set_for(std::shared_ptr<Transport> transport, RetryPolicy retry = {});

/// Live clients. Wikipedia and DBpedia need no key; Wolfram reads its app id
/// from EVL_WOLFRAM_APPID and is disabled when that is unset.
ClientSet live_client_set(std::shared_ptr<Transport> transport, RetryPolicy retry = {});

/// Per-(source, normalized surface) record cache. With a directory it keeps
/// one JSON file per key; without one it is memory-only. Thread-safe.
class EnrichmentCache {
 public:
  explicit EnrichmentCache(std::optional<std::filesystem::path> dir = std::nullopt,
                           std::chrono::seconds ttl = std::chrono::hours(24 * 7));

  std::optional<OntologyRecord> get(Source source, const std::string& key, TimePoint now);
  void put(Source source, const std::string& key, const OntologyRecord& record);

  std::filesystem::path file_for(Source source, const std::string& key) const;

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  /// Number of enrich() calls answered without any external request.
  std::size_t bundle_hits() const { return bundle_hits_.load(); }
  void note_bundle_hit() { ++bundle_hits_; }

 private:
  std::optional<std::filesystem::path> dir_;
  std::chrono::seconds ttl_;
  std::mutex mutex_;
  std::map<std::pair<Source, std::string>, OntologyRecord> memory_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> bundle_hits_{0};
};

/// Looks up one entity in every requested, enabled source. Cached records
/// are used first; missing ones are fetched concurrently.
EnrichmentBundle enrich(std::string_view entity_surface, SourceSet sources, const ClientSet& clients,
                        EnrichmentCache& cache, const Clock& clock = system_clock());

/// Case-insensitively deduplicated synonyms across sources (source order, then
/// original order), never including the entity surface, truncated to `limit`.
std::vector<std::string> merge_related(const EnrichmentBundle& bundle, std::size_t limit);

}  // namespace evl
