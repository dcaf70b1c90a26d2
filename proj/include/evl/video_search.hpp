#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "evl/subtitle.hpp"
#include "evl/transport.hpp"

namespace evl {

inline constexpr std::size_t kDefaultMaxResults = 10;

struct VideoMeta {
  std::string video_id;
  std::string title;
  Millis duration_ms = 0;
  std::string thumbnail_ref;
  bool has_captions = false;
  std::string description;

  friend bool operator==(const VideoMeta&, const VideoMeta&) = default;
};

nlohmann::ordered_json video_meta_json(const VideoMeta& v);

struct SearchQuery {
  std::string keyword;
  std::size_t max_results = kDefaultMaxResults;
  /// Name of the environment variable holding the platform key.
  std::string api_key_ref = "EVL_YOUTUBE_API_KEY";
  bool captions_only = true;

  /// Throws std::invalid_argument unless the keyword is non-blank and
  /// 1 <= max_results <= 50.
  void validate() const;
};

class SearchError : public std::runtime_error {
 public:
  enum class Kind { auth_failure, quota_exceeded, network_failure, no_caption_track, not_found, bad_response };

  SearchError(Kind kind, const std::string& detail);

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view search_error_name(SearchError::Kind kind);

struct CaptionDocument {
  std::string body;
  SubtitleFormat format = SubtitleFormat::vtt;
};

/// ISO 8601 duration ("PT1H2M3.5S", "P1DT2H") to milliseconds.
std::optional<Millis> parse_iso8601_duration(std::string_view s);

/// Thread-safe token bucket: `rate` tokens per second, holding at most `burst`.
class TokenBucket {
 public:
  TokenBucket(double rate_per_second, double burst);

  void acquire();
  bool try_acquire();

 private:
  void refill();

  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

class VideoClient {
 public:
  virtual ~VideoClient() = default;

  /// Keyword -> ids -> per-id metadata, in platform relevance order.
  virtual std::vector<VideoMeta> search(const SearchQuery& query) = 0;
  virtual VideoMeta video(const std::string& video_id) = 0;
  virtual CaptionDocument fetch_captions(const std::string& video_id) = 0;
};

/// YouTube Data API v3 client. Requests go through a Transport, so the same
/// class serves live and replay runs.
class YouTubeClient final : public VideoClient {
 public:
  YouTubeClient(std::shared_ptr<Transport> transport, std::string api_key,
                std::shared_ptr<TokenBucket> limiter = nullptr);

  std::vector<VideoMeta> search(const SearchQuery& query) override;
  VideoMeta video(const std::string& video_id) override;
  CaptionDocument fetch_captions(const std::string& video_id) override;

  static std::string search_key(const SearchQuery& query);

 private:
  HttpResponse send(HttpRequest req);

  std::shared_ptr<Transport> transport_;
  std::string api_key_;
  std::shared_ptr<TokenBucket> limiter_;
};

/// Extracts the first usable item from a videos.list response body; nullopt
/// if the item is missing or violates VideoMeta invariants.
std::optional<VideoMeta> parse_video_item(const nlohmann::json& item);

}  // namespace evl
