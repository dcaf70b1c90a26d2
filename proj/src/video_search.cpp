#include "evl/video_search.hpp"

#include <cmath>
#include <thread>

#include "evl/text.hpp"

namespace evl {

namespace {

constexpr const char* kApiBase = "https://www.googleapis.com/youtube/v3/";

SearchError error_for_status(const HttpResponse& res, const std::string& what) {
  const std::string detail = what + ": HTTP " + std::to_string(res.status);
  if (res.status == 429) return {SearchError::Kind::quota_exceeded, detail};
  if (res.status == 403 && (res.body.find("quotaExceeded") != std::string::npos ||
                            res.body.find("rateLimitExceeded") != std::string::npos)) {
    return {SearchError::Kind::quota_exceeded, detail};
  }
  if (res.status == 401 || res.status == 403 ||
      (res.status == 400 && res.body.find("keyInvalid") != std::string::npos)) {
    return {SearchError::Kind::auth_failure, detail};
  }
  if (res.status == 404) return {SearchError::Kind::not_found, detail};
  if (res.status >= 500) return {SearchError::Kind::network_failure, detail};
  return {SearchError::Kind::bad_response, detail};
}

nlohmann::json parse_body(const HttpResponse& res, const std::string& what) {
  try {
    return nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::exception& e) {
    throw SearchError(SearchError::Kind::bad_response, what + ": " + e.what());
  }
}

std::string string_at(const nlohmann::json& j, std::initializer_list<const char*> path) {
  const nlohmann::json* cur = &j;
  for (const char* key : path) {
    if (!cur->is_object()) return {};
    const auto it = cur->find(key);
    if (it == cur->end()) return {};
    cur = &*it;
  }
  return cur->is_string() ? cur->get<std::string>() : std::string{};
}

}  // namespace

nlohmann::ordered_json video_meta_json(const VideoMeta& v) {
  return {{"video_id", v.video_id},         {"title", v.title},
          {"duration_ms", v.duration_ms},   {"thumbnail_ref", v.thumbnail_ref},
          {"has_captions", v.has_captions}, {"description", v.description}};
}

void SearchQuery::validate() const {
  if (text::is_blank(keyword)) throw std::invalid_argument("search keyword is blank");
  if (max_results < 1 || max_results > 50) throw std::invalid_argument("max_results must be in [1, 50]");
}

SearchError::SearchError(Kind kind, const std::string& detail)
    : std::runtime_error(std::string(search_error_name(kind)) + ": " + detail), kind_(kind) {}

std::string_view search_error_name(SearchError::Kind kind) {
  switch (kind) {
    case SearchError::Kind::auth_failure: return "AuthFailure";
    case SearchError::Kind::quota_exceeded: return "QuotaExceeded";
    case SearchError::Kind::network_failure: return "NetworkFailure";
    case SearchError::Kind::no_caption_track: return "NoCaptionTrack";
    case SearchError::Kind::not_found: return "NotFound";
    case SearchError::Kind::bad_response: return "BadResponse";
  }
  return "SearchError";
}

std::optional<Millis> parse_iso8601_duration(std::string_view s) {
  if (s.empty() || s.front() != 'P') return std::nullopt;
  s.remove_prefix(1);
  bool in_time = false;
  bool any = false;
  double total_seconds = 0;
  while (!s.empty()) {
    if (s.front() == 'T') {
      if (in_time) return std::nullopt;
      in_time = true;
      s.remove_prefix(1);
      continue;
    }
    std::size_t i = 0;
    while (i < s.size() && ((s[i] >= '0' && s[i] <= '9') || s[i] == '.')) ++i;
    if (i == 0 || i == s.size()) return std::nullopt;
    const std::string number(s.substr(0, i));
    if (number.find('.') != number.rfind('.')) return std::nullopt;
    const double value = std::stod(number);
    const char unit = s[i];
    s.remove_prefix(i + 1);
    double scale = 0;
    if (!in_time && unit == 'W') scale = 7 * 86400.0;
    else if (!in_time && unit == 'D') scale = 86400.0;
    else if (in_time && unit == 'H') scale = 3600.0;
    else if (in_time && unit == 'M') scale = 60.0;
    else if (in_time && unit == 'S') scale = 1.0;
    else return std::nullopt;
    total_seconds += value * scale;
    any = true;
  }
  if (!any) return std::nullopt;
  return static_cast<Millis>(std::llround(total_seconds * 1000.0));
}

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(std::max(1.0, burst)), tokens_(burst_), last_(std::chrono::steady_clock::now()) {
  if (rate_ <= 0) throw std::invalid_argument("token bucket rate must be positive");
}

void TokenBucket::refill() {
  const auto now = std::chrono::steady_clock::now();
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
  last_ = now;
}

bool TokenBucket::try_acquire() {
  std::lock_guard lock(mutex_);
  refill();
  if (tokens_ < 1.0) return false;
  tokens_ -= 1.0;
  return true;
}

void TokenBucket::acquire() {
  while (true) {
    double wait_seconds = 0;
    {
      std::lock_guard lock(mutex_);
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait_seconds = (1.0 - tokens_) / rate_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_seconds));
  }
}

std::optional<VideoMeta> parse_video_item(const nlohmann::json& item) {
  if (!item.is_object()) return std::nullopt;
  VideoMeta v;
  const auto id = item.find("id");
  if (id != item.end() && id->is_string()) v.video_id = id->get<std::string>();
  if (text::is_blank(v.video_id)) return std::nullopt;
  v.title = string_at(item, {"snippet", "title"});
  v.description = string_at(item, {"snippet", "description"});
  for (const char* size : {"medium", "high", "default"}) {
    v.thumbnail_ref = string_at(item, {"snippet", "thumbnails", size, "url"});
    if (!v.thumbnail_ref.empty()) break;
  }
  const auto duration = parse_iso8601_duration(string_at(item, {"contentDetails", "duration"}));
  v.duration_ms = duration && *duration >= 0 ? *duration : 0;
  v.has_captions = string_at(item, {"contentDetails", "caption"}) == "true";
  return v;
}

YouTubeClient::YouTubeClient(std::shared_ptr<Transport> transport, std::string api_key,
                             std::shared_ptr<TokenBucket> limiter)
    : transport_(std::move(transport)), api_key_(std::move(api_key)), limiter_(std::move(limiter)) {}

HttpResponse YouTubeClient::send(HttpRequest req) {
  req.source = "youtube";
  if (limiter_) limiter_->acquire();
  try {
    return transport_->send(req);
  } catch (const TransportError& e) {
    throw SearchError(SearchError::Kind::network_failure, e.what());
  }
}

std::string YouTubeClient::search_key(const SearchQuery& query) {
  return "search:" + text::normalize(query.keyword) + "|" + std::to_string(query.max_results);
}

std::vector<VideoMeta> YouTubeClient::search(const SearchQuery& query) {
  query.validate();
  HttpRequest req;
  req.request_key = search_key(query);
  req.url = std::string(kApiBase) + "search?part=id&type=video&maxResults=" + std::to_string(query.max_results) +
            "&q=" + url_encode(text::collapse_whitespace(query.keyword)) + "&key=" + url_encode(api_key_);
  const auto res = send(req);
  if (res.status != 200) throw error_for_status(res, "search");
  const auto doc = parse_body(res, "search");

  std::vector<std::string> ids;
  if (const auto items = doc.find("items"); items != doc.end() && items->is_array()) {
    for (const auto& item : *items) {
      const auto id = string_at(item, {"id", "videoId"});
      if (!text::is_blank(id)) ids.push_back(id);
    }
  }

  std::vector<VideoMeta> out;
  for (const auto& id : ids) {
    if (out.size() == query.max_results) break;
    VideoMeta meta;
    try {
      meta = video(id);
    } catch (const SearchError& e) {
      if (e.kind() == SearchError::Kind::not_found) continue;
      throw;
    }
    if (query.captions_only && !meta.has_captions) continue;
    out.push_back(std::move(meta));
  }
  return out;
}

VideoMeta YouTubeClient::video(const std::string& video_id) {
  HttpRequest req;
  req.request_key = "videos:" + video_id;
  req.url = std::string(kApiBase) + "videos?part=snippet,contentDetails&id=" + url_encode(video_id) +
            "&key=" + url_encode(api_key_);
  const auto res = send(req);
  if (res.status != 200) throw error_for_status(res, "videos " + video_id);
  const auto doc = parse_body(res, "videos " + video_id);
  if (const auto items = doc.find("items"); items != doc.end() && items->is_array()) {
    for (const auto& item : *items) {
      auto meta = parse_video_item(item);
      if (meta && meta->video_id == video_id) return *meta;
    }
  }
  throw SearchError(SearchError::Kind::not_found, "no video " + video_id);
}

CaptionDocument YouTubeClient::fetch_captions(const std::string& video_id) {
  const auto meta = video(video_id);
  if (!meta.has_captions) throw SearchError(SearchError::Kind::no_caption_track, video_id);
  HttpRequest req;
  req.request_key = "captions:" + video_id;
  req.url = "https://www.youtube.com/api/timedtext?lang=en&fmt=vtt&v=" + url_encode(video_id);
  const auto res = send(req);
  if (res.status == 404 || (res.status == 200 && text::is_blank(res.body))) {
    throw SearchError(SearchError::Kind::no_caption_track, video_id);
  }
  if (res.status != 200) throw error_for_status(res, "captions " + video_id);

  SubtitleFormat format = sniff_format(res.body);
  const std::string type = text::ascii_lower(res.content_type);
  if (type.find("vtt") != std::string::npos) format = SubtitleFormat::vtt;
  else if (type.find("subrip") != std::string::npos || type.find("srt") != std::string::npos) format = SubtitleFormat::srt;
  return {res.body, format};
}

}  // namespace evl
