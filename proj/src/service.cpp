#include "evl/service.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <regex>
#include <set>

#include "evl/smart_titles.hpp"
#include "evl/text.hpp"

namespace evl {

namespace {

using ojson = nlohmann::ordered_json;

class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, std::string detail = {}, ojson extra = ojson::object())
      : std::runtime_error(code), status_(status), code_(std::move(code)), detail_(std::move(detail)),
        extra_(std::move(extra)) {}

  ApiResponse response() const {
    ojson j;
    j["error"] = code_;
    if (!detail_.empty()) j["detail"] = detail_;
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    ApiResponse r;
    r.status = status_;
    r.body = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    if (status_ == 503) r.headers.emplace_back("Retry-After", "30");
    return r;
  }

 private:
  int status_;
  std::string code_;
  std::string detail_;
  ojson extra_;
};

ApiResponse json_response(const ojson& j, int status = 200) {
  ApiResponse r;
  r.status = status;
  r.body = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  return r;
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start < path.size()) {
    const auto slash = path.find('/', start);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

bool valid_video_id(const std::string& id) {
  static const std::regex pattern("[A-Za-z0-9_-]{1,64}");
  return std::regex_match(id, pattern);
}

template <typename T>
std::optional<T> to_number(std::string_view s) {
  T out{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (s.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s, bool plus_as_space) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (plus_as_space && s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size() && hex_value(s[i + 1]) >= 0 && hex_value(s[i + 2]) >= 0) {
      out += static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

ApiError upstream_error(const SearchError& e) {
  switch (e.kind()) {
    case SearchError::Kind::quota_exceeded: return {429, "quota_exceeded", e.what()};
    case SearchError::Kind::not_found: return {404, "not_found", e.what()};
    case SearchError::Kind::no_caption_track: return {422, "no_caption_track", e.what()};
    default: return {502, "upstream_failure", e.what()};
  }
}

ApiError replay_error(const ReplayMiss& e) {
  return {502, "replay_miss", "", ojson{{"source", e.source()}, {"request_key", e.request_key()}}};
}

}  // namespace

struct Service::VideoState {
  VideoMeta meta;
  std::vector<SubtitleCue> cues;
  std::vector<SubtitleSegment> segments;
  std::vector<SmartTitle> smart_titles;
  double relevance = 0;
  std::optional<CueIndex> index;
};

Service::Service(SessionConfig config, Pipeline pipeline, std::shared_ptr<NotesStore> notes,
                 std::shared_ptr<PolicyHolder> policy)
    : config_(std::move(config)),
      fingerprint_(config_.fingerprint()),
      pipeline_(std::move(pipeline)),
      notes_(std::move(notes)),
      policy_(std::move(policy)) {
  config_.validate();
}

std::unique_ptr<Service> Service::create(const SessionConfig& config, bool record) {
  SafetyPolicy policy;
  if (config.safety_policy) policy = SafetyPolicy::load(*config.safety_policy);
  return std::make_unique<Service>(config, make_pipeline(config, record), std::make_shared<NotesStore>(config.notes_db),
                                   std::make_shared<PolicyHolder>(std::move(policy)));
}

void Service::set_request_log(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(log_mutex_);
  log_ = std::move(sink);
}

ServiceStats Service::stats() const {
  return {video_hits_.load(), video_misses_.load(), graph_hits_.load(), graph_misses_.load()};
}

ApiResponse Service::handle(const ApiRequest& request) {
  const auto started = std::chrono::steady_clock::now();
  ApiResponse response;
  try {
    response = route(request);
  } catch (const ApiError& e) {
    response = e.response();
  } catch (const std::exception& e) {
    response = ApiError(500, "internal_error", e.what()).response();
  }
  std::function<void(const std::string&)> sink;
  {
    std::lock_guard lock(log_mutex_);
    sink = log_;
  }
  if (sink) {
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
    ojson line{{"method", request.method},
               {"path", request.path},
               {"status", response.status},
               {"bytes", response.body.size()},
               {"duration_ms", std::round(elapsed.count() * 1000) / 1000}};
    std::lock_guard lock(log_mutex_);
    sink(line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  }
  return response;
}

ApiResponse Service::route(const ApiRequest& request) {
  const auto parts = split_path(request.path);
  const auto& m = request.method;
  auto only = [&](const char* method) {
    if (m != method) throw ApiError(405, "method_not_allowed", m + " " + request.path);
  };

  if (parts.size() == 1 && parts[0] == "health") {
    only("GET");
    return json_response({{"status", "ok"}, {"config", fingerprint_}});
  }
  if (parts.size() == 1 && parts[0] == "search") {
    only("GET");
    return search(request);
  }
  if (parts.size() >= 2 && parts[0] == "video") {
    const auto& id = parts[1];
    if (!valid_video_id(id)) throw ApiError(404, "not_found", "malformed video id");
    if (parts.size() == 2) {
      only("GET");
      return video(id);
    }
    if (parts.size() == 5 && parts[2] == "segment" && parts[4] == "graph") {
      only("GET");
      return graph(id, parts[3]);
    }
    if (parts.size() == 3 && parts[2] == "cue_at") {
      only("GET");
      return cue_at(id, request);
    }
    if (parts.size() == 3 && parts[2] == "notes") {
      if (m == "GET") return list_notes(id);
      if (m == "POST") return add_note(id, request.body);
      throw ApiError(405, "method_not_allowed", m + " " + request.path);
    }
    if (parts.size() == 4 && parts[2] == "notes") {
      only("DELETE");
      return delete_note(id, parts[3]);
    }
  }
  throw ApiError(404, "not_found", "no route for " + request.path);
}

ApiResponse Service::search(const ApiRequest& request) {
  SearchQuery q;
  const auto qit = request.query.find("q");
  q.keyword = qit == request.query.end() ? "" : qit->second;
  if (text::is_blank(q.keyword)) throw ApiError(400, "bad_request", "q must be a non-blank keyword");
  q.max_results = config_.max_results;
  if (const auto nit = request.query.find("n"); nit != request.query.end()) {
    const auto n = to_number<std::size_t>(nit->second);
    if (!n || *n < 1 || *n > 50) throw ApiError(400, "bad_request", "n must be an integer in [1, 50]");
    q.max_results = *n;
  }

  std::vector<VideoMeta> results;
  try {
    results = pipeline_.videos->search(q);
  } catch (const SearchError& e) {
    throw upstream_error(e);
  } catch (const ReplayMiss& e) {
    throw replay_error(e);
  }

  const auto policy = policy_->get();
  auto out = ojson::array();
  for (auto& v : results) {
    if (policy->enabled()) {
      const std::string masked = redact_text(v.title, *policy);
      if (masked != v.title && policy->action == SafetyAction::exclude) continue;
      v.title = masked;
    }
    out.push_back({{"video_id", v.video_id},
                   {"title", v.title},
                   {"duration_ms", v.duration_ms},
                   {"thumbnail_ref", v.thumbnail_ref}});
  }
  return json_response(out);
}

std::shared_ptr<const Service::VideoState> Service::video_state(const std::string& id) {
  const std::string key = id + "|" + fingerprint_;
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = videos_.find(key); it != videos_.end()) {
      ++video_hits_;
      return it->second;
    }
  }
  ++video_misses_;

  auto state = std::make_shared<VideoState>();
  CaptionDocument doc;
  try {
    state->meta = pipeline_.videos->video(id);
    doc = pipeline_.videos->fetch_captions(id);
  } catch (const SearchError& e) {
    throw upstream_error(e);
  } catch (const ReplayMiss& e) {
    // In replay mode an unrecorded id is indistinguishable from an unknown one.
    if (e.request_key() == "videos:" + id) throw ApiError(404, "not_found", "unknown video " + id);
    throw replay_error(e);
  }
  try {
    state->cues = parse_subtitle(doc.body, doc.format);
  } catch (const SubtitleError& e) {
    throw ApiError(422, "caption_parse_error", e.what(), ojson{{"line", e.line()}});
  }

  state->segments = segment_cues(state->cues, config_.gap_threshold_ms);
  for (auto& s : state->segments) s.title = title_segment(segment_text(state->cues, s));
  std::vector<std::string> texts;
  texts.reserve(state->cues.size());
  for (const auto& c : state->cues) texts.push_back(c.text);
  state->smart_titles = extract_topics(text::join(texts, "\n"), config_.top_n_topics);
  state->relevance = relevance_check(state->meta.title, state->smart_titles);
  state->index.emplace(state->cues);

  std::lock_guard lock(cache_mutex_);
  const auto [it, inserted] = videos_.emplace(key, std::move(state));
  return it->second;
}

CleanVideoView Service::screened_view(const VideoState& state, const SafetyPolicy& policy) const {
  auto view = project_clean(state.meta, state.cues, state.segments, state.smart_titles);
  const auto verdict = safety_screen(view, policy);
  switch (verdict.outcome) {
    case ScreenVerdict::Outcome::excluded:
      throw ApiError(451, "safety_excluded", "", ojson{{"category", verdict.category}});
    case ScreenVerdict::Outcome::redacted: return *verdict.view;
    case ScreenVerdict::Outcome::pass: break;
  }
  return view;
}

ApiResponse Service::video(const std::string& id) {
  const auto state = video_state(id);
  const auto policy = policy_->get();
  auto j = clean_view_json(screened_view(*state, *policy));
  j["relevance"] = state->relevance;
  j["relevant"] = state->relevance >= config_.relevance_threshold;
  return json_response(j);
}

std::shared_ptr<const EntityGraph> Service::segment_graph(const std::string& id, const VideoState& state,
                                                          std::size_t k) {
  const std::string key = id + "|" + std::to_string(k) + "|" + fingerprint_;
  {
    std::lock_guard lock(cache_mutex_);
    if (const auto it = graphs_.find(key); it != graphs_.end()) {
      ++graph_hits_;
      return it->second;
    }
  }
  ++graph_misses_;

  const auto& seg = state.segments[k];
  std::vector<EntityAnnotation> anns;
  try {
    anns = annotate_cues(std::span(state.cues).subspan(seg.first_cue, seg.cue_count), *pipeline_.annotator);
  } catch (const AnnotatorError& e) {
    const char* code = e.kind() == AnnotatorError::Kind::quota_exceeded ? "annotator_quota" : "annotator_unavailable";
    throw ApiError(503, code, e.detail());
  } catch (const ReplayMiss& e) {
    throw replay_error(e);
  }

  BundleMap bundles;
  try {
    for (const auto& a : anns) {
      const std::string name = text::normalize(a.lookup_name());
      if (bundles.contains(name)) continue;
      try {
        bundles.emplace(name, enrich(a.lookup_name(), config_.sources, pipeline_.knowledge, *pipeline_.cache,
                                     pipeline_.clock));
      } catch (const AllSourcesFailed&) {
        bundles.emplace(name, EnrichmentBundle{a.lookup_name(), {}});
      }
    }
  } catch (const ReplayMiss& e) {
    throw replay_error(e);
  }

  auto graph = std::make_shared<const EntityGraph>(build_graph(k, anns, bundles, config_.related_limit));
  std::lock_guard lock(cache_mutex_);
  const auto [it, inserted] = graphs_.emplace(key, std::move(graph));
  return it->second;
}

ApiResponse Service::graph(const std::string& id, const std::string& segment) {
  const auto k = to_number<std::size_t>(segment);
  if (!k) throw ApiError(404, "not_found", "segment must be a non-negative integer");
  const auto state = video_state(id);
  if (*k >= state->segments.size()) throw ApiError(404, "not_found", "no segment " + segment);
  const auto policy = policy_->get();
  screened_view(*state, *policy);

  auto g = *segment_graph(id, *state, *k);
  if (policy->enabled()) {
    for (auto& n : g.nodes) n.text = redact_text(n.text, *policy);
  }
  return json_response(serialize_graph(g));
}

ApiResponse Service::cue_at(const std::string& id, const ApiRequest& request) {
  const auto it = request.query.find("t");
  const auto t = it == request.query.end() ? std::nullopt : to_number<Millis>(it->second);
  if (!t) throw ApiError(400, "bad_request", "t must be an integer millisecond offset");
  const auto state = video_state(id);
  screened_view(*state, *policy_->get());
  const auto hit = state->index->at(*t);
  ojson j;
  j["cue_index"] = hit ? ojson(*hit) : ojson(nullptr);
  return json_response(j);
}

ApiResponse Service::list_notes(const std::string& id) {
  auto out = ojson::array();
  for (const auto& n : notes_->list(id)) out.push_back(note_json(n));
  return json_response(out);
}

ApiResponse Service::add_note(const std::string& id, const std::string& body) {
  if (body.size() > 4 * kMaxNoteBytes) throw ApiError(413, "payload_too_large", "request body too large");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw ApiError(400, "bad_request", "body must be a JSON object {t_ms, text}");
  }
  if (!doc.is_object() || doc.size() != 2 || !doc.contains("t_ms") || !doc.contains("text") ||
      !doc["t_ms"].is_number_integer() || !doc["text"].is_string()) {
    throw ApiError(400, "bad_request", "body must be a JSON object {t_ms, text}");
  }
  const auto t_ms = doc["t_ms"].get<Millis>();
  std::string note_text = text::sanitize_utf8(doc["text"].get<std::string>());
  if (t_ms < 0) throw ApiError(400, "bad_request", "t_ms must be non-negative");
  if (note_text.size() > kMaxNoteBytes) throw ApiError(413, "payload_too_large", "note text exceeds 4096 bytes");
  if (text::is_blank(note_text)) throw ApiError(400, "bad_request", "note text is blank");

  const auto policy = policy_->get();
  if (policy->enabled()) note_text = redact_text(note_text, *policy);
  return json_response(note_json(notes_->add(id, t_ms, note_text)), 201);
}

ApiResponse Service::delete_note(const std::string& id, const std::string& note_id) {
  const auto n = to_number<std::int64_t>(note_id);
  if (!n || !notes_->remove(id, *n)) throw ApiError(404, "not_found", "no note " + note_id);
  ApiResponse r;
  r.status = 204;
  return r;
}

ApiRequest parse_target(std::string method, std::string_view target, std::string body) {
  ApiRequest r;
  r.method = std::move(method);
  r.body = std::move(body);
  const auto qmark = target.find('?');
  r.path = percent_decode(target.substr(0, qmark), false);
  if (qmark == std::string_view::npos) return r;
  std::string_view rest = target.substr(qmark + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const auto pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (!pair.empty()) {
      r.query[percent_decode(pair.substr(0, eq), true)] =
          eq == std::string_view::npos ? std::string() : percent_decode(pair.substr(eq + 1), true);
    }
    if (amp == std::string_view::npos) break;
    rest.remove_prefix(amp + 1);
  }
  return r;
}

}  // namespace evl
