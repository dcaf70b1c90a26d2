#include "evl/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "evl/text.hpp"

namespace evl {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kKnownKeys = {
    "gap_threshold_ms", "top_n_topics", "related_limit", "min_confidence", "relevance_threshold",
    "max_results",      "safety_policy", "sources",      "mode",           "fixture_dir",
    "cache_dir",        "notes_db",      "annotator",    "gazetteer",      "youtube_rate_per_second",
    "replay_epoch"};

template <typename T>
T parse_number(const std::string& name, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument(name + ": not a number: '" + value + "'");
  return out;
}

SourceSet parse_sources(const std::vector<std::string>& names) {
  SourceSet set;
  for (const auto& n : names) {
    const auto s = parse_source(text::normalize(n));
    if (!s) throw std::invalid_argument("unknown source '" + n + "'");
    set.insert(*s);
  }
  return set;
}

RunMode parse_mode(const std::string& s) {
  if (s == "live") return RunMode::live;
  if (s == "replay") return RunMode::replay;
  throw std::invalid_argument("mode must be 'live' or 'replay', got '" + s + "'");
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (text::is_blank(s)) return std::nullopt;
  return fs::path(s);
}

std::string path_text(const std::optional<fs::path>& p) { return p ? p->string() : std::string(); }

}  // namespace

void SessionConfig::validate() const {
  if (gap_threshold_ms <= 0) throw std::invalid_argument("gap_threshold_ms must be positive");
  if (top_n_topics == 0) throw std::invalid_argument("top_n_topics must be positive");
  if (related_limit == 0) throw std::invalid_argument("related_limit must be positive");
  if (!(min_confidence > 0 && min_confidence <= 1)) throw std::invalid_argument("min_confidence must be in (0, 1]");
  if (!(relevance_threshold > 0 && relevance_threshold <= 1)) {
    throw std::invalid_argument("relevance_threshold must be in (0, 1]");
  }
  if (max_results < 1 || max_results > 50) throw std::invalid_argument("max_results must be in [1, 50]");
  if (sources.empty()) throw std::invalid_argument("at least one knowledge source is required");
  if (!(youtube_rate_per_second > 0)) throw std::invalid_argument("youtube_rate_per_second must be positive");
  if (replay_epoch <= 0) throw std::invalid_argument("replay_epoch must be positive");
  if (mode == RunMode::replay && !fixture_dir) throw std::invalid_argument("replay mode needs fixture_dir");
  if (annotator != "gazetteer" && annotator != "textrazor") {
    throw std::invalid_argument("annotator must be 'gazetteer' or 'textrazor'");
  }
}

std::string SessionConfig::fingerprint() const {
  nlohmann::ordered_json j = config_json(*this);
  j.erase("cache_dir");
  j.erase("notes_db");
  j.erase("youtube_rate_per_second");
  return text::hex64(text::fnv1a64(j.dump()), 12);
}

SessionConfig SessionConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!kKnownKeys.contains(k)) throw std::invalid_argument("unknown config key '" + k + "'");
  }
  SessionConfig c;
  try {
    if (doc.contains("gap_threshold_ms")) c.gap_threshold_ms = doc["gap_threshold_ms"].get<Millis>();
    if (doc.contains("top_n_topics")) c.top_n_topics = doc["top_n_topics"].get<std::size_t>();
    if (doc.contains("related_limit")) c.related_limit = doc["related_limit"].get<std::size_t>();
    if (doc.contains("min_confidence")) c.min_confidence = doc["min_confidence"].get<double>();
    if (doc.contains("relevance_threshold")) c.relevance_threshold = doc["relevance_threshold"].get<double>();
    if (doc.contains("max_results")) c.max_results = doc["max_results"].get<std::size_t>();
    if (doc.contains("safety_policy")) c.safety_policy = optional_path(doc["safety_policy"].get<std::string>());
    if (doc.contains("sources")) c.sources = parse_sources(doc["sources"].get<std::vector<std::string>>());
    if (doc.contains("mode")) c.mode = parse_mode(doc["mode"].get<std::string>());
    if (doc.contains("fixture_dir")) c.fixture_dir = optional_path(doc["fixture_dir"].get<std::string>());
    if (doc.contains("cache_dir")) c.cache_dir = optional_path(doc["cache_dir"].get<std::string>());
    if (doc.contains("notes_db")) c.notes_db = optional_path(doc["notes_db"].get<std::string>());
    if (doc.contains("annotator")) c.annotator = doc["annotator"].get<std::string>();
    if (doc.contains("gazetteer")) c.gazetteer = optional_path(doc["gazetteer"].get<std::string>());
    if (doc.contains("youtube_rate_per_second")) c.youtube_rate_per_second = doc["youtube_rate_per_second"].get<double>();
    if (doc.contains("replay_epoch")) c.replay_epoch = doc["replay_epoch"].get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

SessionConfig SessionConfig::load(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config " + file.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + file.string() + ": " + e.what());
  }
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env(SessionConfig& c, const EnvLookup& env) {
  auto with = [&](const char* name, auto&& apply) {
    if (auto v = env(name); v && !text::is_blank(*v)) apply(std::string(text::trim(*v)));
  };
  with("EVL_GAP_THRESHOLD_MS", [&](const std::string& v) { c.gap_threshold_ms = parse_number<Millis>("EVL_GAP_THRESHOLD_MS", v); });
  with("EVL_TOP_N_TOPICS", [&](const std::string& v) { c.top_n_topics = parse_number<std::size_t>("EVL_TOP_N_TOPICS", v); });
  with("EVL_RELATED_LIMIT", [&](const std::string& v) { c.related_limit = parse_number<std::size_t>("EVL_RELATED_LIMIT", v); });
  with("EVL_MIN_CONFIDENCE", [&](const std::string& v) { c.min_confidence = parse_number<double>("EVL_MIN_CONFIDENCE", v); });
  with("EVL_RELEVANCE_THRESHOLD",
       [&](const std::string& v) { c.relevance_threshold = parse_number<double>("EVL_RELEVANCE_THRESHOLD", v); });
  with("EVL_MAX_RESULTS", [&](const std::string& v) { c.max_results = parse_number<std::size_t>("EVL_MAX_RESULTS", v); });
  with("EVL_SAFETY_POLICY", [&](const std::string& v) { c.safety_policy = fs::path(v); });
  with("EVL_SOURCES", [&](const std::string& v) {
    std::vector<std::string> names;
    std::size_t start = 0;
    while (start <= v.size()) {
      const auto comma = v.find(',', start);
      names.emplace_back(text::trim(std::string_view(v).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    c.sources = parse_sources(names);
  });
  with("EVL_MODE", [&](const std::string& v) { c.mode = parse_mode(v); });
  with("EVL_FIXTURE_DIR", [&](const std::string& v) { c.fixture_dir = fs::path(v); });
  with("EVL_CACHE_DIR", [&](const std::string& v) { c.cache_dir = fs::path(v); });
  with("EVL_NOTES_DB", [&](const std::string& v) { c.notes_db = fs::path(v); });
  with("EVL_ANNOTATOR", [&](const std::string& v) { c.annotator = v; });
  with("EVL_GAZETTEER", [&](const std::string& v) { c.gazetteer = fs::path(v); });
}

nlohmann::ordered_json config_json(const SessionConfig& c) {
  auto sources = nlohmann::ordered_json::array();
  for (const auto s : c.sources.members()) sources.push_back(source_name(s));
  nlohmann::ordered_json j;
  j["gap_threshold_ms"] = c.gap_threshold_ms;
  j["top_n_topics"] = c.top_n_topics;
  j["related_limit"] = c.related_limit;
  j["min_confidence"] = c.min_confidence;
  j["relevance_threshold"] = c.relevance_threshold;
  j["max_results"] = c.max_results;
  j["safety_policy"] = path_text(c.safety_policy);
  j["sources"] = sources;
  j["mode"] = c.mode == RunMode::live ? "live" : "replay";
  j["fixture_dir"] = path_text(c.fixture_dir);
  j["cache_dir"] = path_text(c.cache_dir);
  j["notes_db"] = path_text(c.notes_db);
  j["annotator"] = c.annotator;
  j["gazetteer"] = path_text(c.gazetteer);
  j["youtube_rate_per_second"] = c.youtube_rate_per_second;
  j["replay_epoch"] = c.replay_epoch;
  return j;
}

Pipeline make_pipeline(const SessionConfig& config, bool record) {
  config.validate();
  std::shared_ptr<Transport> transport;
  if (config.mode == RunMode::replay) {
    transport = std::make_shared<ReplayTransport>(Fixture::load_dir(*config.fixture_dir));
  } else {
    transport = std::make_shared<LiveTransport>();
    if (record) transport = std::make_shared<RecordingTransport>(transport);
  }
  return make_pipeline(config, std::move(transport));
}

Pipeline make_pipeline(const SessionConfig& config, std::shared_ptr<Transport> transport) {
  config.validate();
  Pipeline p;
  p.transport = transport;
  const auto env = process_env();

  // Recorded replies cost no quota.
  std::shared_ptr<TokenBucket> limiter;
  if (config.mode == RunMode::live) {
    limiter = std::make_shared<TokenBucket>(config.youtube_rate_per_second, config.youtube_rate_per_second);
  }
  p.videos = std::make_shared<YouTubeClient>(transport, env("EVL_YOUTUBE_API_KEY").value_or(""), limiter);

  if (config.annotator == "textrazor") {
    RemoteAnnotatorConfig rc;
    rc.api_key = env("EVL_TEXTRAZOR_API_KEY").value_or("");
    rc.min_confidence = config.min_confidence;
    p.annotator = std::make_shared<RemoteAnnotator>(transport, rc);
  } else {
    auto path = config.gazetteer;
    if (!path && config.fixture_dir) path = *config.fixture_dir / "gazetteer.json";
    if (!path) throw std::invalid_argument("gazetteer annotator needs a gazetteer file");
    p.annotator = std::make_shared<GazetteerAnnotator>(load_gazetteer(*path));
  }

  if (config.mode == RunMode::replay) {
    p.knowledge = client_set_for(transport, {0, std::chrono::milliseconds(0), std::chrono::milliseconds(5000)});
    p.clock = fixed_clock(TimePoint(std::chrono::seconds(config.replay_epoch)));
  } else {
    p.knowledge = live_client_set(transport);
    p.clock = system_clock();
  }
  p.cache = std::make_shared<EnrichmentCache>(config.cache_dir);
  return p;
}

void save_recording(const Pipeline& pipeline, const fs::path& dir) {
  const auto* rec = dynamic_cast<const RecordingTransport*>(pipeline.transport.get());
  if (!rec) throw std::logic_error("pipeline is not recording");
  fs::create_directories(dir);
  rec->fixture().save(dir / "interactions.json");
}

}  // namespace evl
