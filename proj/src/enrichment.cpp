#include "evl/enrichment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "evl/text.hpp"

namespace evl {

namespace fs = std::filesystem;

namespace {

std::string strip_markup(std::string_view s) {
  std::string out;
  bool in_tag = false;
  for (const char ch : s) {
    if (ch == '<') {
      in_tag = true;
    } else if (ch == '>' && in_tag) {
      in_tag = false;
    } else if (!in_tag) {
      out.push_back(ch);
    }
  }
  return text::collapse_whitespace(out);
}

std::string first_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_array() && !it->empty() && it->front().is_string()) return it->front().get<std::string>();
  return {};
}

OntologyRecord parse_wikipedia(std::string_view surface, std::string_view body, TimePoint now) {
  OntologyRecord r{std::string(surface), Source::wikipedia, {}, {}, {}, std::nullopt, now};
  const auto doc = nlohmann::json::parse(body);
  const auto& pages = doc.at("query").at("pages");
  if (!pages.is_array() || pages.empty()) return r;
  const auto& page = pages.front();
  if (page.contains("missing") || page.contains("invalid")) return r;
  r.label = page.value("title", std::string{});
  r.description = text::collapse_whitespace(page.value("extract", std::string{}));
  if (const auto thumb = page.find("thumbnail"); thumb != page.end() && thumb->contains("source")) {
    r.image_ref = thumb->at("source").get<std::string>();
  }
  if (const auto redirects = page.find("redirects"); redirects != page.end() && redirects->is_array()) {
    for (const auto& rd : *redirects) {
      const auto title = rd.value("title", std::string{});
      if (!text::is_blank(title)) r.synonyms.push_back(title);
    }
  }
  return r;
}

OntologyRecord parse_dbpedia(std::string_view surface, std::string_view body, TimePoint now) {
  OntologyRecord r{std::string(surface), Source::dbpedia, {}, {}, {}, std::nullopt, now};
  const auto doc = nlohmann::json::parse(body);
  const auto docs = doc.find("docs");
  if (docs == doc.end() || !docs->is_array() || docs->empty()) return r;
  const auto& top = docs->front();
  r.label = strip_markup(first_string(top, "label"));
  r.description = strip_markup(first_string(top, "comment"));
  if (const auto thumb = first_string(top, "thumbnail"); !thumb.empty()) r.image_ref = thumb;
  if (const auto redirects = top.find("redirectlabel"); redirects != top.end() && redirects->is_array()) {
    for (const auto& rd : *redirects) {
      if (!rd.is_string()) continue;
      auto label = strip_markup(rd.get<std::string>());
      if (!label.empty()) r.synonyms.push_back(std::move(label));
    }
  }
  return r;
}

OntologyRecord parse_wolfram(std::string_view surface, std::string_view body, TimePoint now) {
  return {std::string(surface), Source::wolfram, {}, {}, text::collapse_whitespace(body), std::nullopt, now};
}

}  // namespace

std::string_view source_name(Source s) {
  switch (s) {
    case Source::wikipedia: return "wikipedia";
    case Source::dbpedia: return "dbpedia";
    case Source::wolfram: return "wolfram";
  }
  return "unknown";
}

std::optional<Source> parse_source(std::string_view name) {
  for (const auto s : kAllSources) {
    if (source_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<Source> SourceSet::members() const {
  std::vector<Source> out;
  for (const auto s : kAllSources) {
    if (contains(s)) out.push_back(s);
  }
  return out;
}

Clock system_clock() {
  return [] { return std::chrono::system_clock::now(); };
}

Clock fixed_clock(TimePoint t) {
  return [t] { return t; };
}

bool OntologyRecord::non_empty() const { return !text::is_blank(label) || !text::is_blank(description); }

nlohmann::ordered_json record_json(const OntologyRecord& r) {
  nlohmann::ordered_json j{{"entity_surface", r.entity_surface},
                           {"source", source_name(r.source)},
                           {"label", r.label},
                           {"synonyms", r.synonyms},
                           {"description", r.description}};
  j["image_ref"] = r.image_ref ? nlohmann::ordered_json(*r.image_ref) : nlohmann::ordered_json(nullptr);
  j["fetched_at"] =
      std::chrono::duration_cast<std::chrono::seconds>(r.fetched_at.time_since_epoch()).count();
  return j;
}

OntologyRecord record_from_json(const nlohmann::json& j) {
  OntologyRecord r;
  r.entity_surface = j.at("entity_surface").get<std::string>();
  const auto source = parse_source(j.at("source").get<std::string>());
  if (!source) throw std::invalid_argument("unknown source in record");
  r.source = *source;
  r.label = j.at("label").get<std::string>();
  r.synonyms = j.at("synonyms").get<std::vector<std::string>>();
  r.description = j.at("description").get<std::string>();
  if (const auto& img = j.at("image_ref"); !img.is_null()) r.image_ref = img.get<std::string>();
  r.fetched_at = TimePoint(std::chrono::seconds(j.at("fetched_at").get<std::int64_t>()));
  return r;
}

const OntologyRecord* EnrichmentBundle::find(Source s) const {
  for (const auto& r : records) {
    if (r.source == s) return &r;
  }
  return nullptr;
}

nlohmann::ordered_json bundle_json(const EnrichmentBundle& b) {
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : b.records) records.push_back(record_json(r));
  return {{"entity_surface", b.entity_surface}, {"records", std::move(records)}};
}

SourceError::SourceError(Source source, Kind kind, const std::string& detail)
    : std::runtime_error(std::string(source_name(source)) + ": " + detail), source_(source), kind_(kind) {}

AllSourcesFailed::AllSourcesFailed(const std::string& surface, std::vector<std::string> reasons)
    : std::runtime_error("AllSourcesFailed for '" + surface + "': " + text::join(reasons, "; ")),
      reasons_(std::move(reasons)) {}

OntologyRecord parse_source_response(Source source, std::string_view surface, const HttpResponse& res,
                                     TimePoint now) {
  const bool nothing_known = res.status == 404 || (source == Source::wolfram && res.status == 501);
  if (nothing_known) return {std::string(surface), source, {}, {}, {}, std::nullopt, now};
  if (res.status == 401 || res.status == 403) {
    throw SourceError(source, SourceError::Kind::auth_failure, "HTTP " + std::to_string(res.status));
  }
  if (res.status == 429) throw SourceError(source, SourceError::Kind::quota_exceeded, "HTTP 429");
  if (res.status >= 500) {
    throw SourceError(source, SourceError::Kind::network_failure, "HTTP " + std::to_string(res.status));
  }
  if (res.status != 200) {
    throw SourceError(source, SourceError::Kind::bad_response, "HTTP " + std::to_string(res.status));
  }
  try {
    switch (source) {
      case Source::wikipedia: return parse_wikipedia(surface, res.body, now);
      case Source::dbpedia: return parse_dbpedia(surface, res.body, now);
      case Source::wolfram: return parse_wolfram(surface, res.body, now);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SourceError(source, SourceError::Kind::bad_response, e.what());
  }
  throw SourceError(source, SourceError::Kind::bad_response, "unknown source");
}

HttpKnowledgeClient::HttpKnowledgeClient(Source source, std::shared_ptr<Transport> transport,
                                         std::string api_key, RetryPolicy retry)
    : source_(source), transport_(std::move(transport)), api_key_(std::move(api_key)), retry_(retry) {}

HttpRequest HttpKnowledgeClient::make_request(const std::string& key, std::string_view surface) const {
  HttpRequest req;
  req.source = std::string(source_name(source_));
  req.request_key = key;
  req.timeout = retry_.timeout;
  const std::string q = url_encode(text::collapse_whitespace(surface));
  switch (source_) {
    case Source::wikipedia:
      req.url =
          "https://en.wikipedia.org/w/api.php?action=query&format=json&formatversion=2&redirects=1"
          "&prop=extracts%7Cpageimages%7Credirects&exintro=1&explaintext=1&piprop=thumbnail"
          "&rdlimit=20&titles=" + q;
      break;
    case Source::dbpedia:
      req.url = "https://lookup.dbpedia.org/api/search?format=JSON&maxResults=1&query=" + q;
      req.headers.emplace_back("Accept", "application/json");
      break;
    case Source::wolfram:
      req.url = "https://api.wolframalpha.com/v1/result?appid=" + url_encode(api_key_) + "&i=" + q;
      break;
  }
  return req;
}

HttpResponse HttpKnowledgeClient::fetch(const HttpRequest& req) {
  auto backoff = retry_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= retry_.max_retries;
    try {
      auto res = transport_->send(req);
      if (res.status < 500 || last) return res;
    } catch (const TransportError& e) {
      if (last) throw SourceError(source_, SourceError::Kind::network_failure, e.what());
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

OntologyRecord HttpKnowledgeClient::lookup(std::string_view surface, TimePoint now) {
  const std::string key = text::normalize(surface);
  return parse_source_response(source_, surface, fetch(make_request(key, surface)), now);
}

SourceSet ClientSet::enabled() const {
  SourceSet s;
  for (const auto src : kAllSources) {
    if (get(src)) s.insert(src);
  }
  return s;
}

ClientSet client_set_for(std::shared_ptr<Transport> transport, RetryPolicy retry) {
  ClientSet set;
  for (const auto s : kAllSources) set.set(std::make_shared<HttpKnowledgeClient>(s, transport, "", retry));
  return set;
}

ClientSet live_client_set(std::shared_ptr<Transport> transport, RetryPolicy retry) {
  ClientSet set;
  set.set(std::make_shared<HttpKnowledgeClient>(Source::wikipedia, transport, "", retry));
  set.set(std::make_shared<HttpKnowledgeClient>(Source::dbpedia, transport, "", retry));
  if (const char* appid = std::getenv("EVL_WOLFRAM_APPID"); appid && *appid) {
    set.set(std::make_shared<HttpKnowledgeClient>(Source::wolfram, transport, appid, retry));
  }
  return set;
}

EnrichmentCache::EnrichmentCache(std::optional<fs::path> dir, std::chrono::seconds ttl)
    : dir_(std::move(dir)), ttl_(ttl) {
  if (dir_) {
    for (const auto s : kAllSources) fs::create_directories(*dir_ / source_name(s));
  }
}

fs::path EnrichmentCache::file_for(Source source, const std::string& key) const {
  const fs::path base = dir_ ? *dir_ : fs::path{};
  return base / source_name(source) / (text::hex64(text::fnv1a64(key)) + ".json");
}

std::optional<OntologyRecord> EnrichmentCache::get(Source source, const std::string& key, TimePoint now) {
  const auto fresh = [&](const OntologyRecord& r) { return now - r.fetched_at <= ttl_; };
  {
    std::lock_guard lock(mutex_);
    if (const auto it = memory_.find({source, key}); it != memory_.end() && fresh(it->second)) {
      ++hits_;
      return it->second;
    }
  }
  if (dir_) {
    std::ifstream in(file_for(source, key), std::ios::binary);
    if (in) {
      try {
        const auto doc = nlohmann::json::parse(in);
        if (doc.at("key").get<std::string>() == key) {
          auto record = record_from_json(doc.at("record"));
          if (fresh(record)) {
            std::lock_guard lock(mutex_);
            memory_[{source, key}] = record;
            ++hits_;
            return record;
          }
        }
      } catch (const std::exception&) {
        // Unreadable entries count as misses and get overwritten.
      }
    }
  }
  ++misses_;
  return std::nullopt;
}

void EnrichmentCache::put(Source source, const std::string& key, const OntologyRecord& record) {
  {
    std::lock_guard lock(mutex_);
    memory_[{source, key}] = record;
  }
  if (!dir_) return;
  const auto target = file_for(source, key);
  std::ostringstream tmp_name;
  tmp_name << target.filename().string() << ".tmp." << std::this_thread::get_id();
  const auto tmp = target.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const nlohmann::ordered_json doc{{"key", key}, {"record", record_json(record)}};
    out << doc.dump();
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fs::remove(tmp, ec);
}

EnrichmentBundle enrich(std::string_view entity_surface, SourceSet sources, const ClientSet& clients,
                        EnrichmentCache& cache, const Clock& clock) {
  if (text::is_blank(entity_surface)) throw std::invalid_argument("enrich: entity surface is blank");
  if (sources.empty()) throw std::invalid_argument("enrich: no sources requested");

  const std::string surface = text::collapse_whitespace(entity_surface);
  const std::string key = text::normalize(surface);
  const TimePoint now = clock();

  struct Slot {
    Source source;
    std::optional<OntologyRecord> record;
    std::future<OntologyRecord> pending;
    std::string error;
  };
  std::vector<Slot> slots;
  for (const auto s : sources.members()) {
    KnowledgeClient* client = clients.get(s);
    if (!client) continue;
    Slot slot{s, cache.get(s, key, now), {}, {}};
    if (slot.record) {
      slot.record->entity_surface = surface;
    } else {
      slot.pending = std::async(std::launch::async, [client, surface, now] { return client->lookup(surface, now); });
    }
    slots.push_back(std::move(slot));
  }

  bool any_fetched = false;
  std::exception_ptr replay_miss;
  for (auto& slot : slots) {
    if (!slot.pending.valid()) continue;
    any_fetched = true;
    try {
      slot.record = slot.pending.get();
      cache.put(slot.source, key, *slot.record);
    } catch (const SourceError& e) {
      slot.error = e.what();
    } catch (const ReplayMiss&) {
      if (!replay_miss) replay_miss = std::current_exception();
    }
  }
  if (replay_miss) std::rethrow_exception(replay_miss);
  if (!any_fetched && !slots.empty()) cache.note_bundle_hit();

  EnrichmentBundle bundle{surface, {}};
  std::vector<std::string> errors;
  for (auto& slot : slots) {
    if (slot.record) {
      bundle.records.push_back(std::move(*slot.record));
    } else {
      errors.push_back(slot.error);
    }
  }
  if (!slots.empty() && bundle.records.empty()) throw AllSourcesFailed(surface, std::move(errors));
  return bundle;
}

std::vector<std::string> merge_related(const EnrichmentBundle& bundle, std::size_t limit) {
  if (limit == 0) throw std::invalid_argument("merge_related: limit must be positive");
  std::vector<std::string> out;
  std::set<std::string> seen{text::normalize(bundle.entity_surface)};
  for (const auto s : kAllSources) {
    const auto* record = bundle.find(s);
    if (!record) continue;
    for (const auto& syn : record->synonyms) {
      const std::string display = text::collapse_whitespace(syn);
      if (display.empty()) continue;
      if (!seen.insert(text::normalize(display)).second) continue;
      out.push_back(display);
      if (out.size() == limit) return out;
    }
  }
  return out;
}

}  // namespace evl
