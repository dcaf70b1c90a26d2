#include "evl/annotator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "evl/text.hpp"

namespace evl {

namespace {

constexpr std::pair<EntityCategory, std::string_view> kCategoryNames[] = {
    {EntityCategory::person, "person"}, {EntityCategory::place, "place"},
    {EntityCategory::organization, "organization"}, {EntityCategory::event, "event"},
    {EntityCategory::time, "time"}, {EntityCategory::product, "product"},
    {EntityCategory::other, "other"},
};

// DBpedia ontology types reported by the remote model, mapped to our labels.
EntityCategory category_from_types(const nlohmann::json& types) {
  static const std::vector<std::pair<std::string_view, EntityCategory>> kTypeMap = {
      {"Person", EntityCategory::person},         {"Place", EntityCategory::place},
      {"Location", EntityCategory::place},        {"PopulatedPlace", EntityCategory::place},
      {"Country", EntityCategory::place},         {"City", EntityCategory::place},
      {"Organisation", EntityCategory::organization}, {"Company", EntityCategory::organization},
      {"Event", EntityCategory::event},           {"SportsEvent", EntityCategory::event},
      {"TimePeriod", EntityCategory::time},       {"Year", EntityCategory::time},
      {"Work", EntityCategory::product},          {"Software", EntityCategory::product},
      {"Device", EntityCategory::product},
  };
  if (!types.is_array()) return EntityCategory::other;
  for (const auto& t : types) {
    if (!t.is_string()) continue;
    const auto name = t.get<std::string>();
    for (const auto& [key, cat] : kTypeMap) {
      if (name == key) return cat;
    }
  }
  return EntityCategory::other;
}

std::vector<EntityAnnotation> resolve_overlaps(std::vector<EntityAnnotation> all) {
  std::stable_sort(all.begin(), all.end(), [](const EntityAnnotation& a, const EntityAnnotation& b) {
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return (a.span.end - a.span.start) > (b.span.end - b.span.start);
  });
  std::vector<EntityAnnotation> kept;
  for (auto& a : all) {
    if (!kept.empty() && a.span.start < kept.back().span.end) continue;
    kept.push_back(std::move(a));
  }
  return kept;
}

}  // namespace

std::string_view category_name(EntityCategory c) {
  for (const auto& [cat, name] : kCategoryNames) {
    if (cat == c) return name;
  }
  return "other";
}

std::optional<EntityCategory> parse_category(std::string_view name) {
  const std::string lowered = text::ascii_lower(name);
  for (const auto& [cat, n] : kCategoryNames) {
    if (n == lowered) return cat;
  }
  return std::nullopt;
}

nlohmann::ordered_json annotation_json(const EntityAnnotation& a) {
  return {{"surface", a.surface},
          {"span", {a.span.start, a.span.end}},
          {"category", category_name(a.category)},
          {"confidence", a.confidence},
          {"cue_index", a.cue_index}};
}

std::vector<GazetteerEntry> parse_gazetteer(std::string_view json_text) {
  const auto doc = nlohmann::json::parse(json_text);
  if (!doc.is_array()) throw std::invalid_argument("gazetteer must be a JSON list");
  std::vector<GazetteerEntry> entries;
  for (const auto& item : doc) {
    GazetteerEntry e;
    e.surface_forms = item.at("surface_forms").get<std::vector<std::string>>();
    const auto cat = item.at("category").get<std::string>();
    const auto parsed = parse_category(cat);
    if (!parsed) throw std::invalid_argument("unknown entity category '" + cat + "'");
    e.category = *parsed;
    e.canonical = item.at("canonical").get<std::string>();
    std::erase_if(e.surface_forms, [](const std::string& f) { return text::is_blank(f); });
    if (e.surface_forms.empty()) throw std::invalid_argument("gazetteer entry without surface forms");
    if (text::is_blank(e.canonical)) throw std::invalid_argument("gazetteer entry without canonical name");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<GazetteerEntry> load_gazetteer(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open gazetteer " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gazetteer(ss.str());
}

AnnotatorError::AnnotatorError(Kind kind, const std::string& detail, std::optional<std::size_t> cue)
    : std::runtime_error(std::string(kind == Kind::unavailable ? "AnnotatorUnavailable" : "QuotaExceeded") +
                         (cue ? " (cue " + std::to_string(*cue) + ")" : std::string{}) + ": " + detail),
      kind_(kind),
      detail_(detail),
      cue_(cue) {}

GazetteerAnnotator::GazetteerAnnotator(std::vector<GazetteerEntry> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (const auto& form : entries_[i].surface_forms) {
      const std::string key = text::ascii_lower(text::trim(form));
      if (key.empty()) continue;
      // First entry listing a form owns it.
      forms_.emplace(key, i);
      longest_form_ = std::max(longest_form_, key.size());
    }
  }
}

std::vector<EntityAnnotation> GazetteerAnnotator::find_entities(std::string_view source) const {
  std::vector<EntityAnnotation> out;
  if (forms_.empty()) return out;
  const std::string lowered = text::ascii_lower(source);
  const auto word = [&](std::size_t k) { return text::is_word_byte(static_cast<unsigned char>(source[k])); };

  std::size_t i = 0;
  std::size_t cp_at_i = 0;  // code point offset of byte i
  std::size_t cp_scanned = 0;
  const auto advance_cp = [&](std::size_t to) {
    cp_at_i += text::codepoint_length(source.substr(cp_scanned, to - cp_scanned));
    cp_scanned = to;
  };

  while (i < source.size()) {
    if (i > 0 && word(i - 1)) {
      ++i;
      continue;
    }
    std::size_t best_len = 0;
    std::size_t best_entry = 0;
    const std::size_t max_len = std::min(longest_form_, source.size() - i);
    for (std::size_t len = max_len; len > 0; --len) {
      const std::size_t end = i + len;
      if (end < source.size() && word(end)) continue;
      const auto it = forms_.find(std::string_view(lowered).substr(i, len));
      if (it != forms_.end()) {
        best_len = len;
        best_entry = it->second;
        break;
      }
    }
    if (best_len == 0) {
      ++i;
      continue;
    }
    advance_cp(i);
    const std::string_view surface = source.substr(i, best_len);
    const std::size_t cp_len = text::codepoint_length(surface);
    const auto& entry = entries_[best_entry];
    out.push_back({std::string(surface), {cp_at_i, cp_at_i + cp_len}, entry.category, 1.0, 0,
                   entry.canonical});
    i += best_len;
  }
  return out;
}

RemoteAnnotator::RemoteAnnotator(std::shared_ptr<Transport> transport, RemoteAnnotatorConfig config)
    : transport_(std::move(transport)),
      config_(std::move(config)),
      in_flight_(std::clamp<std::ptrdiff_t>(config_.max_in_flight, 1, 1024)) {}

std::vector<EntityAnnotation> RemoteAnnotator::find_entities(std::string_view text_in) const {
  if (text::is_blank(text_in)) return {};
  HttpRequest req;
  req.source = "textrazor";
  req.request_key = std::string(text_in);
  req.method = "POST";
  req.url = config_.endpoint;
  req.content_type = "application/x-www-form-urlencoded";
  req.body = "extractors=entities&text=" + url_encode(text_in);
  req.headers.emplace_back("x-textrazor-key", config_.api_key);
  req.timeout = config_.timeout;

  HttpResponse res;
  in_flight_.acquire();
  try {
    res = transport_->send(req);
  } catch (const TransportError& e) {
    in_flight_.release();
    throw AnnotatorError(AnnotatorError::Kind::unavailable, e.what());
  } catch (...) {
    in_flight_.release();
    throw;
  }
  in_flight_.release();

  if (res.status == 429) throw AnnotatorError(AnnotatorError::Kind::quota_exceeded, "rate limited");
  if (res.status != 200) {
    throw AnnotatorError(AnnotatorError::Kind::unavailable, "HTTP " + std::to_string(res.status));
  }
  return parse_response(text_in, res.body);
}

std::vector<EntityAnnotation> RemoteAnnotator::parse_response(std::string_view source,
                                                              std::string_view body) const {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw AnnotatorError(AnnotatorError::Kind::unavailable, std::string("bad response: ") + e.what());
  }
  std::vector<EntityAnnotation> out;
  const auto response = doc.find("response");
  if (response == doc.end() || !response->contains("entities")) return out;
  const std::size_t length = text::codepoint_length(source);
  for (const auto& e : (*response)["entities"]) {
    const auto start = e.value("startingPos", std::size_t{0});
    const auto end = e.value("endingPos", std::size_t{0});
    if (start >= end || end > length) continue;
    const auto slice = text::codepoint_slice(source, start, end);
    if (slice != e.value("matchedText", std::string{})) continue;
    const double confidence = std::clamp(e.value("confidenceScore", 0.0), 0.0, 1.0);
    if (confidence < config_.min_confidence) continue;
    out.push_back({std::string(slice), {start, end}, category_from_types(e.value("type", nlohmann::json{})),
                   confidence, 0, e.value("entityId", std::string{})});
  }
  return out;
}

std::vector<EntityAnnotation> annotate(std::string_view text_in, const Annotator& annotator) {
  if (text_in.empty()) return {};
  return resolve_overlaps(annotator.find_entities(text_in));
}

std::vector<EntityAnnotation> annotate_cues(std::span<const SubtitleCue> cues, const Annotator& annotator) {
  std::vector<EntityAnnotation> out;
  for (const auto& cue : cues) {
    try {
      for (auto& a : annotate(cue.text, annotator)) {
        a.cue_index = cue.index;
        out.push_back(std::move(a));
      }
    } catch (const AnnotatorError& e) {
      throw AnnotatorError(e.kind(), e.detail(), cue.index);
    }
  }
  return out;
}

}  // namespace evl
