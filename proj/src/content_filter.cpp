#include "evl/content_filter.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "evl/text.hpp"

namespace evl {

namespace {

constexpr std::string_view kMask = "■";

struct Hit {
  std::size_t offset = 0;
  std::size_t length = 0;
  const BlockedTerm* term = nullptr;
};

// Every match, leftmost first and longest among equal starts, non-overlapping.
std::vector<Hit> find_hits(std::string_view s, const SafetyPolicy& policy) {
  std::vector<Hit> all;
  for (const auto& t : policy.terms) {
    for (const auto at : text::find_words(s, t.term)) all.push_back({at, t.term.size(), &t});
  }
  std::sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.length > b.length;
  });
  std::vector<Hit> kept;
  std::size_t covered = 0;
  for (const auto& h : all) {
    if (!kept.empty() && h.offset < covered) continue;
    kept.push_back(h);
    covered = h.offset + h.length;
  }
  return kept;
}

}  // namespace

CleanVideoView project_clean(const VideoMeta& meta, std::vector<SubtitleCue> cues,
                             std::vector<SubtitleSegment> segments, std::vector<SmartTitle> titles) {
  return {meta.video_id, meta.title, meta.duration_ms, std::move(cues), std::move(segments), std::move(titles)};
}

nlohmann::ordered_json clean_view_json(const CleanVideoView& view) {
  auto cues = nlohmann::ordered_json::array();
  for (const auto& c : view.cues) cues.push_back(cue_json(c));
  auto segments = nlohmann::ordered_json::array();
  for (const auto& s : view.segments) segments.push_back(segment_json(s));
  auto titles = nlohmann::ordered_json::array();
  for (const auto& t : view.smart_titles) titles.push_back(smart_title_json(t));
  nlohmann::ordered_json j;
  j["video_id"] = view.video_id;
  j["title"] = view.title;
  j["duration_ms"] = view.duration_ms;
  j["cues"] = std::move(cues);
  j["segments"] = std::move(segments);
  j["smart_titles"] = std::move(titles);
  return j;
}

SafetyPolicy SafetyPolicy::parse(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("safety policy must be a JSON object");
  SafetyPolicy p;
  const auto action = doc.value("action", std::string("exclude"));
  if (action == "exclude") p.action = SafetyAction::exclude;
  else if (action == "redact") p.action = SafetyAction::redact;
  else throw std::invalid_argument("unknown safety action '" + action + "'");

  const auto terms = doc.find("terms");
  if (terms == doc.end()) return p;
  if (!terms->is_array()) throw std::invalid_argument("safety policy 'terms' must be an array");
  for (const auto& t : *terms) {
    if (!t.is_object() || !t.contains("term") || !t["term"].is_string()) {
      throw std::invalid_argument("each blocked term needs a string 'term'");
    }
    BlockedTerm bt{text::collapse_whitespace(t["term"].get<std::string>()),
                   text::normalize(t.value("category", std::string("inappropriate")))};
    if (bt.term.empty()) throw std::invalid_argument("blocked term is blank");
    if (bt.category.empty()) throw std::invalid_argument("blocked term category is blank");
    p.terms.push_back(std::move(bt));
  }
  return p;
}

SafetyPolicy SafetyPolicy::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open safety policy " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("safety policy " + file.string() + ": " + e.what());
  }
  return parse(doc);
}

std::string redact_text(std::string_view s, const SafetyPolicy& policy) {
  const auto hits = find_hits(s, policy);
  if (hits.empty()) return std::string(s);
  std::string out;
  std::size_t pos = 0;
  for (const auto& h : hits) {
    out.append(s.substr(pos, h.offset - pos));
    const auto n = text::codepoint_length(s.substr(h.offset, h.length));
    for (std::size_t i = 0; i < n; ++i) out.append(kMask);
    pos = h.offset + h.length;
  }
  out.append(s.substr(pos));
  return out;
}

ScreenVerdict safety_screen(const CleanVideoView& view, const SafetyPolicy& policy) {
  ScreenVerdict v;
  if (!policy.enabled()) return v;

  if (policy.action == SafetyAction::exclude) {
    auto refuse = [&](std::string_view s, const char* field, std::optional<std::size_t> cue) {
      const auto hits = find_hits(s, policy);
      if (hits.empty()) return false;
      v.outcome = ScreenVerdict::Outcome::excluded;
      v.term = hits.front().term->term;
      v.category = hits.front().term->category;
      v.field = field;
      v.cue_index = cue;
      return true;
    };
    if (refuse(view.title, "title", std::nullopt)) return v;
    for (const auto& c : view.cues) {
      if (refuse(c.text, "cue", c.index)) return v;
    }
    for (const auto& t : view.smart_titles) {
      if (refuse(t.term, "smart_title", std::nullopt)) return v;
    }
    for (const auto& s : view.segments) {
      if (refuse(s.title, "segment_title", std::nullopt)) return v;
    }
    return v;
  }

  CleanVideoView out = view;
  bool changed = false;
  auto mask = [&](std::string& s) {
    auto r = redact_text(s, policy);
    if (r != s) {
      s = std::move(r);
      changed = true;
    }
  };
  mask(out.title);
  for (auto& c : out.cues) mask(c.text);
  for (auto& t : out.smart_titles) mask(t.term);
  for (auto& s : out.segments) mask(s.title);
  if (changed) {
    v.outcome = ScreenVerdict::Outcome::redacted;
    v.view = std::move(out);
  }
  return v;
}

PolicyHolder::PolicyHolder(SafetyPolicy initial)
    : policy_(std::make_shared<const SafetyPolicy>(std::move(initial))) {}

std::shared_ptr<const SafetyPolicy> PolicyHolder::get() const {
  std::lock_guard lock(mutex_);
  return policy_;
}

void PolicyHolder::set(SafetyPolicy policy) {
  auto next = std::make_shared<const SafetyPolicy>(std::move(policy));
  std::lock_guard lock(mutex_);
  policy_ = std::move(next);
}

void PolicyHolder::reload(const std::filesystem::path& file) { set(SafetyPolicy::load(file)); }

}  // namespace evl
