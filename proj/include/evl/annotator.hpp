#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "evl/subtitle.hpp"
#include "evl/transport.hpp"

namespace evl {

enum class EntityCategory { person, place, organization, event, time, product, other };

std::string_view category_name(EntityCategory c);
std::optional<EntityCategory> parse_category(std::string_view name);

/// Code point offsets into the source text, [start, end).
struct TextSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

struct EntityAnnotation {
  std::string surface;  // verbatim slice of the source text
  TextSpan span;
  EntityCategory category = EntityCategory::other;
  double confidence = 1.0;
  std::size_t cue_index = 0;
  /// Preferred lookup name for enrichment; empty means use `surface`.
  std::string canonical;

  const std::string& lookup_name() const { return canonical.empty() ? surface : canonical; }

  friend bool operator==(const EntityAnnotation&, const EntityAnnotation&) = default;
};

nlohmann::ordered_json annotation_json(const EntityAnnotation& a);

struct GazetteerEntry {
  std::vector<std::string> surface_forms;
  EntityCategory category = EntityCategory::other;
  std::string canonical;
};

/// Gazetteer file: JSON list of {surface_forms:[...], category, canonical}.
std::vector<GazetteerEntry> parse_gazetteer(std::string_view json_text);
std::vector<GazetteerEntry> load_gazetteer(const std::filesystem::path& file);

class AnnotatorError : public std::runtime_error {
 public:
  enum class Kind { unavailable, quota_exceeded };

  AnnotatorError(Kind kind, const std::string& detail, std::optional<std::size_t> cue = std::nullopt);

  Kind kind() const { return kind_; }
  std::optional<std::size_t> cue_index() const { return cue_; }
  const std::string& detail() const { return detail_; }

 private:
  Kind kind_;
  std::string detail_;
  std::optional<std::size_t> cue_;
};

class Annotator {
 public:
  virtual ~Annotator() = default;

  /// Raw backend output; `evl::annotate` applies ordering and overlap rules.
  virtual std::vector<EntityAnnotation> find_entities(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// Offline annotator: case-insensitive, word-bounded, leftmost-longest match
/// against a fixed list of surface forms. Pure; safe to share across threads.
class GazetteerAnnotator final : public Annotator {
 public:
  explicit GazetteerAnnotator(std::vector<GazetteerEntry> entries);

  std::vector<EntityAnnotation> find_entities(std::string_view text) const override;
  std::string name() const override { return "gazetteer"; }

  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<GazetteerEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> forms_;  // lowercased form -> entry
  std::size_t longest_form_ = 0;
};

struct RemoteAnnotatorConfig {
  std::string endpoint = "https://api.textrazor.com/";
  std::string api_key;  // sent as x-textrazor-key
  double min_confidence = 0.5;
  std::ptrdiff_t max_in_flight = 4;
  std::chrono::milliseconds timeout{5000};
};

/// Client for a hosted pre-trained entity model (TextRazor wire format).
class RemoteAnnotator final : public Annotator {
 public:
  RemoteAnnotator(std::shared_ptr<Transport> transport, RemoteAnnotatorConfig config);

  std::vector<EntityAnnotation> find_entities(std::string_view text) const override;
  std::string name() const override { return "remote"; }

  /// Parses a response body; exposed for tests.
  std::vector<EntityAnnotation> parse_response(std::string_view text, std::string_view body) const;

 private:
  std::shared_ptr<Transport> transport_;
  RemoteAnnotatorConfig config_;
  mutable std::counting_semaphore<1024> in_flight_;
};

/// Entities in `text`, sorted by span start and non-overlapping. Conflicts
/// resolve left to right, the longest candidate at each start winning.
/// cue_index is left at 0.
std::vector<EntityAnnotation> annotate(std::string_view text, const Annotator& annotator);

/// Per-cue annotations tagged with their cue index. Errors carry the cue index.
std::vector<EntityAnnotation> annotate_cues(std::span<const SubtitleCue> cues,
                                            const Annotator& annotator);

}  // namespace evl
