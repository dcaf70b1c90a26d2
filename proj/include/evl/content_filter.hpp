#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evl/smart_titles.hpp"
#include "evl/subtitle.hpp"
#include "evl/video_search.hpp"

namespace evl {

/// The only shape in which video data leaves the service. There is no field
/// for comments, ratings, recommendations, channel data, playlists or ads.
struct CleanVideoView {
  std::string video_id;
  std::string title;
  Millis duration_ms = 0;
  std::vector<SubtitleCue> cues;
  std::vector<SubtitleSegment> segments;
  std::vector<SmartTitle> smart_titles;

  friend bool operator==(const CleanVideoView&, const CleanVideoView&) = default;
};

/// Drops the description and every other platform field.
CleanVideoView project_clean(const VideoMeta& meta, std::vector<SubtitleCue> cues,
                             std::vector<SubtitleSegment> segments, std::vector<SmartTitle> titles);

nlohmann::ordered_json clean_view_json(const CleanVideoView& view);

inline constexpr const char* kSafetyPolicyEnv = "EVL_SAFETY_POLICY";

enum class SafetyAction { exclude, redact };

struct BlockedTerm {
  std::string term;
  std::string category;
};

struct SafetyPolicy {
  SafetyAction action = SafetyAction::exclude;
  std::vector<BlockedTerm> terms;

  /// A policy with no terms is disabled.
  bool enabled() const { return !terms.empty(); }

  /// {"action": "exclude"|"redact", "terms": [{"term", "category"}]}.
  /// Throws std::invalid_argument on a malformed document.
  static SafetyPolicy parse(const nlohmann::json& doc);
  static SafetyPolicy load(const std::filesystem::path& file);
};

struct ScreenVerdict {
  enum class Outcome { pass, excluded, redacted };

  Outcome outcome = Outcome::pass;
  /// exclude: the first offending term, its category, and where it was found.
  std::string term;
  std::string category;
  std::string field;  // "title", "cue", "smart_title", "segment_title"
  std::optional<std::size_t> cue_index;
  /// redact: the view with every match masked.
  std::optional<CleanVideoView> view;
};

/// Word-bounded, case-insensitive screen of the title, cue text, smart-title
/// terms and segment titles. Matching text is masked with one U+25A0 per code
/// point when redacting.
ScreenVerdict safety_screen(const CleanVideoView& view, const SafetyPolicy& policy);

/// Masks every blocked term in `s`; returns s unchanged when nothing matches.
std::string redact_text(std::string_view s, const SafetyPolicy& policy);

/// Shared, swappable policy. Readers hold a snapshot; reload replaces it whole.
class PolicyHolder {
 public:
  explicit PolicyHolder(SafetyPolicy initial = {});

  std::shared_ptr<const SafetyPolicy> get() const;
  void set(SafetyPolicy policy);
  /// Loads `file` and swaps it in. On error the old policy stays and the
  /// exception propagates.
  void reload(const std::filesystem::path& file);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const SafetyPolicy> policy_;
};

}  // namespace evl
