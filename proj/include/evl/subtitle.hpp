#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace evl {

using Millis = std::int64_t;

inline constexpr Millis kDefaultGapThresholdMs = 4000;

/// One time-coded subtitle unit. The interval is half-open: [start_ms, end_ms).
struct SubtitleCue {
  std::size_t index = 0;
  Millis start_ms = 0;
  Millis end_ms = 0;
  std::string text;

  friend bool operator==(const SubtitleCue&, const SubtitleCue&) = default;
};

/// A contiguous run of cues. Member cues are [first_cue, first_cue + cue_count).
struct SubtitleSegment {
  std::size_t segment_index = 0;
  std::size_t first_cue = 0;
  std::size_t cue_count = 0;
  Millis start_ms = 0;
  Millis end_ms = 0;
  std::string title;

  std::size_t end_cue() const { return first_cue + cue_count; }

  friend bool operator==(const SubtitleSegment&, const SubtitleSegment&) = default;
};

enum class SubtitleFormat { srt, vtt };

std::string_view format_name(SubtitleFormat f);

class SubtitleError : public std::runtime_error {
 public:
  enum class Kind { malformed_timestamp, inverted_range, missing_signature };

  SubtitleError(Kind kind, std::size_t line, const std::string& detail);

  Kind kind() const { return kind_; }
  /// 1-based line number of the offending line.
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

std::string_view kind_name(SubtitleError::Kind kind);

std::vector<SubtitleCue> parse_srt(std::string_view document);
std::vector<SubtitleCue> parse_vtt(std::string_view document);
std::vector<SubtitleCue> parse_subtitle(std::string_view document, SubtitleFormat format);

/// Guesses the format from the document body (WEBVTT signature or not).
SubtitleFormat sniff_format(std::string_view document);

/// Canonical SRT rendering; parse_srt(to_srt(cues)) == cues for parsed input.
std::string to_srt(std::span<const SubtitleCue> cues);
std::string to_vtt(std::span<const SubtitleCue> cues);

std::string format_srt_timestamp(Millis ms);

/// Answers "which cue is active at t" in O(log n). Holds a reference to the
/// cue list, which must outlive it.
class CueIndex {
 public:
  explicit CueIndex(std::span<const SubtitleCue> cues);

  /// Earliest-starting cue whose [start, end) contains t_ms.
  std::optional<std::size_t> at(Millis t_ms) const;

 private:
  std::span<const SubtitleCue> cues_;
  std::vector<Millis> running_max_end_;
};

std::optional<std::size_t> cue_at(std::span<const SubtitleCue> cues, Millis t_ms);

/// A new segment starts whenever next.start_ms minus the latest end seen so far
/// in the current segment exceeds gap_threshold_ms.
std::vector<SubtitleSegment> segment_cues(std::span<const SubtitleCue> cues,
                                          Millis gap_threshold_ms = kDefaultGapThresholdMs);

/// Plain text of a segment's cues, joined by single spaces.
std::string segment_text(std::span<const SubtitleCue> cues, const SubtitleSegment& segment);

void to_json(nlohmann::json& j, const SubtitleCue& cue);
void from_json(const nlohmann::json& j, SubtitleCue& cue);
nlohmann::ordered_json cue_json(const SubtitleCue& cue);
nlohmann::ordered_json segment_json(const SubtitleSegment& segment);

}  // namespace evl
