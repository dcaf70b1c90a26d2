#include "evl/subtitle.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cstdio>

#include "evl/text.hpp"

namespace evl {

namespace {

struct Line {
  std::string_view text;
  std::size_t number = 0;  // 1-based
};

std::vector<Line> split_lines(std::string_view doc) {
  std::vector<Line> lines;
  std::size_t number = 1;
  std::size_t start = 0;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (doc[i] == '\n' || doc[i] == '\r') {
      lines.push_back({doc.substr(start, i - start), number++});
      if (doc[i] == '\r' && i + 1 < doc.size() && doc[i + 1] == '\n') ++i;
      start = i + 1;
    }
  }
  if (start < doc.size()) lines.push_back({doc.substr(start), number});
  return lines;
}

using Block = std::vector<Line>;

std::vector<Block> split_blocks(const std::vector<Line>& lines, std::size_t from = 0) {
  std::vector<Block> blocks;
  Block current;
  for (std::size_t i = from; i < lines.size(); ++i) {
    if (text::is_blank(lines[i].text)) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(lines[i]);
    }
  }
  if (!current.empty()) blocks.push_back(std::move(current));
  return blocks;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<Millis> read_number(std::string_view s) {
  if (!all_digits(s)) return std::nullopt;
  Millis v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Parses [H+:]MM:SS<sep>mmm. `hours_required` selects the SRT shape, where
// the hour field is mandatory and exactly two or more digits.
std::optional<Millis> parse_timestamp(std::string_view ts, char ms_sep, bool hours_required) {
  const auto sep = ts.rfind(ms_sep);
  if (sep == std::string_view::npos) return std::nullopt;
  const auto millis = ts.substr(sep + 1);
  if (millis.size() != 3) return std::nullopt;
  const auto ms = read_number(millis);

  std::vector<std::string_view> fields;
  std::string_view clock = ts.substr(0, sep);
  while (true) {
    const auto colon = clock.find(':');
    fields.push_back(clock.substr(0, colon));
    if (colon == std::string_view::npos) break;
    clock.remove_prefix(colon + 1);
  }
  if (hours_required && fields.size() != 3) return std::nullopt;
  if (fields.size() != 2 && fields.size() != 3) return std::nullopt;

  Millis hours = 0;
  if (fields.size() == 3) {
    if (fields[0].size() < 2) return std::nullopt;
    const auto h = read_number(fields[0]);
    if (!h) return std::nullopt;
    hours = *h;
  }
  const auto& mm = fields[fields.size() - 2];
  const auto& ss = fields[fields.size() - 1];
  if (mm.size() != 2 || ss.size() != 2) return std::nullopt;
  const auto m = read_number(mm);
  const auto s = read_number(ss);
  if (!m || !s || !ms || *m > 59 || *s > 59) return std::nullopt;
  return ((hours * 60 + *m) * 60 + *s) * 1000 + *ms;
}

struct Timing {
  Millis start = 0;
  Millis end = 0;
};

Timing parse_timing(const Line& line, char ms_sep, bool hours_required, bool allow_settings) {
  const auto fail = [&]() -> SubtitleError {
    return {SubtitleError::Kind::malformed_timestamp, line.number,
            "bad timing line '" + std::string(line.text) + "'"};
  };
  const std::string_view body = text::trim(line.text);
  const auto arrow = body.find("-->");
  if (arrow == std::string_view::npos) throw fail();
  const std::string_view left = body.substr(0, arrow);
  std::string_view right = body.substr(arrow + 3);
  if (left.empty() || (left.back() != ' ' && left.back() != '\t')) throw fail();
  if (right.empty() || (right.front() != ' ' && right.front() != '\t')) throw fail();
  right = text::trim(right);
  std::string_view end_field = right;
  const auto space = right.find_first_of(" \t");
  if (space != std::string_view::npos) {
    if (!allow_settings) throw fail();
    end_field = right.substr(0, space);
  }
  const auto start = parse_timestamp(text::trim(left), ms_sep, hours_required);
  const auto end = parse_timestamp(end_field, ms_sep, hours_required);
  if (!start || !end) throw fail();
  if (*start >= *end) {
    throw SubtitleError(SubtitleError::Kind::inverted_range, line.number,
                        "cue starts at or after its end");
  }
  return {*start, *end};
}

std::string strip_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      const auto close = s.find('>', i + 1);
      if (close != std::string_view::npos) {
        i = close + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::string decode_vtt_entities(std::string_view s) {
  static constexpr std::pair<std::string_view, std::string_view> kEntities[] = {
      {"&amp;", "&"}, {"&lt;", "<"},   {"&gt;", ">"},   {"&nbsp;", " "},
      {"&lrm;", ""},  {"&rlm;", ""},   {"&quot;", "\""}, {"&apos;", "'"},
  };
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    bool replaced = false;
    if (s[i] == '&') {
      for (const auto& [name, value] : kEntities) {
        if (s.substr(i, name.size()) == name) {
          out += value;
          i += name.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(s[i++]);
  }
  return out;
}

std::string cue_text(const Block& block, std::size_t from, bool vtt) {
  std::string joined;
  for (std::size_t i = from; i < block.size(); ++i) {
    if (!joined.empty()) joined.push_back(' ');
    joined += strip_tags(block[i].text);
  }
  if (vtt) joined = decode_vtt_entities(joined);
  return text::collapse_whitespace(joined);
}

std::vector<SubtitleCue> finalize(std::vector<SubtitleCue> cues) {
  std::stable_sort(cues.begin(), cues.end(),
                   [](const SubtitleCue& a, const SubtitleCue& b) { return a.start_ms < b.start_ms; });
  for (std::size_t i = 0; i < cues.size(); ++i) cues[i].index = i;
  return cues;
}

bool starts_with_word(std::string_view line, std::string_view word) {
  if (!line.starts_with(word)) return false;
  return line.size() == word.size() || line[word.size()] == ' ' || line[word.size()] == '\t';
}

std::string format_timestamp(Millis ms, char sep) {
  const Millis h = ms / 3'600'000;
  const Millis m = (ms / 60'000) % 60;
  const Millis s = (ms / 1000) % 60;
  const Millis f = ms % 1000;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld%c%03lld", static_cast<long long>(h),
                static_cast<long long>(m), static_cast<long long>(s), sep, static_cast<long long>(f));
  return buf;
}

}  // namespace

SubtitleError::SubtitleError(Kind kind, std::size_t line, const std::string& detail)
    : std::runtime_error(std::string(kind_name(kind)) + " at line " + std::to_string(line) + ": " +
                         detail),
      kind_(kind),
      line_(line) {}

std::string_view kind_name(SubtitleError::Kind kind) {
  switch (kind) {
    case SubtitleError::Kind::malformed_timestamp: return "MalformedTimestamp";
    case SubtitleError::Kind::inverted_range: return "InvertedRange";
    case SubtitleError::Kind::missing_signature: return "MissingSignature";
  }
  return "SubtitleError";
}

std::string_view format_name(SubtitleFormat f) { return f == SubtitleFormat::srt ? "srt" : "vtt"; }

std::vector<SubtitleCue> parse_srt(std::string_view document) {
  const std::string doc = text::sanitize_utf8(document);
  const auto lines = split_lines(doc);
  std::vector<SubtitleCue> cues;
  for (const auto& block : split_blocks(lines)) {
    std::size_t timing_at = 0;
    if (all_digits(text::trim(block[0].text))) timing_at = 1;
    if (timing_at >= block.size()) {
      throw SubtitleError(SubtitleError::Kind::malformed_timestamp, block[0].number + 1,
                          "missing timing line");
    }
    const auto timing = parse_timing(block[timing_at], ',', true, false);
    std::string body = cue_text(block, timing_at + 1, false);
    if (body.empty()) continue;
    cues.push_back({0, timing.start, timing.end, std::move(body)});
  }
  return finalize(std::move(cues));
}

std::vector<SubtitleCue> parse_vtt(std::string_view document) {
  const std::string doc = text::sanitize_utf8(document);
  const auto lines = split_lines(doc);
  if (lines.empty() || !starts_with_word(lines[0].text, "WEBVTT")) {
    throw SubtitleError(SubtitleError::Kind::missing_signature, 1, "expected WEBVTT header");
  }
  // The header block runs up to the first blank line.
  std::size_t first = 1;
  while (first < lines.size() && !text::is_blank(lines[first].text)) ++first;

  std::vector<SubtitleCue> cues;
  for (const auto& block : split_blocks(lines, first)) {
    const std::string_view head = block[0].text;
    if (starts_with_word(head, "NOTE") || starts_with_word(head, "STYLE") ||
        starts_with_word(head, "REGION")) {
      continue;
    }
    std::size_t timing_at = head.find("-->") == std::string_view::npos ? 1 : 0;
    if (timing_at >= block.size()) {
      throw SubtitleError(SubtitleError::Kind::malformed_timestamp, block[0].number,
                          "block without timing line");
    }
    const auto timing = parse_timing(block[timing_at], '.', false, true);
    std::string body = cue_text(block, timing_at + 1, true);
    if (body.empty()) continue;
    cues.push_back({0, timing.start, timing.end, std::move(body)});
  }
  return finalize(std::move(cues));
}

SubtitleFormat sniff_format(std::string_view document) {
  if (document.starts_with("\xEF\xBB\xBF")) document.remove_prefix(3);
  return starts_with_word(document.substr(0, document.find_first_of("\r\n")), "WEBVTT")
             ? SubtitleFormat::vtt
             : SubtitleFormat::srt;
}

std::vector<SubtitleCue> parse_subtitle(std::string_view document, SubtitleFormat format) {
  return format == SubtitleFormat::srt ? parse_srt(document) : parse_vtt(document);
}

std::string format_srt_timestamp(Millis ms) { return format_timestamp(ms, ','); }

std::string to_srt(std::span<const SubtitleCue> cues) {
  std::string out;
  for (std::size_t i = 0; i < cues.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + '\n';
    out += format_timestamp(cues[i].start_ms, ',') + " --> " + format_timestamp(cues[i].end_ms, ',');
    out += '\n' + cues[i].text + '\n';
  }
  return out;
}

std::string to_vtt(std::span<const SubtitleCue> cues) {
  std::string out = "WEBVTT\n";
  for (const auto& cue : cues) {
    out += '\n' + format_timestamp(cue.start_ms, '.') + " --> " + format_timestamp(cue.end_ms, '.');
    out += '\n' + cue.text + '\n';
  }
  return out;
}

CueIndex::CueIndex(std::span<const SubtitleCue> cues) : cues_(cues) {
  running_max_end_.reserve(cues.size());
  Millis best = std::numeric_limits<Millis>::min();
  for (const auto& cue : cues) {
    best = std::max(best, cue.end_ms);
    running_max_end_.push_back(best);
  }
}

std::optional<std::size_t> CueIndex::at(Millis t_ms) const {
  // Cues are sorted by start, so the candidates are a prefix. The first cue
  // ending after t is where the running maximum end first exceeds t.
  const auto starts_after = std::upper_bound(
      cues_.begin(), cues_.end(), t_ms, [](Millis t, const SubtitleCue& c) { return t < c.start_ms; });
  const auto prefix = static_cast<std::size_t>(starts_after - cues_.begin());
  const auto first_open =
      std::upper_bound(running_max_end_.begin(), running_max_end_.begin() + prefix, t_ms);
  const auto i = static_cast<std::size_t>(first_open - running_max_end_.begin());
  if (i >= prefix) return std::nullopt;
  return cues_[i].index;
}

std::optional<std::size_t> cue_at(std::span<const SubtitleCue> cues, Millis t_ms) {
  return CueIndex(cues).at(t_ms);
}

std::vector<SubtitleSegment> segment_cues(std::span<const SubtitleCue> cues, Millis gap_threshold_ms) {
  if (gap_threshold_ms <= 0) throw std::invalid_argument("gap_threshold_ms must be positive");
  std::vector<SubtitleSegment> segments;
  for (std::size_t i = 0; i < cues.size(); ++i) {
    const auto& cue = cues[i];
    if (segments.empty() || cue.start_ms - segments.back().end_ms > gap_threshold_ms) {
      segments.push_back({segments.size(), i, 0, cue.start_ms, cue.end_ms, {}});
    }
    auto& seg = segments.back();
    ++seg.cue_count;
    seg.end_ms = std::max(seg.end_ms, cue.end_ms);
  }
  return segments;
}

std::string segment_text(std::span<const SubtitleCue> cues, const SubtitleSegment& segment) {
  std::string out;
  for (std::size_t i = segment.first_cue; i < segment.end_cue() && i < cues.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += cues[i].text;
  }
  return out;
}

void to_json(nlohmann::json& j, const SubtitleCue& cue) {
  j = nlohmann::json{{"index", cue.index}, {"start_ms", cue.start_ms}, {"end_ms", cue.end_ms},
                     {"text", cue.text}};
}

void from_json(const nlohmann::json& j, SubtitleCue& cue) {
  j.at("index").get_to(cue.index);
  j.at("start_ms").get_to(cue.start_ms);
  j.at("end_ms").get_to(cue.end_ms);
  j.at("text").get_to(cue.text);
}

nlohmann::ordered_json cue_json(const SubtitleCue& cue) {
  return {{"index", cue.index}, {"start_ms", cue.start_ms}, {"end_ms", cue.end_ms}, {"text", cue.text}};
}

nlohmann::ordered_json segment_json(const SubtitleSegment& segment) {
  auto indices = nlohmann::ordered_json::array();
  for (std::size_t i = segment.first_cue; i < segment.end_cue(); ++i) indices.push_back(i);
  return {{"segment_index", segment.segment_index},
          {"cue_indices", std::move(indices)},
          {"start_ms", segment.start_ms},
          {"end_ms", segment.end_ms},
          {"title", segment.title}};
}

}  // namespace evl
