#pragma once

// Independent brute-force reference implementations. Nothing here may call
// into the code paths it is used to check.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "evl/graph_builder.hpp"
#include "evl/subtitle.hpp"

namespace evl::oracle {

inline std::optional<std::size_t> linear_cue_at(const std::vector<SubtitleCue>& cues, Millis t) {
  std::optional<std::size_t> best;
  for (const auto& c : cues) {
    if (c.start_ms <= t && t < c.end_ms) {
      if (!best || c.start_ms < cues[*best].start_ms) best = c.index;
    }
  }
  return best;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

/// Every word-bounded, case-insensitive occurrence of every term, as
/// (byte start, byte end, term index). Quadratic on purpose.
struct Match {
  std::size_t start, end, term;
};

inline std::vector<Match> all_word_matches(const std::string& text,
                                           const std::vector<std::string>& terms) {
  std::vector<Match> out;
  const std::string lt = lower(text);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string needle = lower(terms[t]);
    if (needle.empty()) continue;
    for (std::size_t i = 0; i + needle.size() <= lt.size(); ++i) {
      if (lt.compare(i, needle.size(), needle) != 0) continue;
      const std::size_t e = i + needle.size();
      if (i > 0 && word_char(lt[i - 1])) continue;
      if (e < lt.size() && word_char(lt[e])) continue;
      out.push_back({i, e, t});
    }
  }
  return out;
}

/// Leftmost-longest resolution over the exhaustive match set.
inline std::vector<Match> leftmost_longest(std::vector<Match> all) {
  std::sort(all.begin(), all.end(), [](const Match& a, const Match& b) {
    if (a.start != b.start) return a.start < b.start;
    return (a.end - a.start) > (b.end - b.start);
  });
  std::vector<Match> kept;
  for (const auto& m : all) {
    if (!kept.empty() && m.start < kept.back().end) continue;
    kept.push_back(m);
  }
  return kept;
}

/// Plain unigram counter for frequency-scored topic checks.
inline std::map<std::string, int> word_counts(const std::string& text) {
  std::map<std::string, int> counts;
  std::regex word("[A-Za-z0-9]+");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), word); it != std::sregex_iterator();
       ++it) {
    ++counts[lower(it->str())];
  }
  return counts;
}

/// Smallest-denominator integer triple reproducing three percentages within tol.
struct Triple {
  int a, b, c, total;
};

inline std::optional<Triple> brute_denominator(double pa, double pb, double pc, int max_den, double tol) {
  for (int d = 1; d <= max_den; ++d)
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) {
        const int c = d - a - b;
        const double qa = 100.0 * a / d, qb = 100.0 * b / d, qc = 100.0 * c / d;
        if (std::abs(qa - pa) <= tol && std::abs(qb - pb) <= tol && std::abs(qc - pc) <= tol)
          return Triple{a, b, c, d};
      }
  return std::nullopt;
}

/// Splits a JSON key into lowercase words on '_', '-', '.' and camelCase humps.
inline std::vector<std::string> key_words(const std::string& key) {
  std::vector<std::string> words;
  std::string cur;
  for (std::size_t i = 0; i < key.size(); ++i) {
    const char c = key[i];
    if (c == '_' || c == '-' || c == '.' || c == ' ') {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(c)) && !cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
    cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

/// Every object key anywhere in `doc` that names engagement or promotion data.
inline std::vector<std::string> blocked_keys(const nlohmann::json& doc) {
  static const std::vector<std::string> banned = {
      "comment", "comments", "like", "likes", "dislike", "dislikes", "recommendation", "recommendations",
      "recommended", "channel", "channels", "subscribe", "subscribers", "subscription", "ad",
      "ads", "advert", "advertisement", "sponsor", "sponsored", "playlist", "playlists", "rating", "ratings"};
  std::vector<std::string> found;
  if (doc.is_object()) {
    for (const auto& [k, v] : doc.items()) {
      for (const auto& w : key_words(k)) {
        if (std::find(banned.begin(), banned.end(), w) != banned.end()) {
          found.push_back(k);
          break;
        }
      }
      const auto nested = blocked_keys(v);
      found.insert(found.end(), nested.begin(), nested.end());
    }
  } else if (doc.is_array()) {
    for (const auto& v : doc) {
      const auto nested = blocked_keys(v);
      found.insert(found.end(), nested.begin(), nested.end());
    }
  }
  return found;
}

// Forest of depth-1 stars with the role/color bijection; returns "" when valid.
inline std::string star_forest_violation(const EntityGraph& g) {
  std::map<std::string, const GraphNode*> by_id;
  for (const auto& n : g.nodes) {
    if (!by_id.emplace(n.node_id, &n).second) return "duplicate id " + n.node_id;
    const bool ok = (n.role == NodeRole::parent) == (n.color() == ColorRole::blue) &&
                    (n.role == NodeRole::related) == (n.color() == ColorRole::green) &&
                    (n.role == NodeRole::label) == (n.color() == ColorRole::pink);
    if (!ok) return "role/color mismatch";
  }
  std::map<std::string, int> indegree;
  for (const auto& e : g.edges) {
    if (!by_id.contains(e.from) || !by_id.contains(e.to)) return "dangling edge";
    if (by_id[e.from]->role != NodeRole::parent) return "edge from non-parent";
    if (by_id[e.to]->role == NodeRole::parent) return "edge into parent";
    ++indegree[e.to];
  }
  for (const auto& n : g.nodes) {
    const int d = indegree[n.node_id];
    if (n.role == NodeRole::parent && d != 0) return "parent with incoming edge";
    if (n.role != NodeRole::parent && d != 1) return "child without exactly one parent";
  }
  return "";
}

}  // namespace evl::oracle
