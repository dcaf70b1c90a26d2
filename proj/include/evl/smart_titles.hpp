#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace evl {

inline constexpr double kDefaultRelevanceThreshold = 0.2;

struct SmartTitle {
  std::string term;
  double weight_percent = 0;

  friend bool operator==(const SmartTitle&, const SmartTitle&) = default;
};

nlohmann::ordered_json smart_title_json(const SmartTitle& t);

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::set<std::string, std::less<>> words);

  /// The built-in English list.
  static const StopwordSet& english();
  /// One word per line, UTF-8. Blank lines and lines starting with '#' are skipped.
  static StopwordSet load(const std::filesystem::path& file);

  bool contains(std::string_view lowered_word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

/// Lightweight English suffix stripping (plural s/es/ies, -ing, -ed).
std::string stem(std::string_view lowered_word);

enum class TermWeighting {
  frequency,         // score = count
  frequency_length,  // score = count * log(1 + term length)
};

struct TopicOptions {
  TermWeighting weighting = TermWeighting::frequency_length;
  /// Also score adjacent word pairs not separated by punctuation.
  bool bigrams = true;
};

/// Seam for swapping in a heavier topic model.
class TopicModel {
 public:
  virtual ~TopicModel() = default;
  virtual std::vector<SmartTitle> topics(std::string_view text, std::size_t top_n) const = 0;
};

/// Deterministic term scorer over stemmed unigrams (and optionally bigrams).
/// Each term is displayed in its most frequent lowercase surface form.
class FrequencyTopicModel final : public TopicModel {
 public:
  explicit FrequencyTopicModel(const StopwordSet& stopwords = StopwordSet::english(), TopicOptions options = {});

  std::vector<SmartTitle> topics(std::string_view text, std::size_t top_n) const override;

 private:
  const StopwordSet* stopwords_;
  TopicOptions options_;
};

/// Top-n topic terms with weights renormalized to sum to 100, sorted by
/// weight descending then term ascending. top_n must be >= 1.
std::vector<SmartTitle> extract_topics(std::string_view full_text, std::size_t top_n,
                                       const StopwordSet& stopwords = StopwordSet::english(),
                                       TopicOptions options = {});

/// The segment's top topic term; falls back to its first four non-stopword
/// words; empty when the segment has no content words.
std::string title_segment(std::string_view segment_text, const StopwordSet& stopwords = StopwordSet::english());

/// Fraction of the title's distinct content words whose stems occur among the
/// topic terms' word stems. 0 for an empty title or no topics.
double relevance_check(std::string_view video_title, const std::vector<SmartTitle>& topics,
                       const StopwordSet& stopwords = StopwordSet::english());

}  // namespace evl
