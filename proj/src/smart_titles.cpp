#include "evl/smart_titles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "evl/text.hpp"

namespace evl {

namespace {

constexpr std::string_view kEnglishStopwords[] = {
    "a", "about", "above", "after", "again", "against", "ago", "all", "almost", "also", "although",
    "always", "am", "among", "an", "and", "another", "any", "anyone", "anything", "are", "aren't",
    "around", "as", "at", "back", "be", "became", "because", "become", "been", "before", "being",
    "below", "between", "both", "but", "by", "can", "can't", "cannot", "could", "couldn't", "did",
    "didn't", "do", "does", "doesn't", "doing", "don't", "done", "down", "during", "each", "either",
    "else", "enough", "even", "ever", "every", "few", "first", "for", "from", "further", "get",
    "gets", "getting", "go", "goes", "going", "gonna", "got", "had", "hadn't", "has", "hasn't",
    "have", "haven't", "having", "he", "he'd", "he'll", "he's", "her", "here", "here's", "hers",
    "herself", "him", "himself", "his", "how", "how's", "however", "i", "i'd", "i'll", "i'm",
    "i've", "if", "in", "into", "is", "isn't", "it", "it's", "its", "itself", "just", "know",
    "let's", "like", "made", "make", "many", "may", "me", "might", "more", "most", "much", "must",
    "mustn't", "my", "myself", "never", "no", "nor", "not", "now", "of", "off", "oh", "ok",
    "okay", "on", "once", "one", "only", "or", "other", "others", "ought", "our", "ours",
    "ourselves", "out", "over", "own", "perhaps", "quite", "rather", "really", "right", "said",
    "same", "say", "says", "see", "seen", "shall", "shan't", "she", "she'd", "she'll", "she's",
    "should", "shouldn't", "since", "so", "some", "something", "still", "such", "than", "that",
    "that's", "the", "their", "theirs", "them", "themselves", "then", "there", "there's", "these",
    "they", "they'd", "they'll", "they're", "they've", "thing", "things", "think", "this", "those",
    "though", "through", "to", "too", "two", "um", "uh", "under", "until", "up", "upon", "us",
    "very", "want", "was", "wasn't", "way", "we", "we'd", "we'll", "we're", "we've", "well",
    "were", "weren't", "what", "what's", "when", "when's", "where", "where's", "whether", "which",
    "while", "who", "who's", "whom", "whose", "why", "why's", "will", "with", "within", "without",
    "won't", "would", "wouldn't", "yeah", "yes", "yet", "you", "you'd", "you'll", "you're",
    "you've", "your", "yours", "yourself", "yourselves",
};

bool is_number(std::string_view w) {
  return std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_consonant(char c) {
  return c >= 'a' && c <= 'z' && c != 'a' && c != 'e' && c != 'i' && c != 'o' && c != 'u';
}

std::string undouble(std::string s) {
  const auto n = s.size();
  if (n >= 2 && s[n - 1] == s[n - 2] && is_consonant(s[n - 1]) && s[n - 1] != 'l' && s[n - 1] != 's' &&
      s[n - 1] != 'z') {
    s.pop_back();
  }
  return s;
}

// A content word: lowercased token, possessive removed, not a stopword and
// not a bare number or single character.
struct Word {
  std::string surface;  // lowercased
  std::string stem;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::string lowered_token(std::string_view tok) {
  std::string w = text::ascii_lower(tok);
  if (w.ends_with("'s")) w.resize(w.size() - 2);
  return w;
}

std::vector<Word> all_words(std::string_view s) {
  std::vector<Word> out;
  for (const auto& t : text::tokenize(s)) {
    out.push_back({lowered_token(t.text), {}, t.offset, t.offset + t.text.size()});
  }
  return out;
}

bool is_content(const Word& w, const StopwordSet& stopwords) {
  return w.surface.size() >= 2 && !is_number(w.surface) && !stopwords.contains(w.surface);
}

// Words in a pair may be separated only by blanks or hyphens.
bool adjacent(std::string_view s, const Word& a, const Word& b) {
  for (std::size_t i = a.end; i < b.begin; ++i) {
    if (s[i] != ' ' && s[i] != '\t' && s[i] != '-') return false;
  }
  return true;
}

struct Candidate {
  std::size_t count = 0;
  std::map<std::string, std::size_t> surfaces;

  std::string display() const {
    // Most frequent surface; ties go to the lexicographically smallest.
    const auto best = std::max_element(surfaces.begin(), surfaces.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;
    });
    return best->first;
  }
};

}  // namespace

nlohmann::ordered_json smart_title_json(const SmartTitle& t) {
  return {{"term", t.term}, {"weight_percent", t.weight_percent}};
}

StopwordSet::StopwordSet(std::set<std::string, std::less<>> words) : words_(std::move(words)) {}

const StopwordSet& StopwordSet::english() {
  static const StopwordSet set = [] {
    std::set<std::string, std::less<>> words;
    for (const auto w : kEnglishStopwords) words.emplace(w);
    return StopwordSet(std::move(words));
  }();
  return set;
}

StopwordSet StopwordSet::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open stopword file " + file.string());
  std::set<std::string, std::less<>> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = text::trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(text::ascii_lower(w));
  }
  return StopwordSet(std::move(words));
}

bool StopwordSet::contains(std::string_view lowered_word) const { return words_.contains(lowered_word); }

std::string stem(std::string_view lowered) {
  std::string w(lowered);
  const auto n = w.size();
  if (n > 4 && w.ends_with("ies")) return w.substr(0, n - 3) + "y";
  if (n > 4 && (w.ends_with("sses") || w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes") ||
                w.ends_with("zes"))) {
    return w.substr(0, n - 2);
  }
  if (n > 3 && w.back() == 's') {
    const char prev = w[n - 2];
    if (prev != 's' && prev != 'u' && prev != 'i' && prev != '\'') return w.substr(0, n - 1);
    return w;
  }
  if (n > 5 && w.ends_with("ing")) return undouble(w.substr(0, n - 3));
  if (n > 4 && w.ends_with("ed") && !w.ends_with("eed")) return undouble(w.substr(0, n - 2));
  return w;
}

FrequencyTopicModel::FrequencyTopicModel(const StopwordSet& stopwords, TopicOptions options)
    : stopwords_(&stopwords), options_(options) {}

std::vector<SmartTitle> FrequencyTopicModel::topics(std::string_view text_in, std::size_t top_n) const {
  if (top_n == 0) throw std::invalid_argument("extract_topics: top_n must be >= 1");
  const std::string clean = text::sanitize_utf8(text_in);
  std::vector<Word> words = all_words(clean);
  for (auto& w : words) w.stem = stem(w.surface);

  std::map<std::string, Candidate> candidates;  // keyed by stem (or "stem stem")
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    if (!is_content(w, *stopwords_)) continue;
    auto& c = candidates[w.stem];
    ++c.count;
    ++c.surfaces[w.surface];
    if (options_.bigrams && i + 1 < words.size()) {
      const auto& next = words[i + 1];
      if (is_content(next, *stopwords_) && adjacent(clean, w, next)) {
        auto& pair = candidates[w.stem + " " + next.stem];
        ++pair.count;
        ++pair.surfaces[w.surface + " " + next.surface];
      }
    }
  }

  struct Scored {
    std::string term;
    double score;
  };
  std::vector<Scored> scored;
  for (const auto& [key, c] : candidates) {
    std::string term = c.display();
    double score = static_cast<double>(c.count);
    if (options_.weighting == TermWeighting::frequency_length) {
      score *= std::log1p(static_cast<double>(text::codepoint_length(term)));
    }
    scored.push_back({std::move(term), score});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (scored.size() > top_n) scored.resize(top_n);

  double total = 0;
  for (const auto& s : scored) total += s.score;
  std::vector<SmartTitle> out;
  out.reserve(scored.size());
  for (auto& s : scored) out.push_back({std::move(s.term), 100.0 * s.score / total});
  return out;
}

std::vector<SmartTitle> extract_topics(std::string_view full_text, std::size_t top_n, const StopwordSet& stopwords,
                                       TopicOptions options) {
  return FrequencyTopicModel(stopwords, options).topics(full_text, top_n);
}

std::string title_segment(std::string_view segment_text, const StopwordSet& stopwords) {
  const auto top = extract_topics(segment_text, 1, stopwords);
  if (!top.empty()) return top.front().term;
  std::vector<std::string> fallback;
  for (const auto& w : all_words(segment_text)) {
    if (w.surface.empty() || stopwords.contains(w.surface)) continue;
    fallback.push_back(w.surface);
    if (fallback.size() == 4) break;
  }
  return text::join(fallback, " ");
}

double relevance_check(std::string_view video_title, const std::vector<SmartTitle>& topics,
                       const StopwordSet& stopwords) {
  if (topics.empty()) return 0.0;
  std::set<std::string> title_stems;
  for (const auto& w : all_words(video_title)) {
    if (is_content(w, stopwords)) title_stems.insert(stem(w.surface));
  }
  if (title_stems.empty()) return 0.0;
  std::set<std::string> topic_stems;
  for (const auto& t : topics) {
    for (const auto& w : all_words(t.term)) topic_stems.insert(stem(w.surface));
  }
  std::size_t matched = 0;
  for (const auto& s : title_stems) matched += topic_stems.contains(s);
  return static_cast<double>(matched) / static_cast<double>(title_stems.size());
}

}  // namespace evl
