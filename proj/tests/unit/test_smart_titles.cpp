#include <doctest.h>

#include <numeric>
#include <random>

#include "evl/smart_titles.hpp"
#include "support/oracles.hpp"

using namespace evl;

namespace {

const TopicOptions kPureFrequency{TermWeighting::frequency, false};

double weight_sum(const std::vector<SmartTitle>& ts) {
  return std::accumulate(ts.begin(), ts.end(), 0.0, [](double acc, const SmartTitle& t) { return acc + t.weight_percent; });
}

}  // namespace

TEST_CASE("extract_topics: documented examples") {
  CHECK(extract_topics("", 5).empty());
  CHECK(extract_topics("the of and", 5).empty());
  CHECK_THROWS_AS(extract_topics("x", 0), std::invalid_argument);

  const auto topics = extract_topics("coronavirus vaccine coronavirus", 2, StopwordSet::english(), kPureFrequency);
  REQUIRE(topics.size() == 2);
  CHECK(topics[0].term == "coronavirus");
  CHECK(topics[0].weight_percent == doctest::Approx(66.67).epsilon(0.0001));
  CHECK(topics[1].term == "vaccine");
  CHECK(topics[1].weight_percent == doctest::Approx(33.33).epsilon(0.0001));
}

TEST_CASE("pure frequency scoring matches a brute-force word counter") {
  const std::vector<std::string> vocab = {"virus", "vaccine", "trial", "zoom", "election", "cricket", "recipe"};
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(1, 40);
  for (int round = 0; round < 100; ++round) {
    std::string text;
    for (int i = 0, n = len(rng); i < n; ++i) text += vocab[pick(rng)] + " ";
    const auto counts = oracle::word_counts(text);
    int total = 0;
    for (const auto& [w, c] : counts) total += c;
    const auto topics = extract_topics(text, vocab.size(), StopwordSet::english(), kPureFrequency);
    REQUIRE(topics.size() == counts.size());
    for (const auto& t : topics) {
      REQUIRE(counts.contains(t.term));
      CHECK(t.weight_percent == doctest::Approx(100.0 * counts.at(t.term) / total));
    }
  }
}

TEST_CASE("default scorer weights longer terms and includes bigrams") {
  const auto topics = extract_topics("Joe Biden won. Joe Biden spoke.", 10);
  REQUIRE_FALSE(topics.empty());
  CHECK(topics[0].term == "joe biden");
  CHECK(weight_sum(topics) == doctest::Approx(100.0));
  for (std::size_t i = 1; i < topics.size(); ++i) {
    const bool ordered = topics[i - 1].weight_percent > topics[i].weight_percent ||
                         (topics[i - 1].weight_percent == topics[i].weight_percent && topics[i - 1].term < topics[i].term);
    CHECK(ordered);
  }
}

TEST_CASE("punctuation breaks bigrams") {
  const auto topics = extract_topics("zoom. classroom", 10);
  for (const auto& t : topics) CHECK(t.term.find(' ') == std::string::npos);
}

TEST_CASE("stemmer folds simple inflections") {
  CHECK(stem("vaccines") == "vaccine");
  CHECK(stem("coronavirus") == "coronavirus");
  CHECK(stem("classes") == "class");
  CHECK(stem("stories") == "story");
  CHECK(stem("running") == "run");
  CHECK(stem("stopped") == "stop");
  CHECK(stem("calling") == "call");
  CHECK(stem("tested") == "test");
  CHECK(stem("analysis") == "analysis");
  CHECK(stem("news") == "new");
}

TEST_CASE("inflected forms merge and display their most frequent surface") {
  const auto topics = extract_topics("vaccines vaccine vaccines", 1, StopwordSet::english(), kPureFrequency);
  REQUIRE(topics.size() == 1);
  CHECK(topics[0].term == "vaccines");
  CHECK(topics[0].weight_percent == doctest::Approx(100.0));
}

TEST_CASE("title_segment: documented examples") {
  CHECK(title_segment("") == "");
  CHECK(title_segment("coronavirus vaccine coronavirus trials begin") == "coronavirus");
  CHECK(title_segment("and the of it is") == "");
  CHECK(title_segment("7 8 9 10 11") == "7 8 9 10");
}

TEST_CASE("relevance_check: documented examples and bounds") {
  CHECK(relevance_check("", {{"coronavirus", 100}}) == 0.0);
  CHECK(relevance_check("Coronavirus update", {}) == 0.0);
  CHECK(relevance_check("Coronavirus update", {{"coronavirus", 60}, {"update", 40}}) == 1.0);
  CHECK(relevance_check("Coronavirus update", {{"coronavirus", 100}}) == 0.5);
  CHECK(relevance_check("Coronavirus updates", {{"covid update", 100}}) == 0.5);
}

TEST_CASE("relevance_check is monotone as topics are added") {
  const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  for (int round = 0; round < 100; ++round) {
    const std::string title = vocab[pick(rng)] + " " + vocab[pick(rng)] + " " + vocab[pick(rng)];
    std::vector<SmartTitle> topics;
    double last = 0;
    for (int k = 0; k < 6; ++k) {
      topics.push_back({vocab[pick(rng)], 1});
      const double r = relevance_check(title, topics);
      CHECK(r >= last);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      last = r;
    }
  }
}

TEST_CASE("custom stopword sets") {
  const StopwordSet custom({"zoom"});
  CHECK(extract_topics("zoom zoom", 3, custom).empty());
  CHECK(extract_topics("the the", 3, custom, kPureFrequency).size() == 1);
}
