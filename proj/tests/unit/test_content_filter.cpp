#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "evl/content_filter.hpp"
#include "evl/text.hpp"
#include "support/oracles.hpp"

using namespace evl;
namespace fs = std::filesystem;

namespace {

VideoMeta sample_meta() {
  return {"abc", "History lessons", 120'000, "https://i.ytimg.com/vi/abc/default.jpg", true,
          "Subscribe to my channel! Sponsored by ads. Like and comment."};
}

CleanVideoView sample_view(std::vector<std::string> cue_texts) {
  std::vector<SubtitleCue> cues;
  Millis t = 0;
  for (std::size_t i = 0; i < cue_texts.size(); ++i, t += 2000) cues.push_back({i, t, t + 1500, cue_texts[i]});
  std::vector<SubtitleSegment> segs;
  if (!cues.empty()) segs.push_back({0, 0, cues.size(), 0, cues.back().end_ms, "history"});
  return project_clean(sample_meta(), cues, segs, {{"history", 100}});
}

SafetyPolicy policy(SafetyAction action, std::vector<BlockedTerm> terms) { return {action, std::move(terms)}; }

}  // namespace

TEST_CASE("project_clean keeps exactly the six whitelisted fields") {
  const auto view = sample_view({"one", "two"});
  const auto j = clean_view_json(view);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"video_id", "title", "duration_ms", "cues", "segments", "smart_titles"});
  CHECK(j.dump().find("Subscribe") == std::string::npos);
  CHECK(oracle::blocked_keys(j).empty());
}

TEST_CASE("project_clean is a verbatim projection") {
  const auto meta = sample_meta();
  const std::vector<SubtitleCue> cues = {{0, 0, 10, "a"}, {1, 20, 30, "b"}};
  const std::vector<SubtitleSegment> segs = {{0, 0, 2, 0, 30, "seg"}};
  const std::vector<SmartTitle> titles = {{"a", 60}, {"b", 40}};
  const auto v = project_clean(meta, cues, segs, titles);
  CHECK(v.video_id == meta.video_id);
  CHECK(v.title == meta.title);
  CHECK(v.duration_ms == meta.duration_ms);
  CHECK(v.cues == cues);
  CHECK(v.segments == segs);
  CHECK(v.smart_titles == titles);
}

TEST_CASE("the key-scan oracle does flag engagement keys") {
  const auto doc = nlohmann::json::parse(R"({"a":[{"likeCount":1}],"channel_title":"x","ok":{"ads":[]}})");
  CHECK(oracle::blocked_keys(doc).size() == 3);
}

TEST_CASE("safety_screen: disabled policy passes") {
  const auto v = safety_screen(sample_view({"history of narcotics trade"}), {});
  CHECK(v.outcome == ScreenVerdict::Outcome::pass);
}

TEST_CASE("safety_screen: exclude reports the first offending term and cue") {
  const auto view = sample_view({"welcome", "history of narcotics trade", "narcotics again"});
  const auto v = safety_screen(view, policy(SafetyAction::exclude, {{"narcotics", "narcotics"}}));
  CHECK(v.outcome == ScreenVerdict::Outcome::excluded);
  CHECK(v.term == "narcotics");
  CHECK(v.category == "narcotics");
  CHECK(v.field == "cue");
  REQUIRE(v.cue_index.has_value());
  CHECK(*v.cue_index == 1);
  CHECK_FALSE(v.view.has_value());
}

TEST_CASE("safety_screen: redact masks per code point and keeps timings") {
  const auto view = sample_view({"welcome", "history of narcotics trade"});
  const auto v = safety_screen(view, policy(SafetyAction::redact, {{"narcotics", "narcotics"}}));
  REQUIRE(v.outcome == ScreenVerdict::Outcome::redacted);
  REQUIRE(v.view.has_value());
  CHECK(v.view->cues[1].text == "history of ■■■■■■■■■ trade");
  CHECK(v.view->cues[0].text == "welcome");
  REQUIRE(v.view->cues.size() == view.cues.size());
  for (std::size_t i = 0; i < view.cues.size(); ++i) {
    CHECK(v.view->cues[i].index == view.cues[i].index);
    CHECK(v.view->cues[i].start_ms == view.cues[i].start_ms);
    CHECK(v.view->cues[i].end_ms == view.cues[i].end_ms);
  }
  CHECK(redact_text("Café is CLOSED", policy(SafetyAction::redact, {{"café", "x"}})) == "■■■■ is CLOSED");
}

TEST_CASE("matching is word-bounded and case-insensitive") {
  const auto p = policy(SafetyAction::exclude, {{"class", "x"}});
  CHECK(safety_screen(sample_view({"classroom classics"}), p).outcome == ScreenVerdict::Outcome::pass);
  CHECK(safety_screen(sample_view({"a CLASS act"}), p).outcome == ScreenVerdict::Outcome::excluded);
}

TEST_CASE("title, smart titles and segment titles are screened too") {
  auto view = sample_view({"fine"});
  auto p = policy(SafetyAction::exclude, {{"lessons", "x"}});
  CHECK(safety_screen(view, p).field == "title");
  view.title = "ok";
  view.smart_titles = {{"bad word", 100}};
  CHECK(safety_screen(view, policy(SafetyAction::exclude, {{"bad", "x"}})).field == "smart_title");
  view.smart_titles.clear();
  view.segments[0].title = "bad";
  CHECK(safety_screen(view, policy(SafetyAction::exclude, {{"bad", "x"}})).field == "segment_title");
}

TEST_CASE("pass verdicts and redacted views have no matches left (independent scan)") {
  const std::vector<std::string> vocab = {"drug", "drugs", "war", "hate", "peace", "museum", "Drug-war", "warm",
                                          "hateful", "é", "trade"};
  const std::vector<std::string> blocked = {"drug", "hate", "drug war"};
  std::vector<BlockedTerm> terms;
  for (const auto& b : blocked) terms.push_back({b, "criminal"});
  std::mt19937 rng(17);
  for (int round = 0; round < 300; ++round) {
    std::vector<std::string> texts;
    for (int c = 0; c < 4; ++c) {
      std::string s;
      for (int w = 0, n = 1 + rng() % 6; w < n; ++w) s += vocab[rng() % vocab.size()] + (rng() % 3 ? " " : ", ");
      texts.push_back(s);
    }
    const auto view = sample_view(texts);
    auto scan = [&](const CleanVideoView& v) {
      std::size_t n = oracle::all_word_matches(v.title, blocked).size();
      for (const auto& c : v.cues) n += oracle::all_word_matches(c.text, blocked).size();
      for (const auto& t : v.smart_titles) n += oracle::all_word_matches(t.term, blocked).size();
      for (const auto& s : v.segments) n += oracle::all_word_matches(s.title, blocked).size();
      return n;
    };
    const auto ex = safety_screen(view, policy(SafetyAction::exclude, terms));
    CHECK((ex.outcome == ScreenVerdict::Outcome::pass) == (scan(view) == 0));
    const auto red = safety_screen(view, policy(SafetyAction::redact, terms));
    if (red.outcome == ScreenVerdict::Outcome::redacted) {
      CHECK(scan(*red.view) == 0);
      for (std::size_t i = 0; i < view.cues.size(); ++i) {
        CHECK(text::codepoint_length(red.view->cues[i].text) == text::codepoint_length(view.cues[i].text));
      }
    } else {
      CHECK(scan(view) == 0);
    }
  }
}

TEST_CASE("policy parsing") {
  const auto p = SafetyPolicy::parse(nlohmann::json::parse(
      R"({"action":"redact","terms":[{"term":"  Narcotics ","category":"Narcotics"}]})"));
  CHECK(p.action == SafetyAction::redact);
  REQUIRE(p.terms.size() == 1);
  CHECK(p.terms[0].term == "Narcotics");
  CHECK(p.terms[0].category == "narcotics");
  CHECK_FALSE(SafetyPolicy::parse(nlohmann::json::parse(R"({"action":"exclude","terms":[]})")).enabled());
  CHECK_THROWS_AS(SafetyPolicy::parse(nlohmann::json::parse(R"({"action":"block"})")), std::invalid_argument);
  CHECK_THROWS_AS(SafetyPolicy::parse(nlohmann::json::parse(R"({"terms":[{"term":" "}]})")), std::invalid_argument);
  CHECK_THROWS_AS(SafetyPolicy::parse(nlohmann::json::parse(R"({"terms":"x"})")), std::invalid_argument);
  CHECK_THROWS_AS(SafetyPolicy::load("/nonexistent/policy.json"), std::invalid_argument);
}

TEST_CASE("the shipped default policy is empty and disabled") {
  const auto p = SafetyPolicy::load(fs::path(EVL_SOURCE_DIR) / "config" / "safety_policy.json");
  CHECK_FALSE(p.enabled());
}

TEST_CASE("policy hot swap replaces the whole policy") {
  const auto dir = fs::temp_directory_path() / "evl_policy_test";
  fs::create_directories(dir);
  const auto file = dir / "p.json";
  std::ofstream(file) << R"({"action":"redact","terms":[{"term":"war","category":"x"}]})";

  PolicyHolder holder;
  const auto before = holder.get();
  std::atomic<bool> stop{false};
  std::thread reader([&] {
    while (!stop) {
      const auto p = holder.get();
      CHECK((p->terms.empty() || (p->terms.size() == 1 && p->action == SafetyAction::redact)));
    }
  });
  for (int i = 0; i < 50; ++i) {
    holder.reload(file);
    holder.set({});
  }
  holder.reload(file);
  stop = true;
  reader.join();
  CHECK(holder.get()->enabled());
  CHECK_FALSE(before->enabled());

  std::ofstream(file) << "{ not json";
  CHECK_THROWS(holder.reload(file));
  CHECK(holder.get()->enabled());
  fs::remove_all(dir);
}
