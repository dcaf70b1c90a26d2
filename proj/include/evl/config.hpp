#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "evl/annotator.hpp"
#include "evl/enrichment.hpp"
#include "evl/subtitle.hpp"
#include "evl/transport.hpp"
#include "evl/video_search.hpp"

namespace evl {

enum class RunMode { live, replay };

struct SessionConfig {
  Millis gap_threshold_ms = kDefaultGapThresholdMs;
  std::size_t top_n_topics = 5;
  std::size_t related_limit = 6;
  double min_confidence = 0.5;
  double relevance_threshold = 0.2;
  std::size_t max_results = kDefaultMaxResults;
  std::optional<std::filesystem::path> safety_policy;
  SourceSet sources = SourceSet::all();

  RunMode mode = RunMode::replay;
  /// Replay: the recorded interactions. Live: where --record writes them.
  std::optional<std::filesystem::path> fixture_dir;
  std::optional<std::filesystem::path> cache_dir;
  /// SQLite file for notes; unset keeps notes in memory.
  std::optional<std::filesystem::path> notes_db;

  /// "gazetteer" or "textrazor".
  std::string annotator = "gazetteer";
  /// Defaults to <fixture_dir>/gazetteer.json.
  std::optional<std::filesystem::path> gazetteer;

  double youtube_rate_per_second = 5.0;
  /// Clock used in replay mode, seconds since the epoch.
  std::int64_t replay_epoch = 1'600'000'000;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  /// Short hash over every field that changes response bodies.
  std::string fingerprint() const;

  /// Unknown keys are rejected so typos surface.
  static SessionConfig from_json(const nlohmann::json& doc);
  static SessionConfig load(const std::filesystem::path& file);
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

/// EVL_GAP_THRESHOLD_MS, EVL_TOP_N_TOPICS, EVL_RELATED_LIMIT, EVL_MIN_CONFIDENCE,
/// EVL_RELEVANCE_THRESHOLD, EVL_MAX_RESULTS, EVL_SAFETY_POLICY, EVL_SOURCES
/// (comma list), EVL_MODE, EVL_FIXTURE_DIR, EVL_CACHE_DIR, EVL_NOTES_DB,
/// EVL_ANNOTATOR, EVL_GAZETTEER.
void apply_env(SessionConfig& config, const EnvLookup& env = process_env());

nlohmann::ordered_json config_json(const SessionConfig& config);

/// Everything the video pipeline talks to.
struct Pipeline {
  std::shared_ptr<Transport> transport;
  std::shared_ptr<VideoClient> videos;
  std::shared_ptr<Annotator> annotator;
  ClientSet knowledge;
  std::shared_ptr<EnrichmentCache> cache;
  Clock clock;
};

/// Builds the transport (replay from fixture_dir, or live) and every client.
/// With `record`, live traffic is captured and can be saved via
/// `save_recording`.
Pipeline make_pipeline(const SessionConfig& config, bool record = false);

/// Builds clients over a caller-supplied transport.
Pipeline make_pipeline(const SessionConfig& config, std::shared_ptr<Transport> transport);

/// Writes the interactions captured by a recording pipeline.
void save_recording(const Pipeline& pipeline, const std::filesystem::path& dir);

}  // namespace evl
