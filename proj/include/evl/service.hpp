#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evl/config.hpp"
#include "evl/content_filter.hpp"
#include "evl/graph_builder.hpp"
#include "evl/notes.hpp"

namespace evl {

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

struct ServiceStats {
  std::size_t video_hits = 0;
  std::size_t video_misses = 0;
  std::size_t graph_hits = 0;
  std::size_t graph_misses = 0;
};

/// The HTTP API without sockets: every route is a pure function of the
/// request, the upstream replies, and the notes store.
///
///   GET    /search?q=&n=
///   GET    /video/{id}
///   GET    /video/{id}/segment/{k}/graph
///   GET    /video/{id}/cue_at?t=
///   GET    /video/{id}/notes
///   POST   /video/{id}/notes          {"t_ms": int, "text": str}
///   DELETE /video/{id}/notes/{note_id}
///   GET    /health
class Service {
 public:
  Service(SessionConfig config, Pipeline pipeline, std::shared_ptr<NotesStore> notes,
          std::shared_ptr<PolicyHolder> policy);

  /// Pipeline, notes store and policy from the config.
  static std::unique_ptr<Service> create(const SessionConfig& config, bool record = false);

  ApiResponse handle(const ApiRequest& request);

  /// Receives one JSON line per handled request.
  void set_request_log(std::function<void(const std::string&)> sink);

  ServiceStats stats() const;
  const SessionConfig& config() const { return config_; }
  const Pipeline& pipeline() const { return pipeline_; }
  PolicyHolder& policy() { return *policy_; }

 private:
  struct VideoState;

  ApiResponse route(const ApiRequest& request);
  ApiResponse search(const ApiRequest& request);
  ApiResponse video(const std::string& id);
  ApiResponse graph(const std::string& id, const std::string& segment);
  ApiResponse cue_at(const std::string& id, const ApiRequest& request);
  ApiResponse list_notes(const std::string& id);
  ApiResponse add_note(const std::string& id, const std::string& body);
  ApiResponse delete_note(const std::string& id, const std::string& note_id);

  std::shared_ptr<const VideoState> video_state(const std::string& id);
  /// The view after screening; throws a 451 refusal when excluded.
  CleanVideoView screened_view(const VideoState& state, const SafetyPolicy& policy) const;
  std::shared_ptr<const EntityGraph> segment_graph(const std::string& id, const VideoState& state, std::size_t k);

  SessionConfig config_;
  std::string fingerprint_;
  Pipeline pipeline_;
  std::shared_ptr<NotesStore> notes_;
  std::shared_ptr<PolicyHolder> policy_;

  mutable std::mutex cache_mutex_;
  std::map<std::string, std::shared_ptr<const VideoState>> videos_;
  std::map<std::string, std::shared_ptr<const EntityGraph>> graphs_;
  std::atomic<std::size_t> video_hits_{0}, video_misses_{0}, graph_hits_{0}, graph_misses_{0};

  std::mutex log_mutex_;
  std::function<void(const std::string&)> log_;
};

/// Splits "/a/b?x=1&y=2" into a path and percent-decoded query parameters.
ApiRequest parse_target(std::string method, std::string_view target, std::string body = {});

}  // namespace evl
