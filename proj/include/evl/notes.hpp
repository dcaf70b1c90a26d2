#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evl/subtitle.hpp"

struct sqlite3;

namespace evl {

inline constexpr std::size_t kMaxNoteBytes = 4096;

struct Note {
  std::int64_t id = 0;
  Millis t_ms = 0;
  std::string text;

  friend bool operator==(const Note&, const Note&) = default;
};

nlohmann::ordered_json note_json(const Note& n);

/// Sticky notes per video in one SQLite file (or in memory). Thread-safe.
class NotesStore {
 public:
  /// nullopt opens a private in-memory database.
  explicit NotesStore(const std::optional<std::filesystem::path>& file = std::nullopt);
  ~NotesStore();

  NotesStore(const NotesStore&) = delete;
  NotesStore& operator=(const NotesStore&) = delete;

  Note add(const std::string& video_id, Millis t_ms, const std::string& text);
  /// Sorted by t_ms, then insertion order.
  std::vector<Note> list(const std::string& video_id) const;
  bool remove(const std::string& video_id, std::int64_t note_id);

 private:
  void exec(const char* sql) const;

  sqlite3* db_ = nullptr;
  mutable std::mutex mutex_;
};

}  // namespace evl
