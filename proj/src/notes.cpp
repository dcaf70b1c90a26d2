#include "evl/notes.hpp"

#include <sqlite3.h>

#include <stdexcept>

namespace evl {

namespace {

struct Statement {
  sqlite3_stmt* stmt = nullptr;

  Statement(sqlite3* db, const char* sql) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt, nullptr) != SQLITE_OK) {
      throw std::runtime_error(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
};

}  // namespace

nlohmann::ordered_json note_json(const Note& n) { return {{"id", n.id}, {"t_ms", n.t_ms}, {"text", n.text}}; }

NotesStore::NotesStore(const std::optional<std::filesystem::path>& file) {
  const std::string name = file ? file->string() : ":memory:";
  if (file && file->has_parent_path()) std::filesystem::create_directories(file->parent_path());
  if (sqlite3_open_v2(name.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw std::runtime_error("cannot open notes store " + name + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 2000);
  exec(
      "CREATE TABLE IF NOT EXISTS notes ("
      " id INTEGER PRIMARY KEY AUTOINCREMENT,"
      " video_id TEXT NOT NULL,"
      " t_ms INTEGER NOT NULL,"
      " text TEXT NOT NULL);"
      "CREATE INDEX IF NOT EXISTS notes_by_video ON notes(video_id, t_ms, id);");
}

NotesStore::~NotesStore() { sqlite3_close(db_); }

void NotesStore::exec(const char* sql) const {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw std::runtime_error("sqlite: " + msg);
  }
}

Note NotesStore::add(const std::string& video_id, Millis t_ms, const std::string& text) {
  std::lock_guard lock(mutex_);
  Statement st(db_, "INSERT INTO notes(video_id, t_ms, text) VALUES (?, ?, ?)");
  sqlite3_bind_text(st.stmt, 1, video_id.data(), static_cast<int>(video_id.size()), SQLITE_TRANSIENT);
  sqlite3_bind_int64(st.stmt, 2, t_ms);
  sqlite3_bind_text(st.stmt, 3, text.data(), static_cast<int>(text.size()), SQLITE_TRANSIENT);
  if (sqlite3_step(st.stmt) != SQLITE_DONE) throw std::runtime_error(std::string("sqlite insert: ") + sqlite3_errmsg(db_));
  return {sqlite3_last_insert_rowid(db_), t_ms, text};
}

std::vector<Note> NotesStore::list(const std::string& video_id) const {
  std::lock_guard lock(mutex_);
  Statement st(db_, "SELECT id, t_ms, text FROM notes WHERE video_id = ? ORDER BY t_ms, id");
  sqlite3_bind_text(st.stmt, 1, video_id.data(), static_cast<int>(video_id.size()), SQLITE_TRANSIENT);
  std::vector<Note> out;
  int rc;
  while ((rc = sqlite3_step(st.stmt)) == SQLITE_ROW) {
    const auto* txt = reinterpret_cast<const char*>(sqlite3_column_text(st.stmt, 2));
    out.push_back({sqlite3_column_int64(st.stmt, 0), sqlite3_column_int64(st.stmt, 1),
                   std::string(txt ? txt : "", static_cast<std::size_t>(sqlite3_column_bytes(st.stmt, 2)))});
  }
  if (rc != SQLITE_DONE) throw std::runtime_error(std::string("sqlite select: ") + sqlite3_errmsg(db_));
  return out;
}

bool NotesStore::remove(const std::string& video_id, std::int64_t note_id) {
  std::lock_guard lock(mutex_);
  Statement st(db_, "DELETE FROM notes WHERE video_id = ? AND id = ?");
  sqlite3_bind_text(st.stmt, 1, video_id.data(), static_cast<int>(video_id.size()), SQLITE_TRANSIENT);
  sqlite3_bind_int64(st.stmt, 2, note_id);
  if (sqlite3_step(st.stmt) != SQLITE_DONE) throw std::runtime_error(std::string("sqlite delete: ") + sqlite3_errmsg(db_));
  return sqlite3_changes(db_) > 0;
}

}  // namespace evl
