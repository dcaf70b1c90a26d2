#include "evl/transport.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace evl {

ReplayMiss::ReplayMiss(std::string source, std::string request_key)
    : std::runtime_error("ReplayMiss: no recorded response for " + source + " request '" +
                         request_key + "'"),
      source_(std::move(source)),
      request_key_(std::move(request_key)) {}

Fixture::Fixture(std::vector<FixtureEntry> entries) {
  for (auto& e : entries) add(std::move(e));
}

void Fixture::add(FixtureEntry entry) {
  auto key = std::make_pair(entry.source, entry.request_key);
  if (const auto it = index_.find(key); it != index_.end()) {
    entries_[it->second] = std::move(entry);
    return;
  }
  index_.emplace(std::move(key), entries_.size());
  entries_.push_back(std::move(entry));
}

const FixtureEntry* Fixture::find(const std::string& source, const std::string& request_key) const {
  const auto it = index_.find({source, request_key});
  return it == index_.end() ? nullptr : &entries_[it->second];
}

Fixture Fixture::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open fixture " + file.string());
  const auto doc = nlohmann::json::parse(in);
  if (!doc.is_array()) throw std::runtime_error("fixture " + file.string() + " is not a JSON array");
  Fixture fixture;
  for (const auto& item : doc) {
    FixtureEntry e;
    e.source = item.at("source").get<std::string>();
    e.request_key = item.at("request_key").get<std::string>();
    e.status = item.at("status").get<int>();
    e.response_body = item.at("response_body").get<std::string>();
    e.content_type = item.value("content_type", std::string{});
    fixture.add(std::move(e));
  }
  return fixture;
}

Fixture Fixture::load_dir(const std::filesystem::path& dir) {
  const auto file = dir / "interactions.json";
  if (!std::filesystem::exists(file)) return {};
  return load(file);
}

std::string Fixture::to_json_text() const {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json item{{"source", e.source},
                                {"request_key", e.request_key},
                                {"status", e.status},
                                {"response_body", e.response_body}};
    if (!e.content_type.empty()) item["content_type"] = e.content_type;
    doc.push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

void Fixture::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write fixture " + file.string());
  out << to_json_text();
}

ReplayTransport::ReplayTransport(Fixture fixture) : fixture_(std::move(fixture)) {}

HttpResponse ReplayTransport::send(const HttpRequest& request) {
  ++requests_;
  const auto* entry = fixture_.find(request.source, request.request_key);
  if (!entry) throw ReplayMiss(request.source, request.request_key);
  if (entry->status == 0) {
    throw TransportError("recorded connection failure for " + request.source + " '" +
                         request.request_key + "'");
  }
  return {entry->status, entry->response_body, entry->content_type};
}

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}

HttpResponse RecordingTransport::send(const HttpRequest& request) {
  try {
    auto response = inner_->send(request);
    std::lock_guard lock(mutex_);
    recorded_.add({request.source, request.request_key, response.status, response.body,
                   response.content_type});
    return response;
  } catch (const TransportError&) {
    std::lock_guard lock(mutex_);
    recorded_.add({request.source, request.request_key, 0, {}, {}});
    throw;
  }
}

Fixture RecordingTransport::fixture() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start =
      url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
        c == '_' || c == '.' || c == '~') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace evl
