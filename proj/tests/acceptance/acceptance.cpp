// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
//
//   acceptance <path-to-evl-eval>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "evl/eval.hpp"
#include "evl/graph_builder.hpp"
#include "evl/http_server.hpp"
#include "evl/service.hpp"
#include "evl/smart_titles.hpp"
#include "evl/text.hpp"
#include "support/oracles.hpp"

using namespace evl;
using nlohmann::json;
namespace fs = std::filesystem;
using Steady = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kTableTolerance = 0.05;
constexpr double kTableBudgetSeconds = 10.0;
constexpr std::size_t kMaxDenominator = 40;
constexpr double kDenominatorTolerance = 0.05;
constexpr double kDenominatorBudgetSeconds = 1.0;
constexpr std::size_t kMinCorpusFiles = 30;
constexpr int kCueLists = 1000;
constexpr int kCueProbes = 200;
constexpr int kTopicTexts = 500;
constexpr double kWeightSumTolerance = 0.01;
constexpr int kRandomGraphs = 500;

const fs::path kFixtures = EVL_FIXTURE_DIR;
const fs::path kCorpus = fs::path(EVL_TEST_DATA_DIR) / "subtitles";
const fs::path kGroups = fs::path(EVL_SOURCE_DIR) / "data" / "keyword_groups_2020.json";

struct ReferenceRow {
  std::string group;
  std::array<double, 3> pct;
};

const std::vector<ReferenceRow> kReference = {
    {"Searches", {35.7, 14.3, 50}},       {"News", {36.85, 26.3, 36.85}},   {"Actors", {37.05, 33.35, 29.6}},
    {"Athletes", {32.15, 32.15, 35.7}},   {"Games", {52.94, 41.17, 5.89}},  {"Loss", {33.33, 33.33, 33.33}},
    {"Lyrics", {33.33, 27.78, 38.89}},    {"Movies", {47.62, 9.52, 42.86}}, {"People", {34.48, 31.04, 34.48}},
    {"Recipes", {34.48, 34.48, 31.04}},   {"TV Shows", {45.46, 31.82, 22.72}},
};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double seconds_since(Steady::time_point t0) { return std::chrono::duration<double>(Steady::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::unique_ptr<Service> replay_service(const fs::path& fixture, SafetyPolicy policy = {}) {
  SessionConfig c;
  c.fixture_dir = fixture;
  return std::make_unique<Service>(c, make_pipeline(c), std::make_shared<NotesStore>(),
                                   std::make_shared<PolicyHolder>(std::move(policy)));
}

ApiResponse get(Service& s, const std::string& target) { return s.handle(parse_target("GET", target)); }

// Video ids and search keywords recorded in a fixture.
struct Recorded {
  std::vector<std::string> videos;
  std::vector<std::string> searches;
};

Recorded recorded(const fs::path& fixture) {
  Recorded r;
  const auto loaded = Fixture::load_dir(fixture);
  for (const auto& e : loaded.entries()) {
    if (e.source != "youtube") continue;
    if (e.request_key.starts_with("videos:")) r.videos.push_back(e.request_key.substr(7));
    if (e.request_key.starts_with("search:")) {
      const auto bar = e.request_key.rfind('|');
      r.searches.push_back(e.request_key.substr(7, bar - 7));
    }
  }
  return r;
}

std::string url_escape(const std::string& s) {
  std::string out;
  for (const unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.') {
      out += static_cast<char>(c);
    } else {
      out += '%' + text::hex64(c, 2);
    }
  }
  return out;
}

Outcome table_reproduction(const std::string& evl_eval) {
  const fs::path dir = fs::temp_directory_path() / ("evl-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path out = dir / "coverage.csv";
  const std::string cmd = "\"" + evl_eval + "\" --groups \"" + kGroups.string() + "\" --replay \"" +
                          (kFixtures / "coverage").string() + "\" --out \"" + out.string() + "\" 2>/dev/null";
  const auto t0 = Steady::now();
  const int rc = std::system(cmd.c_str());
  const double elapsed = seconds_since(t0);
  const auto csv = slurp(out);
  const auto errors = slurp(fs::path(out.string() + ".errors.csv"));
  fs::remove_all(dir);

  Outcome o;
  if (rc != 0) return {false, "evl-eval exited with status " + std::to_string(rc)};
  const auto rows = split(csv, '\n');
  if (rows.size() != kReference.size() + 1) return {false, std::to_string(rows.size()) + " lines in report"};
  double worst = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < kReference.size(); ++i) {
    const auto cells = split(rows[i + 1], ',');
    if (cells.size() != 7 || cells[0] != kReference[i].group) {
      o = {false, "row " + std::to_string(i + 1) + " is '" + rows[i + 1] + "'"};
      continue;
    }
    bool ok = true;
    for (std::size_t s = 0; s < 3; ++s) {
      const double d = std::abs(std::stod(cells[s + 1]) - kReference[i].pct[s]);
      worst = std::max(worst, d);
      ok = ok && d <= kTableTolerance;
    }
    matched += ok;
  }
  if (split(errors, '\n').size() != 1) return {false, "fixture misses recorded in the errors sidecar"};
  if (matched != kReference.size()) o.pass = false;
  if (elapsed >= kTableBudgetSeconds) o.pass = false;
  o.detail = std::to_string(matched) + "/" + std::to_string(kReference.size()) + " rows, max |d| " +
             fmt("%.3f", worst) + ", " + fmt("%.2f s", elapsed) + ", replay only";
  return o;
}

Outcome denominator_search() {
  const auto t0 = Steady::now();
  std::size_t found = 0;
  std::string worst;
  for (const auto& row : kReference) {
    const auto s = smallest_counts(row.pct, kMaxDenominator, kDenominatorTolerance);
    const auto want = oracle::brute_denominator(row.pct[0], row.pct[1], row.pct[2], kMaxDenominator,
                                                kDenominatorTolerance);
    if (!s || !want || s->total != static_cast<std::size_t>(want->total)) {
      worst = row.group;
      continue;
    }
    const auto p = percentages(s->counts);
    bool ok = s->total <= kMaxDenominator;
    for (std::size_t i = 0; i < 3; ++i) ok = ok && std::abs(p[i] - row.pct[i]) <= kDenominatorTolerance;
    if (ok) ++found;
    else worst = row.group;
  }
  const double elapsed = seconds_since(t0);
  const auto searches = smallest_counts(kReference[0].pct, kMaxDenominator, kDenominatorTolerance);
  const bool example = searches && searches->counts == SourceCounts{5, 2, 7} && searches->total == 14;
  Outcome o{found == kReference.size() && example && elapsed < kDenominatorBudgetSeconds,
            std::to_string(found) + "/" + std::to_string(kReference.size()) + " rows, Searches -> (5,2,7)/14 " +
                (example ? "yes" : "no") + ", " + fmt("%.4f s", elapsed)};
  if (!worst.empty()) o.detail += ", failed at " + worst;
  return o;
}

Outcome subtitle_corpus() {
  std::ifstream in(kCorpus / "manifest.json");
  if (!in) return {false, "no corpus manifest"};
  const auto manifest = json::parse(in);
  std::size_t valid = 0, valid_ok = 0, malformed = 0, malformed_ok = 0;
  std::set<std::string> kinds;
  std::string first_failure;
  for (const auto& f : manifest["files"]) {
    const std::string name = f["file"];
    const auto format = fs::path(name).extension() == ".vtt" ? SubtitleFormat::vtt : SubtitleFormat::srt;
    const auto doc = slurp(kCorpus / name);
    if (!f.contains("error")) {
      ++valid;
      try {
        const auto cues = parse_subtitle(doc, format);
        const bool ok = cues.size() == f["cues"].get<std::size_t>() && parse_srt(to_srt(cues)) == cues &&
                        parse_vtt(to_vtt(cues)) == cues;
        valid_ok += ok;
        if (!ok && first_failure.empty()) first_failure = name;
      } catch (const std::exception&) {
        if (first_failure.empty()) first_failure = name;
      }
      continue;
    }
    ++malformed;
    try {
      parse_subtitle(doc, format);
      if (first_failure.empty()) first_failure = name;
    } catch (const SubtitleError& e) {
      const bool ok = kind_name(e.kind()) == f["error"].get<std::string>() && e.line() == f["line"].get<std::size_t>();
      malformed_ok += ok;
      kinds.insert(std::string(kind_name(e.kind())));
      if (!ok && first_failure.empty()) first_failure = name;
    }
  }
  const bool shapes = fs::exists(kCorpus / "bom.srt") && fs::exists(kCorpus / "overlapping.srt") &&
                      fs::exists(kCorpus / "note_blocks.vtt");
  Outcome o{valid + malformed >= kMinCorpusFiles && valid == valid_ok && malformed == malformed_ok && shapes,
            std::to_string(valid + malformed) + " files, " + std::to_string(valid_ok) + "/" + std::to_string(valid) +
                " valid round-trip, " + std::to_string(malformed_ok) + "/" + std::to_string(malformed) +
                " malformed with expected error and line"};
  if (!first_failure.empty()) o.detail += ", first failure " + first_failure;
  return o;
}

Outcome cue_at_property() {
  std::mt19937 rng(20200101);
  std::size_t disagreements = 0;
  for (int list = 0; list < kCueLists; ++list) {
    std::vector<SubtitleCue> cues(rng() % 60);
    for (auto& c : cues) {
      c.start_ms = rng() % 120'000;
      c.end_ms = c.start_ms + 1 + rng() % 6'000;
      c.text = "cue";
    }
    std::stable_sort(cues.begin(), cues.end(), [](const auto& a, const auto& b) { return a.start_ms < b.start_ms; });
    for (std::size_t i = 0; i < cues.size(); ++i) cues[i].index = i;
    const CueIndex index(cues);
    for (int p = 0; p < kCueProbes; ++p) {
      Millis t = static_cast<Millis>(rng() % 130'000) - 1'000;
      if (!cues.empty() && p % 4 == 0) {
        const auto& c = cues[rng() % cues.size()];
        t = p % 8 == 0 ? c.start_ms : c.end_ms;
      }
      const auto want = oracle::linear_cue_at(cues, t);
      disagreements += cue_at(cues, t) != want;
      disagreements += index.at(t) != want;
    }
  }
  return {disagreements == 0, std::to_string(kCueLists) + " lists x " + std::to_string(kCueProbes) + " probes, " +
                                  std::to_string(disagreements) + " disagreements"};
}

Outcome smart_title_invariants() {
  const std::vector<std::string> vocab = {"coronavirus", "vaccine",  "election", "Biden",  "Zoom",   "classroom",
                                          "cricket",     "recipes",  "recipe",   "lyrics", "stories", "running",
                                          "the",         "and",      "of",       "is",     "2020",   "école",
                                          "naïve",       "Zoom's",   "trials",   "trial",  "WHO",    "data"};
  const std::vector<std::string> seps = {" ", " ", " ", ", ", ". ", "\n", " - ", "! "};
  std::mt19937 rng(1605);
  std::size_t bad_sum = 0, bad_dup = 0, bad_det = 0, nonempty = 0;
  for (int round = 0; round < kTopicTexts; ++round) {
    std::string text;
    for (int i = 0, n = rng() % 80; i < n; ++i) text += vocab[rng() % vocab.size()] + seps[rng() % seps.size()];
    const std::size_t top_n = 1 + rng() % 10;
    const auto topics = extract_topics(text, top_n);
    if (!topics.empty()) {
      ++nonempty;
      double sum = 0;
      for (const auto& t : topics) sum += t.weight_percent;
      bad_sum += std::abs(sum - 100.0) > kWeightSumTolerance;
    }
    const auto doubled = extract_topics(text + "\n" + text, top_n);
    bool same = doubled.size() == topics.size();
    for (std::size_t i = 0; same && i < topics.size(); ++i) same = doubled[i].term == topics[i].term;
    bad_dup += !same;
    bad_det += extract_topics(text, top_n) != topics;
  }
  return {bad_sum == 0 && bad_dup == 0 && bad_det == 0 && nonempty > 0,
          std::to_string(kTopicTexts) + " texts (" + std::to_string(nonempty) + " with topics): " +
              std::to_string(bad_sum) + " bad sums, " + std::to_string(bad_dup) + " ranking changes on duplication, " +
              std::to_string(bad_det) + " nondeterministic"};
}

Outcome graph_invariants() {
  const std::vector<std::string> words = {"Zoom", "zoom", "Biden", "covid", "COVID", "virus", "Wuhan", "pandemic",
                                          "other", "person", "place", "vaccine", "Lockdown", "ÉCOLE", "école", "IPL"};
  std::mt19937 rng(4242);
  auto pick = [&] { return words[rng() % words.size()]; };
  std::size_t violations = 0, round_trip_failures = 0, nodes = 0;
  std::string first;
  for (int round = 0; round < kRandomGraphs; ++round) {
    std::vector<EntityAnnotation> anns;
    BundleMap bundles;
    for (int i = 0, n = rng() % 9; i < n; ++i) {
      EntityAnnotation a;
      a.surface = pick();
      a.category = static_cast<EntityCategory>(rng() % 7);
      if (rng() % 3) {
        EnrichmentBundle b{a.surface, {}};
        for (const auto s : kAllSources) {
          if (rng() % 2) continue;
          OntologyRecord r;
          r.source = s;
          r.label = rng() % 2 ? pick() : "";
          for (int k = 0, m = rng() % 6; k < m; ++k) r.synonyms.push_back(pick());
          b.records.push_back(r);
        }
        bundles.emplace(text::normalize(a.surface), b);
      }
      anns.push_back(std::move(a));
    }
    const auto g = build_graph(round, anns, bundles, 1 + rng() % kDefaultRelatedLimit);
    nodes += g.nodes.size();
    const auto why = oracle::star_forest_violation(g);
    if (!why.empty()) {
      ++violations;
      if (first.empty()) first = why;
    }
    const auto text = serialize_graph(g).dump();
    const auto back = parse_graph(json::parse(text));
    round_trip_failures += !(back == g) || serialize_graph(back).dump() != text;
  }
  Outcome o{violations == 0 && round_trip_failures == 0,
            std::to_string(kRandomGraphs) + " graphs, " + std::to_string(nodes) + " nodes, " +
                std::to_string(violations) + " star-forest violations, " + std::to_string(round_trip_failures) +
                " round-trip failures"};
  if (!first.empty()) o.detail += " (" + first + ")";
  return o;
}

Outcome clean_view() {
  std::size_t responses = 0;
  std::vector<std::string> hits;
  auto scan = [&](const ApiResponse& r, const std::string& target) {
    ++responses;
    if (r.status == 204 && r.body.empty()) return;
    json doc;
    try {
      doc = json::parse(r.body);
    } catch (const json::exception&) {
      hits.push_back(target + " (not JSON)");
      return;
    }
    for (const auto& k : oracle::blocked_keys(doc)) hits.push_back(target + ": " + k);
  };

  const auto exclude = SafetyPolicy::load(kFixtures / "service" / "policy_exclude.json");
  const auto redact = SafetyPolicy::load(kFixtures / "service" / "policy_redact.json");
  for (const char* fixture : {"service", "coverage"}) {
    const auto rec = recorded(kFixtures / fixture);
    for (const auto& policy : {SafetyPolicy{}, exclude, redact}) {
      auto svc = replay_service(kFixtures / fixture, policy);
      for (const std::string target : {"/health", "/nope", "/search", "/video/", "/video/zz-unknown"}) {
        scan(get(*svc, target), target);
      }
      for (const auto& kw : rec.searches) {
        const auto target = "/search?q=" + url_escape(kw);
        scan(get(*svc, target), target);
      }
      for (const auto& id : rec.videos) {
        const auto base = "/video/" + id;
        const auto video = get(*svc, base);
        scan(video, base);
        std::size_t segments = 0;
        if (video.status == 200) segments = json::parse(video.body)["segments"].size();
        for (std::size_t k = 0; k <= segments; ++k) {
          const auto target = base + "/segment/" + std::to_string(k) + "/graph";
          scan(get(*svc, target), target);
        }
        scan(get(*svc, base + "/cue_at?t=5000"), base + "/cue_at");
        scan(svc->handle(parse_target("POST", base + "/notes", R"({"t_ms":1000,"text":"a note"})")), base + "/notes");
        scan(get(*svc, base + "/notes"), base + "/notes");
        scan(svc->handle(parse_target("DELETE", base + "/notes/1")), base + "/notes/1");
      }
    }
  }
  // The raw upstream item carries channel and statistics keys; the scanner must see them.
  const auto raw = Fixture::load_dir(kFixtures / "service");
  const auto* upstream = raw.find("youtube", "videos:cv1");
  const std::size_t canary = upstream ? oracle::blocked_keys(json::parse(upstream->response_body)).size() : 0;
  Outcome o{hits.empty() && canary > 0, std::to_string(responses) + " responses scanned, " +
                                            std::to_string(hits.size()) + " blocked keys (raw upstream item: " +
                                            std::to_string(canary) + ")"};
  if (!hits.empty()) o.detail += " (first: " + hits.front() + ")";
  return o;
}

// search -> every video -> every segment graph -> notes CRUD, over loopback HTTP.
std::string hermetic_transcript() {
  auto svc = replay_service(kFixtures / "service");
  ServerOptions opts;
  opts.port = 0;
  opts.threads = 2;
  HttpServer server(*svc, opts);
  const int port = server.bind();
  std::thread loop([&] { server.run(); });
  while (!server.running()) std::this_thread::sleep_for(std::chrono::milliseconds(2));

  LiveTransport http;
  std::string transcript;
  auto call = [&](const std::string& method, const std::string& target, const std::string& body = "") {
    HttpRequest req;
    req.source = "loopback";
    req.method = method;
    req.url = "http://127.0.0.1:" + std::to_string(port) + target;
    req.body = body;
    if (!body.empty()) req.content_type = "application/json";
    const auto res = http.send(req);
    transcript += method + " " + target + "\n" + std::to_string(res.status) + " " + res.content_type + "\n" +
                  res.body + "\n";
    return res;
  };

  const auto search = call("GET", "/search?q=coronavirus");
  for (const auto& hit : json::parse(search.body)) {
    const std::string id = hit["video_id"];
    const auto video = call("GET", "/video/" + id);
    if (video.status != 200) continue;
    for (std::size_t k = 0; k < json::parse(video.body)["segments"].size(); ++k) {
      call("GET", "/video/" + id + "/segment/" + std::to_string(k) + "/graph");
    }
  }
  call("POST", "/video/cv1/notes", R"({"t_ms":21000,"text":"vaccine trial note"})");
  call("POST", "/video/cv1/notes", R"({"t_ms":4000,"text":"first cases"})");
  call("GET", "/video/cv1/notes");
  call("DELETE", "/video/cv1/notes/1");
  call("GET", "/video/cv1/notes");
  call("DELETE", "/video/cv1/notes/1");

  server.stop();
  loop.join();
  return transcript;
}

Outcome hermetic_run() {
  std::string first, second;
  try {
    first = hermetic_transcript();
    second = hermetic_transcript();
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  const auto exchanges = std::count(first.begin(), first.end(), '\n') / 3;
  const bool graphs = first.find("/segment/1/graph\n200") != std::string::npos;
  const bool crud = first.find("DELETE /video/cv1/notes/1\n204") != std::string::npos ||
                    first.find("DELETE /video/cv1/notes/1\n200") != std::string::npos;
  return {first == second && graphs && crud,
          std::to_string(exchanges) + " exchanges, " + std::to_string(first.size()) + " bytes, transcripts " +
              (first == second ? "identical" : "differ")};
}

Outcome safety_filter() {
  // Category deliberately differs from the term so the two cannot be confused.
  auto excl = replay_service(kFixtures / "service", {SafetyAction::exclude, {{"narcotics", "criminal"}}});
  const auto refused = get(*excl, "/video/nar1");
  const auto body = json::parse(refused.body);
  const bool refuses = refused.status == 451 && body.value("category", "") == "criminal" &&
                       refused.body.find("narcotics") == std::string::npos;

  auto plain = replay_service(kFixtures / "service");
  auto red = replay_service(kFixtures / "service", SafetyPolicy::load(kFixtures / "service" / "policy_redact.json"));
  const auto before = get(*plain, "/video/nar1");
  const auto after = get(*red, "/video/nar1");
  bool timings = before.status == 200 && after.status == 200;
  bool masked = false;
  std::size_t cues = 0;
  if (timings) {
    const auto a = json::parse(before.body)["cues"];
    const auto b = json::parse(after.body)["cues"];
    timings = a.size() == b.size();
    cues = a.size();
    for (std::size_t i = 0; timings && i < a.size(); ++i) {
      timings = a[i]["index"] == b[i]["index"] && a[i]["start_ms"] == b[i]["start_ms"] &&
                a[i]["end_ms"] == b[i]["end_ms"];
      masked = masked || a[i]["text"] != b[i]["text"];
    }
    masked = masked && after.body.find("narcotics") == std::string::npos;
  }
  return {refuses && timings && masked,
          std::string("exclude -> ") + std::to_string(refused.status) + " category '" + body.value("category", "") +
              "'" + (refuses ? "" : " (term leaked or wrong status)") + "; redact keeps " + std::to_string(cues) +
              " cue timings " + (timings ? "exactly" : "NOT exactly") + (masked ? ", term masked" : ", term not masked")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <evl-eval>\n", argv[0]);
    return 2;
  }
  const std::string evl_eval = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"coverage_table", [&] { return table_reproduction(evl_eval); }},
      {"denominator_search", denominator_search},
      {"subtitle_corpus", subtitle_corpus},
      {"cue_at_property", cue_at_property},
      {"smart_title_invariants", smart_title_invariants},
      {"graph_invariants", graph_invariants},
      {"clean_view", clean_view},
      {"hermetic_service_run", hermetic_run},
      {"safety_filter", safety_filter},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
