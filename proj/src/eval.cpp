#include "evl/eval.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "evl/text.hpp"

namespace evl {

namespace fs = std::filesystem;

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::vector<KeywordGroup> parse_groups(const nlohmann::json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("keyword groups must be a JSON array");
  std::vector<KeywordGroup> groups;
  std::set<std::string> names;
  for (const auto& g : doc) {
    if (!g.is_object() || !g.contains("group") || !g["group"].is_string() || !g.contains("keywords") ||
        !g["keywords"].is_array()) {
      throw std::invalid_argument("each group needs a string 'group' and an array 'keywords'");
    }
    KeywordGroup kg{text::collapse_whitespace(g["group"].get<std::string>()), {}};
    if (kg.group_name.empty()) throw std::invalid_argument("group name is blank");
    if (!names.insert(kg.group_name).second) throw std::invalid_argument("duplicate group '" + kg.group_name + "'");
    for (const auto& k : g["keywords"]) {
      if (!k.is_string() || text::is_blank(k.get<std::string>())) {
        throw std::invalid_argument("group '" + kg.group_name + "' has a blank or non-string keyword");
      }
      kg.keywords.push_back(text::collapse_whitespace(k.get<std::string>()));
    }
    if (kg.keywords.empty()) throw std::invalid_argument("group '" + kg.group_name + "' has no keywords");
    groups.push_back(std::move(kg));
  }
  return groups;
}

std::vector<KeywordGroup> load_groups(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open keyword groups " + file.string());
  try {
    return parse_groups(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("keyword groups " + file.string() + ": " + e.what());
  }
}

SourcePercentages percentages(const SourceCounts& counts) {
  const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
  SourcePercentages p{};
  if (total == 0) return p;
  for (std::size_t i = 0; i < 3; ++i) p[i] = 100.0 * static_cast<double>(counts[i]) / total;
  return p;
}

KeywordCoverage keyword_coverage(const std::string& keyword, const Pipeline& pipeline, const SessionConfig& config) {
  KeywordCoverage out;
  std::vector<SubtitleCue> cues;
  try {
    SearchQuery q{keyword, config.max_results};
    const auto results = pipeline.videos->search(q);
    if (results.empty()) {
      out.errors.push_back("no captioned video found");
      return out;
    }
    out.video_id = results.front().video_id;
    const auto doc = pipeline.videos->fetch_captions(out.video_id);
    cues = parse_subtitle(doc.body, doc.format);
  } catch (const std::exception& e) {
    out.errors.push_back(e.what());
    return out;
  }

  std::vector<EntityAnnotation> anns;
  try {
    anns = annotate_cues(cues, *pipeline.annotator);
  } catch (const std::exception& e) {
    out.errors.push_back(e.what());
    return out;
  }

  std::set<std::string> seen;
  for (const auto& a : anns) {
    if (!seen.insert(text::normalize(a.lookup_name())).second) continue;
    ++out.entities;
    const auto count = [&](const EnrichmentBundle& bundle) {
      for (const auto& r : bundle.records) {
        if (r.non_empty()) ++out.counts[static_cast<std::size_t>(r.source)];
      }
    };
    try {
      count(enrich(a.lookup_name(), config.sources, pipeline.knowledge, *pipeline.cache, pipeline.clock));
    } catch (const ReplayMiss&) {
      // One unrecorded source hides the others' replies; the answered ones
      // are cached, so asking source by source recovers them.
      for (const auto s : config.sources.members()) {
        try {
          count(enrich(a.lookup_name(), SourceSet{s}, pipeline.knowledge, *pipeline.cache, pipeline.clock));
        } catch (const ReplayMiss& e) {
          out.errors.push_back("replay miss: " + e.source() + " " + e.request_key());
        } catch (const std::exception& e) {
          out.errors.push_back(e.what());
        }
      }
    } catch (const std::exception& e) {
      out.errors.push_back(e.what());
    }
  }
  return out;
}

CoverageRun run_coverage(const std::vector<KeywordGroup>& groups, const Pipeline& pipeline,
                         const SessionConfig& config, std::size_t jobs) {
  struct Task {
    std::size_t group;
    const std::string* keyword;
    KeywordCoverage result;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& k : groups[g].keywords) tasks.push_back({g, &k, {}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) tasks[i].result = keyword_coverage(*tasks[i].keyword, pipeline, config);
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
  for (std::size_t i = 0; i + 1 < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CoverageRun run;
  for (const auto& g : groups) run.reports.push_back({g.group_name, {}, {}, false, g.keywords.size(), 0});
  for (const auto& t : tasks) {
    auto& rep = run.reports[t.group];
    for (std::size_t s = 0; s < 3; ++s) rep.counts[s] += t.result.counts[s];
    if (!t.result.errors.empty()) ++rep.failed_keywords;
    for (const auto& e : t.result.errors) run.errors.push_back({rep.group_name, *t.keyword, e});
  }
  for (auto& rep : run.reports) {
    rep.percent = percentages(rep.counts);
    rep.zero_total = rep.counts[0] + rep.counts[1] + rep.counts[2] == 0;
  }
  return run;
}

std::string emit_csv(const std::vector<CoverageReport>& reports) {
  std::string out = "group,wikipedia_pct,dbpedia_pct,wolfram_pct,wikipedia_n,dbpedia_n,wolfram_n\n";
  for (const auto& r : reports) {
    out += csv_field(r.group_name);
    for (const double p : r.percent) out += "," + fixed2(p);
    for (const auto c : r.counts) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

std::string emit_errors_csv(const std::vector<KeywordError>& errors) {
  std::string out = "group,keyword,error\n";
  for (const auto& e : errors) out += csv_field(e.group_name) + "," + csv_field(e.keyword) + "," + csv_field(e.error) + "\n";
  return out;
}

SourcePercentages overall_split(const std::vector<CoverageReport>& reports) {
  SourceCounts total{};
  for (const auto& r : reports) {
    for (std::size_t s = 0; s < 3; ++s) total[s] += r.counts[s];
  }
  return percentages(total);
}

std::optional<CountSolution> smallest_counts(const SourcePercentages& target, std::size_t max_total, double tolerance) {
  for (std::size_t d = 1; d <= max_total; ++d) {
    // Only the two integers nearest to p*d/100 can land within tolerance.
    auto candidates = [&](double p) {
      const double exact = p * static_cast<double>(d) / 100.0;
      std::vector<std::size_t> out;
      for (const double c : {std::floor(exact), std::ceil(exact)}) {
        if (c < 0 || c > static_cast<double>(d)) continue;
        const auto n = static_cast<std::size_t>(c);
        if (std::abs(100.0 * c / static_cast<double>(d) - p) <= tolerance && (out.empty() || out.back() != n)) {
          out.push_back(n);
        }
      }
      return out;
    };
    for (const auto a : candidates(target[0])) {
      for (const auto b : candidates(target[1])) {
        if (a + b > d) continue;
        const std::size_t c = d - a - b;
        if (std::abs(100.0 * static_cast<double>(c) / static_cast<double>(d) - target[2]) <= tolerance) {
          return CountSolution{{a, b, c}, d};
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace evl
