#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evl/config.hpp"

namespace evl {

struct KeywordGroup {
  std::string group_name;
  std::vector<std::string> keywords;
};

/// [{"group": name, "keywords": [...]}]. Names must be unique and every
/// group needs at least one non-blank keyword; throws std::invalid_argument.
std::vector<KeywordGroup> parse_groups(const nlohmann::json& doc);
std::vector<KeywordGroup> load_groups(const std::filesystem::path& file);

using SourceCounts = std::array<std::size_t, 3>;       // wikipedia, dbpedia, wolfram
using SourcePercentages = std::array<double, 3>;

/// 100 * count / total per source; all zero when the total is zero.
SourcePercentages percentages(const SourceCounts& counts);

struct CoverageReport {
  std::string group_name;
  SourceCounts counts{};
  SourcePercentages percent{};
  /// Set when the group produced no non-empty record at all.
  bool zero_total = false;
  std::size_t keywords = 0;
  std::size_t failed_keywords = 0;
};

struct KeywordError {
  std::string group_name;
  std::string keyword;
  std::string error;
};

struct KeywordCoverage {
  std::string video_id;
  std::size_t entities = 0;
  SourceCounts counts{};
  std::vector<std::string> errors;
};

/// Top captioned search result -> captions -> entities -> enrichment. Counts
/// one per non-empty record per source per distinct entity. Failures are
/// collected rather than thrown; counts from entities that did resolve stay.
KeywordCoverage keyword_coverage(const std::string& keyword, const Pipeline& pipeline, const SessionConfig& config);

struct CoverageRun {
  std::vector<CoverageReport> reports;
  std::vector<KeywordError> errors;
};

/// Keywords run on up to `jobs` threads; results merge in input order.
CoverageRun run_coverage(const std::vector<KeywordGroup>& groups, const Pipeline& pipeline,
                         const SessionConfig& config, std::size_t jobs = 4);

/// group,wikipedia_pct,dbpedia_pct,wolfram_pct,wikipedia_n,dbpedia_n,wolfram_n
std::string emit_csv(const std::vector<CoverageReport>& reports);
/// group,keyword,error
std::string emit_errors_csv(const std::vector<KeywordError>& errors);

/// Pooled split over every group's counts.
SourcePercentages overall_split(const std::vector<CoverageReport>& reports);

struct CountSolution {
  SourceCounts counts{};
  std::size_t total = 0;
};

/// Smallest total d <= max_total with integer counts summing to d whose
/// percentages all lie within `tolerance` of `target`.
std::optional<CountSolution> smallest_counts(const SourcePercentages& target, std::size_t max_total = 40,
                                             double tolerance = 0.05);

}  // namespace evl
