// evl-eval --groups data/keyword_groups_2020.json --replay fixtures/coverage --out report.csv
//
// Exit codes: 0 success, 1 at least one keyword failed, 2 bad configuration.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "evl/eval.hpp"

namespace fs = std::filesystem;

namespace {

bool write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-source coverage per keyword group"};
  std::string groups_file, replay_dir, out_file, config_file, errors_file;
  std::size_t jobs = 4;
  app.add_option("--groups", groups_file, "Keyword groups JSON")->required();
  app.add_option("--replay", replay_dir, "Fixture directory; omit for a live run");
  app.add_option("--out", out_file, "Report CSV")->required();
  app.add_option("--errors", errors_file, "Per-keyword error CSV (default <out>.errors.csv)");
  app.add_option("--config", config_file, "Session config JSON");
  app.add_option("--jobs", jobs, "Keywords processed concurrently")->check(CLI::Range(1, 64));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (errors_file.empty()) errors_file = out_file + ".errors.csv";

  std::vector<evl::KeywordGroup> groups;
  evl::Pipeline pipeline;
  evl::SessionConfig config;
  try {
    if (!config_file.empty()) config = evl::SessionConfig::load(config_file);
    evl::apply_env(config);
    if (!replay_dir.empty()) {
      config.mode = evl::RunMode::replay;
      config.fixture_dir = replay_dir;
    } else {
      config.mode = evl::RunMode::live;
    }
    config.validate();
    groups = evl::load_groups(groups_file);
    pipeline = evl::make_pipeline(config);
  } catch (const std::exception& e) {
    std::cerr << "evl-eval: " << e.what() << "\n";
    return 2;
  }

  const auto run = evl::run_coverage(groups, pipeline, config, jobs);
  if (!write_file(out_file, evl::emit_csv(run.reports))) {
    std::cerr << "evl-eval: cannot write " << out_file << "\n";
    return 2;
  }
  if (!write_file(errors_file, evl::emit_errors_csv(run.errors))) {
    std::cerr << "evl-eval: cannot write " << errors_file << "\n";
    return 2;
  }

  for (const auto& r : run.reports) {
    if (r.zero_total) std::cerr << "warning: group '" << r.group_name << "' has no coverage\n";
  }
  const auto split = evl::overall_split(run.reports);
  std::fprintf(stderr, "overall: wikipedia %.2f%%, dbpedia %.2f%%, wolfram %.2f%%\n", split[0], split[1], split[2]);
  if (!run.errors.empty()) {
    std::cerr << run.errors.size() << " keyword error(s), see " << errors_file << "\n";
    return 1;
  }
  return 0;
}
