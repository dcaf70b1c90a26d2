// evl-subs check FILE             validate, print cue and segment counts
// evl-subs convert FILE --to vtt  re-render in the other format on stdout
// evl-subs segments FILE          one JSON line per segment

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evl/subtitle.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subtitle tools"};
  app.require_subcommand(1);
  std::string file, to = "vtt";
  evl::Millis gap = evl::kDefaultGapThresholdMs;
  auto* check = app.add_subcommand("check", "Parse and report");
  auto* convert = app.add_subcommand("convert", "Convert between SRT and WebVTT");
  auto* segments = app.add_subcommand("segments", "Print segments as JSON lines");
  for (auto* sub : {check, convert, segments}) sub->add_option("file", file)->required();
  convert->add_option("--to", to)->check(CLI::IsMember({"srt", "vtt"}));
  segments->add_option("--gap-ms", gap)->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::vector<evl::SubtitleCue> cues;
  try {
    const auto doc = slurp(file);
    cues = evl::parse_subtitle(doc, evl::sniff_format(doc));
  } catch (const evl::SubtitleError& e) {
    std::cerr << file << ":" << e.line() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  if (*check) {
    std::cout << cues.size() << " cues, " << evl::segment_cues(cues, gap).size() << " segments\n";
  } else if (*convert) {
    std::cout << (to == "srt" ? evl::to_srt(cues) : evl::to_vtt(cues));
  } else {
    for (const auto& s : evl::segment_cues(cues, gap)) std::cout << evl::segment_json(s).dump() << "\n";
  }
  return 0;
}
