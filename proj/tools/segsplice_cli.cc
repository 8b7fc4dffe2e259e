// Copyright 2026 The segsplice Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segsplice_cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "segsplice/alignment.h"
#include "segsplice/bpe.h"
#include "segsplice/error.h"
#include "segsplice/feature_store.h"
#include "segsplice/seglib.h"
#include "segsplice/stats.h"
#include "segsplice/synth.h"
#include "segsplice/text.h"

namespace segsplice::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kFormatsHelp =
    "File formats:\n"
    "  feature store   <stem>.index starts '#SEGSPLICE-FEAT v1 dim=<D>', rows\n"
    "                  'utt_id<TAB>frame_offset<TAB>num_frames'; <stem>.data holds\n"
    "                  little-endian float32 frames, row-major, in index order.\n"
    "  alignments      '#SEGSPLICE-ALIGN v1', rows 'utt_id<TAB>domain<TAB>word_index\n"
    "                  <TAB>symbol<TAB>start_frame<TAB>num_frames'; silence uses\n"
    "                  word_index '-' and symbol '<sil>'.\n"
    "  bpe model       '#SEGSPLICE-BPE v1', alphabet line, then 'left<TAB>right' merges.\n"
    "  library         '#SEGSPLICE-LIB v1 level=<L> cap=<C>', rows 'unit<TAB>utt_id\n"
    "                  <TAB>start_frame<TAB>num_frames<TAB>grapheme_count<TAB>domain'.\n"
    "  manifest        JSON lines: id, text, domain, total_frames, silence_fallback,\n"
    "                  spans[{kind, level, unit, utt, start, len, word}].\n"
    "  rejects         'line_number<TAB>reason<TAB>detail'.\n"
    "Exit codes: 0 ok, 1 usage, 2 input/data error, 3 validation violation.";

// Thrown for problems with flags that parse but make no sense together.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::kMissingFile, p.string());
}

void require_store(const fs::path& stem) {
  const StorePaths paths = StorePaths::from_stem(stem);
  require_file(paths.index);
  require_file(paths.data);
}

void require_libs(const fs::path& dir) {
  for (Level l : kAllLevels) require_file(library_file(dir, l));
}

std::set<std::string> split_domains(const std::string& list) {
  std::set<std::string> out;
  if (list.empty()) return out;
  for (std::string_view d : split_fields(list, ',')) {
    if (d.empty()) throw UsageError("empty domain in --domains");
    out.emplace(d);
  }
  return out;
}

ReportFormat parse_format(const std::string& s) {
  if (s == "table") return ReportFormat::kTable;
  if (s == "kv") return ReportFormat::kKeyValue;
  throw UsageError("--format must be table or kv");
}

std::string render_build_summary(const BuildSummary& s, const LibrarySet& libs) {
  std::ostringstream os;
  os << "utterances.used=" << s.utterances_used << '\n'
     << "utterances.skipped=" << s.utterances_skipped << '\n';
  for (Level l : kAllLevels) {
    const auto& st = s.levels[static_cast<std::size_t>(l)];
    std::string name(level_name(l));
    std::transform(name.begin(), name.end(), name.begin(), ::tolower);
    os << name << ".seen=" << st.seen << '\n'
       << name << ".filtered=" << st.filtered << '\n'
       << name << ".stored=" << st.stored << '\n'
       << name << ".units=" << libs.at(l).unit_count() << '\n';
  }
  return os.str();
}

std::string render_synth_summary(const SynthSummary& s) {
  std::ostringstream os;
  os << "sentences=" << s.sentences << '\n'
     << "synthesized=" << s.synthesized << '\n'
     << "rejected=" << s.rejected << '\n'
     << "total_frames=" << s.total_frames << '\n'
     << "silence_fallbacks=" << s.silence_fallbacks << '\n';
  for (Level l : {Level::kWord, Level::kPiece, Level::kGrapheme}) {
    const auto it = s.words_by_level.find(l);
    os << "words." << level_name(l) << '=' << (it == s.words_by_level.end() ? 0 : it->second)
       << '\n';
  }
  for (const auto& [d, n] : s.sentences_by_domain) os << "domain." << d << '=' << n << '\n';
  for (const auto& [r, n] : s.rejects_by_reason) os << "rejects." << r << '=' << n << '\n';
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, path.string());
}

struct TrainBpeArgs {
  std::string input;
  std::string output;
  std::size_t vocab_size = 4000;
};

struct BuildLibArgs {
  std::string alignments;
  std::string store;
  std::string bpe;
  std::string output;
  std::uint64_t seed = 17;
  LibraryCaps caps;
  DurationBounds bounds;
  std::string domains;
  std::size_t jobs = 1;
};

struct SynthArgs {
  std::string libs;
  std::string store;
  std::string sentences;
  std::string output;
  std::uint64_t seed = 17;
  std::string policy = "any";
  std::size_t jobs = 1;
  std::size_t batch = 256;
};

struct StatsArgs {
  std::string libs;
  std::string sentences;
  std::string alignments;
  std::string bpe;
  std::string level = "word";
  std::uint64_t bin = kDefaultBinWidth;
  std::uint64_t max_avg = 30;
  bool per_domain = false;
  std::string format = "table";
};

struct ValidateArgs {
  std::string store;
  std::string alignments;
  std::string libs;
};

int cmd_train_bpe(const TrainBpeArgs& a, std::ostream& out) {
  require_file(a.input);
  std::ifstream in(a.input);
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  while (std::getline(in, line)) {
    for (std::string& w : split_words(normalize_text(line))) ++counts[std::move(w)];
  }
  const BpeModel model = train_bpe(counts, a.vocab_size);
  save_bpe(model, fs::path(a.output));
  out << "words=" << counts.size() << '\n'
      << "alphabet=" << model.alphabet().size() << '\n'
      << "merges=" << model.merges().size() << '\n'
      << "vocab=" << model.vocab_size() << '\n';
  return kExitOk;
}

int cmd_build_lib(const BuildLibArgs& a, std::ostream& out) {
  require_file(a.alignments);
  require_store(a.store);
  require_file(a.bpe);
  const FeatureStore store = FeatureStore::open(a.store);
  const BpeModel bpe = load_bpe(fs::path(a.bpe));
  const auto alignments = parse_alignments(fs::path(a.alignments), &store);

  BuildOptions options;
  options.caps = a.caps;
  options.bounds = a.bounds;
  options.seed = a.seed;
  options.jobs = a.jobs;
  options.domains = split_domains(a.domains);
  BuildSummary summary;
  const LibrarySet libs = build_libraries(alignments, bpe, options, &summary);
  save_libraries(libs, a.output);
  const std::string text = render_build_summary(summary, libs);
  write_text(fs::path(a.output) / "build_summary.txt", text);
  out << text;
  return kExitOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  require_libs(a.libs);
  require_store(a.store);
  require_file(a.sentences);
  SynthConfig config;
  try {
    config.policy = DomainPolicy::parse(a.policy);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  config.seed = a.seed;
  config.jobs = a.jobs;
  config.batch_size = a.batch;
  config.output_stem = a.output;

  const FeatureStore store = FeatureStore::open(a.store);
  const LibrarySet libs = load_libraries(a.libs, &store);
  std::ifstream sentences(a.sentences);
  const SynthSummary summary = synthesize_corpus(sentences, libs, store, config);
  const std::string text = render_synth_summary(summary);
  write_text(a.output + ".summary.txt", text);
  out << text;
  return kExitOk;
}

int cmd_stats_coverage(const StatsArgs& a, std::ostream& out) {
  const ReportFormat format = parse_format(a.format);
  if (a.libs.empty() || a.sentences.empty()) {
    throw UsageError("coverage needs --libs and --sentences");
  }
  require_libs(a.libs);
  require_file(a.sentences);
  const LibrarySet libs = load_libraries(a.libs);
  std::ifstream in(a.sentences);
  out << render(coverage(in, libs), format);
  return kExitOk;
}

int cmd_stats_durations(const StatsArgs& a, std::ostream& out) {
  const ReportFormat format = parse_format(a.format);
  const auto level = parse_level(a.level);
  if (!level || *level == Level::kSilence) {
    throw UsageError("--level must be word, piece, or grapheme");
  }
  if (!a.alignments.empty()) {
    if (a.bpe.empty()) throw UsageError("--alignments needs --bpe");
    require_file(a.alignments);
    require_file(a.bpe);
    const auto alignments = parse_alignments(fs::path(a.alignments));
    out << render(duration_histogram(alignments, load_bpe(fs::path(a.bpe)), *level,
                                     a.bin, a.max_avg),
                  format);
    return kExitOk;
  }
  if (a.libs.empty()) throw UsageError("durations needs --libs or --alignments");
  require_libs(a.libs);
  out << render(duration_histogram(load_libraries(a.libs), *level, a.bin, a.max_avg),
                format);
  return kExitOk;
}

int cmd_stats_units(const StatsArgs& a, std::ostream& out) {
  const ReportFormat format = parse_format(a.format);
  if (!a.alignments.empty()) {
    if (a.bpe.empty()) throw UsageError("--alignments needs --bpe");
    require_file(a.alignments);
    require_file(a.bpe);
    const auto alignments = parse_alignments(fs::path(a.alignments));
    out << render(unit_counts(alignments, load_bpe(fs::path(a.bpe)), a.per_domain), format);
    return kExitOk;
  }
  if (a.libs.empty()) throw UsageError("units needs --libs or --alignments");
  require_libs(a.libs);
  out << render(unit_counts(load_libraries(a.libs), a.per_domain), format);
  return kExitOk;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  require_store(a.store);
  if (!a.alignments.empty()) require_file(a.alignments);
  if (!a.libs.empty()) require_libs(a.libs);
  const FeatureStore store = FeatureStore::open(a.store);

  std::vector<std::string> violations;
  if (!a.alignments.empty()) {
    const auto alignments = parse_alignments(fs::path(a.alignments));
    for (auto& v : check_alignments_against_store(alignments, store)) {
      violations.push_back("alignment: " + v);
    }
  }
  if (!a.libs.empty()) {
    const LibrarySet libs = load_libraries(a.libs);
    for (auto& v : check_library_refs(libs, store)) violations.push_back("library: " + v);
  }
  for (const auto& v : violations) out << "VIOLATION " << v << '\n';
  out << "violations=" << violations.size() << '\n';
  return violations.empty() ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"segsplice: segment libraries and spliced feature utterances", "segsplice"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);

  TrainBpeArgs train;
  auto* train_cmd = app.add_subcommand("train-bpe", "Train a BPE model on a transcript");
  train_cmd->add_option("--input", train.input, "Transcript, one sentence per line")->required();
  train_cmd->add_option("--output", train.output, "Model file to write")->required();
  train_cmd->add_option("--vocab-size", train.vocab_size, "Target vocabulary size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  BuildLibArgs build;
  auto* build_cmd = app.add_subcommand("build-lib", "Build segment libraries from alignments");
  build_cmd->add_option("--alignments", build.alignments, "Alignment file")->required();
  build_cmd->add_option("--store", build.store, "Feature store stem")->required();
  build_cmd->add_option("--bpe", build.bpe, "BPE model file")->required();
  build_cmd->add_option("--output", build.output, "Library directory")->required();
  build_cmd->add_option("--seed", build.seed, "Reservoir seed")->capture_default_str();
  build_cmd->add_option("--cap-word", build.caps.word)->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--cap-piece", build.caps.piece)->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--cap-grapheme", build.caps.grapheme)->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--cap-silence", build.caps.silence)->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--min-avg", build.bounds.min_avg, "Min frames per grapheme")
      ->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--max-avg", build.bounds.max_avg, "Max frames per grapheme")
      ->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--sil-max", build.bounds.silence_max, "Silence truncation length")
      ->check(CLI::PositiveNumber)->capture_default_str();
  build_cmd->add_option("--domains", build.domains, "Comma-separated domains to keep");
  build_cmd->add_option("--jobs", build.jobs, "Extraction threads")
      ->check(CLI::PositiveNumber)->capture_default_str();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize feature utterances for text");
  synth_cmd->add_option("--libs", synth.libs, "Library directory")->required();
  synth_cmd->add_option("--store", synth.store, "Source feature store stem")->required();
  synth_cmd->add_option("--sentences", synth.sentences, "Text, one sentence per line")->required();
  synth_cmd->add_option("--output", synth.output, "Output stem")->required();
  synth_cmd->add_option("--seed", synth.seed, "Sampling seed")->capture_default_str();
  synth_cmd->add_option("--domain-policy", synth.policy,
                        "any | fixed=<d> | round-robin=<d1>,<d2>,...")
      ->capture_default_str();
  synth_cmd->add_option("--jobs", synth.jobs, "Worker threads")
      ->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--batch", synth.batch, "Sentences per in-flight batch")
      ->check(CLI::PositiveNumber)->capture_default_str();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Coverage, duration, and unit-count reports");
  stats_cmd->require_subcommand(1);
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", stats.format, "table | kv")->capture_default_str();
  };
  auto* cov_cmd = stats_cmd->add_subcommand("coverage", "Sentence coverage by unit level");
  cov_cmd->add_option("--libs", stats.libs, "Library directory");
  cov_cmd->add_option("--sentences", stats.sentences, "Text, one sentence per line");
  add_format(cov_cmd);
  auto* dur_cmd = stats_cmd->add_subcommand("durations", "Average grapheme duration histogram");
  dur_cmd->add_option("--libs", stats.libs, "Library directory");
  dur_cmd->add_option("--alignments", stats.alignments, "Raw alignments (pre-filter mode)");
  dur_cmd->add_option("--bpe", stats.bpe, "BPE model for pre-filter mode");
  dur_cmd->add_option("--level", stats.level, "word | piece | grapheme")->capture_default_str();
  dur_cmd->add_option("--bin", stats.bin, "Bin width in frames")
      ->check(CLI::PositiveNumber)->capture_default_str();
  dur_cmd->add_option("--max-avg", stats.max_avg, "Limit reported as 'above'")
      ->check(CLI::PositiveNumber)->capture_default_str();
  add_format(dur_cmd);
  auto* units_cmd = stats_cmd->add_subcommand("units", "Distinct units per domain");
  units_cmd->add_option("--libs", stats.libs, "Library directory");
  units_cmd->add_option("--alignments", stats.alignments, "Raw alignments");
  units_cmd->add_option("--bpe", stats.bpe, "BPE model (with --alignments)");
  units_cmd->add_flag("--per-domain", stats.per_domain, "One row per domain");
  add_format(units_cmd);

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Cross-check store, alignments, libraries");
  validate_cmd->add_option("--store", validate.store, "Feature store stem")->required();
  validate_cmd->add_option("--alignments", validate.alignments, "Alignment file");
  validate_cmd->add_option("--libs", validate.libs, "Library directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train_bpe(train, out);
    if (*build_cmd) return cmd_build_lib(build, out);
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*cov_cmd) return cmd_stats_coverage(stats, out);
    if (*dur_cmd) return cmd_stats_durations(stats, out);
    if (*units_cmd) return cmd_stats_units(stats, out);
    if (*validate_cmd) return cmd_validate(validate, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace segsplice::cli
