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

#include "segsplice/synth.h"

#include <fstream>
#include <istream>
#include <random>
#include <variant>

#include "json.hpp"

#include "segsplice/error.h"
#include "segsplice/parallel.h"
#include "segsplice/text.h"

namespace segsplice {
namespace {

using Json = nlohmann::ordered_json;

struct Reject {
  std::string reason;
  std::string detail;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

// Indices of instances usable under the domain constraint.
std::vector<std::size_t> usable(const std::vector<SegmentRef>& refs,
                                const std::optional<std::string>& domain) {
  std::vector<std::size_t> idx;
  idx.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!domain || refs[i].domain == *domain) idx.push_back(i);
  }
  return idx;
}

}  // namespace

WordResolution resolve_word(std::string_view word, const LibrarySet& libs) {
  WordResolution res;
  if (libs.words.contains(word)) {
    res.level = Level::kWord;
    res.units.emplace_back(word);
    return res;
  }
  const std::vector<std::string> graphemes = split_graphemes(word);
  if (auto pieces = libs.bpe.try_tokenize(graphemes)) {
    const bool covered = std::all_of(pieces->begin(), pieces->end(), [&](const Piece& p) {
      return libs.pieces.contains(p.text);
    });
    if (covered) {
      res.level = Level::kPiece;
      for (Piece& p : *pieces) res.units.push_back(std::move(p.text));
      return res;
    }
  }
  for (const std::string& g : graphemes) {
    if (!libs.graphemes.contains(g)) res.missing.push_back(g);
  }
  if (res.missing.empty()) {
    res.level = Level::kGrapheme;
    res.units = graphemes;
  }
  return res;
}

SynthesisPlan plan_units(std::string_view sentence, const LibrarySet& libs,
                         std::string sentence_id) {
  SynthesisPlan plan;
  plan.sentence_id = std::move(sentence_id);
  plan.text = std::string(sentence);
  plan.words = split_words(sentence);
  for (std::size_t w = 0; w < plan.words.size(); ++w) {
    WordResolution res = resolve_word(plan.words[w], libs);
    if (!res.level) {
      std::string missing;
      for (const auto& g : res.missing) missing += (missing.empty() ? "" : ",") + g;
      throw Error(ErrorCode::kUncoverableWord,
                  "word '" + plan.words[w] + "' missing graphemes: " + missing);
    }
    plan.resolution.push_back(*res.level);
    for (std::string& u : res.units) plan.units.push_back({*res.level, std::move(u), w});
  }
  return plan;
}

ResolvedPlan sample_instances(SynthesisPlan plan, const LibrarySet& libs,
                              const std::optional<std::string>& domain,
                              SplitMix64& rng) {
  ResolvedPlan out;
  out.domain = domain;
  out.unit_refs.reserve(plan.units.size());
  const std::size_t gaps = plan.words.empty() ? 0 : plan.words.size() - 1;
  out.silences.reserve(gaps);

  std::vector<std::string> exhausted;
  auto draw = [&](Level level, std::string_view unit) -> std::optional<SegmentRef> {
    const std::vector<SegmentRef>* refs = libs.at(level).find(unit);
    if (refs == nullptr) {
      throw Error(ErrorCode::kDanglingRef, std::string(level_name(level)) + " '" +
                                               std::string(unit) + "' not in library");
    }
    const std::vector<std::size_t> idx = usable(*refs, domain);
    if (idx.empty()) {
      exhausted.push_back(std::string(level_name(level)) + ":" + std::string(unit));
      return std::nullopt;
    }
    std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
    return (*refs)[idx[pick(rng)]];
  };

  std::size_t u = 0;
  for (std::size_t w = 0; w < plan.words.size(); ++w) {
    for (; u < plan.units.size() && plan.units[u].word == w; ++u) {
      auto ref = draw(plan.units[u].level, plan.units[u].unit);
      out.unit_refs.push_back(ref ? std::move(*ref) : SegmentRef{});
    }
    if (w + 1 == plan.words.size()) break;
    if (libs.silence.empty()) {
      out.silences.emplace_back(std::nullopt);
      out.silence_fallback = true;
    } else {
      out.silences.push_back(draw(Level::kSilence, kSilenceKey));
    }
  }
  if (!exhausted.empty()) {
    std::string msg = "no instances in domain '" + domain.value_or("any") + "' for";
    for (const auto& e : exhausted) msg += " " + e;
    throw Error(ErrorCode::kDomainExhausted, msg);
  }
  out.plan = std::move(plan);
  return out;
}

std::string ManifestEntry::to_line() const {
  Json spans_json = Json::array();
  for (const SpanRecord& s : spans) {
    Json j;
    j["kind"] = s.kind == SpanKind::kUnit ? "UNIT" : "SIL";
    if (s.kind == SpanKind::kUnit) j["level"] = level_name(s.level);
    j["unit"] = s.unit;
    j["utt"] = s.utt_id;
    j["start"] = s.start;
    j["len"] = s.length;
    j["word"] = s.word;
    spans_json.push_back(std::move(j));
  }
  Json j;
  j["id"] = sentence_id;
  j["text"] = text;
  j["domain"] = domain;
  j["total_frames"] = total_frames;
  j["silence_fallback"] = silence_fallback;
  j["spans"] = std::move(spans_json);
  return j.dump();
}

ManifestEntry ManifestEntry::from_line(std::string_view line) {
  try {
    const Json j = Json::parse(line);
    ManifestEntry e;
    e.sentence_id = j.at("id").get<std::string>();
    e.text = j.at("text").get<std::string>();
    e.domain = j.at("domain").get<std::string>();
    e.total_frames = j.at("total_frames").get<std::uint64_t>();
    e.silence_fallback = j.at("silence_fallback").get<bool>();
    for (const Json& s : j.at("spans")) {
      SpanRecord r;
      const auto kind = s.at("kind").get<std::string>();
      if (kind == "UNIT") {
        r.kind = SpanKind::kUnit;
        const auto level = parse_level(s.at("level").get<std::string>());
        if (!level) throw Error(ErrorCode::kBadFormat, "bad span level");
        r.level = *level;
      } else if (kind == "SIL") {
        r.kind = SpanKind::kSilence;
        r.level = Level::kSilence;
      } else {
        throw Error(ErrorCode::kBadFormat, "bad span kind '" + kind + "'");
      }
      r.unit = s.at("unit").get<std::string>();
      r.utt_id = s.at("utt").get<std::string>();
      r.start = s.at("start").get<std::uint64_t>();
      r.length = s.at("len").get<std::uint64_t>();
      r.word = s.at("word").get<std::size_t>();
      e.spans.push_back(std::move(r));
    }
    return e;
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::kBadFormat, std::string("manifest line: ") + ex.what());
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(ManifestEntry::from_line(line));
  }
  return out;
}

SplicedUtterance splice(const ResolvedPlan& resolved, const FeatureStore& store) {
  SplicedUtterance out;
  out.features = FeatureMatrix(0, store.dim());
  ManifestEntry& m = out.manifest;
  m.sentence_id = resolved.plan.sentence_id;
  m.text = resolved.plan.text;
  m.domain = resolved.domain.value_or("any");
  m.silence_fallback = resolved.silence_fallback;

  auto append = [&](const SegmentRef& ref) {
    auto frames = store.try_view(ref.utt_id, ref.start_frame, ref.num_frames);
    if (!frames) {
      throw Error(ErrorCode::kDanglingRef,
                  ref.utt_id + " [" + std::to_string(ref.start_frame) + ", +" +
                      std::to_string(ref.num_frames) + ")");
    }
    out.features.append_rows(*frames);
  };

  const auto& units = resolved.plan.units;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const SegmentRef& ref = resolved.unit_refs.at(i);
    append(ref);
    m.spans.push_back({SpanKind::kUnit, units[i].level, units[i].unit, ref.utt_id,
                       ref.start_frame, ref.num_frames, units[i].word});
    const bool word_ends = i + 1 == units.size() || units[i + 1].word != units[i].word;
    if (!word_ends || i + 1 == units.size()) continue;
    const auto& sil = resolved.silences.at(units[i].word);
    if (sil) {
      append(*sil);
      m.spans.push_back({SpanKind::kSilence, Level::kSilence, std::string(kSilenceKey),
                         sil->utt_id, sil->start_frame, sil->num_frames, units[i].word});
    } else {
      const std::vector<float> zeros(kFallbackSilenceFrames * store.dim(), 0.0f);
      out.features.append_rows(zeros);
      m.spans.push_back({SpanKind::kSilence, Level::kSilence, std::string(kSilenceKey),
                         "-", 0, kFallbackSilenceFrames, units[i].word});
    }
  }
  m.total_frames = out.features.rows();
  return out;
}

DomainPolicy DomainPolicy::round_robin(std::vector<std::string> domains) {
  if (domains.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "round-robin needs at least one domain");
  }
  return DomainPolicy(Kind::kRoundRobin, std::move(domains));
}

DomainPolicy DomainPolicy::parse(std::string_view text) {
  if (text == "any") return any();
  if (text.starts_with("fixed=") && text.size() > 6) {
    return fixed(std::string(text.substr(6)));
  }
  constexpr std::string_view kRr = "round-robin=";
  if (text.starts_with(kRr)) {
    std::vector<std::string> domains;
    for (std::string_view d : split_fields(text.substr(kRr.size()), ',')) {
      if (d.empty()) throw Error(ErrorCode::kInvalidArgument, "empty domain in policy");
      domains.emplace_back(d);
    }
    return round_robin(std::move(domains));
  }
  throw Error(ErrorCode::kInvalidArgument,
              "domain policy must be any, fixed=<d>, or round-robin=<d1>,<d2>,...");
}

std::optional<std::string> DomainPolicy::domain_for(std::uint64_t sentence_index) const {
  switch (kind_) {
    case Kind::kAny: return std::nullopt;
    case Kind::kFixed: return domains_.front();
    case Kind::kRoundRobin: return domains_[sentence_index % domains_.size()];
  }
  return std::nullopt;
}

std::string DomainPolicy::describe() const {
  switch (kind_) {
    case Kind::kAny: return "any";
    case Kind::kFixed: return "fixed=" + domains_.front();
    case Kind::kRoundRobin: {
      std::string s = "round-robin=";
      for (std::size_t i = 0; i < domains_.size(); ++i) {
        s += (i ? "," : "") + domains_[i];
      }
      return s;
    }
  }
  return {};
}

SynthOutputs SynthOutputs::from_stem(const std::filesystem::path& stem) {
  return {stem, std::filesystem::path(stem.string() + ".manifest.jsonl"),
          std::filesystem::path(stem.string() + ".rejects.tsv")};
}

std::uint64_t sentence_stream_seed(std::uint64_t seed, std::uint64_t index) {
  return derive_seed(seed, 0x53594E5448ULL, index);
}

std::string sentence_id(std::string_view prefix, std::uint64_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 8) digits.insert(0, 8 - digits.size(), '0');
  return std::string(prefix) + "-" + digits;
}

SplicedUtterance synthesize_sentence(std::string_view raw_text, std::uint64_t index,
                                     const LibrarySet& libs, const FeatureStore& store,
                                     const SynthConfig& config) {
  const std::string text = normalize_text(raw_text);
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sentence");
  SplitMix64 rng(sentence_stream_seed(config.seed, index));
  SynthesisPlan plan = plan_units(text, libs, sentence_id(config.id_prefix, index));
  const ResolvedPlan resolved =
      sample_instances(std::move(plan), libs, config.policy.domain_for(index), rng);
  return splice(resolved, store);
}

SynthSummary synthesize_corpus(std::istream& sentences, const LibrarySet& libs,
                               const FeatureStore& store, const SynthConfig& config) {
  const SynthOutputs outputs = SynthOutputs::from_stem(config.output_stem);
  FeatureStoreWriter writer(outputs.store_stem, store.dim());
  std::ofstream manifest(outputs.manifest, std::ios::binary | std::ios::trunc);
  std::ofstream rejects(outputs.rejects, std::ios::binary | std::ios::trunc);
  if (!manifest || !rejects) {
    throw Error(ErrorCode::kIoFailure, "cannot create outputs at " +
                                           config.output_stem.string());
  }

  SynthSummary summary;
  const std::size_t batch_size = std::max<std::size_t>(1, config.batch_size);
  std::vector<std::string> lines;
  std::vector<std::variant<SplicedUtterance, Reject>> results;
  std::uint64_t base = 0;
  bool more = true;
  while (more) {
    lines.clear();
    std::string line;
    while (lines.size() < batch_size && (more = static_cast<bool>(std::getline(sentences, line)))) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
    if (lines.empty()) break;

    results.assign(lines.size(), Reject{});
    parallel_for(lines.size(), config.jobs, [&](std::size_t i) {
      const std::uint64_t index = base + i;
      if (normalize_text(lines[i]).empty()) {
        results[i] = Reject{"EmptySentence", "no words after normalization"};
        return;
      }
      try {
        results[i] = synthesize_sentence(lines[i], index, libs, store, config);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kIoFailure) throw;
        results[i] = Reject{std::string(error_code_name(e.code())), one_line(e.what())};
      }
    });

    for (std::size_t i = 0; i < results.size(); ++i) {
      ++summary.sentences;
      if (const auto* r = std::get_if<Reject>(&results[i])) {
        ++summary.rejected;
        ++summary.rejects_by_reason[r->reason];
        rejects << (base + i + 1) << '\t' << r->reason << '\t' << r->detail << '\n';
        continue;
      }
      const auto& u = std::get<SplicedUtterance>(results[i]);
      writer.append(u.manifest.sentence_id, u.features);
      manifest << u.manifest.to_line() << '\n';
      ++summary.synthesized;
      summary.total_frames += u.manifest.total_frames;
      summary.silence_fallbacks += u.manifest.silence_fallback ? 1 : 0;
      ++summary.sentences_by_domain[u.manifest.domain];
      std::size_t last_word = static_cast<std::size_t>(-1);
      for (const SpanRecord& s : u.manifest.spans) {
        if (s.kind == SpanKind::kUnit && s.word != last_word) {
          ++summary.words_by_level[s.level];
          last_word = s.word;
        }
      }
    }
    if (!manifest || !rejects) throw Error(ErrorCode::kIoFailure, "write failed");
    base += lines.size();
  }
  writer.close();
  manifest.close();
  rejects.close();
  if (!manifest || !rejects) throw Error(ErrorCode::kIoFailure, "close failed");
  return summary;
}

}  // namespace segsplice
