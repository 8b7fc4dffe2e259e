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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "segsplice/error.h"
#include "segsplice/text.h"
#include "support/synthetic_corpus.h"

namespace segsplice {
namespace {

using testing::TempDir;
using testing::TokenSpec;
using testing::utterance;

// "tempo" tokenizes as ["tem", "po"].
BpeModel tem_po_model() {
  return BpeModel({"a", "c", "e", "f", "h", "m", "o", "p", "t"},
                  {{"t", "e"}, {"te", "m"}, {"p", "o"}});
}

// Three utterances "che tempo fa", one per domain, with silences between
// words. Frame counts are chosen per utterance so each span is unique.
std::vector<UtteranceAlignment> che_tempo_fa() {
  std::vector<UtteranceAlignment> out;
  const std::vector<std::string> domains = {"Dictation", "Video", "Conversation"};
  for (std::size_t i = 0; i < domains.size(); ++i) {
    const std::uint64_t k = i + 1;
    out.push_back(utterance("u" + std::to_string(i), domains[i],
                            {{-1, "", 10 + k},
                             {0, "c", 5 + k}, {0, "h", 6}, {0, "e", 7},
                             {-1, "", 12 + k},
                             {1, "t", 4 + k}, {1, "e", 5}, {1, "m", 6}, {1, "p", 5}, {1, "o", 8},
                             {-1, "", 14 + k},
                             {2, "f", 6 + k}, {2, "a", 9},
                             {-1, "", 20}}));
  }
  return out;
}

class SynthFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    alignments_ = che_tempo_fa();
    write_feature_store(testing::features_for(alignments_, 3), dir_ / "src", 3);
    store_.emplace(FeatureStore::open(dir_ / "src"));
    libs_ = build_libraries(alignments_, tem_po_model(), {});
  }

  TempDir dir_{"synth"};
  std::vector<UtteranceAlignment> alignments_;
  std::optional<FeatureStore> store_;
  LibrarySet libs_;
};

TEST_F(SynthFixture, PlanAllWords) {
  const SynthesisPlan plan = plan_units("che tempo fa", libs_, "s0");
  EXPECT_EQ(plan.resolution, (std::vector<Level>(3, Level::kWord)));
  EXPECT_EQ(plan.units, (std::vector<PlannedUnit>{{Level::kWord, "che", 0},
                                                  {Level::kWord, "tempo", 1},
                                                  {Level::kWord, "fa", 2}}));
}

TEST_F(SynthFixture, PlanFallsBackToPieces) {
  // "potem" tokenizes to ["po", "tem"], both pieces of "tempo". "tempote"
  // needs the piece "te", which never occurs, so it falls to graphemes.
  const SynthesisPlan plan = plan_units("potem", libs_);
  EXPECT_EQ(plan.resolution, std::vector<Level>{Level::kPiece});
  EXPECT_EQ(plan.units, (std::vector<PlannedUnit>{{Level::kPiece, "po", 0},
                                                  {Level::kPiece, "tem", 0}}));
  const SynthesisPlan g = plan_units("tempote", libs_);
  EXPECT_EQ(g.resolution, std::vector<Level>{Level::kGrapheme});
  EXPECT_EQ(g.units.size(), 7u);
}

TEST(PlanUnits, ToyLibraryMissingWordButHavingPieces) {
  LibrarySet libs;
  libs.bpe = tem_po_model();
  libs.words.add("che", {"u", 0, 18, 3, "D"});
  libs.pieces.add("tem", {"u", 20, 15, 3, "D"});
  libs.pieces.add("po", {"u", 35, 13, 2, "D"});
  const SynthesisPlan plan = plan_units("che tempo", libs);
  EXPECT_EQ(plan.resolution, (std::vector<Level>{Level::kWord, Level::kPiece}));
  EXPECT_EQ(plan.units, (std::vector<PlannedUnit>{{Level::kWord, "che", 0},
                                                  {Level::kPiece, "tem", 1},
                                                  {Level::kPiece, "po", 1}}));
}

TEST_F(SynthFixture, PriorityPrefersWholeWords) {
  ASSERT_TRUE(libs_.pieces.contains("tem"));
  ASSERT_TRUE(libs_.pieces.contains("po"));
  EXPECT_EQ(plan_units("tempo", libs_).resolution, std::vector<Level>{Level::kWord});
}

TEST_F(SynthFixture, UncoverableWordNamesGrapheme) {
  try {
    plan_units("che zeta", libs_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUncoverableWord);
    EXPECT_NE(std::string(e.what()).find("word 'zeta' missing graphemes: z"), std::string::npos);
  }
}

TEST_F(SynthFixture, DomainConstraint) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitMix64 rng(seed);
    const ResolvedPlan r =
        sample_instances(plan_units("che tempo fa", libs_), libs_, "Dictation", rng);
    for (const SegmentRef& ref : r.unit_refs) EXPECT_EQ(ref.domain, "Dictation");
    ASSERT_EQ(r.silences.size(), 2u);
    for (const auto& s : r.silences) EXPECT_EQ(s->domain, "Dictation");
  }
}

TEST_F(SynthFixture, DomainExhausted) {
  LibrarySet libs = libs_;
  libs.words = UnitLibrary(Level::kWord, 500);
  libs.words.add("che", {"u1", 0, 18, 3, "Video"});
  SplitMix64 rng(1);
  try {
    sample_instances(plan_units("che", libs), libs, "Dictation", rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomainExhausted);
    EXPECT_NE(std::string(e.what()).find("WORD:che"), std::string::npos);
  }
}

TEST(SampleInstances, SingletonAlwaysChosen) {
  LibrarySet libs;
  const SegmentRef only{"u", 3, 12, 2, "D"};
  libs.words.add("fa", only);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SplitMix64 rng(seed);
    EXPECT_EQ(sample_instances(plan_units("fa", libs), libs, std::nullopt, rng).unit_refs,
              std::vector<SegmentRef>{only});
  }
}

TEST_F(SynthFixture, SamplingIsDeterministic) {
  const auto plan = plan_units("che tempo fa che fa", libs_);
  SplitMix64 a(sentence_stream_seed(17, 4)), b(sentence_stream_seed(17, 4));
  EXPECT_EQ(sample_instances(plan, libs_, std::nullopt, a),
            sample_instances(plan, libs_, std::nullopt, b));
}

TEST(Splice, SingleWordIsSourceSlice) {
  TempDir dir("splice");
  const auto utt = utterance("u", "D", {{0, "c", 12}, {0, "h", 9}, {0, "e", 10}});
  write_feature_store(testing::features_for({utt}, 4), dir / "s", 4);
  const FeatureStore store = FeatureStore::open(dir / "s");
  ResolvedPlan r;
  r.plan.words = {"che"};
  r.plan.units = {{Level::kWord, "che", 0}};
  r.unit_refs = {{"u", 0, 31, 3, "D"}};
  const SplicedUtterance out = splice(r, store);
  EXPECT_EQ(out.features, store.slice("u", 0, 31));
  EXPECT_EQ(out.manifest.total_frames, 31u);
  ASSERT_EQ(out.manifest.spans.size(), 1u);
}

class SpliceArithmetic : public ::testing::Test {
 protected:
  void SetUp() override {
    write_feature_store({{"a", ramp(40)}, {"b", ramp(30)}}, dir_ / "s", 2);
    store_.emplace(FeatureStore::open(dir_ / "s"));
  }
  static FeatureMatrix ramp(std::size_t rows) {
    FeatureMatrix m(rows, 2);
    for (std::size_t r = 0; r < rows; ++r) m(r, 0) = m(r, 1) = static_cast<float>(r);
    return m;
  }
  TempDir dir_{"splice"};
  std::optional<FeatureStore> store_;
};

TEST_F(SpliceArithmetic, TwoWordsWithSilence) {
  ResolvedPlan r;
  r.plan.text = "che fa";
  r.plan.words = {"che", "fa"};
  r.plan.units = {{Level::kWord, "che", 0}, {Level::kWord, "fa", 1}};
  r.unit_refs = {{"a", 0, 31, 3, "D"}, {"b", 5, 20, 2, "D"}};
  r.silences = {SegmentRef{"b", 0, 12, 0, "D"}};
  const SplicedUtterance out = splice(r, *store_);
  // 31 + 12 + 20 = 63 frames.
  EXPECT_EQ(out.features.rows(), 63u);
  std::vector<std::uint64_t> lengths;
  for (const auto& s : out.manifest.spans) lengths.push_back(s.length);
  EXPECT_EQ(lengths, (std::vector<std::uint64_t>{31, 12, 20}));
  EXPECT_EQ(out.manifest.spans[1].kind, SpanKind::kSilence);
  EXPECT_EQ(out.features(31, 0), 0.0f);   // silence starts at b[0]
  EXPECT_EQ(out.features(43, 0), 5.0f);   // "fa" starts at b[5]
}

TEST_F(SpliceArithmetic, PiecesHaveNoSilenceBetweenThem) {
  ResolvedPlan r;
  r.plan.words = {"tempo"};
  r.plan.units = {{Level::kPiece, "tem", 0}, {Level::kPiece, "po", 0}};
  r.unit_refs = {{"a", 0, 15, 3, "D"}, {"a", 20, 16, 2, "D"}};
  const SplicedUtterance out = splice(r, *store_);
  EXPECT_EQ(out.features.rows(), 31u);
  ASSERT_EQ(out.manifest.spans.size(), 2u);
  EXPECT_EQ(out.manifest.spans[0].kind, SpanKind::kUnit);
  EXPECT_EQ(out.manifest.spans[1].kind, SpanKind::kUnit);
}

TEST_F(SpliceArithmetic, DanglingRef) {
  ResolvedPlan r;
  r.plan.words = {"x"};
  r.plan.units = {{Level::kWord, "x", 0}};
  r.unit_refs = {{"b", 25, 10, 1, "D"}};
  try {
    splice(r, *store_);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDanglingRef);
  }
}

TEST_F(SpliceArithmetic, EmptySilenceLibraryInsertsZeroFrames) {
  LibrarySet libs;
  libs.words.add("che", {"a", 1, 12, 3, "D"});
  libs.words.add("fa", {"b", 2, 8, 2, "D"});
  SplitMix64 rng(5);
  const ResolvedPlan r = sample_instances(plan_units("che fa", libs), libs, std::nullopt, rng);
  EXPECT_TRUE(r.silence_fallback);
  const SplicedUtterance out = splice(r, *store_);
  EXPECT_EQ(out.features.rows(), 12u + kFallbackSilenceFrames + 8u);
  EXPECT_TRUE(out.manifest.silence_fallback);
  EXPECT_EQ(out.manifest.spans[1].utt_id, "-");
  for (std::size_t f = 12; f < 22; ++f) EXPECT_EQ(out.features(f, 1), 0.0f);
}

TEST(Manifest, LineRoundTrip) {
  ManifestEntry e;
  e.sentence_id = "aug-00000003";
  e.text = "perché sì";
  e.domain = "Video";
  e.total_frames = 40;
  e.spans = {{SpanKind::kUnit, Level::kPiece, "perch", "u1", 3, 20, 0},
             {SpanKind::kUnit, Level::kGrapheme, "é", "u2", 0, 5, 0},
             {SpanKind::kSilence, Level::kSilence, "<sil>", "u3", 1, 7, 0},
             {SpanKind::kUnit, Level::kWord, "sì", "u4", 9, 8, 1}};
  const std::string line = e.to_line();
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(ManifestEntry::from_line(line), e);
  EXPECT_THROW(ManifestEntry::from_line("{\"id\":1}"), Error);
}

TEST(DomainPolicy, ParseAndAssign) {
  EXPECT_EQ(DomainPolicy::parse("any").domain_for(5), std::nullopt);
  EXPECT_EQ(DomainPolicy::parse("fixed=Dictation").domain_for(5), "Dictation");
  const auto rr = DomainPolicy::parse("round-robin=Dictation,Video,Conversation");
  EXPECT_EQ(rr.domain_for(0), "Dictation");
  EXPECT_EQ(rr.domain_for(4), "Video");
  EXPECT_EQ(rr.describe(), "round-robin=Dictation,Video,Conversation");
  EXPECT_THROW(DomainPolicy::parse("fixed="), Error);
  EXPECT_THROW(DomainPolicy::parse("round-robin=a,,b"), Error);
  EXPECT_THROW(DomainPolicy::parse("sometimes"), Error);
}

TEST_F(SynthFixture, CorpusRoundRobinSplitsEvenly) {
  std::string text;
  for (int i = 0; i < 9; ++i) text += (i % 2 ? "fa che tempo\n" : "che tempo fa\n");
  std::istringstream sentences(text);
  SynthConfig config;
  config.policy = DomainPolicy::parse("round-robin=Dictation,Video,Conversation");
  config.output_stem = dir_ / "out";
  const SynthSummary s = synthesize_corpus(sentences, libs_, *store_, config);
  EXPECT_EQ(s.synthesized, 9u);
  EXPECT_EQ(s.sentences_by_domain,
            (std::map<std::string, std::uint64_t>{{"Conversation", 3}, {"Dictation", 3}, {"Video", 3}}));
  const auto manifest = read_manifest(SynthOutputs::from_stem(config.output_stem).manifest);
  ASSERT_EQ(manifest.size(), 9u);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    EXPECT_EQ(manifest[i].domain, *config.policy.domain_for(i));
    for (const auto& span : manifest[i].spans) {
      const auto& src = alignments_[std::stoul(span.utt_id.substr(1))];
      EXPECT_EQ(src.domain, manifest[i].domain);
    }
  }
}

TEST_F(SynthFixture, EmptyInputGivesEmptyOutputs) {
  std::istringstream sentences("");
  SynthConfig config;
  config.output_stem = dir_ / "empty";
  const SynthSummary s = synthesize_corpus(sentences, libs_, *store_, config);
  EXPECT_EQ(s, SynthSummary{});
  EXPECT_EQ(FeatureStore::open(dir_ / "empty").size(), 0u);
  EXPECT_TRUE(read_manifest(SynthOutputs::from_stem(dir_ / "empty").manifest).empty());
  EXPECT_EQ(testing::read_file(SynthOutputs::from_stem(dir_ / "empty").rejects), "");
}

TEST_F(SynthFixture, RerunAndJobCountGiveIdenticalOutputs) {
  std::string text;
  for (int i = 0; i < 40; ++i) text += "che tempo fa potem fa\nche zeta\n\n";
  auto run = [&](const std::string& name, std::size_t jobs) {
    std::istringstream sentences(text);
    SynthConfig config;
    config.output_stem = dir_ / name;
    config.jobs = jobs;
    config.batch_size = 7;
    synthesize_corpus(sentences, libs_, *store_, config);
    const auto o = SynthOutputs::from_stem(config.output_stem);
    return testing::read_file(StorePaths::from_stem(o.store_stem).data) +
           testing::read_file(StorePaths::from_stem(o.store_stem).index) +
           testing::read_file(o.manifest) + testing::read_file(o.rejects);
  };
  const std::string first = run("r1", 1);
  EXPECT_EQ(first, run("r2", 1));
  EXPECT_EQ(first, run("r3", 4));
}

TEST_F(SynthFixture, RejectsAreRecordedNotSkipped) {
  std::istringstream sentences("che tempo\nche zeta\n\n!!!\nfa\n");
  SynthConfig config;
  config.output_stem = dir_ / "rej";
  const SynthSummary s = synthesize_corpus(sentences, libs_, *store_, config);
  EXPECT_EQ(s.sentences, 5u);
  EXPECT_EQ(s.synthesized, 2u);
  EXPECT_EQ(s.rejected, 3u);
  const std::string rejects = testing::read_file(SynthOutputs::from_stem(config.output_stem).rejects);
  EXPECT_NE(rejects.find("2\tUncoverableWord\t"), std::string::npos);
  EXPECT_NE(rejects.find("3\tEmptySentence\t"), std::string::npos);
  EXPECT_NE(rejects.find("4\tEmptySentence\t"), std::string::npos);
  const auto manifest = read_manifest(SynthOutputs::from_stem(config.output_stem).manifest);
  ASSERT_EQ(manifest.size(), 2u);
  EXPECT_EQ(manifest[0].sentence_id, "aug-00000000");
  EXPECT_EQ(manifest[1].sentence_id, "aug-00000004");
  EXPECT_EQ(manifest[1].text, "fa");
}

}  // namespace
}  // namespace segsplice
