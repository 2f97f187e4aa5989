#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pianolm/error.hpp"
#include "pianolm/tokenizer/octuple.hpp"
#include "pianolm/tokenizer/token_file.hpp"

using namespace pianolm;
using namespace pianolm::tokenizer;

namespace {

NoteSequence notes(std::vector<Note> v) {
  NoteSequence ns;
  ns.notes = std::move(v);
  ns.sort();
  return ns;
}

}  // namespace

TEST(Tokenizer, DefaultVocabularyMatchesTable) {
  const TokenizerConfig cfg;
  const std::array<int, kStreams> expected = {92, 68, 1156, 772, 388, 20};
  EXPECT_EQ(cfg.vocab_sizes(), expected);
  EXPECT_EQ(cfg.special(kPitch, Special::Pad), 88);
  EXPECT_EQ(cfg.special(kPitch, Special::Mask), 91);
}

TEST(Tokenizer, EmptySequenceIsFramingOnly) {
  const TokenizerConfig cfg;
  const auto seq = tokenize(NoteSequence{}, cfg);
  ASSERT_EQ(seq.length(), 2u);
  for (int s = 0; s < kStreams; ++s) {
    EXPECT_EQ(seq.at(0, s), cfg.special(s, Special::Bos));
    EXPECT_EQ(seq.at(1, s), cfg.special(s, Special::Eos));
  }
  EXPECT_TRUE(detokenize(seq, cfg).empty());
}

TEST(Tokenizer, SingleNoteTokens) {
  const auto seq = tokenize(notes({{21, 1, 0.0, 0.5}}));
  ASSERT_EQ(seq.length(), 3u);
  const std::array<int, kStreams> expected = {0, 0, 50, 0, 0, 0};
  EXPECT_EQ(seq.row(1), expected);
}

TEST(Tokenizer, PositionBarAndIoi) {
  const TokenizerConfig cfg;
  const auto seq = tokenize(notes({{60, 127, 5.0, 0.25}, {62, 64, 70.0, 0.25}}), cfg);
  EXPECT_EQ(seq.at(1, kBar), 1);
  EXPECT_EQ(seq.at(1, kPosition), 96);
  EXPECT_EQ(seq.at(1, kIoi), 500);
  EXPECT_EQ(seq.at(1, kVelocity), 63);
  EXPECT_EQ(seq.at(2, kBar), 15);        // clipped
  EXPECT_EQ(seq.at(2, kIoi), 767);       // 65 s clipped to the top bin
  EXPECT_EQ(seq.at(2, kPosition), 192);  // 70 s is half way through pseudo-bar 17
}

TEST(Tokenizer, TopDurationBinDecodesToMaxDuration) {
  const TokenizerConfig cfg;
  auto seq = tokenize(notes({{60, 80, 0.0, 30.0}}), cfg);
  EXPECT_EQ(seq.at(1, kDuration), 1151);
  EXPECT_NEAR(detokenize(seq, cfg).notes[0].duration, cfg.max_duration(), 1e-12);
  EXPECT_NEAR(cfg.max_duration(), 11.51, 1e-12);
}

TEST(Tokenizer, ZeroDurationTokenDecodesPositive) {
  const auto ns = detokenize(tokenize(notes({{60, 80, 0.0, 0.004}})));
  ASSERT_EQ(ns.size(), 1u);
  EXPECT_GT(ns.notes[0].duration, 0.0);
  EXPECT_LE(std::abs(ns.notes[0].duration - 0.004), 0.005);
}

TEST(Tokenizer, RandomRoundTripWithinHalfTick) {
  std::mt19937_64 rng(11);
  const TokenizerConfig cfg;
  for (int trial = 0; trial < 300; ++trial) {
    NoteSequence ns;
    double t = 0.0;
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      // chords or gaps of at least one tick, so quantized onsets keep the order
      if (rng() % 4 != 0) t += 0.010 + static_cast<double>(rng() % 200000) / 1e5;
      const double dur = 0.001 + static_cast<double>(rng() % 11500000) / 1e6;
      ns.notes.push_back({21 + static_cast<int>(rng() % 88), 1 + static_cast<int>(rng() % 127), t, dur});
    }
    ns.sort();
    const auto seq = tokenize(ns, cfg);
    ASSERT_EQ(seq.length(), ns.size() + 2);
    EXPECT_NO_THROW(check_vocab(seq, cfg));
    const auto back = detokenize(seq, cfg);
    ASSERT_EQ(back.size(), ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
      EXPECT_EQ(back.notes[i].pitch, ns.notes[i].pitch);
      EXPECT_LE(std::abs(back.notes[i].velocity - ns.notes[i].velocity), 1);
      EXPECT_LE(std::abs(back.notes[i].onset - ns.notes[i].onset), 0.005 + 1e-9);
      EXPECT_LE(std::abs(back.notes[i].duration - ns.notes[i].duration), 0.005 + 1e-9);
    }
  }
}

TEST(Tokenizer, InteriorSpecialTokenIsStructuralError) {
  const TokenizerConfig cfg;
  auto seq = tokenize(notes({{60, 80, 0.0, 0.5}, {62, 80, 0.5, 0.5}}), cfg);
  seq.set(2, kVelocity, cfg.special(kVelocity, Special::Mask));
  try {
    detokenize(seq, cfg);
    FAIL() << "expected StructureError";
  } catch (const StructureError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(Tokenizer, MissingFramingIsStructuralError) {
  const TokenizerConfig cfg;
  auto seq = tokenize(notes({{60, 80, 0.0, 0.5}}), cfg);
  seq.set(0, kPitch, 5);
  EXPECT_THROW(detokenize(seq, cfg), StructureError);
  OctupleSequence tiny(1);
  EXPECT_THROW(detokenize(tiny, cfg), StructureError);
}

TEST(Tokenizer, CheckVocabRejectsOverflow) {
  const TokenizerConfig cfg;
  auto seq = tokenize(notes({{60, 80, 0.0, 0.5}}), cfg);
  seq.set(1, kBar, 20);
  EXPECT_THROW(check_vocab(seq, cfg), InvalidArgument);
}

TEST(ConcatPrompt, EmptyPromptIsPlainTokenize) {
  const auto target = notes({{60, 80, 0.2, 0.5}, {64, 70, 0.9, 1.2}});
  EXPECT_EQ(concat_prompt(NoteSequence{}, target, 3.0, PromptCut::HardCut), tokenize(target));
  EXPECT_EQ(concat_prompt(NoteSequence{}, target, 3.0, PromptCut::NoteBoundary), tokenize(target));
}

TEST(ConcatPrompt, HardCutTruncatesCrossingNote) {
  const auto prompt = notes({{60, 80, 2.9, 1.0}, {62, 80, 3.2, 0.5}});
  const auto target = notes({{70, 90, 0.0, 0.5}});
  const auto joined = concat_prompt_detailed(prompt, target, 3.0, PromptCut::HardCut);
  EXPECT_DOUBLE_EQ(joined.prompt_seconds, 3.0);
  EXPECT_EQ(joined.prompt_notes, 1u);
  const auto back = detokenize(joined.tokens);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_NEAR(back.notes[0].duration, 0.1, 0.005 + 1e-9);
  EXPECT_EQ(back.notes[1].pitch, 70);
  EXPECT_NEAR(back.notes[1].onset, 3.0, 0.005 + 1e-9);
}

TEST(ConcatPrompt, NoteBoundaryMovesCutToLastOffset) {
  const auto prompt = notes({{60, 80, 0.0, 1.0}, {62, 80, 1.5, 1.0}, {64, 80, 2.8, 0.5}});
  const auto target = notes({{70, 90, 0.0, 0.5}});
  const auto joined = concat_prompt_detailed(prompt, target, 3.0, PromptCut::NoteBoundary);
  EXPECT_DOUBLE_EQ(joined.prompt_seconds, 2.5);
  EXPECT_EQ(joined.prompt_notes, 2u);
  const auto back = detokenize(joined.tokens);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_NEAR(back.notes[2].onset, 2.5, 0.005 + 1e-9);
  EXPECT_NEAR(back.notes[1].duration, 1.0, 0.005 + 1e-9);
}

TEST(ConcatPrompt, NoteBoundaryWithoutAnyEndingNoteFallsBackToHardCut) {
  const auto prompt = notes({{60, 80, 0.5, 5.0}});
  const auto target = notes({{70, 90, 0.0, 0.5}});
  const auto joined = concat_prompt_detailed(prompt, target, 3.0, PromptCut::NoteBoundary);
  EXPECT_DOUBLE_EQ(joined.prompt_seconds, 3.0);
  EXPECT_EQ(joined.prompt_notes, 1u);
}

TEST(ConcatPrompt, SingleFraming) {
  const TokenizerConfig cfg;
  const auto seq = concat_prompt(notes({{60, 80, 0.0, 1.0}}), notes({{62, 80, 0.0, 1.0}}), 3.0, PromptCut::HardCut, cfg);
  ASSERT_EQ(seq.length(), 4u);
  EXPECT_EQ(seq.at(0, kPitch), cfg.special(kPitch, Special::Bos));
  EXPECT_EQ(seq.at(3, kPitch), cfg.special(kPitch, Special::Eos));
  EXPECT_FALSE(cfg.is_special(kPitch, seq.at(1, kPitch)));
  EXPECT_FALSE(cfg.is_special(kPitch, seq.at(2, kPitch)));
}

TEST(ConcatPrompt, Errors) {
  EXPECT_THROW(concat_prompt(NoteSequence{}, NoteSequence{}, 3.0, PromptCut::HardCut), InvalidArgument);
  EXPECT_THROW(concat_prompt(NoteSequence{}, notes({{60, 80, 0.0, 1.0}}), 0.0, PromptCut::HardCut), InvalidArgument);
  EXPECT_EQ(parse_prompt_cut("note-boundary"), PromptCut::NoteBoundary);
  EXPECT_EQ(to_string(PromptCut::HardCut), "hard-cut");
  EXPECT_THROW(parse_prompt_cut("soft"), InvalidArgument);
}

TEST(TokenFile, RoundTripWithDigest) {
  const TokenizerConfig cfg;
  const auto seq = tokenize(notes({{60, 80, 0.0, 0.5}, {108, 127, 1.25, 3.0}}), cfg);
  const auto file = decode_token_file(encode_token_file(seq, cfg, 0xabcdefULL));
  EXPECT_EQ(file.tokens, seq);
  EXPECT_EQ(file.vocab_sizes, cfg.vocab_sizes());
  ASSERT_TRUE(file.digest.has_value());
  EXPECT_EQ(*file.digest, 0xabcdefULL);
  EXPECT_FALSE(decode_token_file(encode_token_file(seq, cfg)).digest.has_value());
}

TEST(TokenFile, CorruptInputs) {
  const TokenizerConfig cfg;
  auto bytes = encode_token_file(tokenize(notes({{60, 80, 0.0, 0.5}}), cfg), cfg);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_token_file(bad), ParseError);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_token_file(bytes), ParseError);
}

TEST(TokenFile, JsonDump) {
  const TokenizerConfig cfg;
  const auto text = token_json(tokenize(notes({{60, 80, 0.0, 0.5}}), cfg), cfg);
  EXPECT_NE(text.find("vocab_sizes"), std::string::npos);
  EXPECT_NE(text.find("pitch"), std::string::npos);
}
