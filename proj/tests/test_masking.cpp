#include "phs/masking.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "phs/tokenizer.hpp"

namespace {

using namespace phs;

WordPieceTokenizer corpus_tokenizer() {
  return WordPieceTokenizer::build_from_corpus(
      {"the flu shot clinic opened today. lines were long.",
       "i got my vaccine and felt fine. no side effects at all.",
       "stress at work keeps rising. the doctor said rest."},
      128);
}

std::vector<NormalizedPost> posts(const std::vector<std::string>& texts) {
  std::vector<NormalizedPost> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.push_back({"p" + std::to_string(i), texts[i], 0});
  }
  return out;
}

TEST(NspPairs, TwoSingleSentencePostsForcePositive) {
  PretrainConfig cfg;
  cfg.nsp_positive_rate = 1.0;
  auto pairs = build_nsp_pairs(posts({"first post", "second post"}), cfg);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_TRUE(pairs[0].is_next);
  EXPECT_EQ(pairs[0].segment_a, "first post");
  EXPECT_EQ(pairs[0].segment_b, "second post");
}

TEST(NspPairs, SingleDocumentCannotPair) {
  PretrainConfig cfg;
  EXPECT_THROW(build_nsp_pairs(posts({"one. two. three."}), cfg), DataError);
  EXPECT_THROW(build_nsp_pairs({}, cfg), DataError);
}

TEST(NspPairs, SentencesSplitOnTerminalPunctuation) {
  auto s = split_sentences("one two. three! four?? five");
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], "one two.");
  EXPECT_EQ(s[1], "three!");
  EXPECT_EQ(s[2], "four??");
  EXPECT_EQ(s[3], "five");
}

TEST(NspPairs, PositiveRateConcentratesAtHalf) {
  // Two documents of 5001 sentences each -> 10001 segments -> 10^4 pairs.
  std::string doc;
  for (int i = 0; i < 5001; ++i) doc += "sentence number " + std::to_string(i) + ". ";
  PretrainConfig cfg;
  cfg.seed = 13;
  auto pairs = build_nsp_pairs(posts({doc, doc}), cfg);
  ASSERT_GE(pairs.size(), 10000u);
  double positives = 0;
  for (const auto& p : pairs) positives += p.is_next ? 1 : 0;
  double frac = positives / static_cast<double>(pairs.size());
  EXPECT_NEAR(frac, 0.5, 0.02);
}

TEST(NspPairs, NegativesAreNotTheSuccessor) {
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back("unique sentence " + std::to_string(i));
  PretrainConfig cfg;
  cfg.seed = 7;
  cfg.nsp_positive_rate = 0.0;
  auto pairs = build_nsp_pairs(posts(texts), cfg);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ASSERT_FALSE(pairs[i].is_next);
    ASSERT_NE(pairs[i].segment_b, texts[i + 1]);
    ASSERT_NE(pairs[i].segment_b, texts[i]);
  }
}

TEST(NspPairs, DeterministicUnderSeed) {
  std::vector<std::string> texts;
  for (int i = 0; i < 40; ++i) texts.push_back("post " + std::to_string(i));
  PretrainConfig cfg;
  cfg.seed = 99;
  auto a = build_nsp_pairs(posts(texts), cfg);
  auto b = build_nsp_pairs(posts(texts), cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].segment_b, b[i].segment_b);
    EXPECT_EQ(a[i].is_next, b[i].is_next);
  }
}

// ---------------------------------------------------------------------------

TEST(MlmMask, ExactSelectionCount) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  // 100 maskable tokens plus CLS/SEP bookends.
  std::vector<int> ids;
  ids.push_back(tok.specials().cls);
  int word = tok.token_id("flu");
  ASSERT_GE(word, 0);
  for (int i = 0; i < 100; ++i) ids.push_back(word);
  ids.push_back(tok.specials().sep);
  Rng rng(5);
  auto row = apply_mlm_mask(ids, tok, cfg, rng);
  int labeled = 0;
  for (int l : row.mlm_labels) labeled += l != kIgnoreIndex ? 1 : 0;
  EXPECT_EQ(labeled, 15);
  EXPECT_EQ(row.mlm_labels.front(), kIgnoreIndex);
  EXPECT_EQ(row.mlm_labels.back(), kIgnoreIndex);
}

TEST(MlmMask, AtLeastOnePositionSelected) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  std::vector<int> ids = {tok.specials().cls, tok.token_id("flu"),
                          tok.specials().sep};
  Rng rng(6);
  auto row = apply_mlm_mask(ids, tok, cfg, rng);
  EXPECT_NE(row.mlm_labels[1], kIgnoreIndex);
}

TEST(MlmMask, AllSpecialSequenceRejected) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  std::vector<int> ids = {tok.specials().cls, tok.specials().sep};
  Rng rng(7);
  EXPECT_THROW(apply_mlm_mask(ids, tok, cfg, rng), DataError);
}

TEST(MlmMask, LabelsReconstructOriginals) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  std::vector<int> ids = tok.encode("the flu shot clinic opened today");
  std::vector<int> framed;
  framed.push_back(tok.specials().cls);
  framed.insert(framed.end(), ids.begin(), ids.end());
  framed.push_back(tok.specials().sep);
  Rng rng(11);
  auto row = apply_mlm_mask(framed, tok, cfg, rng);
  std::vector<int> reconstructed = row.input_ids;
  for (std::size_t i = 0; i < row.mlm_labels.size(); ++i) {
    if (row.mlm_labels[i] != kIgnoreIndex) reconstructed[i] = row.mlm_labels[i];
  }
  EXPECT_EQ(reconstructed, framed);
}

TEST(MlmMask, PerturbationFractionsConcentrate) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  cfg.mask_rate = 0.5;  // denser selection to collect 10^5 samples faster
  const int word = tok.token_id("clinic");
  ASSERT_GE(word, 0);
  std::vector<int> ids(400, word);
  std::uint64_t masked = 0, random = 0, kept = 0, selected = 0;
  Rng rng(17);
  while (selected < 100000) {
    auto row = apply_mlm_mask(ids, tok, cfg, rng);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (row.mlm_labels[i] == kIgnoreIndex) continue;
      ++selected;
      if (row.input_ids[i] == tok.specials().mask) {
        ++masked;
      } else if (row.input_ids[i] == word) {
        ++kept;
      } else {
        ++random;
      }
    }
  }
  double n = static_cast<double>(selected);
  EXPECT_NEAR(masked / n, 0.80, 0.01);
  EXPECT_NEAR(random / n, 0.10, 0.01);
  EXPECT_NEAR(kept / n, 0.10, 0.01);
}

TEST(MlmMask, SelectionRateWithinThreeSigma) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  const int word = tok.token_id("flu");
  std::vector<int> ids(211, word);  // odd length exercises rounding
  std::uint64_t maskable = 0, selected = 0;
  Rng rng(23);
  for (int rep = 0; rep < 600; ++rep) {
    auto row = apply_mlm_mask(ids, tok, cfg, rng);
    maskable += ids.size();
    for (int l : row.mlm_labels) selected += l != kIgnoreIndex ? 1 : 0;
  }
  ASSERT_GE(maskable, 100000u);
  double n = static_cast<double>(maskable);
  double frac = static_cast<double>(selected) / n;
  double sigma = std::sqrt(0.15 * 0.85 / n);
  EXPECT_LE(std::abs(frac - 0.15), 3.0 * sigma + 1.0 / 211.0);
}

TEST(MaskedBatchBuild, PadsAndMasksAlign) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  cfg.seed = 3;
  std::vector<NspPair> pairs = {
      {"the flu shot clinic opened today", "lines were long", true},
      {"short", "stress at work keeps rising and rising", false},
  };
  auto batch = make_masked_batch(pairs, tok, cfg, 0);
  ASSERT_EQ(batch.size(), 2u);
  ASSERT_EQ(batch.input_ids[0].size(), batch.input_ids[1].size());
  EXPECT_EQ(batch.nsp_labels[0], 0);
  EXPECT_EQ(batch.nsp_labels[1], 1);
  for (std::size_t e = 0; e < batch.size(); ++e) {
    for (std::size_t i = 0; i < batch.input_ids[e].size(); ++i) {
      bool is_pad = batch.input_ids[e][i] == tok.specials().pad &&
                    batch.attention_mask[e][i] == 0;
      if (batch.attention_mask[e][i] == 0) {
        EXPECT_TRUE(is_pad);
        EXPECT_EQ(batch.mlm_labels[e][i], kIgnoreIndex);
      }
      if (tok.is_special(batch.input_ids[e][i]) &&
          batch.input_ids[e][i] != tok.specials().mask) {
        EXPECT_EQ(batch.mlm_labels[e][i], kIgnoreIndex);
      }
    }
  }
}

TEST(MaskedBatchBuild, DeterministicUnderSeed) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  cfg.seed = 21;
  std::vector<NspPair> pairs = {
      {"the flu shot clinic opened today", "lines were long", true}};
  auto a = make_masked_batch(pairs, tok, cfg, 4);
  auto b = make_masked_batch(pairs, tok, cfg, 4);
  EXPECT_EQ(a.input_ids, b.input_ids);
  EXPECT_EQ(a.mlm_labels, b.mlm_labels);
  auto c = make_masked_batch(pairs, tok, cfg, 5);
  EXPECT_TRUE(a.input_ids != c.input_ids || a.mlm_labels != c.mlm_labels);
}

TEST(MaskedBatchBuild, LongPairsTruncatedToBudget) {
  auto tok = corpus_tokenizer();
  PretrainConfig cfg;
  cfg.max_seq_len = 16;
  std::string long_text;
  for (int i = 0; i < 50; ++i) long_text += "flu shot ";
  std::vector<NspPair> pairs = {{long_text, long_text, true}};
  auto batch = make_masked_batch(pairs, tok, cfg, 0);
  EXPECT_LE(batch.input_ids[0].size(), 16u);
}

}  // namespace
