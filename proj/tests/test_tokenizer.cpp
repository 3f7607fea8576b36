#include "phs/tokenizer.hpp"

#include <gtest/gtest.h>

#include "phs/util.hpp"
#include "support/tmpdir.hpp"

namespace {

using namespace phs;

WordPieceTokenizer toy_tokenizer() {
  return WordPieceTokenizer::build_from_corpus(
      {"the flu shot clinic opened today.",
       "i got my vaccine and felt fine!",
       "stress at work is rising, said the doctor.",
       "covid cases fell this week."},
      64);
}

TEST(Tokenizer, SpecialIdsDistinctAndInRange) {
  auto tok = toy_tokenizer();
  SpecialIds s = tok.specials();
  std::set<int> ids = {s.pad, s.unk, s.cls, s.sep, s.mask};
  EXPECT_EQ(ids.size(), 5u);
  for (int id : ids) {
    EXPECT_GE(id, 0);
    EXPECT_LT(id, tok.vocab_size());
    EXPECT_TRUE(tok.is_special(id));
  }
}

TEST(Tokenizer, GreedyLongestMatchWithContinuations) {
  std::vector<std::string> vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
                                    "play", "##ing", "##s", "p", "##l", "##a",
                                    "##y", "##i", "##n", "##g"};
  WordPieceTokenizer tok(vocab);
  auto ids = tok.encode("playing");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(vocab[static_cast<std::size_t>(ids[0])], "play");
  EXPECT_EQ(vocab[static_cast<std::size_t>(ids[1])], "##ing");
  EXPECT_EQ(tok.decode(ids), "playing");
}

TEST(Tokenizer, UnknownWordMapsToUnk) {
  std::vector<std::string> vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
                                    "known"};
  WordPieceTokenizer tok(vocab);
  auto ids = tok.encode("zzz known");
  ASSERT_EQ(ids.size(), 2u);
  EXPECT_EQ(ids[0], tok.specials().unk);
  EXPECT_EQ(vocab[static_cast<std::size_t>(ids[1])], "known");
}

TEST(Tokenizer, UncasedAndPunctuationSplit) {
  auto tok = toy_tokenizer();
  EXPECT_EQ(tok.encode("The FLU"), tok.encode("the flu"));
  auto ids = tok.encode("flu, shot");
  EXPECT_EQ(tok.decode(ids), "flu , shot");
}

TEST(Tokenizer, SpecialTokenStringsStayAtomic) {
  auto tok = toy_tokenizer();
  auto ids = tok.encode("[CLS] flu [SEP]");
  ASSERT_GE(ids.size(), 3u);
  EXPECT_EQ(ids.front(), tok.specials().cls);
  EXPECT_EQ(ids.back(), tok.specials().sep);
  EXPECT_EQ(tok.encode(tok.decode(ids)), ids);
}

TEST(Tokenizer, EncodeDecodeStableOnOwnOutput) {
  auto tok = toy_tokenizer();
  Rng rng(777);
  const std::vector<std::string> atoms = {
      "flu",  "shot",   "clinic", "covid", "Stress", "DOCTOR", "zzzqqq",
      "caf\xC3\xA9", ",",  "!",  "...", "42", "[MASK]", "workplace"};
  for (int iter = 0; iter < 500; ++iter) {
    std::string text;
    std::size_t n = rng.bounded(12);
    for (std::size_t i = 0; i < n; ++i) {
      text += atoms[rng.bounded(atoms.size())];
      text += ' ';
    }
    auto once = tok.encode(text);
    auto again = tok.encode(tok.decode(once));
    ASSERT_EQ(once, again) << "unstable for: " << text;
  }
}

TEST(Tokenizer, VocabSaveLoadRoundTrip) {
  testsupport::TempDir tmp;
  auto tok = toy_tokenizer();
  auto path = (tmp.path() / "vocab.txt").string();
  tok.save_vocab(path);
  auto loaded = WordPieceTokenizer::load_vocab(path);
  EXPECT_EQ(loaded.vocab(), tok.vocab());
  EXPECT_EQ(loaded.encode("flu shot today"), tok.encode("flu shot today"));
}

TEST(Tokenizer, VocabValidation) {
  EXPECT_THROW(WordPieceTokenizer({"[PAD]", "[UNK]", "[CLS]", "[SEP]"}),
               DataError);  // missing [MASK]
  EXPECT_THROW(WordPieceTokenizer({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
                                   "dup", "dup"}),
               DataError);
}

TEST(Tokenizer, BuildIsDeterministic) {
  auto a = toy_tokenizer();
  auto b = toy_tokenizer();
  EXPECT_EQ(a.vocab(), b.vocab());
}

}  // namespace
