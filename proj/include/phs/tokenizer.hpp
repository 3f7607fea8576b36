#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phs/util.hpp"

namespace phs {

struct SpecialIds {
  int pad = 0;
  int unk = 1;
  int cls = 2;
  int sep = 3;
  int mask = 4;
};

/// Text <-> token-id contract used by the pretraining and fine-tuning
/// pipelines. encode() does not add [CLS]/[SEP]; batch builders own that.
class Tokenizer {
public:
  virtual ~Tokenizer() = default;

  virtual std::vector<int> encode(std::string_view text) const = 0;
  virtual std::string decode(const std::vector<int>& ids) const = 0;
  virtual int vocab_size() const = 0;
  virtual SpecialIds specials() const = 0;

  bool is_special(int id) const {
    SpecialIds s = specials();
    return id == s.pad || id == s.unk || id == s.cls || id == s.sep ||
           id == s.mask;
  }
};

namespace detail {

inline bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// Whitespace split with ASCII punctuation broken out as single tokens.
inline std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char c : text) {
    if (is_ascii_space(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

}  // namespace detail

/// Uncased WordPiece: greedy longest-match with "##" continuation pieces and
/// the five BERT special tokens pinned at the front of the vocabulary.
class WordPieceTokenizer : public Tokenizer {
public:
  static constexpr const char* kPad = "[PAD]";
  static constexpr const char* kUnk = "[UNK]";
  static constexpr const char* kCls = "[CLS]";
  static constexpr const char* kSep = "[SEP]";
  static constexpr const char* kMask = "[MASK]";
  static constexpr std::size_t kMaxWordChars = 100;

  explicit WordPieceTokenizer(std::vector<std::string> vocab)
      : vocab_(std::move(vocab)) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (!index_.emplace(vocab_[i], static_cast<int>(i)).second) {
        throw DataError("tokenizer: duplicate vocab entry \"" + vocab_[i] + "\"");
      }
    }
    auto want = [&](const char* tok, int expect) {
      auto it = index_.find(tok);
      if (it == index_.end()) {
        throw DataError(strcat_msg("tokenizer: vocabulary lacks ", tok));
      }
      if (it->second != expect) {
        throw DataError(strcat_msg("tokenizer: ", tok, " must have id ", expect,
                                   ", found ", it->second));
      }
    };
    want(kPad, 0);
    want(kUnk, 1);
    want(kCls, 2);
    want(kSep, 3);
    want(kMask, 4);
  }

  static WordPieceTokenizer load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocabulary: " + path);
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      vocab.push_back(line);
    }
    while (!vocab.empty() && vocab.back().empty()) vocab.pop_back();
    return WordPieceTokenizer(std::move(vocab));
  }

  void save_vocab(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocabulary: " + path);
    for (const auto& tok : vocab_) out << tok << '\n';
  }

  // Builds a desk-scale vocabulary: specials, every character seen (plus its
  // "##" continuation twin), then the most frequent whole words.
  static WordPieceTokenizer build_from_corpus(const std::vector<std::string>& texts,
                                              std::size_t max_words = 4000) {
    std::map<std::string, std::uint64_t> word_counts;
    std::map<std::string, std::uint64_t> char_counts;
    for (const auto& text : texts) {
      for (const auto& raw : detail::basic_tokenize(text)) {
        std::string word = detail::ascii_lower(raw);
        ++word_counts[word];
        std::size_t i = 0;
        while (i < word.size()) {
          auto d = utf8_decode(word, i);
          std::size_t adv = d.len == 0 ? 1 : d.len;
          ++char_counts[word.substr(i, adv)];
          i += adv;
        }
      }
    }
    std::vector<std::string> vocab = {kPad, kUnk, kCls, kSep, kMask};
    for (const auto& [ch, n] : char_counts) {
      vocab.push_back(ch);
      vocab.push_back("##" + ch);
    }
    std::vector<std::pair<std::uint64_t, std::string>> ranked;
    for (const auto& [word, n] : word_counts) {
      if (utf8_length(word) > 1) ranked.emplace_back(n, word);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::size_t taken = 0;
    std::set<std::string> have(vocab.begin(), vocab.end());
    for (const auto& [n, word] : ranked) {
      if (taken >= max_words) break;
      if (have.insert(word).second) {
        vocab.push_back(word);
        ++taken;
      }
    }
    return WordPieceTokenizer(std::move(vocab));
  }

  std::vector<int> encode(std::string_view text) const override {
    std::vector<int> out;
    for (const auto& raw : split_with_specials(text)) {
      auto it = index_.find(raw);
      if (it != index_.end() && is_special(it->second)) {
        out.push_back(it->second);
        continue;
      }
      encode_word(detail::ascii_lower(raw), out);
    }
    return out;
  }

  std::string decode(const std::vector<int>& ids) const override {
    std::string out;
    for (int id : ids) {
      if (id < 0 || id >= vocab_size()) {
        throw DataError(strcat_msg("tokenizer: id ", id, " outside vocabulary"));
      }
      const std::string& tok = vocab_[static_cast<std::size_t>(id)];
      if (tok.rfind("##", 0) == 0) {
        out += tok.substr(2);
      } else {
        if (!out.empty()) out += ' ';
        out += tok;
      }
    }
    return out;
  }

  int vocab_size() const override { return static_cast<int>(vocab_.size()); }
  SpecialIds specials() const override { return SpecialIds{}; }

  const std::vector<std::string>& vocab() const { return vocab_; }

  int token_id(std::string_view tok) const {
    auto it = index_.find(std::string(tok));
    return it == index_.end() ? -1 : it->second;
  }

private:
  // Basic tokenization that keeps special-token strings atomic (matched
  // case-sensitively before lowercasing).
  std::vector<std::string> split_with_specials(std::string_view text) const {
    static const std::vector<std::string> kSpecials = {kPad, kUnk, kCls, kSep,
                                                       kMask};
    std::vector<std::string> out;
    std::size_t i = 0;
    std::string pending;
    auto flush_pending = [&] {
      if (pending.empty()) return;
      auto toks = detail::basic_tokenize(pending);
      out.insert(out.end(), toks.begin(), toks.end());
      pending.clear();
    };
    while (i < text.size()) {
      bool matched = false;
      for (const auto& sp : kSpecials) {
        if (text.compare(i, sp.size(), sp) == 0) {
          flush_pending();
          out.push_back(sp);
          i += sp.size();
          matched = true;
          break;
        }
      }
      if (!matched) pending += text[i++];
    }
    flush_pending();
    return out;
  }

  void encode_word(const std::string& word, std::vector<int>& out) const {
    if (word.empty()) return;
    if (utf8_length(word) > kMaxWordChars) {
      out.push_back(specials().unk);
      return;
    }
    std::vector<int> pieces;
    std::size_t start = 0;
    while (start < word.size()) {
      std::size_t end = word.size();
      int found = -1;
      while (end > start) {
        std::string piece = word.substr(start, end - start);
        if (start > 0) piece = "##" + piece;
        auto it = index_.find(piece);
        if (it != index_.end()) {
          found = it->second;
          break;
        }
        // Back off one code point.
        std::size_t step = 1;
        while (end - step > start &&
               (static_cast<unsigned char>(word[end - step]) & 0xC0) == 0x80) {
          ++step;
        }
        end -= step;
      }
      if (found < 0) {
        out.push_back(specials().unk);
        return;
      }
      pieces.push_back(found);
      start = end;
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace phs
