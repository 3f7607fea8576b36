#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phs/util.hpp"

namespace phs {

// Pictographic blocks used both for table validation and for the no-leak
// check on normalized text.
inline bool is_emoji_codepoint(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2B00 && cp <= 0x2BFF);
}

inline bool is_variation_or_joiner(char32_t cp) {
  return cp == 0xFE0E || cp == 0xFE0F || cp == 0x200D;
}

/// Emoji codepoint-sequence -> lowercase name phrase, loaded from a
/// two-column TSV (hex codepoints separated by spaces, TAB, phrase).
class EmojiTable {
public:
  EmojiTable() = default;

  static EmojiTable parse(std::istream& in, const std::string& origin) {
    EmojiTable t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw DataError(strcat_msg(origin, ":", lineno,
                                   ": emoji table row has no TAB separator"));
      }
      std::string key_hex = line.substr(0, tab);
      std::string phrase = line.substr(tab + 1);
      std::string key;
      std::size_t pos = 0;
      while (pos < key_hex.size()) {
        auto end = key_hex.find(' ', pos);
        if (end == std::string::npos) end = key_hex.size();
        char32_t cp = static_cast<char32_t>(
            std::strtoul(key_hex.substr(pos, end - pos).c_str(), nullptr, 16));
        if (cp == 0) {
          throw DataError(strcat_msg(origin, ":", lineno,
                                     ": bad hex codepoint in emoji table"));
        }
        utf8_append(key, cp);
        pos = end + (end < key_hex.size() ? 1 : 0);
      }
      if (key.empty() || phrase.empty()) {
        throw DataError(
            strcat_msg(origin, ":", lineno, ": empty emoji table row"));
      }
      for (std::size_t i = 0; i < phrase.size();) {
        auto d = utf8_decode(phrase, i);
        if (d.len == 0) {
          throw DataError(strcat_msg(origin, ":", lineno,
                                     ": emoji table phrase is not UTF-8"));
        }
        if (is_emoji_codepoint(d.cp)) {
          throw DataError(strcat_msg(
              origin, ":", lineno,
              ": emoji table phrase must not contain emoji codepoints"));
        }
        i += d.len;
      }
      t.map_.emplace(std::move(key), std::move(phrase));
    }
    t.index_lengths();
    return t;
  }

  static EmojiTable load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open emoji table: " + path);
    return parse(in, path);
  }

  // Bundled table: $PHSBENCH_DATA_DIR/emoji_names.tsv when set, otherwise the
  // data directory recorded at configure time.
  static std::string default_path() {
    if (const char* env = std::getenv("PHSBENCH_DATA_DIR")) {
      return std::string(env) + "/emoji_names.tsv";
    }
#ifdef PHSBENCH_BUNDLED_DATA_DIR
    return std::string(PHSBENCH_BUNDLED_DATA_DIR) + "/emoji_names.tsv";
#else
    return "data/emoji_names.tsv";
#endif
  }

  static const EmojiTable& bundled() {
    static const EmojiTable t = load(default_path());
    return t;
  }

  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }

  const std::string* find(std::string_view key) const {
    auto it = map_.find(std::string(key));
    return it == map_.end() ? nullptr : &it->second;
  }

  // Longest key match starting at text[pos]; returns the phrase and writes
  // the matched byte count, or nullptr.
  const std::string* match_at(std::string_view text, std::size_t pos,
                              std::size_t* match_len) const {
    for (std::size_t len : lengths_desc_) {
      if (pos + len > text.size()) continue;
      auto it = map_.find(std::string(text.substr(pos, len)));
      if (it != map_.end()) {
        *match_len = len;
        return &it->second;
      }
    }
    return nullptr;
  }

private:
  void index_lengths() {
    lengths_desc_.clear();
    for (const auto& [k, v] : map_) {
      if (std::find(lengths_desc_.begin(), lengths_desc_.end(), k.size()) ==
          lengths_desc_.end()) {
        lengths_desc_.push_back(k.size());
      }
    }
    std::sort(lengths_desc_.rbegin(), lengths_desc_.rend());
  }

  std::unordered_map<std::string, std::string> map_;
  std::vector<std::size_t> lengths_desc_;
};

}  // namespace phs
