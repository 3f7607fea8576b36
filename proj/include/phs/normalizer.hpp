#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phs/emoji_table.hpp"
#include "phs/util.hpp"

namespace phs {

enum class Platform { twitter, reddit, sms, news, amazon, other };

inline const char* to_string(Platform p) {
  switch (p) {
    case Platform::twitter: return "twitter";
    case Platform::reddit: return "reddit";
    case Platform::sms: return "sms";
    case Platform::news: return "news";
    case Platform::amazon: return "amazon";
    case Platform::other: return "other";
  }
  return "other";
}

inline bool parse_platform(std::string_view s, Platform* out) {
  for (Platform p : {Platform::twitter, Platform::reddit, Platform::sms,
                     Platform::news, Platform::amazon, Platform::other}) {
    if (s == to_string(p)) {
      *out = p;
      return true;
    }
  }
  return false;
}

// Transforms applied by normalize(), recorded as a bitmask.
enum Transform : unsigned {
  kRetweetStripped = 1u << 0,
  kUrlReplaced = 1u << 1,
  kUserReplaced = 1u << 2,
  kEmojiReplaced = 1u << 3,
  kTruncated = 1u << 4,
  kWhitespaceCollapsed = 1u << 5,
};
using TransformMask = unsigned;

inline constexpr std::array<std::pair<Transform, const char*>, 6>
    kTransformNames = {{{kRetweetStripped, "retweet_stripped"},
                        {kUrlReplaced, "url_replaced"},
                        {kUserReplaced, "user_replaced"},
                        {kEmojiReplaced, "emoji_replaced"},
                        {kTruncated, "truncated"},
                        {kWhitespaceCollapsed, "whitespace_collapsed"}}};

inline std::vector<std::string> transform_names(TransformMask mask) {
  std::vector<std::string> out;
  for (auto [bit, name] : kTransformNames) {
    if (mask & bit) out.emplace_back(name);
  }
  return out;
}

struct RawPost {
  std::string id;
  std::string text;
  Platform platform = Platform::other;
};

struct NormalizedPost {
  std::string id;
  std::string text;
  TransformMask transforms_applied = 0;
};

// ---------------------------------------------------------------------------
// URL detection: scheme-anchored http(s) URLs anywhere, plus bare t.co
// shortener links at a word boundary. Case-insensitive, consumes up to the
// next whitespace. Kept byte-oriented; schemes and hosts are ASCII.

namespace detail {

inline bool ci_starts_with(std::string_view s, std::size_t pos,
                           std::string_view lower_pat) {
  if (pos + lower_pat.size() > s.size()) return false;
  for (std::size_t k = 0; k < lower_pat.size(); ++k) {
    char c = s[pos + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != lower_pat[k]) return false;
  }
  return true;
}

// Returns the byte length of a URL starting at pos, or 0.
inline std::size_t url_match_at(std::string_view s, std::size_t pos) {
  std::size_t head = 0;
  if (ci_starts_with(s, pos, "https://")) {
    head = 8;
  } else if (ci_starts_with(s, pos, "http://")) {
    head = 7;
  } else if (ci_starts_with(s, pos, "t.co/")) {
    if (pos > 0) {
      char prev = s[pos - 1];
      bool alnum = (prev >= 'a' && prev <= 'z') || (prev >= 'A' && prev <= 'Z') ||
                   (prev >= '0' && prev <= '9') || prev == '.';
      if (alnum) return 0;
    }
    head = 5;
  } else {
    return 0;
  }
  std::size_t end = pos + head;
  while (end < s.size() && !is_ascii_space(s[end])) ++end;
  if (end == pos + head) return 0;  // bare scheme/host with no payload
  return end - pos;
}

inline std::string rtrim_spaces(std::string s) {
  while (!s.empty() && is_ascii_space(s.back())) s.pop_back();
  return s;
}

}  // namespace detail

inline bool contains_url(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (detail::url_match_at(s, i) > 0) return true;
  }
  return false;
}

inline bool contains_emoji(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto d = utf8_decode(s, i);
    if (d.len == 0) {
      ++i;
      continue;
    }
    if (is_emoji_codepoint(d.cp)) return true;
    i += d.len;
  }
  return false;
}

struct NormalizationConfig {
  std::string url_placeholder = "HTTP-URL";
  std::string user_placeholder = "@USER";
  std::size_t char_limit = 200;
  std::shared_ptr<const EmojiTable> emoji_table;  // null -> bundled table
  bool strip_retweet = true;

  const EmojiTable& table() const {
    return emoji_table ? *emoji_table : EmojiTable::bundled();
  }

  void validate() const;
};

namespace detail {

inline std::string strip_retweet_markers(std::string_view s, bool* changed) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
  };
  std::size_t start = i;
  skip_ws();
  for (;;) {
    // "RT" must be a standalone leading token.
    if (i + 2 > s.size() || s[i] != 'R' || s[i + 1] != 'T') break;
    std::size_t j = i + 2;
    if (j < s.size() && !is_ascii_space(s[j])) break;
    // Try the "RT @handle:" form first.
    std::size_t k = j;
    while (k < s.size() && is_ascii_space(s[k])) ++k;
    if (k < s.size() && s[k] == '@') {
      std::size_t h = k + 1;
      while (h < s.size() && is_word_char(s[h])) ++h;
      if (h > k + 1 && h < s.size() && s[h] == ':') {
        i = h + 1;
        *changed = true;
        skip_ws();
        continue;
      }
    }
    i = j;
    *changed = true;
    skip_ws();
  }
  if (i == start) return std::string(s);
  return std::string(s.substr(i));
}

inline std::string replace_urls(std::string_view s, const std::string& placeholder,
                                bool* changed) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = url_match_at(s, i);
    if (len > 0) {
      out += placeholder;
      i += len;
      *changed = true;
    } else {
      out += s[i++];
    }
  }
  return out;
}

inline std::string replace_mentions(std::string_view s,
                                    const std::string& placeholder,
                                    bool* changed) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '@' && i + 1 < s.size() && is_word_char(s[i + 1])) {
      std::size_t j = i + 1;
      while (j < s.size() && is_word_char(s[j])) ++j;
      if (s.substr(i, j - i) != placeholder) *changed = true;
      out += placeholder;
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

inline std::string replace_emoji(std::string_view s, const EmojiTable& table,
                                 bool* changed) {
  if (table.empty()) return std::string(s);
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t len = 0;
    if (const std::string* phrase = table.match_at(s, i, &len)) {
      out += ' ';
      out += *phrase;
      out += ' ';
      i += len;
      *changed = true;
      // Swallow presentation selectors / joiners riding on the match.
      while (i < s.size()) {
        auto d = utf8_decode(s, i);
        if (d.len == 0 || !is_variation_or_joiner(d.cp)) break;
        i += d.len;
      }
    } else {
      auto d = utf8_decode(s, i);
      std::size_t adv = d.len == 0 ? 1 : d.len;
      out.append(s.substr(i, adv));
      i += adv;
    }
  }
  return out;
}

inline std::string collapse_whitespace(std::string_view s, bool* changed) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_ascii_space(c)) {
      pending_space = true;
    } else {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  if (out != s) *changed = true;
  return out;
}

inline std::string truncate_chars(std::string_view s, std::size_t limit,
                                  bool* changed) {
  if (utf8_length(s) <= limit) return std::string(s);
  *changed = true;
  std::string cut = utf8_prefix(s, limit);
  if (!cut.empty() && is_ascii_space(cut.back())) {
    return rtrim_spaces(std::move(cut));
  }
  // Cut landed at a word end if the next source byte is whitespace.
  if (cut.size() < s.size() && is_ascii_space(s[cut.size()])) return cut;
  auto sp = cut.rfind(' ');
  if (sp == std::string::npos) return cut;  // single long word: hard cut
  return rtrim_spaces(cut.substr(0, sp));
}

}  // namespace detail

// Fixed-order transform pipeline: retweet strip, URL, mention, emoji,
// whitespace collapse, character truncation. Case is preserved; casefolding
// belongs to the tokenizer.
inline std::string normalize_text(std::string_view text,
                                  const NormalizationConfig& config,
                                  TransformMask* mask_out) {
  TransformMask mask = 0;
  bool ch;
  std::string s(text);
  if (config.strip_retweet) {
    ch = false;
    s = detail::strip_retweet_markers(s, &ch);
    if (ch) mask |= kRetweetStripped;
  }
  ch = false;
  s = detail::replace_urls(s, config.url_placeholder, &ch);
  if (ch) mask |= kUrlReplaced;
  ch = false;
  s = detail::replace_mentions(s, config.user_placeholder, &ch);
  if (ch) mask |= kUserReplaced;
  ch = false;
  s = detail::replace_emoji(s, config.table(), &ch);
  if (ch) mask |= kEmojiReplaced;
  ch = false;
  s = detail::collapse_whitespace(s, &ch);
  if (ch) mask |= kWhitespaceCollapsed;
  ch = false;
  s = detail::truncate_chars(s, config.char_limit, &ch);
  if (ch) mask |= kTruncated;
  if (mask_out) *mask_out = mask;
  return s;
}

inline NormalizedPost normalize(const RawPost& post,
                                const NormalizationConfig& config) {
  NormalizedPost out;
  out.id = post.id;
  out.text = normalize_text(post.text, config, &out.transforms_applied);
  return out;
}

inline void NormalizationConfig::validate() const {
  if (char_limit < 1) throw DataError("normalizer: char_limit must be >= 1");
  if (contains_url(url_placeholder)) {
    throw DataError("normalizer: url_placeholder matches the URL pattern");
  }
  NormalizationConfig probe = *this;
  TransformMask m = 0;
  std::string round = normalize_text(user_placeholder, probe, &m);
  if (round != user_placeholder) {
    throw DataError(strcat_msg(
        "normalizer: user_placeholder is not a normalization fixed point: \"",
        user_placeholder, "\" -> \"", round, "\""));
  }
}

// ---------------------------------------------------------------------------
// Corpus-level mapping.

struct CorpusStats {
  std::uint64_t posts = 0;     // posts emitted
  std::uint64_t skipped = 0;   // undecodable posts dropped from the stream
  std::array<std::uint64_t, kTransformNames.size()> transform_counts{};
  double mean_output_length = 0.0;

  std::uint64_t count(Transform t) const {
    for (std::size_t i = 0; i < kTransformNames.size(); ++i) {
      if (kTransformNames[i].first == t) return transform_counts[i];
    }
    return 0;
  }

  void record(TransformMask mask, std::size_t out_chars) {
    ++posts;
    for (std::size_t i = 0; i < kTransformNames.size(); ++i) {
      if (mask & kTransformNames[i].first) ++transform_counts[i];
    }
    sum_chars_ += out_chars;
    mean_output_length =
        posts == 0 ? 0.0 : static_cast<double>(sum_chars_) / posts;
  }

private:
  std::uint64_t sum_chars_ = 0;
};

// Order-preserving map of normalize(). Posts whose text is not valid UTF-8
// are skipped and counted; the stream never aborts.
inline std::pair<std::vector<NormalizedPost>, CorpusStats> normalize_corpus(
    const std::vector<RawPost>& posts, const NormalizationConfig& config) {
  config.validate();
  std::vector<NormalizedPost> out;
  out.reserve(posts.size());
  CorpusStats stats;
  for (const RawPost& p : posts) {
    if (!utf8_valid(p.text)) {
      ++stats.skipped;
      continue;
    }
    NormalizedPost n = normalize(p, config);
    stats.record(n.transforms_applied, utf8_length(n.text));
    out.push_back(std::move(n));
  }
  return {std::move(out), stats};
}

}  // namespace phs
