#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "phs/normalizer.hpp"

namespace phs {

// Line-delimited records {id, text, platform}. `platform` defaults to
// "other" when absent.
inline std::optional<RawPost> parse_raw_post(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  if (!j.contains("id") || !j["id"].is_string()) return std::nullopt;
  if (!j.contains("text") || !j["text"].is_string()) return std::nullopt;
  RawPost p;
  p.id = j["id"].get<std::string>();
  p.text = j["text"].get<std::string>();
  if (j.contains("platform")) {
    if (!j["platform"].is_string() ||
        !parse_platform(j["platform"].get<std::string>(), &p.platform)) {
      return std::nullopt;
    }
  }
  return p;
}

inline std::string dump_normalized_post(const NormalizedPost& post,
                                        Platform platform) {
  nlohmann::json j;
  j["id"] = post.id;
  j["platform"] = to_string(platform);
  j["text"] = post.text;
  j["transforms_applied"] = transform_names(post.transforms_applied);
  return j.dump();
}

// Streaming normalize over JSONL. Undecodable lines are skipped and counted;
// the stream never aborts.
inline CorpusStats normalize_jsonl_stream(std::istream& in, std::ostream& out,
                                          const NormalizationConfig& config) {
  config.validate();
  CorpusStats stats;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto post = parse_raw_post(line);
    if (!post || !utf8_valid(post->text)) {
      ++stats.skipped;
      continue;
    }
    NormalizedPost n = normalize(*post, config);
    stats.record(n.transforms_applied, utf8_length(n.text));
    out << dump_normalized_post(n, post->platform) << '\n';
  }
  return stats;
}

// Reads the whole stream into posts, skipping undecodable lines.
inline std::pair<std::vector<RawPost>, std::uint64_t> read_raw_posts(
    std::istream& in) {
  std::vector<RawPost> posts;
  std::uint64_t skipped = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto post = parse_raw_post(line);
    if (!post) {
      ++skipped;
      continue;
    }
    posts.push_back(std::move(*post));
  }
  return {std::move(posts), skipped};
}

}  // namespace phs
