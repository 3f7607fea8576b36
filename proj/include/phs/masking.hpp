#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "phs/normalizer.hpp"
#include "phs/tokenizer.hpp"
#include "phs/util.hpp"

namespace phs {

constexpr int kIgnoreIndex = -100;

struct PretrainConfig {
  double mask_rate = 0.15;
  double mask_token_frac = 0.80;
  double random_token_frac = 0.10;
  double keep_frac = 0.10;
  double nsp_positive_rate = 0.5;
  int batch_size = 8;
  int max_seq_len = 128;
  std::string init_checkpoint;
  bool random_init = false;  // toy-scale escape hatch; checkpoint wins otherwise
  bool nsp_enabled = true;
  double learning_rate = 2e-5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(mask_rate > 0.0 && mask_rate < 1.0)) {
      throw DataError("pretrain: mask_rate must lie in (0, 1)");
    }
    double sum = mask_token_frac + random_token_frac + keep_frac;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw DataError(strcat_msg(
          "pretrain: mask/random/keep fractions must sum to 1, got ", sum));
    }
    if (mask_token_frac < 0 || random_token_frac < 0 || keep_frac < 0) {
      throw DataError("pretrain: perturbation fractions must be nonnegative");
    }
    if (nsp_positive_rate < 0.0 || nsp_positive_rate > 1.0) {
      throw DataError("pretrain: nsp_positive_rate must lie in [0, 1]");
    }
    if (batch_size < 1) throw DataError("pretrain: batch_size must be >= 1");
    if (max_seq_len < 8) throw DataError("pretrain: max_seq_len must be >= 8");
  }
};

// ---------------------------------------------------------------------------
// NSP pairing. Posts are segmented on terminal punctuation; a segment's true
// successor is the next segment in corpus order, which inside a document is
// the next sentence and at a document edge is the next post's first sentence.

struct NspPair {
  std::string segment_a;
  std::string segment_b;
  bool is_next = false;
};

inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  auto flush = [&] {
    std::size_t a = 0, b = cur.size();
    while (a < b && is_ascii_space(cur[a])) ++a;
    while (b > a && is_ascii_space(cur[b - 1])) --b;
    if (b > a) out.push_back(cur.substr(a, b - a));
    cur.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    cur += c;
    if (c == '.' || c == '!' || c == '?') {
      while (i + 1 < text.size() &&
             (text[i + 1] == '.' || text[i + 1] == '!' || text[i + 1] == '?')) {
        cur += text[++i];
      }
      flush();
    }
    ++i;
  }
  flush();
  return out;
}

inline std::vector<NspPair> build_nsp_pairs(
    const std::vector<NormalizedPost>& documents, const PretrainConfig& config) {
  config.validate();
  if (documents.size() < 2) {
    throw DataError("nsp: cannot pair a corpus with fewer than 2 documents");
  }
  std::vector<std::string> segments;
  for (const auto& doc : documents) {
    for (auto& s : split_sentences(doc.text)) segments.push_back(std::move(s));
  }
  if (segments.size() < 2) {
    throw DataError("nsp: cannot pair a corpus with fewer than 2 segments");
  }

  Rng rng = Rng(config.seed).derive("nsp");
  std::vector<NspPair> pairs;
  pairs.reserve(segments.size() - 1);
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    NspPair p;
    p.segment_a = segments[i];
    bool positive = rng.uniform() < config.nsp_positive_rate;
    if (positive || segments.size() == 2) {
      p.segment_b = segments[i + 1];
      p.is_next = true;
    } else {
      std::size_t j;
      do {
        j = static_cast<std::size_t>(rng.bounded(segments.size()));
      } while (j == i + 1 || j == i);
      p.segment_b = segments[j];
      p.is_next = false;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// MLM masking.

struct MaskedRow {
  std::vector<int> input_ids;
  std::vector<int> mlm_labels;  // original id at perturbed slots, else ignore
};

// Selects exactly max(1, round(mask_rate * maskable)) positions uniformly
// among non-special tokens, then rewrites each to [MASK] / a random
// non-special token / itself per the configured fractions.
inline MaskedRow apply_mlm_mask(const std::vector<int>& token_ids,
                                const Tokenizer& tokenizer,
                                const PretrainConfig& config, Rng& rng) {
  MaskedRow row;
  row.input_ids = token_ids;
  row.mlm_labels.assign(token_ids.size(), kIgnoreIndex);

  std::vector<std::size_t> maskable;
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (!tokenizer.is_special(token_ids[i])) maskable.push_back(i);
  }
  if (maskable.empty()) {
    throw DataError("mlm: sequence has no maskable tokens");
  }
  std::size_t n_select = static_cast<std::size_t>(std::llround(
      config.mask_rate * static_cast<double>(maskable.size())));
  if (n_select < 1) n_select = 1;
  if (n_select > maskable.size()) n_select = maskable.size();

  // Partial Fisher-Yates: the first n_select entries become the selection.
  for (std::size_t i = 0; i < n_select; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.bounded(maskable.size() - i));
    std::swap(maskable[i], maskable[j]);
  }
  const SpecialIds sp = tokenizer.specials();
  const int vocab = tokenizer.vocab_size();
  for (std::size_t i = 0; i < n_select; ++i) {
    std::size_t pos = maskable[i];
    row.mlm_labels[pos] = token_ids[pos];
    double r = rng.uniform();
    if (r < config.mask_token_frac) {
      row.input_ids[pos] = sp.mask;
    } else if (r < config.mask_token_frac + config.random_token_frac) {
      int pick;
      do {
        pick = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(vocab)));
      } while (tokenizer.is_special(pick));
      row.input_ids[pos] = pick;
    }  // else: keep the original token, label still set
  }
  return row;
}

// ---------------------------------------------------------------------------
// Batch assembly: [CLS] A [SEP] B [SEP] with segment ids, MLM masking and the
// NSP label (0 = is_next, 1 = not_next).

struct MaskedBatch {
  std::vector<std::vector<int>> input_ids;
  std::vector<std::vector<int>> mlm_labels;
  std::vector<std::vector<int>> segment_ids;
  std::vector<std::vector<std::uint8_t>> attention_mask;
  std::vector<int> nsp_labels;

  std::size_t size() const { return input_ids.size(); }
  std::size_t seq_len() const {
    return input_ids.empty() ? 0 : input_ids[0].size();
  }
};

namespace detail {

inline void truncate_pair(std::vector<int>& a, std::vector<int>& b,
                          std::size_t budget) {
  while (a.size() + b.size() > budget) {
    if (a.size() >= b.size() && a.size() > 1) {
      a.pop_back();
    } else if (b.size() > 1) {
      b.pop_back();
    } else {
      a.pop_back();
    }
  }
}

}  // namespace detail

inline MaskedBatch make_masked_batch(const std::vector<NspPair>& pairs,
                                     const Tokenizer& tokenizer,
                                     const PretrainConfig& config,
                                     std::uint64_t batch_salt) {
  MaskedBatch batch;
  const SpecialIds sp = tokenizer.specials();
  std::size_t max_len = 0;
  std::vector<std::vector<int>> rows, segs;
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    std::vector<int> a = tokenizer.encode(pairs[e].segment_a);
    std::vector<int> b = tokenizer.encode(pairs[e].segment_b);
    detail::truncate_pair(a, b,
                          static_cast<std::size_t>(config.max_seq_len) - 3);
    std::vector<int> ids, seg;
    ids.push_back(sp.cls);
    seg.push_back(0);
    for (int id : a) {
      ids.push_back(id);
      seg.push_back(0);
    }
    ids.push_back(sp.sep);
    seg.push_back(0);
    for (int id : b) {
      ids.push_back(id);
      seg.push_back(1);
    }
    ids.push_back(sp.sep);
    seg.push_back(1);
    max_len = std::max(max_len, ids.size());
    rows.push_back(std::move(ids));
    segs.push_back(std::move(seg));
    batch.nsp_labels.push_back(pairs[e].is_next ? 0 : 1);
  }
  for (std::size_t e = 0; e < rows.size(); ++e) {
    Rng rng = Rng(config.seed).derive("mlm").derive(batch_salt).derive(e);
    MaskedRow masked = apply_mlm_mask(rows[e], tokenizer, config, rng);
    std::vector<std::uint8_t> mask(masked.input_ids.size(), 1);
    masked.input_ids.resize(max_len, sp.pad);
    masked.mlm_labels.resize(max_len, kIgnoreIndex);
    segs[e].resize(max_len, 0);
    mask.resize(max_len, 0);
    batch.input_ids.push_back(std::move(masked.input_ids));
    batch.mlm_labels.push_back(std::move(masked.mlm_labels));
    batch.segment_ids.push_back(std::move(segs[e]));
    batch.attention_mask.push_back(std::move(mask));
  }
  return batch;
}

}  // namespace phs
