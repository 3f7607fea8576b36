#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace phs {

// Error taxonomy mapped to CLI exit codes: UsageError -> 1, DataError -> 2,
// TrainError -> 3.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class TrainError : public std::runtime_error {
public:
  explicit TrainError(const std::string& what) : std::runtime_error(what) {}
};

template <typename... Args>
std::string strcat_msg(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

// ---------------------------------------------------------------------------
// Hashing

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic RNG. std::mt19937_64's output stream is pinned by the
// standard, but the distributions are not, so bounded draws and shuffles are
// implemented here to keep results identical across platforms.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), s_(seed) {
    // Warm the state through splitmix so nearby seeds diverge.
    for (int i = 0; i < 4; ++i) next();
  }

  std::uint64_t seed() const { return seed_; }

  // Derives an independent stream from the construction seed and a label,
  // used for per-example / per-fold streams.
  Rng derive(std::string_view label) const {
    return Rng(fnv1a64(label, seed_ ^ 0x9e3779b97f4a7c15ULL));
  }
  Rng derive(std::uint64_t salt) const {
    std::uint64_t st = seed_ ^ (salt * 0xd1342543de82ef95ULL + 1);
    return Rng(splitmix64(st));
  }

  std::uint64_t next() { return splitmix64(s_); }

  // Uniform integer in [0, n) via rejection sampling; exact and portable.
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::bounded: n must be > 0");
    const std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller on the portable uniform source.
  double normal() {
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i + 1));
      using std::swap;
      swap(v[i], v[j]);
    }
  }

private:
  std::uint64_t seed_;
  std::uint64_t s_;
};

// ---------------------------------------------------------------------------
// Minimal UTF-8 handling: decode, encode, validate, count.

struct Utf8Decode {
  char32_t cp;
  std::size_t len;  // bytes consumed; 0 on malformed input
};

inline Utf8Decode utf8_decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto cont = [&](std::size_t k) {
    return pos + k < s.size() &&
           (static_cast<unsigned char>(s[pos + k]) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    if (!cont(1)) return {0, 0};
    char32_t cp = ((b0 & 0x1Fu) << 6) |
                  (static_cast<unsigned char>(s[pos + 1]) & 0x3Fu);
    if (cp < 0x80) return {0, 0};  // overlong
    return {cp, 2};
  }
  if ((b0 & 0xF0) == 0xE0) {
    if (!cont(1) || !cont(2)) return {0, 0};
    char32_t cp = ((b0 & 0x0Fu) << 12) |
                  ((static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 6) |
                  (static_cast<unsigned char>(s[pos + 2]) & 0x3Fu);
    if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) return {0, 0};
    return {cp, 3};
  }
  if ((b0 & 0xF8) == 0xF0) {
    if (!cont(1) || !cont(2) || !cont(3)) return {0, 0};
    char32_t cp = ((b0 & 0x07u) << 18) |
                  ((static_cast<unsigned char>(s[pos + 1]) & 0x3Fu) << 12) |
                  ((static_cast<unsigned char>(s[pos + 2]) & 0x3Fu) << 6) |
                  (static_cast<unsigned char>(s[pos + 3]) & 0x3Fu);
    if (cp < 0x10000 || cp > 0x10FFFF) return {0, 0};
    return {cp, 4};
  }
  return {0, 0};
}

inline void utf8_append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool utf8_valid(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto d = utf8_decode(s, i);
    if (d.len == 0) return false;
    i += d.len;
  }
  return true;
}

inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0, i = 0;
  while (i < s.size()) {
    auto d = utf8_decode(s, i);
    i += d.len == 0 ? 1 : d.len;
    ++n;
  }
  return n;
}

// First `limit` code points of s (malformed bytes count as one unit each).
inline std::string utf8_prefix(std::string_view s, std::size_t limit) {
  std::size_t n = 0, i = 0;
  while (i < s.size() && n < limit) {
    auto d = utf8_decode(s, i);
    i += d.len == 0 ? 1 : d.len;
    ++n;
  }
  return std::string(s.substr(0, i));
}

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

}  // namespace phs
