#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/text.hpp
 *
 * Small text utilities shared by the rollout parser, the reference grader,
 * and the prompt renderers: trimming, case-insensitive search, whitespace
 * normalization, tokenization with punctuation/stopword stripping, Jaccard
 * similarity, and a FNV-1a hash for config fingerprints.
 *
 * All routines operate on raw bytes; ASCII case folding only.
 */

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace metacog::text {

// ============================================================================
// Basic character helpers
// ============================================================================

inline char lower_ch(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

inline bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline bool is_alnum(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline bool is_digit(char c) {
  return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower_ch);
  return out;
}

// ============================================================================
// Trimming and whitespace normalization
// ============================================================================

inline std::string_view trim_view(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

/// Collapse every run of whitespace to a single space and trim the ends.
inline std::string collapse_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = true;  // leading whitespace dropped
  for (char c : s) {
    if (is_space(c)) {
      in_ws = true;
    } else {
      if (in_ws && !out.empty()) out.push_back(' ');
      out.push_back(c);
      in_ws = false;
    }
  }
  return out;
}

// ============================================================================
// Case-insensitive search
// ============================================================================

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (lower_ch(s[i]) != lower_ch(prefix[i])) return false;
  }
  return true;
}

inline bool equals_ci(std::string_view a, std::string_view b) {
  return a.size() == b.size() && starts_with_ci(a, b);
}

/// First occurrence of `needle` in `hay` at or after `from`, ignoring case.
/// Returns std::string_view::npos when absent.
inline std::size_t find_ci(std::string_view hay, std::string_view needle,
                           std::size_t from = 0) {
  if (needle.empty()) return from <= hay.size() ? from : std::string_view::npos;
  if (hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (starts_with_ci(hay.substr(i), needle)) return i;
  }
  return std::string_view::npos;
}

// ============================================================================
// Placeholder substitution
// ============================================================================

inline std::string replace_all(std::string s, std::string_view what,
                               std::string_view with) {
  if (what.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(what, pos)) != std::string::npos) {
    s.replace(pos, what.size(), with);
    pos += with.size();
  }
  return s;
}

// ============================================================================
// Lines
// ============================================================================

struct Line {
  std::size_t begin = 0;  // offset of first byte within the parent view
  std::size_t end = 0;    // offset one past the last byte (excludes newline)
};

/// Split into lines by '\n'; offsets index into `s`. A trailing newline does
/// not produce an extra empty line, but interior empty lines are kept.
inline std::vector<Line> split_lines(std::string_view s) {
  std::vector<Line> lines;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '\n') {
      std::size_t end = i;
      if (end > begin && s[end - 1] == '\r') --end;
      if (!(i == s.size() && begin == i)) lines.push_back({begin, end});
      begin = i + 1;
    }
  }
  return lines;
}

// ============================================================================
// Tokenization for fuzzy matching
// ============================================================================

/// Stopwords dropped by `content_tokens`. Deliberately small and fixed so
/// match decisions are reproducible.
inline const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",       "an",     "the",    "is",     "are",    "was",   "were",
      "be",      "been",   "being",  "to",     "of",     "in",    "on",
      "with",    "and",    "or",     "not",    "no",     "for",   "by",
      "as",      "at",     "it",     "its",    "this",   "that",  "these",
      "those",   "from",   "into",   "than",   "then",   "so",    "such",
      "via",     "do",     "does",   "did",    "has",    "have",  "had",
      "can",     "could",  "may",    "might",  "will",   "would", "shall",
      "should",  "must",   "if",     "when",   "while",  "where", "which",
      "who",     "whom",   "whose",  "what",   "how",    "why",   "we",
      "you",     "he",     "she",    "they",   "them",   "his",   "her",
      "their",   "our",    "your",   "my",     "me",     "us",    "but",
      "about",   "over",   "under",  "between","through","during","before",
      "after",   "above",  "below",  "up",     "down",   "out",   "off",
      "any",     "both",   "each",   "few",    "more",   "most",  "other",
      "some",    "only",   "own",    "same",   "very",   "also",  "there",
      "here",    "all",    "because",
  };
  return words;
}

/// Lowercase the input, strip punctuation, and split on non-alphanumerics.
/// Keeps every token, including stopwords. Order preserved.
inline std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(lower_ch(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// `tokens` with stopwords removed, deduplicated into a set.
inline std::set<std::string> content_token_set(std::string_view s) {
  std::set<std::string> out;
  for (auto& t : tokens(s)) {
    if (!stopwords().count(t)) out.insert(std::move(t));
  }
  return out;
}

/// Jaccard similarity of two token sets. Empty/empty scores 0.
inline double jaccard(const std::set<std::string>& a,
                      const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// True when `needle` occurs as a contiguous run inside `hay`.
inline bool contains_token_run(const std::vector<std::string>& hay,
                               const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  if (needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (hay[i + j] != needle[j]) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

// ============================================================================
// Hashing
// ============================================================================

/// FNV-1a 64-bit; used to fingerprint configuration snapshots in manifests.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a_hex(std::string_view s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace metacog::text
