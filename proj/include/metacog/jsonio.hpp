#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/jsonio.hpp
 *
 * Small JSON helpers shared by the grader and dataset layers: balanced
 * object extraction from free-form model replies, and typed field access
 * with uniform error reporting.
 */

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "metacog/errors.hpp"

namespace metacog::jsonio {

/**
 * Scan for the next balanced top-level JSON object literal starting at or
 * after `search_from`, respecting string literals and escapes. On a hit,
 * advances `search_from` past the opening brace so repeated calls walk all
 * candidates. The returned view is not validated as JSON; parse it.
 */
inline std::optional<std::string_view> next_balanced_object(
    std::string_view s, std::size_t& search_from) {
  for (std::size_t i = search_from; i < s.size(); ++i) {
    if (s[i] != '{') continue;
    int depth = 0;
    bool in_string = false;
    for (std::size_t j = i; j < s.size(); ++j) {
      char c = s[j];
      if (in_string) {
        if (c == '\\') {
          ++j;
        } else if (c == '"') {
          in_string = false;
        }
      } else if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          search_from = i + 1;
          return s.substr(i, j - i + 1);
        }
      }
    }
    break;  // unbalanced to the end; later '{' cannot balance either
  }
  search_from = s.size();
  return std::nullopt;
}

/// First substring of `s` that parses as a JSON object, tolerating code
/// fences and surrounding prose. Empty optional when there is none.
inline std::optional<nlohmann::ordered_json> first_object(std::string_view s) {
  std::size_t from = 0;
  while (auto candidate = next_balanced_object(s, from)) {
    auto parsed = nlohmann::ordered_json::parse(*candidate, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

}  // namespace metacog::jsonio
