#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/rollout.hpp
 *
 * Structured model of a metacognitive rollout and a lenient parser for the
 * tagged output format:
 *
 *     <meta> ...MK / MR / LOOKBACK sections... </meta><answer>final</answer>
 *
 * The parser is total: it never throws on malformed input. Problems are
 * reported as issues (warning or fatal) in a ParseReport; a structured
 * Rollout is produced exactly when no fatal issue occurred.
 *
 * Accepted section shapes, all case-insensitive:
 *   MK:            "MK:", "### Metacognitive Knowledge (MK)", and numbered
 *                  sub-blocks like "**MK1 - ...**" whose bullets are
 *                  flattened into one item list.
 *   MR:            "MR:", "### Metacognitive Regulation (MR)"; plan steps are
 *                  bullets or numbered list entries; "[plan]" markers and
 *                  bare "Plan:" introducers are stripped.
 *   LOOKBACK:      one or more regions holding [Seeking]/[Found] lines
 *                  (bracketed or bold-bullet style).
 */

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metacog/errors.hpp"
#include "metacog/text.hpp"

namespace metacog::rollout {

// ============================================================================
// Types
// ============================================================================

/// Half-open byte range [begin, end) into Rollout::source_text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct MkItem {
  int index = 0;      // 1-based; unique within a rollout
  std::string text;   // whitespace-normalized statement
  Span span;          // raw bullet text in the source
};

struct RegulationPlan {
  std::vector<std::string> steps;  // ordered plan steps
  std::string raw;                 // exact substring covering the MR region
  Span span;
};

struct LookbackEvent {
  std::string seeking;   // may hold several '\n'-joined lines
  std::string found;     // may hold several '\n'-joined lines
  int ordinal = 0;       // 1-based appearance order
  bool malformed = false;  // seeking or found missing
  Span span;
};

struct Rollout {
  std::vector<MkItem> mk;
  RegulationPlan mr;
  std::vector<LookbackEvent> lookbacks;
  std::string answer;       // trimmed final-answer text
  std::string meta_raw;     // text inside <meta>...</meta>
  std::string answer_raw;   // text inside <answer>...</answer>
  Span meta_span;
  Span answer_span;
  std::string source_text;  // the full input the rollout was parsed from
};

enum class Severity { warning, fatal };

enum class IssueCode {
  no_meta_section,
  no_answer_section,
  oversize_input,
  missing_mk,
  missing_mr,
  unclosed_meta,
  unclosed_answer,
  extra_answer_pair,
  unpaired_answer_tag,
  duplicate_mk_index,
  empty_mk_item,
  malformed_lookback,
};

inline const char* issue_code_name(IssueCode c) {
  switch (c) {
    case IssueCode::no_meta_section: return "NoMetaSection";
    case IssueCode::no_answer_section: return "NoAnswerSection";
    case IssueCode::oversize_input: return "OversizeInput";
    case IssueCode::missing_mk: return "MissingMK";
    case IssueCode::missing_mr: return "MissingMR";
    case IssueCode::unclosed_meta: return "UnclosedMeta";
    case IssueCode::unclosed_answer: return "UnclosedAnswer";
    case IssueCode::extra_answer_pair: return "ExtraAnswerPair";
    case IssueCode::unpaired_answer_tag: return "UnpairedAnswerTag";
    case IssueCode::duplicate_mk_index: return "DuplicateMkIndex";
    case IssueCode::empty_mk_item: return "EmptyMkItem";
    case IssueCode::malformed_lookback: return "MalformedLookback";
  }
  return "Unknown";
}

struct ParseIssue {
  Severity severity = Severity::warning;
  IssueCode code = IssueCode::no_meta_section;
  std::string message;
  std::size_t offset = 0;
};

struct ParseReport {
  std::optional<Rollout> rollout;
  std::vector<ParseIssue> issues;

  bool ok() const { return rollout.has_value(); }
  bool has_fatal() const {
    return std::any_of(issues.begin(), issues.end(), [](const ParseIssue& i) {
      return i.severity == Severity::fatal;
    });
  }
};

struct ParseOptions {
  std::size_t max_input = 65536;  // fatal OversizeInput above this many bytes
};

// ============================================================================
// Parser internals
// ============================================================================

namespace detail {

inline bool is_dash_byte_seq(std::string_view s) {
  // UTF-8 en dash (e2 80 93) or em dash (e2 80 94)
  return s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xE2 &&
         static_cast<unsigned char>(s[1]) == 0x80 &&
         (static_cast<unsigned char>(s[2]) == 0x93 ||
          static_cast<unsigned char>(s[2]) == 0x94);
}

/// Skip markdown decoration at the start of a line: whitespace, heading
/// marks, bullets, emphasis, quote marks. Returns the number of bytes
/// skipped.
inline std::size_t skip_decoration(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == ' ' || c == '\t' || c == '#' || c == '*' || c == '-' ||
        c == '>' || c == '+' || c == '`') {
      ++i;
    } else {
      break;
    }
  }
  return i;
}

enum class LabelKind { none, mk, mr, lookback };

struct LabelMatch {
  LabelKind kind = LabelKind::none;
  bool numbered = false;        // "MK1" style sub-block heading
  std::size_t rest_offset = 0;  // offset of inline content within the line
};

/// True when `s` (already past the label word) continues with a section
/// delimiter rather than more prose. Accepts ':', '-', '(', '=', en/em
/// dashes, or end-of-line.
inline bool label_delimiter_follows(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  if (i == s.size()) return true;
  char c = s[i];
  if (c == ':' || c == '-' || c == '(' || c == '=') return true;
  return is_dash_byte_seq(s.substr(i));
}

/// Skip an "(MK)"-style alias annotation plus trailing label punctuation,
/// returning the offset where inline content starts.
inline std::size_t skip_label_tail(std::string_view s) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  };
  skip_ws();
  if (i < s.size() && s[i] == '(') {
    std::size_t close = s.find(')', i);
    if (close != std::string_view::npos && close - i <= 16) i = close + 1;
  }
  while (i < s.size()) {
    if (s[i] == ':' || s[i] == ' ' || s[i] == '\t' || s[i] == '*') {
      ++i;
    } else if (is_dash_byte_seq(s.substr(i))) {
      i += 3;
    } else {
      break;
    }
  }
  return i;
}

/// Classify a line as a section label. `content` must already have its
/// decoration stripped; offsets returned are relative to `content`.
inline LabelMatch match_label(std::string_view content) {
  LabelMatch m;
  auto finish = [&](LabelKind kind, std::size_t label_end, bool numbered) {
    m.kind = kind;
    m.numbered = numbered;
    m.rest_offset = label_end + skip_label_tail(content.substr(label_end));
    return m;
  };

  if (text::starts_with_ci(content, "metacognitive knowledge")) {
    std::size_t n = std::string_view("metacognitive knowledge").size();
    if (n == content.size() || !text::is_alnum(content[n]))
      return finish(LabelKind::mk, n, false);
  }
  if (text::starts_with_ci(content, "metacognitive regulation")) {
    std::size_t n = std::string_view("metacognitive regulation").size();
    if (n == content.size() || !text::is_alnum(content[n]))
      return finish(LabelKind::mr, n, false);
  }
  if (text::starts_with_ci(content, "lookback")) {
    std::size_t n = std::string_view("lookback").size();
    if (label_delimiter_follows(content.substr(n)))
      return finish(LabelKind::lookback, n, false);
  }
  if (text::starts_with_ci(content, "mk") || text::starts_with_ci(content, "mr")) {
    LabelKind kind =
        text::lower_ch(content[1]) == 'k' ? LabelKind::mk : LabelKind::mr;
    std::size_t n = 2;
    bool numbered = false;
    while (n < content.size() && text::is_digit(content[n])) {
      numbered = true;
      ++n;
    }
    if (label_delimiter_follows(content.substr(n)))
      return finish(kind, n, numbered);
  }
  return m;
}

struct ItemLine {
  bool is_item = false;      // bullet or numbered entry
  bool indented = false;     // original line began with whitespace
  std::size_t text_offset = 0;  // where the entry text starts in the line
};

/// Classify a list entry: "- text", "* text", "+ text", or "1. text".
/// Bracketed markers ("- [mk1] x") keep the bracket in the text; marker
/// stripping happens later.
inline ItemLine classify_item(std::string_view line) {
  ItemLine r;
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  r.indented = i > 0;
  if (i >= line.size()) return r;
  char c = line[i];
  if (c == '-' || c == '*' || c == '+') {
    std::size_t j = i + 1;
    while (j < line.size() && line[j] == c) ++j;  // "**" bold bullets
    if (j >= line.size() || line[j] == ' ' || line[j] == '\t' ||
        line[j] == '[' || line[j] == '*') {
      while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
      r.is_item = true;
      r.text_offset = j;
      return r;
    }
  }
  if (text::is_digit(c)) {
    std::size_t j = i;
    while (j < line.size() && text::is_digit(line[j])) ++j;
    if (j < line.size() && (line[j] == '.' || line[j] == ')')) {
      ++j;
      while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
      r.is_item = true;
      r.text_offset = j;
      return r;
    }
  }
  return r;
}

/// Strip a bracketed "[mkN]" tag. Returns the explicit index (or nullopt)
/// and advances `s` past the tag.
inline std::optional<int> strip_mk_tag(std::string_view& s) {
  std::string_view t = text::trim_view(s);
  if (t.size() < 5 || t[0] != '[') return std::nullopt;
  if (!text::starts_with_ci(t.substr(1), "mk")) return std::nullopt;
  std::size_t i = 3;
  int value = 0;
  bool any = false;
  while (i < t.size() && text::is_digit(t[i])) {
    value = value * 10 + (t[i] - '0');
    any = true;
    ++i;
  }
  if (!any || i >= t.size() || t[i] != ']') return std::nullopt;
  s = t.substr(i + 1);
  return value;
}

/// Strip a "[plan]" tag; true when one was present.
inline bool strip_plan_tag(std::string_view& s) {
  std::string_view t = text::trim_view(s);
  if (!text::starts_with_ci(t, "[plan]")) return false;
  s = t.substr(6);
  return true;
}

/// "Plan:" / "**Plan:**" / bare "[plan]" bullets introduce the step list
/// without being steps themselves.
inline bool is_plan_introducer(std::string_view item_text) {
  std::string_view s = item_text;
  bool had_tag = strip_plan_tag(s);
  std::string bare;
  for (char c : s) {
    if (c == '*' || c == ':' || c == ' ' || c == '\t') continue;
    bare.push_back(text::lower_ch(c));
  }
  if (had_tag) return bare.empty();
  return bare == "plan";
}

enum class LbMarker { none, seeking, found };

struct LbLine {
  LbMarker marker = LbMarker::none;
  std::size_t rest_offset = 0;
};

/// Detect "[Seeking]" / "**Found:**" style markers at the start of a line
/// whose decoration is already stripped.
inline LbLine match_lookback_marker(std::string_view content) {
  LbLine r;
  std::size_t i = 0;
  while (i < content.size() &&
         (content[i] == '[' || content[i] == '*' || content[i] == ' ' ||
          content[i] == '\t')) {
    ++i;
  }
  std::string_view rest = content.substr(i);
  std::size_t word = 0;
  if (text::starts_with_ci(rest, "seeking")) {
    r.marker = LbMarker::seeking;
    word = 7;
  } else if (text::starts_with_ci(rest, "found")) {
    r.marker = LbMarker::found;
    word = 5;
  } else {
    return r;
  }
  std::size_t j = i + word;
  if (j < content.size() && text::is_alnum(content[j])) return LbLine{};
  while (j < content.size()) {
    char c = content[j];
    if (c == ']' || c == ':' || c == '*' || c == ' ' || c == '\t' || c == '-') {
      ++j;
    } else if (is_dash_byte_seq(content.substr(j))) {
      j += 3;
    } else {
      break;
    }
  }
  r.rest_offset = j;
  return r;
}

struct TagScan {
  std::size_t meta_open = std::string_view::npos;   // position of "<meta>"
  std::size_t meta_content = 0;                     // content start
  std::size_t meta_end = 0;                         // content end
  bool meta_closed = false;
  std::size_t answer_content = std::string_view::npos;
  std::size_t answer_end = 0;
  bool answer_closed = false;
};

}  // namespace detail

// ============================================================================
// Operations
// ============================================================================

/**
 * Parse one rollout text. Never throws; all problems are reported as
 * issues. `report.rollout` is present exactly when no fatal issue was
 * recorded.
 */
inline ParseReport parse_rollout(std::string_view input, ParseOptions opt = {}) {
  using namespace detail;
  ParseReport report;
  auto issue = [&](Severity sev, IssueCode code, std::string msg,
                   std::size_t off) {
    report.issues.push_back({sev, code, std::move(msg), off});
  };

  if (input.size() > opt.max_input) {
    issue(Severity::fatal, IssueCode::oversize_input,
          "input exceeds " + std::to_string(opt.max_input) + " bytes",
          opt.max_input);
    return report;
  }

  // ---- tag scan -----------------------------------------------------------
  TagScan tags;
  tags.meta_open = text::find_ci(input, "<meta>");
  if (tags.meta_open == std::string_view::npos) {
    issue(Severity::fatal, IssueCode::no_meta_section, "no <meta> section", 0);
    return report;
  }
  tags.meta_content = tags.meta_open + 6;

  std::size_t meta_close = text::find_ci(input, "</meta>", tags.meta_content);
  std::size_t answer_search_from;
  if (meta_close != std::string_view::npos) {
    tags.meta_end = meta_close;
    tags.meta_closed = true;
    answer_search_from = meta_close + 7;
  } else {
    // Unclosed meta: implicitly ends at the first <answer> tag, or at the
    // end of input when there is none.
    std::size_t ans = text::find_ci(input, "<answer>", tags.meta_content);
    tags.meta_end = (ans == std::string_view::npos) ? input.size() : ans;
    issue(Severity::warning, IssueCode::unclosed_meta,
          "<meta> never closed", tags.meta_open);
    answer_search_from = tags.meta_end;
  }

  // Pair <answer> tags after the meta section; the last complete pair wins.
  {
    std::vector<std::size_t> open_stack;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (open, close)
    std::size_t pos = answer_search_from;
    while (pos < input.size()) {
      std::size_t open = text::find_ci(input, "<answer>", pos);
      std::size_t close = text::find_ci(input, "</answer>", pos);
      if (open == std::string_view::npos && close == std::string_view::npos)
        break;
      if (open < close) {
        open_stack.push_back(open);
        pos = open + 8;
      } else {
        if (!open_stack.empty()) {
          pairs.emplace_back(open_stack.back(), close);
          open_stack.pop_back();
        }
        pos = close + 9;
      }
    }
    if (!pairs.empty()) {
      // Sort by close position; the final complete pair is authoritative.
      std::sort(pairs.begin(), pairs.end(),
                [](auto& a, auto& b) { return a.second < b.second; });
      for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
        issue(Severity::warning, IssueCode::extra_answer_pair,
              "earlier <answer> pair superseded by a later one",
              pairs[i].first);
      }
      tags.answer_content = pairs.back().first + 8;
      tags.answer_end = pairs.back().second;
      tags.answer_closed = true;
      for (std::size_t open : open_stack) {
        if (open < pairs.back().first) {
          issue(Severity::warning, IssueCode::unpaired_answer_tag,
                "<answer> without matching close tag", open);
        }
      }
    } else if (!open_stack.empty()) {
      // Truncated generation: accept the text from the last open tag.
      tags.answer_content = open_stack.back() + 8;
      tags.answer_end = input.size();
      issue(Severity::warning, IssueCode::unclosed_answer,
            "<answer> never closed; taking text to end of input",
            open_stack.back());
    } else {
      issue(Severity::fatal, IssueCode::no_answer_section,
            "no <answer> section", input.size());
      return report;
    }
  }

  Rollout r;
  r.source_text = std::string(input);
  r.meta_span = {tags.meta_content, tags.meta_end};
  r.answer_span = {tags.answer_content, tags.answer_end};
  r.meta_raw = std::string(input.substr(r.meta_span.begin, r.meta_span.size()));
  r.answer_raw =
      std::string(input.substr(r.answer_span.begin, r.answer_span.size()));
  r.answer = text::trim(r.answer_raw);

  // ---- split the meta section into labeled regions -------------------------
  struct ContentLine {
    std::size_t begin;  // absolute offset into input
    std::size_t end;
  };
  struct Region {
    LabelKind kind;
    std::size_t label_offset;
    std::vector<ContentLine> lines;
  };
  std::vector<Region> regions;

  for (const auto& ln : text::split_lines(r.meta_raw)) {
    std::string_view line = std::string_view(r.meta_raw).substr(ln.begin, ln.end - ln.begin);
    std::size_t abs_begin = r.meta_span.begin + ln.begin;
    std::size_t deco = skip_decoration(line);
    LabelMatch label = match_label(line.substr(deco));
    if (label.kind != LabelKind::none) {
      regions.push_back({label.kind, abs_begin, {}});
      // Numbered sub-block headings ("MK1 - ...") carry a title, not content.
      if (!label.numbered) {
        std::size_t rest = deco + label.rest_offset;
        if (rest < line.size() &&
            !text::trim_view(line.substr(rest)).empty()) {
          regions.back().lines.push_back({abs_begin + rest, abs_begin + line.size()});
        }
      }
    } else if (!regions.empty()) {
      regions.back().lines.push_back({abs_begin, abs_begin + line.size()});
    }
    // Lines before the first label are free-form preamble; they stay in
    // meta_raw but produce no structured fields.
  }

  bool saw_mk = false, saw_mr = false, saw_lookback = false;

  // ---- MK items -------------------------------------------------------------
  {
    std::vector<std::pair<std::optional<int>, std::pair<Span, std::string>>> collected;
    for (const auto& region : regions) {
      if (region.kind != LabelKind::mk) continue;
      saw_mk = true;
      bool have_item = false;
      for (const auto& cl : region.lines) {
        std::string_view line = std::string_view(r.source_text)
                                    .substr(cl.begin, cl.end - cl.begin);
        ItemLine item = classify_item(line);
        if (item.is_item) {
          std::string_view body = line.substr(item.text_offset);
          std::optional<int> explicit_index = strip_mk_tag(body);
          std::size_t body_off =
              static_cast<std::size_t>(body.data() - line.data());
          Span span{cl.begin + body_off, cl.begin + body_off + body.size()};
          collected.push_back({explicit_index, {span, std::string(body)}});
          have_item = true;
        } else if (item.indented && have_item &&
                   !text::trim_view(line).empty()) {
          // wrapped bullet text
          collected.back().second.second += ' ';
          collected.back().second.second += std::string(text::trim_view(line));
          collected.back().second.first.end = cl.end;
        }
      }
    }
    std::vector<bool> used;  // index occupancy, grown on demand
    auto mark_used = [&](int idx) {
      if (idx >= static_cast<int>(used.size())) used.resize(idx + 1, false);
      used[idx] = true;
    };
    auto is_used = [&](int idx) {
      return idx < static_cast<int>(used.size()) && used[idx];
    };
    int next_seq = 1;
    for (auto& [explicit_index, payload] : collected) {
      auto& [span, raw_text] = payload;
      std::string norm = text::collapse_ws(raw_text);
      if (norm.empty()) {
        issue(Severity::warning, IssueCode::empty_mk_item,
              "MK bullet with no text", span.begin);
        continue;
      }
      int index;
      if (explicit_index && *explicit_index > 0 && !is_used(*explicit_index)) {
        index = *explicit_index;
      } else {
        if (explicit_index) {
          issue(Severity::warning, IssueCode::duplicate_mk_index,
                "duplicate or invalid [mk] index; reassigned", span.begin);
        }
        while (is_used(next_seq)) ++next_seq;
        index = next_seq;
      }
      mark_used(index);
      r.mk.push_back({index, std::move(norm), span});
    }
  }

  // ---- MR plan ---------------------------------------------------------------
  {
    bool first_region = true;
    for (const auto& region : regions) {
      if (region.kind != LabelKind::mr) continue;
      saw_mr = true;
      if (first_region && !region.lines.empty()) {
        Span span{region.lines.front().begin, region.lines.back().end};
        // Trim the raw span so it is the exact substring of the region text.
        std::string_view raw = std::string_view(r.source_text)
                                   .substr(span.begin, span.end - span.begin);
        std::string_view trimmed = text::trim_view(raw);
        span.begin += static_cast<std::size_t>(trimmed.data() - raw.data());
        span.end = span.begin + trimmed.size();
        r.mr.span = span;
        r.mr.raw = std::string(trimmed);
      }
      first_region = false;
      bool have_step = false;
      for (const auto& cl : region.lines) {
        std::string_view line = std::string_view(r.source_text)
                                    .substr(cl.begin, cl.end - cl.begin);
        ItemLine item = classify_item(line);
        if (item.is_item) {
          std::string_view body = line.substr(item.text_offset);
          if (is_plan_introducer(body)) {
            have_step = false;
            continue;
          }
          strip_plan_tag(body);
          std::string step = text::collapse_ws(body);
          if (!step.empty()) {
            r.mr.steps.push_back(std::move(step));
            have_step = true;
          }
        } else if (item.indented && have_step &&
                   !text::trim_view(line).empty()) {
          r.mr.steps.back() += ' ';
          r.mr.steps.back() += text::collapse_ws(line);
        }
      }
    }
  }

  // ---- LOOKBACK events --------------------------------------------------------
  {
    struct PendingEvent {
      std::vector<std::string> seeking;
      std::vector<std::string> found;
      Span span{0, 0};
    };
    auto flush = [&](PendingEvent& ev) {
      auto join = [](const std::vector<std::string>& lines) {
        std::string out;
        for (std::size_t i = 0; i < lines.size(); ++i) {
          if (i) out += '\n';
          out += lines[i];
        }
        return out;
      };
      LookbackEvent out;
      out.seeking = join(ev.seeking);
      out.found = join(ev.found);
      out.malformed = out.seeking.empty() || out.found.empty();
      out.span = ev.span;
      out.ordinal = static_cast<int>(r.lookbacks.size()) + 1;
      if (out.malformed) {
        issue(Severity::warning, IssueCode::malformed_lookback,
              "LOOKBACK event missing seeking or found text", ev.span.begin);
      }
      r.lookbacks.push_back(std::move(out));
    };

    for (const auto& region : regions) {
      if (region.kind != LabelKind::lookback) continue;
      saw_lookback = true;
      std::optional<PendingEvent> cur;
      LbMarker last = LbMarker::none;
      for (const auto& cl : region.lines) {
        std::string_view line = std::string_view(r.source_text)
                                    .substr(cl.begin, cl.end - cl.begin);
        std::size_t deco = skip_decoration(line);
        LbLine lb = match_lookback_marker(line.substr(deco));
        std::string rest =
            lb.marker == LbMarker::none
                ? std::string()
                : text::collapse_ws(line.substr(deco + lb.rest_offset));
        if (lb.marker == LbMarker::seeking) {
          if (cur && !cur->found.empty()) {
            flush(*cur);
            cur.reset();
          }
          if (!cur) cur = PendingEvent{{}, {}, {cl.begin, cl.end}};
          cur->seeking.push_back(rest);
          cur->span.end = cl.end;
          last = LbMarker::seeking;
        } else if (lb.marker == LbMarker::found) {
          if (!cur) cur = PendingEvent{{}, {}, {cl.begin, cl.end}};
          cur->found.push_back(rest);
          cur->span.end = cl.end;
          last = LbMarker::found;
        } else if (cur && !text::trim_view(line).empty()) {
          // continuation of the previous marker line
          auto& bucket = (last == LbMarker::found) ? cur->found : cur->seeking;
          if (!bucket.empty()) {
            if (!bucket.back().empty()) bucket.back() += ' ';
            bucket.back() += text::collapse_ws(line);
            cur->span.end = cl.end;
          }
        }
      }
      if (cur) {
        flush(*cur);
      } else {
        // The label appeared with no content at all: record an (empty,
        // malformed) event so "lookbacks empty iff no LOOKBACK label" holds.
        PendingEvent empty{{}, {}, {region.label_offset, region.label_offset}};
        flush(empty);
      }
    }
  }

  if (!saw_mk) {
    issue(Severity::warning, IssueCode::missing_mk, "no MK section",
          r.meta_span.begin);
  }
  if (!saw_mr) {
    issue(Severity::warning, IssueCode::missing_mr, "no MR section",
          r.meta_span.begin);
  }
  (void)saw_lookback;

  report.rollout = std::move(r);
  return report;
}

/**
 * Serialize a Rollout back into canonical tagged text. Structured fields
 * (mk, mr.steps, lookbacks, answer) survive a parse round-trip; raw spans
 * and free-form meta prose do not. Field texts must not contain tag
 * sequences ("<meta>", "<answer>", ...) or the result will not re-parse.
 */
inline std::string serialize_rollout(const Rollout& r) {
  std::string out = "<meta>\nMK:\n";
  for (const auto& item : r.mk) {
    out += "- [mk" + std::to_string(item.index) + "] " +
           text::collapse_ws(item.text) + "\n";
  }
  out += "MR:\n";
  for (const auto& step : r.mr.steps) {
    out += "- [plan] " + text::collapse_ws(step) + "\n";
  }
  for (const auto& ev : r.lookbacks) {
    out += "LOOKBACK:\n";
    auto emit_lines = [&](const std::string& field, const char* marker) {
      std::size_t begin = 0;
      while (true) {
        std::size_t nl = field.find('\n', begin);
        std::string_view line(field.data() + begin,
                              (nl == std::string::npos ? field.size() : nl) -
                                  begin);
        out += "- [";
        out += marker;
        out += "]";
        std::string body = text::collapse_ws(line);
        if (!body.empty()) {
          out += ' ';
          out += body;
        }
        out += '\n';
        if (nl == std::string::npos) break;
        begin = nl + 1;
      }
    };
    emit_lines(ev.seeking, "Seeking");
    emit_lines(ev.found, "Found");
  }
  out += "</meta>\n<answer>" + r.answer + "</answer>";
  return out;
}

/**
 * Final-answer text of a parsed rollout, trimmed. Throws EmptyAnswer when
 * the answer section is empty or whitespace-only.
 */
inline std::string extract_final_answer(const Rollout& r) {
  std::string t = text::trim(r.answer_raw);
  if (t.empty()) {
    throw Error(errc::empty_answer, "answer section is empty");
  }
  return t;
}

}  // namespace metacog::rollout
