#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/grader.hpp
 *
 * Grader protocol: prompt rendering, verdict parsing, and a deterministic
 * reference grader.
 *
 * The scoring prompt sent to a judge model is a fixed template instantiated
 * with five fields. The judge must answer with a JSON object carrying the
 * verdict fields (k, r, a, s, c); parse_verdict extracts and range-checks
 * that object, tolerating code fences and surrounding prose unless strict
 * mode is requested.
 *
 * grade_reference is a heuristic stand-in for the judge so the full
 * pipeline can run hermetically: token-set Jaccard matching for knowledge
 * coverage and recovery, plan-step term matching for alignment, and token
 * containment for correctness. Its calibration knobs live in MatchConfig.
 */

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metacog/errors.hpp"
#include "metacog/jsonio.hpp"
#include "metacog/reward.hpp"
#include "metacog/rollout.hpp"
#include "metacog/text.hpp"

namespace metacog::grader {

// ============================================================================
// Types
// ============================================================================

struct GraderRequest {
  std::vector<std::string> gold_units;  // unit texts, in KU order
  int gold_count = 0;                   // n
  std::string ground_truth;
  std::string model_output;             // full rollout text
  std::string model_final_answer;
};

struct GraderResponse {
  reward::GraderVerdict verdict;
  std::string raw;   // the reply body the verdict was parsed from
  int attempts = 0;  // round trips spent (>= 1)
};

/// Remote judge endpoint (chat-completion style HTTP service).
struct GraderEndpoint {
  std::string base_url;    // e.g. "http://127.0.0.1:8080"
  std::string model_name;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 3;
  int max_in_flight = 4;
  std::string api_key_env = "GRADER_API_KEY";

  void validate() const {
    if (base_url.empty() || model_name.empty()) {
      throw Error(errc::invalid_config, "endpoint needs base_url and model");
    }
    if (max_attempts < 1) {
      throw Error(errc::invalid_config, "max_attempts must be >= 1");
    }
    if (max_in_flight < 1) {
      throw Error(errc::invalid_config, "max_in_flight must be >= 1");
    }
  }
};

/// Calibration of the deterministic reference grader.
struct MatchConfig {
  double jaccard_threshold = 0.6;   // unit-vs-statement match cutoff
  double step_term_fraction = 0.5;  // share of step terms the answer must echo
};

// ============================================================================
// Prompt template
// ============================================================================

/// Scoring prompt. Placeholders: {gold_knowledge_text},
/// {number_of_gold_knowledge} (three occurrences), {ground_truth_text},
/// {model_output}, {model_final_answer}. Doubled braces are literal, as in
/// a format string.
inline constexpr std::string_view kScoringPromptTemplate =
    R"PROMPT(You are a strict evaluator for scoring.

Your task is to evaluate the actor's output and return exactly five values:
- k: the number of gold knowledge units covered by the actor's metacognitive knowledge (MK)
- r: the number of initially missing gold knowledge units recovered through LOOKBACK
- a: an alignment score in [0,1] measuring how well the actor's final answer follows the actor's own metacognitive regulation (MR)
- s: a shortcut flag in {{0,1}}
- c: a correctness flag in {{0,1}}

================================================
SECTION IDENTIFICATION
================================================

[Model Output] may contain MK, MR, and LOOKBACK. Matching is case-insensitive.
- MK: any section labeled as MK, mk, or "Metacognitive Knowledge"
- MR: any section labeled as MR, mr, or "Metacognitive Regulation"
- LOOKBACK: any section labeled as LOOKBACK or lookback

If a section is absent or cannot be clearly identified by its label, treat it as missing and apply the missing-section rules defined below.

================================================
DEFINITIONS AND SCORING RULES
================================================

------------------------------------------------
1. Gold Knowledge
------------------------------------------------
These are the only references for evaluating k and r. Each numbered item is exactly one gold knowledge unit.

------------------------------------------------
2. k -- Covered Gold Knowledge
------------------------------------------------
A gold knowledge unit is covered if the actor's MK expresses the same semantic content, even if worded differently.
- Do NOT count vague or partial matches.
- Do NOT invent new gold knowledge units.
- Coverage is binary: a unit is either covered or not. No partial credit.

------------------------------------------------
3. r -- Recovered Missing Gold Knowledge
------------------------------------------------
Step 1: Identify which gold knowledge units are absent from MK.
Step 2: Inspect the LOOKBACK section.
Count a unit as recovered ONLY if:
  - it was absent from MK, AND
  - the same semantic content appears in LOOKBACK.
- Recovery is binary: a unit is either recovered or not. No partial credit.
Note: 0 <= r <= (Number of Gold Knowledge - k)

------------------------------------------------
4. a -- Regulation-Answer Alignment
------------------------------------------------
Score ONLY the consistency between [Model Final Answer] and MR.
Do NOT score whether the final answer is factually correct.

Use the following as anchor points. Prefer anchor values when the case clearly fits one description. You may use intermediate values (e.g., 0.6, 0.8) only when the case falls between two anchors and neither fits well.

  1.0  -- [Model Final Answer] clearly and fully executes MR
  0.75 -- [Model Final Answer] mostly executes MR, with only minor deviation
  0.5  -- [Model Final Answer] partially executes MR
  0.25 -- [Model Final Answer] weakly reflects MR
  0.0  -- [Model Final Answer] does not meaningfully follow MR

------------------------------------------------
5. s -- Shortcut Flag
------------------------------------------------
Set s = 1 only if there is clear evidence that the actor bypasses its own visible metacognitive process and jumps directly to the final answer. Do not set s = 1 merely because the response is brief or lacks one labeled section.

------------------------------------------------
6. c -- Final Answer Correctness
------------------------------------------------
Compare ONLY [Model Final Answer] with [Ground Truth].
Set c = 1 if the actor's final answer is identical to or semantically equivalent to the Ground Truth. Set c = 0 otherwise.

------------------------------------------------
7. Additional rules
------------------------------------------------
- If there is no identifiable MK section, set k = 0.
- If there is no valid LOOKBACK section, set r = 0.
- If there is no identifiable MR or no identifiable final answer, score a conservatively.
- Ground Truth must NOT be used to directly score k, r, a, or s. It may be used only for scoring c.

================================================
INPUT
================================================

[Gold Knowledge Units]
{gold_knowledge_text}

[Number of Gold Knowledge]
{number_of_gold_knowledge}

[Ground Truth]
{ground_truth_text}

[Model Output]
{model_output}

[Model Final Answer]
{model_final_answer}

================================================
OUTPUT
================================================

Return JSON only. Do not include markdown, prose, or any text outside the JSON object.

{{
  "k": <integer, 0 to {number_of_gold_knowledge}>,
  "r": <integer, 0 to ({number_of_gold_knowledge} - k)>,
  "a": <float, 0.0 to 1.0>,
  "s": <0 or 1>,
  "c": <0 or 1>
}})PROMPT";

namespace detail {

/// Format-string rendering in one pass: "{name}" substitutes a field,
/// "{{" and "}}" emit literal braces. Substituted values are never
/// rescanned, so brace-laden model output cannot corrupt the prompt.
inline std::string format_template(
    std::string_view tpl,
    const std::vector<std::pair<std::string_view, std::string_view>>& fields) {
  std::string out;
  out.reserve(tpl.size());
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    char ch = tpl[i];
    if (ch == '{' && i + 1 < tpl.size() && tpl[i + 1] == '{') {
      out += '{';
      ++i;
      continue;
    }
    if (ch == '}' && i + 1 < tpl.size() && tpl[i + 1] == '}') {
      out += '}';
      ++i;
      continue;
    }
    if (ch == '{') {
      auto close = tpl.find('}', i + 1);
      if (close == std::string_view::npos) {
        throw Error(errc::invalid_argument, "unterminated template hole");
      }
      std::string_view name = tpl.substr(i + 1, close - i - 1);
      bool found = false;
      for (const auto& [key, value] : fields) {
        if (key == name) {
          out += value;
          found = true;
          break;
        }
      }
      if (!found) {
        throw Error(errc::invalid_argument,
                    "unknown template placeholder: " + std::string(name));
      }
      i = close;
      continue;
    }
    out += ch;
  }
  return out;
}

}  // namespace detail

/**
 * Instantiate the scoring prompt for one request. Gold units are rendered
 * as a numbered list, one unit per line. Throws TemplateFieldEmpty when any
 * required field is empty.
 */
inline std::string render_grader_prompt(const GraderRequest& req) {
  if (req.gold_units.empty()) {
    throw Error(errc::template_field_empty, "gold_units is empty");
  }
  for (const auto& u : req.gold_units) {
    if (text::trim_view(u).empty()) {
      throw Error(errc::template_field_empty, "gold unit with empty text");
    }
  }
  if (req.gold_count <= 0) {
    throw Error(errc::template_field_empty, "gold_count must be positive");
  }
  if (text::trim_view(req.ground_truth).empty()) {
    throw Error(errc::template_field_empty, "ground_truth is empty");
  }
  if (text::trim_view(req.model_output).empty()) {
    throw Error(errc::template_field_empty, "model_output is empty");
  }
  if (text::trim_view(req.model_final_answer).empty()) {
    throw Error(errc::template_field_empty, "model_final_answer is empty");
  }

  std::string gold_text;
  for (std::size_t i = 0; i < req.gold_units.size(); ++i) {
    if (i) gold_text += '\n';
    gold_text += std::to_string(i + 1) + ". " + req.gold_units[i];
  }

  std::string count = std::to_string(req.gold_count);
  return detail::format_template(
      kScoringPromptTemplate,
      {{"gold_knowledge_text", gold_text},
       {"number_of_gold_knowledge", count},
       {"ground_truth_text", req.ground_truth},
       {"model_output", req.model_output},
       {"model_final_answer", req.model_final_answer}});
}

// ============================================================================
// Verdict parsing
// ============================================================================

namespace detail {

inline double require_number(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) {
    throw Error(errc::missing_field, std::string("verdict lacks \"") + key + '"',
                key);
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw Error(errc::range_violation, std::string(key) + " is not a number",
                key);
  }
  return v.get<double>();
}

inline int require_int_in(const nlohmann::json& obj, const char* key, int lo,
                          int hi) {
  double d = require_number(obj, key);
  int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw Error(errc::range_violation, std::string(key) + " must be an integer",
                key);
  }
  if (i < lo || i > hi) {
    throw Error(errc::range_violation,
                std::string(key) + "=" + std::to_string(i) + " outside [" +
                    std::to_string(lo) + ", " + std::to_string(hi) + "]",
                key);
  }
  return i;
}

}  // namespace detail

/**
 * Extract a verdict from a judge reply. In lenient mode the first balanced
 * JSON object that parses is used, so fenced blocks and surrounding prose
 * are tolerated; in strict mode the whole reply (modulo whitespace) must be
 * the object. Ranges: 0 <= k <= n, 0 <= r <= n - k, a in [0,1], s and c in
 * {0,1}. Throws Unparseable, MissingField, or RangeViolation(field).
 */
inline reward::GraderVerdict parse_verdict(std::string_view raw, int n,
                                           bool strict = false) {
  if (n < 1) {
    throw Error(errc::invalid_argument, "n must be >= 1");
  }
  nlohmann::json obj;
  bool found = false;
  if (strict) {
    std::string_view body = text::trim_view(raw);
    obj = nlohmann::json::parse(body, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error(errc::unparseable, "reply is not a bare JSON object");
    }
    found = true;
  } else {
    std::size_t from = 0;
    while (auto candidate = jsonio::next_balanced_object(raw, from)) {
      auto parsed = nlohmann::json::parse(*candidate, nullptr, false);
      if (!parsed.is_discarded() && parsed.is_object()) {
        obj = std::move(parsed);
        found = true;
        break;
      }
    }
  }
  if (!found) {
    throw Error(errc::unparseable, "no JSON object found in reply");
  }

  reward::GraderVerdict v;
  v.k = detail::require_int_in(obj, "k", 0, n);
  v.r = detail::require_int_in(obj, "r", 0, n - v.k);
  double a = detail::require_number(obj, "a");
  if (!(a >= 0.0 && a <= 1.0)) {
    throw Error(errc::range_violation, "a outside [0, 1]", "a");
  }
  v.a = a;
  v.s = detail::require_int_in(obj, "s", 0, 1);
  v.c = detail::require_int_in(obj, "c", 0, 1);
  return v;
}

// ============================================================================
// Reference grader
// ============================================================================

namespace detail {

inline bool unit_matches(const std::set<std::string>& unit_tokens,
                         const std::set<std::string>& candidate_tokens,
                         double threshold) {
  return text::jaccard(unit_tokens, candidate_tokens) >= threshold;
}

/// Anchor grid snap, ties resolved upward.
inline double snap_to_anchor(double x) {
  static const double anchors[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  double best = anchors[0];
  double best_dist = 2.0;
  for (double a : anchors) {
    double d = x > a ? x - a : a - x;
    if (d < best_dist || (d == best_dist && a > best)) {
      best = a;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace detail

/**
 * Deterministic verdict from token matching. `ro` must be the parsed form
 * of `req.model_output`.
 *
 *   k: gold units whose token set Jaccard-matches some MK item.
 *   r: remaining units matched against LOOKBACK found texts (whole text and
 *      individual lines).
 *   a: fraction of plan steps whose content terms appear in the answer,
 *      snapped to the anchor grid; 0 without steps or answer.
 *   s: 1 when the rollout answers without any visible knowledge work (no MK
 *      items and no LOOKBACK events).
 *   c: 1 when the normalized answer equals the normalized ground truth or
 *      contains it as a contiguous token run.
 *
 * Pure and total: no network, no clock, no RNG.
 */
inline reward::GraderVerdict grade_reference(const GraderRequest& req,
                                             const rollout::Rollout& ro,
                                             const MatchConfig& cfg = {}) {
  reward::GraderVerdict v;

  std::vector<std::set<std::string>> mk_tokens;
  mk_tokens.reserve(ro.mk.size());
  for (const auto& item : ro.mk) {
    mk_tokens.push_back(text::content_token_set(item.text));
  }

  std::vector<std::set<std::string>> found_tokens;
  for (const auto& ev : ro.lookbacks) {
    if (ev.found.empty()) continue;
    found_tokens.push_back(text::content_token_set(ev.found));
    std::size_t begin = 0;
    while (begin <= ev.found.size()) {
      std::size_t nl = ev.found.find('\n', begin);
      std::string_view line(ev.found.data() + begin,
                            (nl == std::string::npos ? ev.found.size() : nl) -
                                begin);
      if (!line.empty()) {
        found_tokens.push_back(text::content_token_set(line));
      }
      if (nl == std::string::npos) break;
      begin = nl + 1;
    }
  }

  for (const auto& unit : req.gold_units) {
    auto unit_tokens = text::content_token_set(unit);
    bool covered = false;
    for (const auto& cand : mk_tokens) {
      if (detail::unit_matches(unit_tokens, cand, cfg.jaccard_threshold)) {
        covered = true;
        break;
      }
    }
    if (covered) {
      ++v.k;
      continue;
    }
    for (const auto& cand : found_tokens) {
      if (detail::unit_matches(unit_tokens, cand, cfg.jaccard_threshold)) {
        ++v.r;
        break;
      }
    }
  }

  // a: plan-step execution reflected in the answer text.
  auto answer_content = text::content_token_set(ro.answer);
  if (!ro.mr.steps.empty() && !answer_content.empty()) {
    std::size_t hits = 0;
    for (const auto& step : ro.mr.steps) {
      auto step_tokens = text::content_token_set(step);
      if (step_tokens.empty()) {
        ++hits;  // nothing checkable in the step; vacuously followed
        continue;
      }
      std::size_t present = 0;
      for (const auto& t : step_tokens) present += answer_content.count(t);
      if (static_cast<double>(present) / static_cast<double>(step_tokens.size()) >=
          cfg.step_term_fraction) {
        ++hits;
      }
    }
    v.a = detail::snap_to_anchor(static_cast<double>(hits) /
                                 static_cast<double>(ro.mr.steps.size()));
  }

  bool has_answer = !text::trim_view(ro.answer).empty();
  v.s = (has_answer && ro.mk.empty() && ro.lookbacks.empty()) ? 1 : 0;

  auto answer_seq = text::tokens(ro.answer);
  auto truth_seq = text::tokens(req.ground_truth);
  v.c = (!truth_seq.empty() && (answer_seq == truth_seq ||
                                text::contains_token_run(answer_seq, truth_seq)))
            ? 1
            : 0;
  return v;
}

}  // namespace metacog::grader
