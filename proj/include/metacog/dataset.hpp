#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/dataset.hpp
 *
 * Supervision-metadata samples: ingestion, validation, serialization, and
 * the prompt templates used to create new samples.
 *
 * The on-disk format is line-delimited JSON, one sample per line:
 *
 *   {"sample_id": ..., "prompt": [...], "data_source": ..., "ability": ...,
 *    "reward_model": {"style": ..., "ground_truth": ...,
 *                     "gold_knowledge_num": N, "gold_knowledge": [...],
 *                     "possible_meta_regulation": [...]},
 *    "extra_info": ...}
 *
 * Unknown fields (extra_info and anything else) ride along opaquely so a
 * read-modify-write cycle never drops data. Bad records are rejected with
 * a reason, never fatal; only an unreadable file aborts ingestion.
 *
 * Validation precedence per record (first failure wins):
 *   MalformedRecord > BadMetaRegulation (structure) > ErrorSentinel >
 *   BadMetaRegulation (cardinality) > MissingGroundTruth >
 *   EmptyGoldKnowledge > BadUnitId > CountMismatch > DuplicateId
 */

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metacog/errors.hpp"
#include "metacog/jsonio.hpp"
#include "metacog/text.hpp"

namespace metacog::dataset {

using ordered_json = nlohmann::ordered_json;

// ============================================================================
// Types
// ============================================================================

struct GoldKnowledgeUnit {
  std::string id;    // "KU1", "KU2", ... sequential within a sample
  std::string text;  // atomic knowledge statement, non-empty

  friend bool operator==(const GoldKnowledgeUnit&,
                         const GoldKnowledgeUnit&) = default;
};

/// Auxiliary regulation annotation (single "PMR1" entry). Carried through
/// the pipeline but never consumed by reward computation.
struct MetaRegulation {
  std::string id;
  std::string text;

  friend bool operator==(const MetaRegulation&, const MetaRegulation&) = default;
};

struct TrainingSample {
  std::string sample_id;
  ordered_json prompt;  // verbatim message array; null when absent
  std::optional<std::string> data_source;
  std::optional<std::string> ability;
  std::optional<std::string> style;
  std::string ground_truth;
  int gold_count = 0;  // always equals gold_units.size() once accepted
  std::vector<GoldKnowledgeUnit> gold_units;
  std::optional<MetaRegulation> meta_regulation;
  ordered_json reward_model_extras = ordered_json::object();
  ordered_json extras = ordered_json::object();  // unknown top-level fields

  /// Content of the first user message, or empty when there is none.
  std::string prompt_text() const {
    if (!prompt.is_array()) return {};
    for (const auto& msg : prompt) {
      if (msg.is_object() && msg.value("role", "") == "user" &&
          msg.contains("content") && msg["content"].is_string()) {
        return msg["content"].get<std::string>();
      }
    }
    return {};
  }

  std::vector<std::string> gold_texts() const {
    std::vector<std::string> out;
    out.reserve(gold_units.size());
    for (const auto& u : gold_units) out.push_back(u.text);
    return out;
  }
};

enum class RejectReason {
  malformed_record,
  error_sentinel,
  missing_ground_truth,
  empty_gold_knowledge,
  bad_unit_id,
  count_mismatch,
  bad_meta_regulation,
  duplicate_id,
};

inline const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::malformed_record: return "MalformedRecord";
    case RejectReason::error_sentinel: return "ErrorSentinel";
    case RejectReason::missing_ground_truth: return "MissingGroundTruth";
    case RejectReason::empty_gold_knowledge: return "EmptyGoldKnowledge";
    case RejectReason::bad_unit_id: return "BadUnitId";
    case RejectReason::count_mismatch: return "CountMismatch";
    case RejectReason::bad_meta_regulation: return "BadMetaRegulation";
    case RejectReason::duplicate_id: return "DuplicateId";
  }
  return "Unknown";
}

struct RejectedRecord {
  std::size_t line = 0;   // 1-based line number in the source file
  std::string sample_id;  // empty when the id itself was unreadable
  RejectReason reason{};
  std::string detail;
  std::string raw;  // original line, so rejects can be re-emitted
};

struct IngestReport {
  std::vector<TrainingSample> samples;    // accepted, sorted by sample_id
  std::vector<RejectedRecord> rejections;  // source order

  std::size_t accepted() const { return samples.size(); }
  std::size_t rejected() const { return rejections.size(); }
  std::size_t total() const { return accepted() + rejected(); }
};

// ============================================================================
// Record parsing
// ============================================================================

/// Outcome of validating one line: a sample or a rejection reason.
struct RecordOutcome {
  std::optional<TrainingSample> sample;
  RejectReason reason{};
  std::string detail;
};

namespace detail {

inline RecordOutcome reject(RejectReason reason, std::string detail) {
  RecordOutcome out;
  out.reason = reason;
  out.detail = std::move(detail);
  return out;
}

inline bool optional_string_field(const ordered_json& obj, const char* key,
                                  std::optional<std::string>& into) {
  auto it = obj.find(key);
  if (it == obj.end()) return true;
  if (!it->is_string()) return false;
  into = it->get<std::string>();
  return true;
}

}  // namespace detail

/**
 * Validate one JSONL record. Cross-record checks (DuplicateId) belong to
 * the caller. Never throws on bad input; everything maps to a rejection.
 */
inline RecordOutcome parse_record(std::string_view line) {
  using detail::reject;

  auto obj = ordered_json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    return reject(RejectReason::malformed_record, "line is not a JSON object");
  }

  TrainingSample s;
  {
    auto it = obj.find("sample_id");
    if (it == obj.end() || !it->is_string() ||
        text::trim_view(it->get_ref<const std::string&>()).empty()) {
      return reject(RejectReason::malformed_record,
                    "sample_id missing or not a non-empty string");
    }
    s.sample_id = it->get<std::string>();
  }

  if (auto it = obj.find("prompt"); it != obj.end()) {
    if (!it->is_array()) {
      return reject(RejectReason::malformed_record, "prompt is not an array");
    }
    s.prompt = *it;
  }

  if (!detail::optional_string_field(obj, "data_source", s.data_source) ||
      !detail::optional_string_field(obj, "ability", s.ability)) {
    return reject(RejectReason::malformed_record,
                  "data_source/ability must be strings");
  }

  auto rm_it = obj.find("reward_model");
  if (rm_it == obj.end() || !rm_it->is_object()) {
    return reject(RejectReason::malformed_record,
                  "reward_model missing or not an object");
  }
  const ordered_json& rm = *rm_it;

  if (!detail::optional_string_field(rm, "style", s.style)) {
    return reject(RejectReason::malformed_record, "style must be a string");
  }

  // Meta-regulation structure first: the error sentinel lives here and
  // outranks every content check on the rest of the record.
  std::vector<MetaRegulation> pmr;
  if (auto it = rm.find("possible_meta_regulation"); it != rm.end()) {
    if (!it->is_array()) {
      return reject(RejectReason::bad_meta_regulation,
                    "possible_meta_regulation is not an array");
    }
    for (const auto& entry : *it) {
      if (!entry.is_object() || !entry.contains("id") ||
          !entry["id"].is_string() || !entry.contains("text") ||
          !entry["text"].is_string()) {
        return reject(RejectReason::bad_meta_regulation,
                      "regulation entries need string id and text");
      }
      pmr.push_back({entry["id"].get<std::string>(),
                     entry["text"].get<std::string>()});
    }
    for (const auto& entry : pmr) {
      if (entry.text == "error") {
        return reject(RejectReason::error_sentinel,
                      "annotator flagged this task as unsuitable");
      }
    }
    if (pmr.size() != 1 || pmr.front().id != "PMR1" ||
        text::trim_view(pmr.front().text).empty()) {
      return reject(RejectReason::bad_meta_regulation,
                    "expected exactly one PMR1 entry with non-empty text");
    }
    s.meta_regulation = pmr.front();
  }

  {
    auto it = rm.find("ground_truth");
    if (it == rm.end() || !it->is_string() ||
        text::trim_view(it->get_ref<const std::string&>()).empty()) {
      return reject(RejectReason::missing_ground_truth,
                    "ground_truth missing or empty");
    }
    s.ground_truth = it->get<std::string>();
  }

  {
    auto it = rm.find("gold_knowledge");
    if (it == rm.end() || !it->is_array() || it->empty()) {
      return reject(RejectReason::empty_gold_knowledge,
                    "gold_knowledge missing or empty");
    }
    std::size_t index = 0;
    for (const auto& entry : *it) {
      ++index;
      if (!entry.is_object() || !entry.contains("id") ||
          !entry["id"].is_string() || !entry.contains("text") ||
          !entry["text"].is_string()) {
        return reject(RejectReason::bad_unit_id,
                      "unit " + std::to_string(index) +
                          " needs string id and text");
      }
      GoldKnowledgeUnit unit{entry["id"].get<std::string>(),
                             entry["text"].get<std::string>()};
      if (unit.id != "KU" + std::to_string(index)) {
        return reject(RejectReason::bad_unit_id,
                      "unit " + std::to_string(index) + " has id \"" +
                          unit.id + "\", expected \"KU" +
                          std::to_string(index) + "\"");
      }
      if (text::trim_view(unit.text).empty()) {
        return reject(RejectReason::bad_unit_id,
                      unit.id + " has empty text");
      }
      s.gold_units.push_back(std::move(unit));
    }
  }

  {
    auto it = rm.find("gold_knowledge_num");
    if (it == rm.end() || !it->is_number_integer()) {
      return reject(RejectReason::malformed_record,
                    "gold_knowledge_num missing or not an integer");
    }
    s.gold_count = it->get<int>();
    if (s.gold_count != static_cast<int>(s.gold_units.size())) {
      return reject(RejectReason::count_mismatch,
                    "gold_knowledge_num=" + std::to_string(s.gold_count) +
                        " but " + std::to_string(s.gold_units.size()) +
                        " units listed");
    }
  }

  for (const auto& [key, value] : rm.items()) {
    if (key == "style" || key == "ground_truth" ||
        key == "gold_knowledge_num" || key == "gold_knowledge" ||
        key == "possible_meta_regulation") {
      continue;
    }
    s.reward_model_extras[key] = value;
  }
  for (const auto& [key, value] : obj.items()) {
    if (key == "sample_id" || key == "prompt" || key == "data_source" ||
        key == "ability" || key == "reward_model") {
      continue;
    }
    s.extras[key] = value;
  }

  RecordOutcome out;
  out.sample = std::move(s);
  return out;
}

// ============================================================================
// Serialization
// ============================================================================

/// Canonical single-line JSON for one sample, field order as in the
/// on-disk schema. parse_record(serialize_sample(s)) accepts and
/// reproduces s exactly.
inline std::string serialize_sample(const TrainingSample& s) {
  ordered_json obj = ordered_json::object();
  obj["sample_id"] = s.sample_id;
  if (s.prompt.is_array()) obj["prompt"] = s.prompt;
  if (s.data_source) obj["data_source"] = *s.data_source;
  if (s.ability) obj["ability"] = *s.ability;

  ordered_json rm = ordered_json::object();
  if (s.style) rm["style"] = *s.style;
  rm["ground_truth"] = s.ground_truth;
  rm["gold_knowledge_num"] = s.gold_count;
  ordered_json units = ordered_json::array();
  for (const auto& u : s.gold_units) {
    units.push_back(ordered_json{{"id", u.id}, {"text", u.text}});
  }
  rm["gold_knowledge"] = std::move(units);
  if (s.meta_regulation) {
    rm["possible_meta_regulation"] = ordered_json::array({ordered_json{
        {"id", s.meta_regulation->id}, {"text", s.meta_regulation->text}}});
  }
  for (const auto& [key, value] : s.reward_model_extras.items()) {
    rm[key] = value;
  }
  obj["reward_model"] = std::move(rm);

  for (const auto& [key, value] : s.extras.items()) {
    obj[key] = value;
  }
  return obj.dump();
}

// ============================================================================
// Ingestion
// ============================================================================

/// Ingest records from a stream. Blank lines are skipped; every non-blank
/// line is counted as exactly one accepted or rejected record. Accepted
/// samples are sorted by sample_id so sharded ingestion is reproducible.
inline IngestReport ingest_stream(std::istream& in) {
  IngestReport report;
  std::vector<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim_view(line).empty()) continue;
    RecordOutcome outcome = parse_record(line);
    if (outcome.sample) {
      const std::string& id = outcome.sample->sample_id;
      if (std::find(seen_ids.begin(), seen_ids.end(), id) != seen_ids.end()) {
        report.rejections.push_back({line_no, id, RejectReason::duplicate_id,
                                     "sample_id already seen", line});
        continue;
      }
      seen_ids.push_back(id);
      report.samples.push_back(std::move(*outcome.sample));
    } else {
      std::string id;
      if (auto obj = ordered_json::parse(line, nullptr, false);
          !obj.is_discarded() && obj.is_object() && obj.contains("sample_id") &&
          obj["sample_id"].is_string()) {
        id = obj["sample_id"].get<std::string>();
      }
      report.rejections.push_back(
          {line_no, id, outcome.reason, std::move(outcome.detail), line});
    }
  }
  std::sort(report.samples.begin(), report.samples.end(),
            [](const TrainingSample& a, const TrainingSample& b) {
              return a.sample_id < b.sample_id;
            });
  return report;
}

/// File-path variant. Throws FileUnreadable; bad records never throw.
inline IngestReport ingest_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::file_unreadable, "cannot open " + path.string());
  }
  return ingest_stream(in);
}

// ============================================================================
// Prompt templates
// ============================================================================

/// Solving-strategy instructions appended to every task prompt.
inline constexpr std::string_view kSolveStrategy =
    R"TPL(========= SOLVE STRATEGY =========
Above you are given a task. Follow the two steps to solve the task.

Step 1 -- Meta thinking
Identify any knowledge that is task-relevant, necessary, or highly important for solving the task.

Metacognitive Knowledge (MK): task-relevant knowledge needed for solving
(e.g., key facts / definitions / constraints / rules / procedures / exceptions).
- [mk1] 
- [mk2]

Metacognitive Regulation (MR): 
- [plan] # short executable steps

Then solve using the MK and MR.
If you become blocked, uncertain, or realize that an important piece of knowledge was not included in MK, trigger LOOKBACK.

LOOKBACK:
- [Seeking] # exactly what you need
- [Found] # the recalled or derived knowledge
Then continue solving.

Step 2 -- Answer
Check: does your answer apply the necessary knowledge and follow the correct plan?
Provide the final answer.

Rules:
- The meta thinking process and answer must be enclosed within <meta> and <answer> tags, respectively. 

Output format:
<meta>meta thinking process</meta><answer>final answer</answer>)TPL";

/// Task text plus the strategy block, as sent to the policy model.
/// Throws EmptyTask.
inline std::string render_solve_strategy(std::string_view task_text) {
  if (text::trim_view(task_text).empty()) {
    throw Error(errc::empty_task, "task text is empty");
  }
  std::string out(task_text);
  out += "\n\n";
  out += kSolveStrategy;
  return out;
}

/// System prompt for the annotator that produces gold knowledge and the
/// auxiliary regulation entry. Input-independent.
inline constexpr std::string_view kAnnotationSystemPrompt =
    R"TPL(You are constructing supervision metadata for metacognitive RL.

Your task is to extract supervision metadata from the given task and reference answer.

Normal case:
1. gold_knowledge
A set of atomic gold metacognitive knowledge (e.g., key facts / definitions / constraints / rules / procedures / exceptions) required for solving the task.

2. possible_meta_regulation
One regulation description that captures a reasonable solving process.

Important constraints:
- Use the task as the primary source.
- Use the reference answer only as auxiliary reference for relevance and necessity.
- Do NOT simply paraphrase or decompose the reference answer into trivial answer-support bullets.
- gold_knowledge units must be:
  - atomic and self-contained
  - task-relevant, necessary or highly important for solving
  - collectively cover all necessary information required to solve the task
  - non-redundant and minimally overlapping
  - specific enough to be useful, and not overly generic
- possible_meta_regulation should be:
  - exactly one entry with id "PMR1"
  - high-level and process-oriented
  - not overly tied to the exact wording of the reference answer

Special rule:
- If you judge that this task and its reference answer are not suitable for constructing trustworthy supervision metadata, then do NOT generate gold_knowledge.
- This includes cases such as: the task or reference answer being unreliable, malformed, self-contradictory, missing key information, obviously wrong, containing minor errors, being logically not rigorous, ambiguous in a way that affects solvability, or otherwise unsuitable for high-quality supervision construction.
- In that case, return ONLY:
  {
    "possible_meta_regulation": [{"id": "PMR1", "text": "error"}]
  }

Return JSON only.)TPL";

/// User prompt template. Placeholders: {task_prompt}, {ground_truth}.
inline constexpr std::string_view kAnnotationUserTemplate =
    R"TPL(Extract the required fields for the following sample.

Return JSON only in one of the following two formats.

Normal case:
{
  "gold_knowledge": [
    {"id": "KU1", "text": "..."},
    {"id": "KU2", "text": "..."}
  ],
  "possible_meta_regulation": [
    {"id": "PMR1", "text": "..."}
  ]
}

If you believe this task and its reference answer are not suitable for trustworthy supervision construction, return ONLY:
{
  "possible_meta_regulation": [
    {"id": "PMR1", "text": "error"}
  ]
}

[Task]
{task_prompt}

[Reference Answer]
{ground_truth})TPL";

struct AnnotationPrompts {
  std::string system;
  std::string user;
};

/// Instantiate the annotator prompts for one task. Throws EmptyField.
inline AnnotationPrompts render_annotation_prompts(
    std::string_view task, std::string_view reference_answer) {
  if (text::trim_view(task).empty()) {
    throw Error(errc::empty_field, "task is empty", "task");
  }
  if (text::trim_view(reference_answer).empty()) {
    throw Error(errc::empty_field, "reference answer is empty",
                "reference_answer");
  }
  AnnotationPrompts out;
  out.system = std::string(kAnnotationSystemPrompt);
  std::string user(kAnnotationUserTemplate);
  user = text::replace_all(std::move(user), "{task_prompt}",
                           std::string(task));
  user = text::replace_all(std::move(user), "{ground_truth}",
                           std::string(reference_answer));
  out.user = std::move(user);
  return out;
}

// ============================================================================
// Annotation reply parsing
// ============================================================================

/// Parsed annotator reply: either the sample fragment or a rejection
/// marker when the annotator returned the error sentinel.
struct AnnotationResult {
  bool rejected = false;
  std::vector<GoldKnowledgeUnit> gold_units;   // empty when rejected
  std::optional<MetaRegulation> meta_regulation;
};

/**
 * Interpret an annotator-model reply. Tolerates prose and code fences
 * around the JSON object. Throws Unparseable when no object is found and
 * SchemaViolation on shape violations (wrong PMR cardinality, bad KU
 * sequencing, sentinel text alongside gold units).
 */
inline AnnotationResult parse_annotation_reply(std::string_view raw) {
  auto obj_opt = jsonio::first_object(raw);
  if (!obj_opt) {
    throw Error(errc::unparseable, "no JSON object in annotation reply");
  }
  const ordered_json& obj = *obj_opt;

  auto pmr_it = obj.find("possible_meta_regulation");
  if (pmr_it == obj.end() || !pmr_it->is_array() || pmr_it->empty()) {
    throw Error(errc::schema_violation,
                "possible_meta_regulation array is required");
  }
  std::vector<MetaRegulation> pmr;
  for (const auto& entry : *pmr_it) {
    if (!entry.is_object() || !entry.contains("id") ||
        !entry["id"].is_string() || !entry.contains("text") ||
        !entry["text"].is_string()) {
      throw Error(errc::schema_violation,
                  "regulation entries need string id and text");
    }
    pmr.push_back(
        {entry["id"].get<std::string>(), entry["text"].get<std::string>()});
  }
  if (pmr.size() != 1 || pmr.front().id != "PMR1") {
    throw Error(errc::schema_violation,
                "expected exactly one entry with id \"PMR1\"");
  }

  auto gk_it = obj.find("gold_knowledge");
  bool has_units = gk_it != obj.end() && gk_it->is_array() && !gk_it->empty();

  if (pmr.front().text == "error") {
    if (has_units) {
      throw Error(errc::schema_violation,
                  "error sentinel must not carry gold_knowledge");
    }
    AnnotationResult out;
    out.rejected = true;
    return out;
  }

  if (!has_units) {
    throw Error(errc::schema_violation,
                "normal-shape reply needs a non-empty gold_knowledge array");
  }
  AnnotationResult out;
  std::size_t index = 0;
  for (const auto& entry : *gk_it) {
    ++index;
    if (!entry.is_object() || !entry.contains("id") ||
        !entry["id"].is_string() || !entry.contains("text") ||
        !entry["text"].is_string()) {
      throw Error(errc::schema_violation,
                  "knowledge entries need string id and text");
    }
    GoldKnowledgeUnit unit{entry["id"].get<std::string>(),
                           entry["text"].get<std::string>()};
    if (unit.id != "KU" + std::to_string(index)) {
      throw Error(errc::schema_violation,
                  "knowledge ids must run KU1..KUn; got \"" + unit.id +
                      "\" at position " + std::to_string(index));
    }
    if (text::trim_view(unit.text).empty()) {
      throw Error(errc::schema_violation, unit.id + " has empty text");
    }
    out.gold_units.push_back(std::move(unit));
  }
  out.meta_regulation = pmr.front();
  return out;
}

}  // namespace metacog::dataset
