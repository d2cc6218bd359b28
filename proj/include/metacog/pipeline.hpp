#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/pipeline.hpp
 *
 * Orchestration behind the CLI: flat-file configuration, the graded-record
 * format, run manifests, and the command implementations (ingest,
 * simulate, grade, advantage, analyze, train-toy).
 *
 * Determinism contract: record files (accepted/rejected/rollouts/graded/
 * advantaged JSONL and the analysis report) are byte-identical across runs
 * and worker counts for the same inputs and config. Manifests carry a
 * wall-clock timestamp and are the one exception.
 *
 * Grading fans out over a preallocated result array indexed by task order,
 * so worker scheduling cannot reorder output. Failures never abort the
 * batch: each bad rollout becomes a `failed` record with a reason, and a
 * group that drops below two survivors is skipped at advantage time with a
 * notice.
 */

#include <atomic>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metacog/dataset.hpp"
#include "metacog/errors.hpp"
#include "metacog/grader.hpp"
#include "metacog/grader_client.hpp"
#include "metacog/group_optim.hpp"
#include "metacog/reward.hpp"
#include "metacog/rng.hpp"
#include "metacog/rollout.hpp"
#include "metacog/simulator.hpp"
#include "metacog/stats.hpp"
#include "metacog/text.hpp"
#include "metacog/toy_env.hpp"

namespace metacog::pipeline {

using ordered_json = nlohmann::ordered_json;

// ============================================================================
// Configuration
// ============================================================================

struct PipelineConfig {
  reward::RewardConfig reward;
  optim::ClipConfig clip;
  grader::MatchConfig match;
  sim::SimProfile sim;
  int group_size = 8;
  std::string grader_mode = "reference";  // "reference" or "remote"
  grader::GraderEndpoint endpoint;
  int workers = 1;
  std::uint64_t seed = 0;
  // toy-training knobs
  double learning_rate = 0.8;
  int train_steps = 200;
  int eval_rollouts = 64;

  void validate() const {
    reward.validate();
    clip.validate();
    if (group_size < 2) {
      throw Error(errc::invalid_config, "group_size must be >= 2");
    }
    if (grader_mode != "reference" && grader_mode != "remote") {
      throw Error(errc::invalid_config,
                  "grader must be \"reference\" or \"remote\"");
    }
    if (grader_mode == "remote") endpoint.validate();
    if (workers < 1) {
      throw Error(errc::invalid_config, "workers must be >= 1");
    }
    if (!(match.jaccard_threshold > 0.0 && match.jaccard_threshold <= 1.0) ||
        !(match.step_term_fraction > 0.0 && match.step_term_fraction <= 1.0)) {
      throw Error(errc::invalid_config,
                  "matcher thresholds must lie in (0, 1]");
    }
    sim.validate();
    if (!(learning_rate > 0.0)) {
      throw Error(errc::invalid_config, "learning_rate must be positive");
    }
    if (train_steps < 0) {
      throw Error(errc::invalid_config, "train_steps must be >= 0");
    }
    if (eval_rollouts < 1) {
      throw Error(errc::invalid_config, "eval_rollouts must be >= 1");
    }
  }
};

namespace detail {

inline std::string format_double(double v) {
  return nlohmann::json(v).dump();
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw Error(errc::invalid_config, key + " expects a number, got \"" +
                                          value + '"');
  }
}

inline long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long out = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw Error(errc::invalid_config, key + " expects an integer, got \"" +
                                          value + '"');
  }
}

inline std::uint64_t parse_u64(const std::string& key,
                               const std::string& value) {
  try {
    std::size_t used = 0;
    std::uint64_t out = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw Error(errc::invalid_config, key + " expects an unsigned integer, got \"" +
                                          value + '"');
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw Error(errc::invalid_config,
              key + " expects true/false or 1/0, got \"" + value + '"');
}

}  // namespace detail

/// Apply one key=value setting. Unknown keys are configuration errors so
/// typos fail loudly instead of silently using defaults.
inline void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                               const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  using detail::parse_u64;

  if (key == "lambda") cfg.reward.lambda = parse_double(key, value);
  else if (key == "delta") cfg.reward.delta = parse_double(key, value);
  else if (key == "weight_kmr") cfg.reward.weight_kmr = parse_double(key, value);
  else if (key == "weight_rmr") cfg.reward.weight_rmr = parse_double(key, value);
  else if (key == "weight_cr") cfg.reward.weight_cr = parse_double(key, value);
  else if (key == "eps_low") cfg.clip.eps_low = parse_double(key, value);
  else if (key == "eps_high") cfg.clip.eps_high = parse_double(key, value);
  else if (key == "group_size") cfg.group_size = static_cast<int>(parse_int(key, value));
  else if (key == "grader") cfg.grader_mode = value;
  else if (key == "workers") cfg.workers = static_cast<int>(parse_int(key, value));
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "jaccard_threshold") cfg.match.jaccard_threshold = parse_double(key, value);
  else if (key == "step_term_fraction") cfg.match.step_term_fraction = parse_double(key, value);
  else if (key == "base_url") cfg.endpoint.base_url = value;
  else if (key == "model_name") cfg.endpoint.model_name = value;
  else if (key == "timeout_ms") cfg.endpoint.timeout = std::chrono::milliseconds(parse_int(key, value));
  else if (key == "max_attempts") cfg.endpoint.max_attempts = static_cast<int>(parse_int(key, value));
  else if (key == "max_in_flight") cfg.endpoint.max_in_flight = static_cast<int>(parse_int(key, value));
  else if (key == "api_key_env") cfg.endpoint.api_key_env = value;
  else if (key == "coverage_p") cfg.sim.coverage_p = parse_double(key, value);
  else if (key == "recover_q") cfg.sim.recover_q = parse_double(key, value);
  else if (key == "fidelity_a") cfg.sim.fidelity_a = parse_double(key, value);
  else if (key == "shortcut_rate") cfg.sim.shortcut_rate = parse_double(key, value);
  else if (key == "correct_rate") cfg.sim.correct_rate = parse_double(key, value);
  else if (key == "noisy") cfg.sim.noisy = parse_bool(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
  else if (key == "train_steps") cfg.train_steps = static_cast<int>(parse_int(key, value));
  else if (key == "eval_rollouts") cfg.eval_rollouts = static_cast<int>(parse_int(key, value));
  else {
    throw Error(errc::invalid_config, "unknown config key: " + key);
  }
}

/// Parse a flat key=value config document. '#' starts a comment; blank
/// lines are ignored.
inline PipelineConfig parse_config_text(std::string_view doc) {
  PipelineConfig cfg;
  std::size_t pos = 0;
  while (pos <= doc.size()) {
    std::size_t nl = doc.find('\n', pos);
    std::string_view line =
        doc.substr(pos, (nl == std::string_view::npos ? doc.size() : nl) - pos);
    pos = (nl == std::string_view::npos) ? doc.size() + 1 : nl + 1;

    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = text::trim_view(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(errc::invalid_config,
                  "config line is not key=value: " + std::string(line));
    }
    std::string key = text::trim(line.substr(0, eq));
    std::string value = text::trim(line.substr(eq + 1));
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::file_unreadable, "cannot open config " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

/// Every setting as ordered key/value text pairs; the canonical form
/// hashed into manifests and reparsed by audit mode.
inline std::vector<std::pair<std::string, std::string>> config_entries(
    const PipelineConfig& cfg) {
  using detail::format_double;
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("lambda", format_double(cfg.reward.lambda));
  out.emplace_back("delta", format_double(cfg.reward.delta));
  out.emplace_back("weight_kmr", format_double(cfg.reward.weight_kmr));
  out.emplace_back("weight_rmr", format_double(cfg.reward.weight_rmr));
  out.emplace_back("weight_cr", format_double(cfg.reward.weight_cr));
  out.emplace_back("eps_low", format_double(cfg.clip.eps_low));
  out.emplace_back("eps_high", format_double(cfg.clip.eps_high));
  out.emplace_back("group_size", std::to_string(cfg.group_size));
  out.emplace_back("grader", cfg.grader_mode);
  out.emplace_back("workers", std::to_string(cfg.workers));
  out.emplace_back("seed", std::to_string(cfg.seed));
  out.emplace_back("jaccard_threshold", format_double(cfg.match.jaccard_threshold));
  out.emplace_back("step_term_fraction", format_double(cfg.match.step_term_fraction));
  out.emplace_back("base_url", cfg.endpoint.base_url);
  out.emplace_back("model_name", cfg.endpoint.model_name);
  out.emplace_back("timeout_ms", std::to_string(cfg.endpoint.timeout.count()));
  out.emplace_back("max_attempts", std::to_string(cfg.endpoint.max_attempts));
  out.emplace_back("max_in_flight", std::to_string(cfg.endpoint.max_in_flight));
  out.emplace_back("api_key_env", cfg.endpoint.api_key_env);
  out.emplace_back("coverage_p", format_double(cfg.sim.coverage_p));
  out.emplace_back("recover_q", format_double(cfg.sim.recover_q));
  out.emplace_back("fidelity_a", format_double(cfg.sim.fidelity_a));
  out.emplace_back("shortcut_rate", format_double(cfg.sim.shortcut_rate));
  out.emplace_back("correct_rate", format_double(cfg.sim.correct_rate));
  out.emplace_back("noisy", cfg.sim.noisy ? "1" : "0");
  out.emplace_back("learning_rate", format_double(cfg.learning_rate));
  out.emplace_back("train_steps", std::to_string(cfg.train_steps));
  out.emplace_back("eval_rollouts", std::to_string(cfg.eval_rollouts));
  return out;
}

inline std::string config_hash(const PipelineConfig& cfg) {
  std::string joined;
  for (const auto& [k, v] : config_entries(cfg)) {
    joined += k;
    joined += '=';
    joined += v;
    joined += '\n';
  }
  return text::fnv1a_hex(joined);
}

// ============================================================================
// Graded records
// ============================================================================

struct GradedRecord {
  std::string sample_id;
  int rollout_index = 0;
  bool ok = false;
  std::string reason;  // failure reason name when !ok
  int n = 0;
  reward::GraderVerdict verdict;
  reward::RewardBreakdown breakdown;
  std::optional<double> advantage;
  std::vector<double> logprob_new;  // present when the source supplied them
  std::vector<double> logprob_old;
};

inline ordered_json verdict_json(const reward::GraderVerdict& v) {
  return ordered_json{{"k", v.k}, {"r", v.r}, {"a", v.a}, {"s", v.s}, {"c", v.c}};
}

inline ordered_json breakdown_json(const reward::RewardBreakdown& b) {
  return ordered_json{
      {"kmr", b.kmr}, {"rmr", b.rmr}, {"cr", b.cr}, {"total", b.total}};
}

inline std::string serialize_graded(const GradedRecord& rec) {
  ordered_json obj = ordered_json::object();
  obj["sample_id"] = rec.sample_id;
  obj["rollout_index"] = rec.rollout_index;
  obj["status"] = rec.ok ? "ok" : "failed";
  if (!rec.ok) {
    obj["reason"] = rec.reason;
  } else {
    obj["n"] = rec.n;
    obj["verdict"] = verdict_json(rec.verdict);
    obj["breakdown"] = breakdown_json(rec.breakdown);
    if (rec.advantage) {
      obj["advantage"] = *rec.advantage;
    } else {
      obj["advantage"] = nullptr;
    }
  }
  if (!rec.logprob_new.empty()) obj["logprob_new"] = rec.logprob_new;
  if (!rec.logprob_old.empty()) obj["logprob_old"] = rec.logprob_old;
  return obj.dump();
}

inline GradedRecord parse_graded(std::string_view line) {
  auto obj = ordered_json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw Error(errc::unparseable, "graded record is not a JSON object");
  }
  GradedRecord rec;
  try {
    rec.sample_id = obj.at("sample_id").get<std::string>();
    rec.rollout_index = obj.at("rollout_index").get<int>();
    rec.ok = obj.at("status").get<std::string>() == "ok";
    if (!rec.ok) {
      rec.reason = obj.value("reason", "");
    } else {
      rec.n = obj.at("n").get<int>();
      const auto& v = obj.at("verdict");
      rec.verdict.k = v.at("k").get<int>();
      rec.verdict.r = v.at("r").get<int>();
      rec.verdict.a = v.at("a").get<double>();
      rec.verdict.s = v.at("s").get<int>();
      rec.verdict.c = v.at("c").get<int>();
      const auto& b = obj.at("breakdown");
      rec.breakdown.kmr = b.at("kmr").get<double>();
      rec.breakdown.rmr = b.at("rmr").get<double>();
      rec.breakdown.cr = b.at("cr").get<double>();
      rec.breakdown.total = b.at("total").get<double>();
      if (obj.contains("advantage") && !obj["advantage"].is_null()) {
        rec.advantage = obj["advantage"].get<double>();
      }
    }
    if (obj.contains("logprob_new")) {
      rec.logprob_new = obj["logprob_new"].get<std::vector<double>>();
    }
    if (obj.contains("logprob_old")) {
      rec.logprob_old = obj["logprob_old"].get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(errc::unparseable,
                std::string("graded record missing fields: ") + e.what());
  }
  return rec;
}

// ============================================================================
// File helpers and manifests
// ============================================================================

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::file_unreadable, "cannot open " + path.string());
  }
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(errc::file_unreadable, "cannot write " + path.string());
  }
  out << content;
}

inline std::filesystem::path manifest_path(const std::filesystem::path& records) {
  auto p = records;
  p += ".manifest.json";
  return p;
}

inline void write_manifest(const std::filesystem::path& records_path,
                           const std::string& command,
                           const PipelineConfig& cfg,
                           const ordered_json& extra) {
  ordered_json m = ordered_json::object();
  m["tool"] = "metacog";
  m["command"] = command;
  m["created_unix"] = static_cast<long long>(std::time(nullptr));
  ordered_json conf = ordered_json::object();
  for (const auto& [k, v] : config_entries(cfg)) conf[k] = v;
  m["config"] = std::move(conf);
  m["config_hash"] = config_hash(cfg);
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_file(manifest_path(records_path), m.dump(2) + "\n");
}

/// Config recorded in the manifest next to a records file. Audit mode
/// recomputes against this, not the caller's config.
inline PipelineConfig load_manifest_config(
    const std::filesystem::path& records_path) {
  auto path = manifest_path(records_path);
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::file_unreadable,
                "audit needs the run manifest " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  auto m = ordered_json::parse(buf.str(), nullptr, false);
  if (m.is_discarded() || !m.is_object() || !m.contains("config") ||
      !m["config"].is_object()) {
    throw Error(errc::unparseable, "manifest has no config object");
  }
  PipelineConfig cfg;
  for (const auto& [k, v] : m["config"].items()) {
    apply_config_entry(cfg, k, v.get<std::string>());
  }
  return cfg;
}

}  // namespace detail

/// Recompute every ok record's breakdown from (verdict, n, config) and
/// require exact equality. Throws AuditMismatch naming the first offender.
inline void audit_records(const std::vector<GradedRecord>& records,
                          const PipelineConfig& cfg) {
  for (const auto& rec : records) {
    if (!rec.ok) continue;
    auto fresh = reward::compute_reward(rec.verdict, rec.n, cfg.reward);
    if (fresh.kmr != rec.breakdown.kmr || fresh.rmr != rec.breakdown.rmr ||
        fresh.cr != rec.breakdown.cr || fresh.total != rec.breakdown.total) {
      throw Error(errc::audit_mismatch,
                  "stored breakdown for " + rec.sample_id + "#" +
                      std::to_string(rec.rollout_index) +
                      " does not recompute from its verdict");
    }
  }
}

// ============================================================================
// ingest
// ============================================================================

struct IngestSummary {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Validate a sample file; write accepted.jsonl / rejected.jsonl.
inline IngestSummary run_ingest(const std::filesystem::path& input,
                                const std::filesystem::path& out_dir,
                                const PipelineConfig& cfg) {
  auto report = dataset::ingest_samples(input);

  std::string accepted;
  for (const auto& s : report.samples) {
    accepted += dataset::serialize_sample(s);
    accepted += '\n';
  }
  std::string rejected;
  for (const auto& r : report.rejections) {
    ordered_json obj = ordered_json::object();
    obj["sample_id"] = r.sample_id;
    obj["rejection_reason"] = dataset::reject_reason_name(r.reason);
    obj["detail"] = r.detail;
    obj["line"] = r.line;
    obj["record"] = r.raw;
    rejected += obj.dump();
    rejected += '\n';
  }
  detail::write_file(out_dir / "accepted.jsonl", accepted);
  detail::write_file(out_dir / "rejected.jsonl", rejected);
  detail::write_manifest(out_dir / "accepted.jsonl", "ingest", cfg,
                         ordered_json{{"input", input.string()},
                                      {"accepted", report.accepted()},
                                      {"rejected", report.rejected()}});
  return {report.accepted(), report.rejected()};
}

// ============================================================================
// simulate
// ============================================================================

struct SimulateSummary {
  std::size_t samples = 0;
  std::size_t rollouts = 0;
};

/**
 * Emit group_size simulated rollouts per accepted sample, with the
 * intended verdicts and synthetic token log-probs (old from a fixed
 * baseline, new with a bounded deterministic offset) so the advantage
 * command has something to feed the objective.
 */
inline SimulateSummary run_simulate(const std::filesystem::path& samples_path,
                                    const std::filesystem::path& out_dir,
                                    const PipelineConfig& cfg) {
  cfg.validate();
  auto report = dataset::ingest_samples(samples_path);

  std::string lines;
  std::size_t rollouts = 0;
  for (const auto& sample : report.samples) {
    sim::SimProfile prof = cfg.sim;
    prof.seed = rng::derive_seed(cfg.seed, text::fnv1a(sample.sample_id));
    auto group = sim::simulate_group(sample, prof, cfg.group_size, cfg.match);
    for (std::size_t i = 0; i < group.size(); ++i) {
      rng::SplitMix64 gen(rng::derive_seed(prof.seed ^ 0x10FBull,
                                           static_cast<std::uint64_t>(i)));
      constexpr int kTokens = 4;
      std::vector<double> lp_old(kTokens), lp_new(kTokens);
      for (int t = 0; t < kTokens; ++t) {
        lp_old[static_cast<std::size_t>(t)] = -(1.0 + 0.5 * gen.uniform());
        lp_new[static_cast<std::size_t>(t)] =
            lp_old[static_cast<std::size_t>(t)] + 0.4 * (gen.uniform() - 0.5);
      }
      ordered_json obj = ordered_json::object();
      obj["sample_id"] = sample.sample_id;
      obj["rollout_index"] = static_cast<int>(i);
      obj["text"] = group[i].text;
      obj["intended"] = verdict_json(group[i].intended);
      obj["logprob_new"] = lp_new;
      obj["logprob_old"] = lp_old;
      lines += obj.dump();
      lines += '\n';
      ++rollouts;
    }
  }
  detail::write_file(out_dir / "rollouts.jsonl", lines);
  detail::write_manifest(out_dir / "rollouts.jsonl", "simulate", cfg,
                         ordered_json{{"input", samples_path.string()},
                                      {"samples", report.accepted()},
                                      {"rollouts", rollouts}});
  return {report.accepted(), rollouts};
}

// ============================================================================
// grade
// ============================================================================

struct GradeSummary {
  std::size_t total = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
};

namespace detail {

struct RolloutTask {
  std::string sample_id;
  int rollout_index = 0;
  std::string text;
  std::vector<double> logprob_new;
  std::vector<double> logprob_old;
  const dataset::TrainingSample* sample = nullptr;  // null: unknown id
  std::string load_error;  // set when the record line itself was bad
};

inline GradedRecord grade_one(const RolloutTask& task,
                              const PipelineConfig& cfg,
                              grader::GraderClient* client) {
  GradedRecord rec;
  rec.sample_id = task.sample_id;
  rec.rollout_index = task.rollout_index;
  rec.logprob_new = task.logprob_new;
  rec.logprob_old = task.logprob_old;
  if (!task.load_error.empty()) {
    rec.reason = task.load_error;
    return rec;
  }
  if (task.sample == nullptr) {
    rec.reason = "UnknownSample";
    return rec;
  }

  auto parse = rollout::parse_rollout(task.text);
  if (!parse.ok()) {
    for (const auto& issue : parse.issues) {
      if (issue.severity == rollout::Severity::fatal) {
        rec.reason = rollout::issue_code_name(issue.code);
        break;
      }
    }
    if (rec.reason.empty()) rec.reason = "Unparseable";
    return rec;
  }

  try {
    std::string answer = rollout::extract_final_answer(*parse.rollout);
    grader::GraderRequest req;
    req.gold_units = task.sample->gold_texts();
    req.gold_count = task.sample->gold_count;
    req.ground_truth = task.sample->ground_truth;
    req.model_output = task.text;
    req.model_final_answer = answer;

    reward::GraderVerdict verdict;
    if (client != nullptr) {
      verdict =
          client->grade(grader::render_grader_prompt(req), req.gold_count)
              .verdict;
    } else {
      verdict = grader::grade_reference(req, *parse.rollout, cfg.match);
    }
    rec.n = req.gold_count;
    rec.verdict = verdict;
    rec.breakdown = reward::compute_reward(verdict, rec.n, cfg.reward);
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.reason = errc_name(e.code());
  }
  return rec;
}

}  // namespace detail

/**
 * Grade every rollout in the file against its sample. Output order equals
 * input order regardless of worker count. After writing all outputs,
 * throws GraderUnavailable when remote grading produced nothing but
 * transport failures (the unreachable-endpoint case).
 */
inline GradeSummary run_grade(const std::filesystem::path& samples_path,
                              const std::filesystem::path& rollouts_path,
                              const std::filesystem::path& out_dir,
                              const PipelineConfig& cfg) {
  cfg.validate();
  auto ingest = dataset::ingest_samples(samples_path);
  std::map<std::string, const dataset::TrainingSample*> by_id;
  for (const auto& s : ingest.samples) by_id[s.sample_id] = &s;

  std::vector<detail::RolloutTask> tasks;
  std::map<std::string, int> next_index;
  for (const auto& line : detail::read_lines(rollouts_path)) {
    if (text::trim_view(line).empty()) continue;
    detail::RolloutTask task;
    auto obj = ordered_json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object() || !obj.contains("sample_id") ||
        !obj["sample_id"].is_string() || !obj.contains("text") ||
        !obj["text"].is_string()) {
      task.load_error = "MalformedRecord";
      tasks.push_back(std::move(task));
      continue;
    }
    task.sample_id = obj["sample_id"].get<std::string>();
    task.text = obj["text"].get<std::string>();
    if (obj.contains("rollout_index") &&
        obj["rollout_index"].is_number_integer()) {
      task.rollout_index = obj["rollout_index"].get<int>();
    } else {
      task.rollout_index = next_index[task.sample_id];
    }
    next_index[task.sample_id] = task.rollout_index + 1;
    if (obj.contains("logprob_new") && obj["logprob_new"].is_array()) {
      task.logprob_new = obj["logprob_new"].get<std::vector<double>>();
    }
    if (obj.contains("logprob_old") && obj["logprob_old"].is_array()) {
      task.logprob_old = obj["logprob_old"].get<std::vector<double>>();
    }
    if (auto it = by_id.find(task.sample_id); it != by_id.end()) {
      task.sample = it->second;
    }
    tasks.push_back(std::move(task));
  }

  std::optional<grader::GraderClient> client;
  if (cfg.grader_mode == "remote") client.emplace(cfg.endpoint);
  grader::GraderClient* client_ptr = client ? &*client : nullptr;

  // Results land in slots indexed by task order: worker scheduling cannot
  // affect the output bytes.
  std::vector<GradedRecord> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      results[i] = detail::grade_one(tasks[i], cfg, client_ptr);
    }
  };
  if (cfg.workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  GradeSummary summary;
  summary.total = results.size();
  std::string lines;
  bool any_unavailable = false;
  for (const auto& rec : results) {
    summary.ok += rec.ok ? 1 : 0;
    summary.failed += rec.ok ? 0 : 1;
    if (!rec.ok && rec.reason == "GraderUnavailable") any_unavailable = true;
    lines += serialize_graded(rec);
    lines += '\n';
  }
  detail::write_file(out_dir / "graded.jsonl", lines);
  detail::write_manifest(out_dir / "graded.jsonl", "grade", cfg,
                         ordered_json{{"samples", samples_path.string()},
                                      {"rollouts", rollouts_path.string()},
                                      {"total", summary.total},
                                      {"ok", summary.ok},
                                      {"failed", summary.failed}});

  if (cfg.grader_mode == "remote" && summary.total > 0 && summary.ok == 0 &&
      any_unavailable) {
    throw Error(errc::grader_unavailable,
                "no rollout could be graded; judge endpoint unreachable "
                "(records written to " + (out_dir / "graded.jsonl").string() +
                ")");
  }
  return summary;
}

// ============================================================================
// advantage
// ============================================================================

struct SkippedGroup {
  std::string sample_id;
  std::size_t survivors = 0;
};

struct AdvantageSummary {
  std::size_t groups = 0;           // groups that received advantages
  std::vector<SkippedGroup> skipped;
  std::optional<double> objective;  // over groups with log-prob pairs
  std::size_t objective_groups = 0;
};

/**
 * Fill group-relative advantages per sample_id and evaluate the clipped
 * objective over groups whose records carry token log-prob pairs. Groups
 * with fewer than two surviving rollouts are skipped with a notice.
 */
inline AdvantageSummary run_advantage(const std::filesystem::path& graded_path,
                                      const std::filesystem::path& out_dir,
                                      const PipelineConfig& cfg, bool audit) {
  cfg.validate();
  std::vector<GradedRecord> records;
  for (const auto& line : detail::read_lines(graded_path)) {
    if (text::trim_view(line).empty()) continue;
    records.push_back(parse_graded(line));
  }
  if (audit) {
    audit_records(records, detail::load_manifest_config(graded_path));
  }

  // Group by sample_id in order of first appearance.
  std::vector<std::string> group_order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& bucket = groups[records[i].sample_id];
    if (bucket.empty()) group_order.push_back(records[i].sample_id);
    bucket.push_back(i);
  }

  AdvantageSummary summary;
  std::vector<optim::RolloutGroup> objective_groups;
  for (const auto& id : group_order) {
    std::vector<std::size_t> ok_rows;
    for (std::size_t i : groups[id]) {
      if (records[i].ok) ok_rows.push_back(i);
    }
    if (ok_rows.size() < 2) {
      summary.skipped.push_back({id, ok_rows.size()});
      continue;
    }
    std::vector<double> rewards;
    rewards.reserve(ok_rows.size());
    for (std::size_t i : ok_rows) rewards.push_back(records[i].breakdown.total);
    auto advantages = optim::group_advantages(rewards, cfg.reward.delta);
    for (std::size_t j = 0; j < ok_rows.size(); ++j) {
      records[ok_rows[j]].advantage = advantages[j];
    }
    ++summary.groups;

    bool has_logprobs = true;
    for (std::size_t i : ok_rows) {
      const auto& r = records[i];
      if (r.logprob_new.empty() ||
          r.logprob_new.size() != r.logprob_old.size()) {
        has_logprobs = false;
        break;
      }
    }
    if (has_logprobs) {
      optim::RolloutGroup g;
      g.advantages = advantages;
      for (std::size_t i : ok_rows) {
        optim::RolloutRecord rr;
        rr.reward = records[i].breakdown.total;
        rr.token_logprob_new = records[i].logprob_new;
        rr.token_logprob_old = records[i].logprob_old;
        rr.length = rr.token_logprob_new.size();
        g.records.push_back(std::move(rr));
      }
      objective_groups.push_back(std::move(g));
    }
  }
  if (!objective_groups.empty()) {
    summary.objective = optim::dapo_objective(objective_groups, cfg.clip);
    summary.objective_groups = objective_groups.size();
  }

  std::string lines;
  for (const auto& rec : records) {
    lines += serialize_graded(rec);
    lines += '\n';
  }
  detail::write_file(out_dir / "advantaged.jsonl", lines);

  ordered_json report = ordered_json::object();
  report["groups"] = summary.groups;
  ordered_json skipped = ordered_json::array();
  for (const auto& s : summary.skipped) {
    skipped.push_back(ordered_json{{"sample_id", s.sample_id},
                                   {"reason", "GroupTooSmall"},
                                   {"survivors", s.survivors}});
  }
  report["skipped"] = std::move(skipped);
  if (summary.objective) {
    report["objective"] = *summary.objective;
    report["objective_groups"] = summary.objective_groups;
  } else {
    report["objective"] = nullptr;
    report["notice"] = "no group carries token log-probs; objective skipped";
  }
  detail::write_file(out_dir / "objective.json", report.dump(2) + "\n");
  detail::write_manifest(out_dir / "advantaged.jsonl", "advantage", cfg,
                         ordered_json{{"graded", graded_path.string()},
                                      {"groups", summary.groups},
                                      {"skipped", summary.skipped.size()}});
  return summary;
}

// ============================================================================
// analyze
// ============================================================================

struct AnalyzeReport {
  std::size_t records = 0;
  double mean_kmr = 0.0;
  double mean_rmr = 0.0;
  double mean_cr = 0.0;
  std::optional<double> rho_kmr_rmr;
  std::optional<double> rho_kmr_cr;
  std::optional<double> rho_rmr_cr;
  std::vector<std::string> degenerate;  // components with zero variance
  ordered_json json;                    // full report document
};

/**
 * Correlation and distribution report over ok records: pairwise Spearman
 * (average-rank ties) among the three components, means, and 10-bin
 * histograms. Degenerate (zero-variance) pairs are reported as undefined.
 */
inline AnalyzeReport run_analyze(const std::filesystem::path& graded_path,
                                 const std::filesystem::path& out_dir,
                                 const PipelineConfig& cfg, bool audit) {
  std::vector<GradedRecord> records;
  for (const auto& line : detail::read_lines(graded_path)) {
    if (text::trim_view(line).empty()) continue;
    records.push_back(parse_graded(line));
  }
  if (audit) {
    audit_records(records, detail::load_manifest_config(graded_path));
  }

  std::vector<double> kmr, rmr, cr;
  for (const auto& rec : records) {
    if (!rec.ok) continue;
    kmr.push_back(rec.breakdown.kmr);
    rmr.push_back(rec.breakdown.rmr);
    cr.push_back(rec.breakdown.cr);
  }
  if (kmr.size() < 3) {
    throw Error(errc::insufficient_data,
                "analysis needs at least 3 ok records, got " +
                    std::to_string(kmr.size()));
  }

  AnalyzeReport rep;
  rep.records = kmr.size();
  rep.mean_kmr = stats::mean(kmr);
  rep.mean_rmr = stats::mean(rmr);
  rep.mean_cr = stats::mean(cr);
  rep.rho_kmr_rmr = stats::spearman(kmr, rmr);
  rep.rho_kmr_cr = stats::spearman(kmr, cr);
  rep.rho_rmr_cr = stats::spearman(rmr, cr);

  auto variance_zero = [](const std::vector<double>& xs) {
    for (const auto& x : xs) {
      if (x != xs.front()) return false;
    }
    return true;
  };
  if (variance_zero(kmr)) rep.degenerate.push_back("kmr");
  if (variance_zero(rmr)) rep.degenerate.push_back("rmr");
  if (variance_zero(cr)) rep.degenerate.push_back("cr");

  ordered_json doc = ordered_json::object();
  doc["method"] = "spearman rank correlation, average-rank tie handling";
  doc["records"] = rep.records;
  doc["means"] = ordered_json{
      {"kmr", rep.mean_kmr}, {"rmr", rep.mean_rmr}, {"cr", rep.mean_cr}};
  auto rho_or_null = [](const std::optional<double>& rho) {
    return rho ? ordered_json(*rho) : ordered_json(nullptr);
  };
  doc["spearman"] = ordered_json{{"kmr_rmr", rho_or_null(rep.rho_kmr_rmr)},
                                 {"kmr_cr", rho_or_null(rep.rho_kmr_cr)},
                                 {"rmr_cr", rho_or_null(rep.rho_rmr_cr)}};
  doc["degenerate_components"] = rep.degenerate;
  auto hist_json = [](const std::vector<double>& xs) {
    auto h = stats::histogram(xs);
    return ordered_json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
  };
  doc["histograms"] = ordered_json{
      {"kmr", hist_json(kmr)}, {"rmr", hist_json(rmr)}, {"cr", hist_json(cr)}};
  rep.json = doc;

  detail::write_file(out_dir / "analysis.json", doc.dump(2) + "\n");
  detail::write_manifest(out_dir / "analysis.json", "analyze", cfg,
                         ordered_json{{"graded", graded_path.string()},
                                      {"records", rep.records}});
  return rep;
}

// ============================================================================
// train-toy
// ============================================================================

struct TrainSummary {
  double initial_mean_reward = 0.0;
  double final_mean_reward = 0.0;
  double baseline_best_mean = 0.0;
};

/**
 * Run the toy training loop plus the budget-matched random-search
 * baseline; write the per-step curve and the report.
 */
inline TrainSummary run_train_toy(const std::filesystem::path& out_dir,
                                  const PipelineConfig& cfg) {
  cfg.validate();
  toy::TrainConfig tc;
  tc.steps = cfg.train_steps;
  tc.group_size = cfg.group_size;
  tc.learning_rate = cfg.learning_rate;
  tc.eval_rollouts = cfg.eval_rollouts;
  tc.seed = cfg.seed;
  tc.reward = cfg.reward;
  tc.clip = cfg.clip;

  auto report = toy::train_toy(tc);
  auto baseline = toy::random_search_baseline(
      std::max(1, cfg.train_steps), cfg.group_size, cfg.seed, cfg.reward);

  auto metrics_json = [](const toy::StepMetrics& m) {
    return ordered_json{{"step", m.step},
                        {"mean_reward", m.mean_reward},
                        {"mean_kmr", m.mean_kmr},
                        {"mean_rmr", m.mean_rmr},
                        {"mean_cr", m.mean_cr},
                        {"objective", m.objective}};
  };
  std::string curve;
  {
    auto first = metrics_json(report.initial);
    first["phase"] = "initial-eval";
    curve += first.dump();
    curve += '\n';
  }
  for (const auto& m : report.steps) {
    curve += metrics_json(m).dump();
    curve += '\n';
  }
  if (cfg.train_steps > 0) {
    auto last = metrics_json(report.final);
    last["phase"] = "final-eval";
    curve += last.dump();
    curve += '\n';
  }
  detail::write_file(out_dir / "train_curve.jsonl", curve);

  ordered_json doc = ordered_json::object();
  doc["initial"] = metrics_json(report.initial);
  doc["final"] = metrics_json(report.final);
  doc["steps"] = cfg.train_steps;
  doc["baseline"] = ordered_json{
      {"best_mean_reward", baseline.best_mean_reward},
      {"policies", baseline.policies_tried},
      {"rollouts_per_policy", baseline.rollouts_per_policy}};
  ordered_json logits = ordered_json::array();
  for (const auto& row : report.policy.logits) logits.push_back(row);
  doc["final_logits"] = std::move(logits);
  detail::write_file(out_dir / "train_report.json", doc.dump(2) + "\n");
  detail::write_manifest(out_dir / "train_curve.jsonl", "train-toy", cfg,
                         ordered_json{{"steps", cfg.train_steps}});

  return {report.initial.mean_reward, report.final.mean_reward,
          baseline.best_mean_reward};
}

}  // namespace metacog::pipeline
