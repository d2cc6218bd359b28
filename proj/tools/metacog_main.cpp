// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog: command-line front end for the reward pipeline.
 *
 *   metacog ingest    <samples.jsonl> --out DIR
 *   metacog simulate  <samples.jsonl> --out DIR
 *   metacog grade     <samples.jsonl> <rollouts.jsonl> --out DIR
 *   metacog advantage <graded.jsonl>  --out DIR [--audit]
 *   metacog analyze   <graded.jsonl>  --out DIR [--audit]
 *   metacog train-toy --out DIR [--steps N]
 *
 * Settings resolve in three layers: built-in defaults, then --config
 * (flat key=value file), then explicit flags.
 *
 * Exit codes: 0 success, 2 input error, 3 external-service error,
 * 4 audit violation.
 */

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metacog/errors.hpp"
#include "metacog/pipeline.hpp"

namespace {

int exit_code_for(metacog::errc code) {
  switch (code) {
    case metacog::errc::grader_unavailable:
    case metacog::errc::grader_incoherent:
      return 3;
    case metacog::errc::audit_mismatch:
      return 4;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using metacog::pipeline::PipelineConfig;

  CLI::App app{"metacognition reward pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string grader_mode;
  int group_size = 0;
  double lambda = -1.0, delta = -1.0, eps_low = -1.0, eps_high = -1.0;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 0;

  app.add_option("--config", config_path, "flat key=value config file");
  auto* opt_grader =
      app.add_option("--grader", grader_mode, "grader backend")
          ->check(CLI::IsMember({"remote", "reference"}));
  auto* opt_group = app.add_option("--group-size", group_size,
                                   "rollouts per sample group");
  auto* opt_lambda =
      app.add_option("--lambda", lambda, "shortcut penalty strength");
  auto* opt_delta =
      app.add_option("--delta", delta, "advantage denominator stabilizer");
  auto* opt_eps_low = app.add_option("--eps-low", eps_low, "lower clip width");
  auto* opt_eps_high =
      app.add_option("--eps-high", eps_high, "upper clip width");
  auto* opt_seed = app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  auto* opt_workers =
      app.add_option("--workers", workers, "grading worker threads");

  std::string samples_path, rollouts_path, graded_path;
  bool audit = false;
  int steps_override = -1;

  auto* cmd_ingest = app.add_subcommand("ingest", "validate a sample file");
  cmd_ingest->fallthrough();
  cmd_ingest->add_option("samples", samples_path, "samples JSONL")->required();

  auto* cmd_simulate =
      app.add_subcommand("simulate", "synthesize rollouts for samples");
  cmd_simulate->fallthrough();
  cmd_simulate->add_option("samples", samples_path, "samples JSONL")
      ->required();

  auto* cmd_grade = app.add_subcommand("grade", "score rollouts into rewards");
  cmd_grade->fallthrough();
  cmd_grade->add_option("samples", samples_path, "samples JSONL")->required();
  cmd_grade->add_option("rollouts", rollouts_path, "rollouts JSONL")
      ->required();

  auto* cmd_advantage =
      app.add_subcommand("advantage", "fill group-relative advantages");
  cmd_advantage->fallthrough();
  cmd_advantage->add_option("graded", graded_path, "graded JSONL")->required();
  cmd_advantage->add_flag("--audit", audit,
                          "recompute stored breakdowns before use");

  auto* cmd_analyze =
      app.add_subcommand("analyze", "reward correlation and distribution report");
  cmd_analyze->fallthrough();
  cmd_analyze->add_option("graded", graded_path, "graded JSONL")->required();
  cmd_analyze->add_flag("--audit", audit,
                        "recompute stored breakdowns before use");

  auto* cmd_train =
      app.add_subcommand("train-toy", "policy-gradient loop on the toy task");
  cmd_train->fallthrough();
  cmd_train->add_option("--steps", steps_override, "training steps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    PipelineConfig cfg;
    if (!config_path.empty()) {
      cfg = metacog::pipeline::load_config(config_path);
    }
    if (opt_grader->count() > 0) cfg.grader_mode = grader_mode;
    if (opt_group->count() > 0) cfg.group_size = group_size;
    if (opt_lambda->count() > 0) cfg.reward.lambda = lambda;
    if (opt_delta->count() > 0) cfg.reward.delta = delta;
    if (opt_eps_low->count() > 0) cfg.clip.eps_low = eps_low;
    if (opt_eps_high->count() > 0) cfg.clip.eps_high = eps_high;
    if (opt_seed->count() > 0) cfg.seed = seed;
    if (opt_workers->count() > 0) cfg.workers = workers;
    if (steps_override >= 0) cfg.train_steps = steps_override;
    cfg.validate();

    if (cmd_ingest->parsed()) {
      auto s = metacog::pipeline::run_ingest(samples_path, out_dir, cfg);
      std::cout << "accepted=" << s.accepted << " rejected=" << s.rejected
                << "\n";
    } else if (cmd_simulate->parsed()) {
      auto s = metacog::pipeline::run_simulate(samples_path, out_dir, cfg);
      std::cout << "samples=" << s.samples << " rollouts=" << s.rollouts
                << "\n";
    } else if (cmd_grade->parsed()) {
      auto s = metacog::pipeline::run_grade(samples_path, rollouts_path,
                                            out_dir, cfg);
      std::cout << "graded=" << s.total << " ok=" << s.ok
                << " failed=" << s.failed << "\n";
    } else if (cmd_advantage->parsed()) {
      auto s =
          metacog::pipeline::run_advantage(graded_path, out_dir, cfg, audit);
      for (const auto& skip : s.skipped) {
        std::cerr << "notice: group " << skip.sample_id
                  << " skipped (GroupTooSmall, survivors=" << skip.survivors
                  << ")\n";
      }
      std::cout << "groups=" << s.groups << " skipped=" << s.skipped.size();
      if (s.objective) {
        std::cout << " objective=" << *s.objective << " objective_groups="
                  << s.objective_groups << "\n";
      } else {
        std::cout << " objective=skipped (no token log-probs)\n";
      }
    } else if (cmd_analyze->parsed()) {
      auto rep =
          metacog::pipeline::run_analyze(graded_path, out_dir, cfg, audit);
      std::cout << rep.json.dump(2) << "\n";
    } else if (cmd_train->parsed()) {
      auto s = metacog::pipeline::run_train_toy(out_dir, cfg);
      std::cout << "initial=" << s.initial_mean_reward
                << " final=" << s.final_mean_reward
                << " baseline=" << s.baseline_best_mean << "\n";
    }
    return 0;
  } catch (const metacog::Error& e) {
    std::cerr << "error: " << metacog::errc_name(e.code()) << ": " << e.what()
              << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
