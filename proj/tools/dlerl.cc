// Copyright 2026 The dlerl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dlerl command-line tool. Output is JSON lines on stdout; diagnostics go
// to stderr (more with DLERL_VERBOSITY=1 or 2).

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dlerl/harness.h"

namespace {

std::optional<dlerl::Modality> modality_flag(const std::string& name) {
  if (name.empty()) return std::nullopt;
  const auto m = dlerl::modality_from_name(name);
  if (!m) {
    throw dlerl::Error(dlerl::ErrorCode::kInvalidArgument,
                       "unknown modality " + name);
  }
  return m;
}

void add_gspo_flags(CLI::App* app, dlerl::GspoConfig& g) {
  app->add_option("--group-size", g.group_size, "Responses per prompt")
      ->capture_default_str();
  app->add_option("--clip-epsilon", g.clip_epsilon)->capture_default_str();
  app->add_option("--kl-coeff", g.kl_coeff)->capture_default_str();
  app->add_option("--lr", g.learning_rate)->capture_default_str();
  app->add_option("--std-floor", g.std_floor)->capture_default_str();
  app->add_option("--steps", g.steps)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlerl: verifiable rewards, GSPO toy training, evaluation"};
  app.require_subcommand(1);
  std::string modality;

  dlerl::ParseCommand parse;
  auto* p = app.add_subcommand("parse", "Parse one response per line");
  p->add_option("input", parse.input)->required();
  p->add_option("--modality", modality, "image|audio|video|avth");
  p->add_option("--duration", parse.duration, "Media length in seconds");

  dlerl::ScoreCommand score;
  auto* s = app.add_subcommand("score", "Composite reward per response");
  s->add_option("--responses", score.responses)->required();
  s->add_option("--manifest", score.manifest)->required();
  s->add_option("--weights", score.weights, "Reward config JSON");

  dlerl::EvaluateCommand eval;
  auto* e = app.add_subcommand("evaluate", "Detection/localization report");
  e->add_option("--responses", eval.responses)->required();
  e->add_option("--manifest", eval.manifest)->required();
  e->add_option("--tau", eval.tau, "IoU threshold")->capture_default_str();
  e->add_flag("--json", eval.json, "Emit JSON records");

  dlerl::CurriculumPlanCommand plan;
  auto* c = app.add_subcommand("curriculum-plan", "Write stage bundles");
  c->add_option("--manifest", plan.manifests)->required();
  c->add_option("--ratio", plan.replay_ratio)->capture_default_str();
  c->add_option("--seed", plan.seed)->capture_default_str();
  c->add_option("--out-dir", plan.out_dir)->required();

  dlerl::TrainToyCommand train;
  auto* t = app.add_subcommand("train-toy", "GSPO on the slot-filling toy");
  add_gspo_flags(t, train.gspo);
  t->add_option("--seed", train.gspo.seed)->capture_default_str();
  t->add_option("--noise", train.noise_level)->capture_default_str();
  t->add_option("--bins", train.bins)->capture_default_str();
  t->add_option("--eval-episodes", train.eval_episodes)->capture_default_str();
  t->add_option("--history", train.history)->required();
  t->add_option("--checkpoint", train.checkpoint);

  dlerl::SweepReplayCommand sweep;
  size_t num_seeds = sweep.sweep.seeds.size();
  uint64_t first_seed = 0;
  auto* w = app.add_subcommand("sweep-replay", "Two-stage replay-ratio sweep");
  w->add_option("--ratios", sweep.sweep.ratios)->delimiter(',')
      ->capture_default_str();
  w->add_option("--seeds", num_seeds, "Number of seeds")->capture_default_str();
  w->add_option("--seed", first_seed, "First seed")->capture_default_str();
  w->add_option("--first-pool", sweep.sweep.first_stage_pool)
      ->capture_default_str();
  w->add_option("--second-pool", sweep.sweep.second_stage_pool)
      ->capture_default_str();
  w->add_option("--first-steps", sweep.sweep.first_stage_steps)
      ->capture_default_str();
  w->add_option("--second-steps", sweep.sweep.second_stage_steps)
      ->capture_default_str();
  w->add_option("--eval-episodes", sweep.sweep.eval_episodes)
      ->capture_default_str();
  w->add_option("--noise", sweep.sweep.noise_level)->capture_default_str();
  w->add_option("--output", sweep.output, "Also write rows to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? dlerl::kExitOk : dlerl::kExitInputError;
  }

  try {
    if (*p) {
      parse.modality = modality_flag(modality);
      return dlerl::cmd_parse(parse, std::cout);
    }
    if (*s) return dlerl::cmd_score(score, std::cout);
    if (*e) return dlerl::cmd_evaluate(eval, std::cout);
    if (*c) return dlerl::cmd_curriculum_plan(plan, std::cout);
    if (*t) return dlerl::cmd_train_toy(train, std::cout);
    if (*w) {
      sweep.sweep.seeds.clear();
      for (size_t i = 0; i < num_seeds; ++i) {
        sweep.sweep.seeds.push_back(first_seed + i);
      }
      return dlerl::cmd_sweep_replay(sweep, std::cout);
    }
  } catch (const dlerl::Error& err) {
    std::cerr << "dlerl: " << err.what() << '\n';
    return dlerl::exit_code_for(err);
  } catch (const std::exception& err) {
    std::cerr << "dlerl: internal error: " << err.what() << '\n';
    return dlerl::kExitInternalError;
  }
  return dlerl::kExitInternalError;
}
