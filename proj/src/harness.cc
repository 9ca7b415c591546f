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

#include "dlerl/harness.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "dlerl/error.h"
#include "json.hpp"

namespace dlerl {
namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

ordered_json header(const char* command, ordered_json config) {
  ordered_json h;
  h["type"] = "header";
  h["tool"] = "dlerl";
  h["version"] = kVersion;
  h["command"] = command;
  h["config"] = std::move(config);
  return h;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  return out;
}

void log(int level, const std::string& msg) {
  if (verbosity() >= level) std::cerr << "[dlerl] " << msg << '\n';
}

ordered_json gspo_json(const GspoConfig& g) {
  ordered_json j;
  j["group_size"] = g.group_size;
  j["clip_epsilon"] = g.clip_epsilon;
  j["kl_coeff"] = g.kl_coeff;
  j["learning_rate"] = g.learning_rate;
  j["std_floor"] = g.std_floor;
  j["steps"] = g.steps;
  j["seed"] = g.seed;
  return j;
}

ordered_json breakdown_json(const std::string& id, const RewardBreakdown& b) {
  ordered_json j;
  j["sample_id"] = id;
  j["r_fmt"] = b.r_fmt;
  j["r_acc"] = b.r_acc;
  j["r_bbox"] = b.r_bbox;
  j["r_int"] = b.r_int;
  j["total"] = b.total;
  return j;
}

}  // namespace

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::kDivergence:
    case ErrorCode::kNonFinite:
      return kExitInternalError;
    default:
      return kExitInputError;
  }
}

int verbosity() {
  const char* v = std::getenv("DLERL_VERBOSITY");
  return v ? std::atoi(v) : 0;
}

std::string parsed_response_to_json_text(const ParsedResponse& r) {
  ordered_json j;
  j["think"] = r.think_text;
  j["label"] = label_name(r.label);
  ordered_json boxes = ordered_json::array();
  for (const Box& b : r.boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
  j["boxes"] = boxes;
  ordered_json ivs = ordered_json::array();
  for (const Interval& iv : r.intervals) ivs.push_back({iv.start, iv.end});
  j["intervals"] = ivs;
  return j.dump();
}

int cmd_parse(const ParseCommand& cmd, std::ostream& out) {
  auto in = open_in(cmd.input);
  ordered_json config;
  config["input"] = cmd.input;
  config["modality"] =
      cmd.modality ? ordered_json(modality_name(*cmd.modality)) : nullptr;
  config["duration"] = cmd.duration ? ordered_json(*cmd.duration) : nullptr;
  out << header("parse", config).dump() << '\n';

  const ParseContext context{cmd.modality, cmd.duration};
  std::string line;
  size_t n = 0, bad = 0;
  while (std::getline(in, line)) {
    ++n;
    const ParseOutcome outcome = try_parse_response(line, context);
    ordered_json rec;
    rec["line"] = n;
    rec["ok"] = outcome.response.has_value();
    if (outcome.response) {
      rec["response"] =
          ordered_json::parse(parsed_response_to_json_text(*outcome.response));
    } else {
      ++bad;
      ordered_json v = ordered_json::array();
      for (Violation x : outcome.report.violations) {
        v.push_back(violation_name(x));
      }
      rec["violations"] = v;
    }
    out << rec.dump() << '\n';
  }
  log(1, std::to_string(n) + " lines, " + std::to_string(bad) + " invalid");
  return bad == 0 ? kExitOk : kExitInvalidLines;
}

int cmd_score(const ScoreCommand& cmd, std::ostream& out) {
  const RewardConfig reward =
      cmd.weights.empty() ? RewardConfig{} : load_reward_config(cmd.weights);
  const auto responses = load_response_records(cmd.responses);
  const auto manifest = load_sample_records(cmd.manifest);
  std::map<std::string, const GroundTruth*> truths;
  for (const SampleRecord& s : manifest) truths.emplace(s.id(), &s.truth);

  std::vector<const ResponseRecord*> rows;
  for (const ResponseRecord& r : responses) {
    if (!truths.count(r.sample_id)) {
      throw Error(ErrorCode::kUnknownSampleId, r.sample_id);
    }
    rows.push_back(&r);
  }
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return a->sample_id < b->sample_id;
  });

  ordered_json config;
  config["responses"] = cmd.responses;
  config["manifest"] = cmd.manifest;
  config["reward"] = ordered_json::parse(reward_config_to_json_text(reward));
  out << header("score", config).dump() << '\n';
  double sum = 0.0;
  for (const ResponseRecord* r : rows) {
    const RewardBreakdown b =
        composite_reward(r->response_text, *truths.at(r->sample_id), reward);
    sum += b.total;
    out << breakdown_json(r->sample_id, b).dump() << '\n';
  }
  ordered_json summary;
  summary["type"] = "summary";
  summary["count"] = rows.size();
  summary["mean_total"] =
      rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateCommand& cmd, std::ostream& out) {
  const EvalReport report =
      evaluate_files(cmd.responses, cmd.manifest, cmd.tau);
  ordered_json config;
  config["responses"] = cmd.responses;
  config["manifest"] = cmd.manifest;
  config["tau"] = cmd.tau;
  if (cmd.json) {
    out << header("evaluate", config).dump() << '\n';
    out << eval_report_to_json_text(report) << '\n';
  } else {
    out << "# " << header("evaluate", config).dump() << '\n';
    out << eval_report_to_text(report);
  }
  return kExitOk;
}

int cmd_curriculum_plan(const CurriculumPlanCommand& cmd, std::ostream& out) {
  if (cmd.out_dir.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "output directory required");
  }
  std::vector<SampleRecord> records;
  for (const std::string& path : cmd.manifests) {
    auto part = load_sample_records(path);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto manifests = group_by_modality(records);
  const CurriculumPlan plan =
      build_stage_plans(manifests, cmd.replay_ratio, cmd.seed);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cmd.out_dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + cmd.out_dir);

  ordered_json config;
  config["manifests"] = cmd.manifests;
  config["replay_ratio"] = cmd.replay_ratio;
  config["seed"] = cmd.seed;
  config["out_dir"] = cmd.out_dir;
  const ordered_json head = header("curriculum-plan", config);
  out << head.dump() << '\n';

  ordered_json stages = ordered_json::array();
  for (const StagePlan& stage : plan.stages) {
    const StageBundle bundle =
        emit_stage_manifest(plan, manifests, stage.stage_index);
    const std::string name =
        "stage_" + std::to_string(stage.stage_index) + ".jsonl";
    auto file = open_out((fs::path(cmd.out_dir) / name).string());
    write_sample_records(file, bundle.records);

    ordered_json s;
    s["stage"] = stage.stage_index;
    s["new_modality"] = modality_name(stage.new_modality);
    s["file"] = name;
    ordered_json counts, ids;
    for (Modality m : kStageOrder) {
      const auto it = stage.counts.find(m);
      if (it == stage.counts.end()) continue;
      counts[std::string(modality_name(m))] = it->second;
      ids[std::string(modality_name(m))] = stage.included.at(m);
    }
    s["counts"] = counts;
    s["total"] = stage.total();
    ordered_json line = s;
    line["type"] = "stage";
    out << line.dump() << '\n';
    s["ids"] = ids;
    stages.push_back(std::move(s));
  }
  ordered_json plan_json;
  plan_json["header"] = head;
  plan_json["stages"] = stages;
  auto file = open_out((fs::path(cmd.out_dir) / "plan.json").string());
  file << plan_json.dump(2) << '\n';
  return kExitOk;
}

int cmd_train_toy(const TrainToyCommand& cmd, std::ostream& out) {
  cmd.gspo.validate();
  if (cmd.history.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "history path required");
  }
  ToyTaskConfig task;
  task.response.bins = cmd.bins;
  const TrainingEnvironment env =
      toy_environment(task, cmd.noise_level, cmd.gspo.seed);
  SlotPolicy policy = make_policy(task.response, observation_dim(task));
  const SlotPolicy reference = policy;

  ordered_json config = gspo_json(cmd.gspo);
  config["noise_level"] = cmd.noise_level;
  config["bins"] = cmd.bins;
  config["duration"] = task.response.duration;
  config["evidence_scale"] = task.evidence_scale;
  config["eval_episodes"] = cmd.eval_episodes;
  config["reward"] = ordered_json::parse(reward_config_to_json_text(env.reward));
  const ordered_json head = header("train-toy", config);

  auto history = open_out(cmd.history);
  history << head.dump() << '\n';
  // Training runs in chunks only to report progress; each step's randomness
  // depends on (seed, step) alone, so chunking does not change the result.
  const size_t chunk = std::max<size_t>(1, cmd.gspo.steps / 10);
  TrainingHistory all;
  for (size_t done = 0; done < cmd.gspo.steps;) {
    GspoConfig part = cmd.gspo;
    part.steps = std::min(chunk, cmd.gspo.steps - done);
    TrainingHistory h = train(part, env, policy, &reference, done);
    for (const StepRecord& r : h.steps) write_history_record(history, r);
    all.steps.insert(all.steps.end(), h.steps.begin(), h.steps.end());
    done += part.steps;
    log(1, "step " + std::to_string(done) + "/" +
               std::to_string(cmd.gspo.steps) + " mean reward (chunk) " +
               std::to_string(h.mean_reward(0, h.steps.size())));
  }
  if (!cmd.checkpoint.empty()) {
    auto ckpt = open_out(cmd.checkpoint);
    ckpt << policy_to_json_text(policy) << '\n';
  }

  // Held-out episodes: indices the training sampler draws with negligible
  // probability.
  std::vector<Episode> eval;
  double ceiling = 0.0;
  for (size_t i = 0; i < cmd.eval_episodes; ++i) {
    eval.push_back(sample_episode(task, cmd.gspo.seed, i, cmd.noise_level));
    ceiling += score_parsed(oracle_response(eval.back().truth),
                            eval.back().truth, env.reward)
                   .total;
  }
  ordered_json summary;
  summary["type"] = "summary";
  summary["steps"] = all.steps.size();
  const size_t n = all.steps.size();
  const size_t tail = std::min<size_t>(100, n);
  summary["final_mean_reward"] =
      n == 0 ? ordered_json(nullptr) : ordered_json(all.mean_reward(n - tail, n));
  summary["greedy_eval_reward"] =
      eval.empty() ? ordered_json(nullptr)
                   : ordered_json(greedy_reward(policy, task.response, eval,
                                                env.reward));
  summary["oracle_eval_reward"] =
      eval.empty() ? ordered_json(nullptr)
                   : ordered_json(ceiling / static_cast<double>(eval.size()));
  summary["learnability_bar"] = 0.9 * env.reward.max_total();
  out << head.dump() << '\n' << summary.dump() << '\n';
  return kExitOk;
}

int cmd_sweep_replay(const SweepReplayCommand& cmd, std::ostream& out) {
  const ReplaySweepConfig& c = cmd.sweep;
  ordered_json config;
  config["ratios"] = c.ratios;
  config["seeds"] = c.seeds;
  config["first_stage_pool"] = c.first_stage_pool;
  config["second_stage_pool"] = c.second_stage_pool;
  config["first_stage_steps"] = c.first_stage_steps;
  config["second_stage_steps"] = c.second_stage_steps;
  config["eval_episodes"] = c.eval_episodes;
  config["noise_level"] = c.noise_level;
  config["shared_evidence"] = c.task.shared_evidence;
  config["gspo"] = gspo_json(c.gspo);
  const ordered_json head = header("sweep-replay", config);

  log(1, "running " + std::to_string(c.ratios.size() * c.seeds.size()) +
             " second-stage runs");
  const ReplaySweepReport report = validate_replay_ratio_sweep(c);
  std::vector<std::string> lines = {head.dump()};
  for (const ReplaySweepRow& row : report.rows) {
    ordered_json j;
    j["type"] = "row";
    j["ratio"] = row.ratio;
    j["replayed"] = row.replayed;
    j["first_modality"] = modality_name(kStageOrder[0]);
    j["second_modality"] = modality_name(kStageOrder[1]);
    j["first_modality_reward"] = row.first_modality_reward;
    j["second_modality_reward"] = row.second_modality_reward;
    j["mean_reward"] = row.mean_reward;
    j["first_by_seed"] = row.first_by_seed;
    j["second_by_seed"] = row.second_by_seed;
    lines.push_back(j.dump());
  }
  std::ofstream file;
  if (!cmd.output.empty()) file = open_out(cmd.output);
  for (const std::string& l : lines) {
    out << l << '\n';
    if (file.is_open()) file << l << '\n';
  }
  return kExitOk;
}

}  // namespace dlerl
