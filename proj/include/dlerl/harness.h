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

// Commands behind the dlerl CLI. Each writes line-delimited JSON whose
// first record is a header echoing the fully resolved configuration, and
// throws dlerl::Error on bad input.

#ifndef DLERL_HARNESS_H_
#define DLERL_HARNESS_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dlerl/curriculum.h"
#include "dlerl/gspo.h"
#include "dlerl/metrics.h"

namespace dlerl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidLines = 1;  // parse: some line failed
inline constexpr int kExitInputError = 2;
inline constexpr int kExitInternalError = 3;

// kExitInputError for malformed or inconsistent inputs, kExitInternalError
// for failures of the computation itself (divergence, non-finite values).
int exit_code_for(const Error& error);

// 0 = quiet (default), 1 = progress, 2 = per-step detail; read from
// DLERL_VERBOSITY.
int verbosity();

// Plain-structure JSON for parsed responses, as used by `parse`.
std::string parsed_response_to_json_text(const ParsedResponse& response);

struct ParseCommand {
  std::string input;
  std::optional<Modality> modality;
  std::optional<double> duration;
};
// Returns kExitOk iff every line parses.
int cmd_parse(const ParseCommand& cmd, std::ostream& out);

struct ScoreCommand {
  std::string responses;
  std::string manifest;
  std::string weights;  // optional reward config JSON path
};
// Records are sorted by sample id and followed by a summary record.
int cmd_score(const ScoreCommand& cmd, std::ostream& out);

struct EvaluateCommand {
  std::string responses;
  std::string manifest;
  double tau = kDefaultIouThreshold;
  bool json = false;
};
int cmd_evaluate(const EvaluateCommand& cmd, std::ostream& out);

struct CurriculumPlanCommand {
  // Either one manifest per modality or combined manifests; records are
  // grouped by their modality field.
  std::vector<std::string> manifests;
  double replay_ratio = kDefaultReplayRatio;
  uint64_t seed = 0;
  std::string out_dir;
};
// Writes stage_<k>.jsonl for k = 1..4 and plan.json; prints counts.
int cmd_curriculum_plan(const CurriculumPlanCommand& cmd, std::ostream& out);

struct TrainToyCommand {
  GspoConfig gspo;
  double noise_level = 0.0;
  size_t bins = 20;
  size_t eval_episodes = 1000;
  std::string history;     // JSONL path; required
  std::string checkpoint;  // JSON path; optional
};
// The toy data seed is gspo.seed. Prints a summary record to `out`.
int cmd_train_toy(const TrainToyCommand& cmd, std::ostream& out);

struct SweepReplayCommand {
  ReplaySweepConfig sweep;
  std::string output;  // optional JSONL path; rows also go to `out`
};
int cmd_sweep_replay(const SweepReplayCommand& cmd, std::ostream& out);

}  // namespace dlerl

#endif  // DLERL_HARNESS_H_
