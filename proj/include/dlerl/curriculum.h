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

// Staged modality schedule: audio, image, video, talking head. Stage k
// trains on the full set of its modality plus floor(ratio * N_m) replayed
// samples of every earlier modality m, redrawn independently per stage.

#ifndef DLERL_CURRICULUM_H_
#define DLERL_CURRICULUM_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dlerl/gspo.h"
#include "dlerl/manifest.h"

namespace dlerl {

inline constexpr std::array<Modality, 4> kStageOrder = {
    Modality::kAudio, Modality::kImage, Modality::kVideo,
    Modality::kAvTalkingHead};

inline constexpr double kDefaultReplayRatio = 0.15;

// floor(ratio * n), tolerant of ratios such as 0.15 that are not exact in
// binary.
size_t replay_count(double ratio, size_t n);

struct StagePlan {
  size_t stage_index = 1;  // 1-based
  Modality new_modality = Modality::kAudio;
  // Sample ids per modality: the new modality in manifest order, replayed
  // modalities in draw order.
  std::map<Modality, std::vector<std::string>> included;
  std::map<Modality, size_t> counts;

  size_t total() const;
};

struct CurriculumPlan {
  double replay_ratio = kDefaultReplayRatio;
  uint64_t seed = 0;
  std::vector<StagePlan> stages;
};

// One manifest per modality, in any order. Throws Error{kMissingModality}
// when one is absent, Error{kInvalidArgument} for a ratio outside [0, 1] or
// a repeated modality, Error{kDuplicateSampleId} for repeated ids.
CurriculumPlan build_stage_plans(std::span<const DatasetManifest> manifests,
                                 double replay_ratio, uint64_t seed);

struct StageBundle {
  size_t stage_index = 1;
  // One manifest per included modality, in stage order, each shuffled.
  std::vector<DatasetManifest> manifests;
  // All records of the stage in one deterministic shuffle.
  std::vector<SampleRecord> records;
};

// Throws Error{kStageOutOfRange} unless 1 <= stage_index <= stages.
StageBundle emit_stage_manifest(const CurriculumPlan& plan,
                                std::span<const DatasetManifest> manifests,
                                size_t stage_index);

// Two-stage toy curriculum: audio episodes first, then image episodes with
// a replayed share of the audio pool. The default task shares its evidence
// features across modalities; with separate features the linear policy
// never forgets and replay has nothing to do.
struct ReplaySweepConfig {
  std::vector<double> ratios = {0.0, 0.05, 0.10, 0.15, 0.30};
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
  size_t first_stage_pool = 400;
  size_t second_stage_pool = 200;
  size_t first_stage_steps = 10000;
  size_t second_stage_steps = 8000;
  size_t eval_episodes = 500;  // fresh episodes per modality
  double noise_level = 0.3;
  GspoConfig gspo;
  ToyTaskConfig task = [] {
    ToyTaskConfig t;
    t.shared_evidence = true;
    return t;
  }();
};

struct ReplaySweepRow {
  double ratio = 0.0;
  size_t replayed = 0;  // first-stage episodes mixed into stage two
  // Greedy reward averaged over seeds.
  double first_modality_reward = 0.0;
  double second_modality_reward = 0.0;
  double mean_reward = 0.0;  // average of the two
  std::vector<double> first_by_seed;
  std::vector<double> second_by_seed;
};

struct ReplaySweepReport {
  std::vector<ReplaySweepRow> rows;
};

// Throws Error{kInvalidArgument} for ratios outside [0, 1].
ReplaySweepReport validate_replay_ratio_sweep(const ReplaySweepConfig& config);

}  // namespace dlerl

#endif  // DLERL_CURRICULUM_H_
