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

#include "dlerl/curriculum.h"

#include <cmath>
#include <future>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dlerl/error.h"

namespace dlerl {
namespace {

constexpr uint64_t kReplayStream = 0x4e91;
constexpr uint64_t kShuffleStream = 0x5f1e;

uint64_t modality_key(Modality m) { return static_cast<uint64_t>(m); }

// First k entries of a seeded Fisher-Yates shuffle of [0, n).
std::vector<size_t> draw_without_replacement(size_t n, size_t k,
                                             CounterRng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

CounterRng replay_rng(uint64_t seed, size_t stage, Modality m) {
  return CounterRng::derive(seed, {kReplayStream, stage, modality_key(m)});
}

void check_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "replay ratio outside [0, 1]");
  }
}

const DatasetManifest& manifest_for(std::span<const DatasetManifest> manifests,
                                    Modality m) {
  for (const DatasetManifest& d : manifests) {
    if (d.modality == m) return d;
  }
  throw Error(ErrorCode::kMissingModality,
              std::string("no manifest for ") + std::string(modality_name(m)));
}

}  // namespace

size_t replay_count(double ratio, size_t n) {
  check_ratio(ratio);
  const double x = ratio * static_cast<double>(n);
  return std::min(n, static_cast<size_t>(std::floor(x + 1e-9)));
}

size_t StagePlan::total() const {
  size_t sum = 0;
  for (const auto& [m, c] : counts) sum += c;
  return sum;
}

CurriculumPlan build_stage_plans(std::span<const DatasetManifest> manifests,
                                 double replay_ratio, uint64_t seed) {
  check_ratio(replay_ratio);
  std::set<Modality> seen;
  for (const DatasetManifest& d : manifests) {
    if (!seen.insert(d.modality).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("two manifests for ") + std::string(modality_name(d.modality)));
    }
    std::set<std::string> ids;
    for (const SampleRecord& r : d.entries) {
      if (!ids.insert(r.id()).second) {
        throw Error(ErrorCode::kDuplicateSampleId, r.id());
      }
    }
  }
  for (Modality m : kStageOrder) manifest_for(manifests, m);

  CurriculumPlan plan;
  plan.replay_ratio = replay_ratio;
  plan.seed = seed;
  for (size_t k = 0; k < kStageOrder.size(); ++k) {
    StagePlan stage;
    stage.stage_index = k + 1;
    stage.new_modality = kStageOrder[k];
    for (size_t j = 0; j <= k; ++j) {
      const Modality m = kStageOrder[j];
      const auto& entries = manifest_for(manifests, m).entries;
      std::vector<std::string>& ids = stage.included[m];
      if (j == k) {
        for (const SampleRecord& r : entries) ids.push_back(r.id());
      } else {
        CounterRng rng = replay_rng(seed, stage.stage_index, m);
        const size_t n = replay_count(replay_ratio, entries.size());
        for (size_t i : draw_without_replacement(entries.size(), n, rng)) {
          ids.push_back(entries[i].id());
        }
      }
      stage.counts[m] = ids.size();
    }
    plan.stages.push_back(std::move(stage));
  }
  return plan;
}

StageBundle emit_stage_manifest(const CurriculumPlan& plan,
                                std::span<const DatasetManifest> manifests,
                                size_t stage_index) {
  if (stage_index < 1 || stage_index > plan.stages.size()) {
    throw Error(ErrorCode::kStageOutOfRange,
                "stage " + std::to_string(stage_index));
  }
  const StagePlan& stage = plan.stages[stage_index - 1];
  StageBundle bundle;
  bundle.stage_index = stage_index;
  for (Modality m : kStageOrder) {
    const auto it = stage.included.find(m);
    if (it == stage.included.end()) continue;
    const auto& entries = manifest_for(manifests, m).entries;
    std::unordered_map<std::string, const SampleRecord*> by_id;
    for (const SampleRecord& r : entries) by_id[r.id()] = &r;

    DatasetManifest part;
    part.modality = m;
    for (const std::string& id : it->second) {
      const auto found = by_id.find(id);
      if (found == by_id.end()) throw Error(ErrorCode::kUnknownSampleId, id);
      part.entries.push_back(*found->second);
    }
    CounterRng rng = CounterRng::derive(
        plan.seed, {kShuffleStream, stage_index, modality_key(m)});
    shuffle(part.entries, rng);
    bundle.records.insert(bundle.records.end(), part.entries.begin(),
                          part.entries.end());
    bundle.manifests.push_back(std::move(part));
  }
  CounterRng rng = CounterRng::derive(plan.seed, {kShuffleStream, stage_index});
  shuffle(bundle.records, rng);
  return bundle;
}

namespace {

std::vector<Episode> episodes(const ToyTaskConfig& task, Modality m,
                              uint64_t seed, size_t first, size_t count,
                              double noise) {
  std::vector<Episode> out;
  out.reserve(count);
  for (size_t i = first; i < first + count; ++i) {
    out.push_back(sample_episode_for(task, m, seed, i, noise));
  }
  return out;
}

TrainingEnvironment pool_environment(const ToyTaskConfig& task,
                                     std::vector<Episode> pool) {
  TrainingEnvironment env;
  env.response_template = task.response;
  env.sample = [pool = std::move(pool)](size_t, CounterRng& rng) {
    return pool[rng.below(pool.size())];
  };
  return env;
}

struct SeedResult {
  std::vector<double> first;   // per ratio
  std::vector<double> second;
  std::vector<size_t> replayed;
};

SeedResult run_seed(const ReplaySweepConfig& c, uint64_t seed) {
  const Modality first_m = kStageOrder[0];
  const Modality second_m = kStageOrder[1];
  const size_t n1 = c.first_stage_pool;
  const size_t n2 = c.second_stage_pool;
  const auto pool1 = episodes(c.task, first_m, seed, 0, n1, c.noise_level);
  const auto pool2 = episodes(c.task, second_m, seed, 0, n2, c.noise_level);
  const auto eval1 =
      episodes(c.task, first_m, seed, n1, c.eval_episodes, c.noise_level);
  const auto eval2 =
      episodes(c.task, second_m, seed, n2, c.eval_episodes, c.noise_level);

  GspoConfig g = c.gspo;
  g.seed = seed;
  g.steps = c.first_stage_steps;
  SlotPolicy stage1 = make_policy(c.task.response, observation_dim(c.task));
  train(g, pool_environment(c.task, pool1), stage1);

  SeedResult out;
  for (double ratio : c.ratios) {
    CounterRng rng = replay_rng(seed, 2, first_m);
    std::vector<Episode> pool = pool2;
    const size_t n = replay_count(ratio, n1);
    for (size_t i : draw_without_replacement(n1, n, rng)) {
      pool.push_back(pool1[i]);
    }
    SlotPolicy policy = stage1;
    g.steps = c.second_stage_steps;
    train(g, pool_environment(c.task, std::move(pool)), policy, nullptr,
          c.first_stage_steps);
    out.first.push_back(greedy_reward(policy, c.task.response, eval1));
    out.second.push_back(greedy_reward(policy, c.task.response, eval2));
    out.replayed.push_back(n);
  }
  return out;
}

}  // namespace

ReplaySweepReport validate_replay_ratio_sweep(const ReplaySweepConfig& c) {
  for (double r : c.ratios) check_ratio(r);
  if (c.first_stage_pool == 0 || c.second_stage_pool == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty episode pool");
  }

  // Seeds are independent; each runs on its own thread.
  std::vector<std::future<SeedResult>> jobs;
  for (uint64_t seed : c.seeds) {
    jobs.push_back(std::async(std::launch::async, run_seed, std::cref(c), seed));
  }
  std::vector<SeedResult> results;
  for (auto& j : jobs) results.push_back(j.get());

  ReplaySweepReport report;
  for (size_t r = 0; r < c.ratios.size(); ++r) {
    ReplaySweepRow row;
    row.ratio = c.ratios[r];
    row.replayed = replay_count(row.ratio, c.first_stage_pool);
    for (const SeedResult& s : results) {
      row.first_by_seed.push_back(s.first[r]);
      row.second_by_seed.push_back(s.second[r]);
      row.first_modality_reward += s.first[r];
      row.second_modality_reward += s.second[r];
    }
    if (!results.empty()) {
      row.first_modality_reward /= static_cast<double>(results.size());
      row.second_modality_reward /= static_cast<double>(results.size());
    }
    row.mean_reward =
        0.5 * (row.first_modality_reward + row.second_modality_reward);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace dlerl
