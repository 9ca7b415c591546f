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

// Group sequence policy optimization, token variant.
//
// For a group of G responses to one prompt with rewards r_i:
//
//   A_i = (r_i - mean(r)) / (std(r) + floor)        population std
//   s_i = exp(mean_t(logp_new(y_it) - logp_old(y_it)))
//   J   = 1/G sum_i 1/|y_i| sum_t min(s_it A_i, clip(s_it, 1-eps, 1+eps) A_i)
//
// where s_it equals s_i in value but its gradient is s_i * grad logp(y_it),
// i.e. each token routes gradient through its own log-probability only.

#ifndef DLERL_GSPO_H_
#define DLERL_GSPO_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dlerl/rewards.h"
#include "dlerl/rng.h"
#include "dlerl/toy_env.h"

namespace dlerl {

struct GspoConfig {
  size_t group_size = 8;
  double clip_epsilon = 4e-4;
  double kl_coeff = 0.01;
  double learning_rate = 0.25;
  double std_floor = 1e-8;
  size_t steps = 100000;
  uint64_t seed = 0;

  // Throws Error{kInvalidArgument}.
  void validate() const;
};

// Throws Error{kGroupTooSmall} for fewer than two rewards and
// Error{kNonFinite} for non-finite ones.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor);

// Throws Error{kLengthMismatch} on differing or zero lengths and
// Error{kNonFinite} on non-finite inputs.
double sequence_ratio(std::span<const double> old_logprobs,
                      std::span<const double> new_logprobs);

struct GspoGroup {
  // Per-token log-probabilities of each response under the sampling policy
  // and under the current parameters.
  std::vector<std::vector<double>> old_logprobs;
  std::vector<std::vector<double>> new_logprobs;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> ratios;  // filled by gspo_token_objective

  size_t size() const { return rewards.size(); }
};

// d log p(y_it) / d params for response i, supplied by the policy.
// accumulate(i, w, grad) must add sum_t w[t] * grad log p(y_it) to grad.
struct TokenGradients {
  size_t num_params = 0;
  std::function<void(size_t response, std::span<const double> token_weights,
                     std::span<double> grad)>
      accumulate;
};

struct ObjectiveResult {
  double objective = 0.0;
  std::vector<double> gradient;  // empty when no gradient source is given
  double clip_fraction = 0.0;    // share of responses with s_i outside band
};

ObjectiveResult gspo_token_objective(GspoGroup& group, double clip_epsilon,
                                     const TokenGradients* gradients = nullptr);

// KL(policy || reference) of every slot's full softmax, averaged over slots
// and contexts. When `grad` is non-empty it receives d KL / d policy params.
double kl_penalty(const SlotPolicy& policy, const SlotPolicy& reference,
                  std::span<const std::vector<double>> contexts,
                  std::span<double> grad = {});

// Closed-form KL between two categorical distributions.
double categorical_kl(std::span<const double> p, std::span<const double> q);

struct StepRecord {
  size_t step = 0;
  double mean_reward = 0.0;
  double objective = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
};

struct TrainingHistory {
  std::vector<StepRecord> steps;

  double mean_reward(size_t first, size_t last) const;
};

// Draws the training context for a step.
using EpisodeSampler = std::function<Episode(size_t step, CounterRng& rng)>;

struct TrainingEnvironment {
  ResponseTemplate response_template;
  EpisodeSampler sample;
  RewardConfig reward;
};

// Runs config.steps GSPO updates in place on `policy`; the reference for
// the KL term is the policy as passed in (or `reference` when given).
// Throws Error{kDivergence} when the mean reward or parameters become
// non-finite.
TrainingHistory train(const GspoConfig& config, const TrainingEnvironment& env,
                      SlotPolicy& policy, const SlotPolicy* reference = nullptr,
                      size_t first_step = 0);

// Default toy environment: episodes are drawn afresh each step from
// `task` with the given noise level and data seed.
TrainingEnvironment toy_environment(const ToyTaskConfig& task,
                                    double noise_level, uint64_t data_seed);

// Mean reward of greedy decoding over the given episodes.
double greedy_reward(const SlotPolicy& policy, const ResponseTemplate& t,
                     std::span<const Episode> episodes,
                     const RewardConfig& reward = {});

// One JSON object per line: step, mean_reward, objective, kl, clip_fraction.
void write_history_record(std::ostream& out, const StepRecord& record);

}  // namespace dlerl

#endif  // DLERL_GSPO_H_
