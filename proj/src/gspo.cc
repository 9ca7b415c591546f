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

#include "dlerl/gspo.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "dlerl/error.h"

namespace dlerl {
namespace {

constexpr uint64_t kContextStream = 0xc0;
constexpr uint64_t kResponseStream = 0x5e;

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

void GspoConfig::validate() const {
  auto fail = [](const char* what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (group_size < 2) fail("group_size must be at least 2");
  if (!(clip_epsilon > 0.0)) fail("clip_epsilon must be positive");
  if (!(kl_coeff >= 0.0) || !std::isfinite(kl_coeff)) {
    fail("kl_coeff must be finite and non-negative");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail("learning_rate must be positive");
  }
  if (!(std_floor > 0.0)) fail("std_floor must be positive");
}

std::vector<double> group_advantages(std::span<const double> rewards,
                                     double std_floor) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kGroupTooSmall, "need at least two rewards");
  }
  if (!all_finite(rewards)) {
    throw Error(ErrorCode::kNonFinite, "non-finite reward");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_pop = std::sqrt(var / n);
  std::vector<double> adv(rewards.size(), 0.0);
  if (std_pop == 0.0) return adv;
  for (size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = (rewards[i] - mean) / (std_pop + std_floor);
  }
  return adv;
}

double sequence_ratio(std::span<const double> old_logprobs,
                      std::span<const double> new_logprobs) {
  if (old_logprobs.size() != new_logprobs.size() || old_logprobs.empty()) {
    throw Error(ErrorCode::kLengthMismatch,
                "log-probability arrays must have equal non-zero length");
  }
  if (!all_finite(old_logprobs) || !all_finite(new_logprobs)) {
    throw Error(ErrorCode::kNonFinite, "non-finite log-probability");
  }
  double sum = 0.0;
  for (size_t t = 0; t < old_logprobs.size(); ++t) {
    sum += new_logprobs[t] - old_logprobs[t];
  }
  return std::exp(sum / static_cast<double>(old_logprobs.size()));
}

ObjectiveResult gspo_token_objective(GspoGroup& group, double clip_epsilon,
                                     const TokenGradients* gradients) {
  const size_t g = group.size();
  if (group.old_logprobs.size() != g || group.new_logprobs.size() != g ||
      group.advantages.size() != g) {
    throw Error(ErrorCode::kLengthMismatch, "group arrays differ in size");
  }
  ObjectiveResult out;
  if (gradients) out.gradient.assign(gradients->num_params, 0.0);
  group.ratios.assign(g, 1.0);
  size_t clipped = 0;
  std::vector<double> weights;
  for (size_t i = 0; i < g; ++i) {
    const double s = sequence_ratio(group.old_logprobs[i], group.new_logprobs[i]);
    group.ratios[i] = s;
    const double a = group.advantages[i];
    const double unclipped = s * a;
    const double clipped_value =
        std::clamp(s, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * a;
    if (s < 1.0 - clip_epsilon || s > 1.0 + clip_epsilon) ++clipped;
    // The per-token terms are equal, so the 1/|y_i| token mean collapses.
    out.objective += std::min(unclipped, clipped_value);
    if (gradients && unclipped <= clipped_value) {
      const size_t len = group.new_logprobs[i].size();
      weights.assign(len, a * s / (static_cast<double>(g) * len));
      gradients->accumulate(i, weights, out.gradient);
    }
  }
  out.objective /= static_cast<double>(g);
  out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(g);
  return out;
}

double categorical_kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distribution sizes differ");
  }
  double kl = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) kl += p[k] * (std::log(p[k]) - std::log(q[k]));
  }
  return std::max(kl, 0.0);
}

double kl_penalty(const SlotPolicy& policy, const SlotPolicy& reference,
                  std::span<const std::vector<double>> contexts,
                  std::span<double> grad) {
  if (policy.slot_sizes() != reference.slot_sizes() ||
      policy.dim() != reference.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "policy shapes differ");
  }
  if (contexts.empty() || policy.num_slots() == 0) return 0.0;
  const double scale =
      1.0 / static_cast<double>(contexts.size() * policy.num_slots());
  double total = 0.0;
  for (const auto& obs : contexts) {
    for (size_t slot = 0; slot < policy.num_slots(); ++slot) {
      const auto p = policy.probabilities(slot, obs);
      const auto q = reference.probabilities(slot, obs);
      double kl = 0.0;
      for (size_t k = 0; k < p.size(); ++k) {
        kl += p[k] * (std::log(p[k]) - std::log(q[k]));
      }
      total += kl;
      if (grad.empty()) continue;
      // d KL / d z_k = p_k (log p_k - log q_k - KL)
      for (size_t k = 0; k < p.size(); ++k) {
        const double coef =
            scale * p[k] * (std::log(p[k]) - std::log(q[k]) - kl);
        double* gp = grad.data() + policy.offset(slot, k);
        for (size_t d = 0; d < policy.dim(); ++d) gp[d] += coef * obs[d];
      }
    }
  }
  return std::max(total * scale, 0.0);
}

double TrainingHistory::mean_reward(size_t first, size_t last) const {
  last = std::min(last, steps.size());
  if (first >= last) return 0.0;
  double sum = 0.0;
  for (size_t i = first; i < last; ++i) sum += steps[i].mean_reward;
  return sum / static_cast<double>(last - first);
}

TrainingHistory train(const GspoConfig& config, const TrainingEnvironment& env,
                      SlotPolicy& policy, const SlotPolicy* reference,
                      size_t first_step) {
  config.validate();
  const SlotPolicy frozen = reference ? *reference : policy;
  const ResponseTemplate& tmpl = env.response_template;
  const size_t g = config.group_size;
  TrainingHistory history;
  history.steps.reserve(config.steps);

  std::vector<SampledResponse> samples(g);
  std::vector<double> grad(policy.num_params());
  std::vector<double> kl_grad(policy.num_params());

  for (size_t k = 0; k < config.steps; ++k) {
    const size_t step = first_step + k;
    CounterRng context_rng =
        CounterRng::derive(config.seed, {kContextStream, step});
    const Episode episode = env.sample(step, context_rng);

    GspoGroup group;
    group.rewards.resize(g);
    for (size_t i = 0; i < g; ++i) {
      CounterRng rng =
          CounterRng::derive(config.seed, {kResponseStream, step, i});
      samples[i] = policy_sample(policy, tmpl, episode.observation, rng);
      const std::string text = render_response(samples[i].response);
      group.rewards[i] = composite_reward(text, episode.truth, env.reward).total;
    }
    double mean_reward = 0.0;
    for (double r : group.rewards) mean_reward += r;
    mean_reward /= static_cast<double>(g);
    if (!std::isfinite(mean_reward)) {
      throw Error(ErrorCode::kDivergence,
                  "non-finite mean reward at step " + std::to_string(step));
    }

    group.advantages = group_advantages(group.rewards, config.std_floor);
    for (size_t i = 0; i < g; ++i) {
      group.old_logprobs.push_back(samples[i].token_logprobs);
      group.new_logprobs.push_back(
          token_logprobs(policy, episode.observation, samples[i].tokens));
    }
    TokenGradients source;
    source.num_params = policy.num_params();
    source.accumulate = [&](size_t i, std::span<const double> w,
                            std::span<double> out) {
      accumulate_token_gradients(policy, episode.observation,
                                 samples[i].tokens, w, out);
    };
    const ObjectiveResult result =
        gspo_token_objective(group, config.clip_epsilon, &source);

    std::fill(kl_grad.begin(), kl_grad.end(), 0.0);
    const std::vector<std::vector<double>> contexts = {episode.observation};
    const double kl = kl_penalty(policy, frozen, contexts, kl_grad);

    auto params = policy.params();
    for (size_t p = 0; p < params.size(); ++p) {
      params[p] += config.learning_rate *
                   (result.gradient[p] - config.kl_coeff * kl_grad[p]);
    }
    if (!all_finite(params)) {
      throw Error(ErrorCode::kDivergence,
                  "non-finite parameters at step " + std::to_string(step));
    }
    history.steps.push_back(
        {step, mean_reward, result.objective, kl, result.clip_fraction});
  }
  return history;
}

TrainingEnvironment toy_environment(const ToyTaskConfig& task,
                                    double noise_level, uint64_t data_seed) {
  TrainingEnvironment env;
  env.response_template = task.response;
  env.sample = [task, noise_level, data_seed](size_t, CounterRng& rng) {
    return sample_episode(task, data_seed, rng.next_u64(), noise_level);
  };
  return env;
}

double greedy_reward(const SlotPolicy& policy, const ResponseTemplate& t,
                     std::span<const Episode> episodes,
                     const RewardConfig& reward) {
  if (episodes.empty()) return 0.0;
  CounterRng unused(0, 0);
  double sum = 0.0;
  for (const Episode& ep : episodes) {
    const auto s =
        policy_sample(policy, t, ep.observation, unused, DecodeMode::kArgmax);
    sum += composite_reward(render_response(s.response), ep.truth, reward).total;
  }
  return sum / static_cast<double>(episodes.size());
}

void write_history_record(std::ostream& out, const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"step\":%zu,\"mean_reward\":%.17g,\"objective\":%.17g,"
                "\"kl\":%.17g,\"clip_fraction\":%.17g}\n",
                r.step, r.mean_reward, r.objective, r.kl, r.clip_fraction);
  out << buf;
}

}  // namespace dlerl
