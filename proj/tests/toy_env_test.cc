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

#include "dlerl/toy_env.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"

namespace dlerl {
namespace {

using testing_util::random_policy;
using testing_util::random_tokens;
using testing_util::random_vector;

TEST(ToyEnv, EpisodesAreDeterministic) {
  ToyTaskConfig task;
  for (uint64_t i = 0; i < 50; ++i) {
    const Episode a = sample_episode(task, 7, i, 0.2);
    const Episode b = sample_episode(task, 7, i, 0.2);
    EXPECT_EQ(a.observation, b.observation);
    EXPECT_EQ(a.truth.label, b.truth.label);
    EXPECT_EQ(a.truth.gt_box.has_value(), b.truth.gt_box.has_value());
    EXPECT_EQ(a.observation.size(), observation_dim(task));
  }
  EXPECT_NE(sample_episode(task, 7, 0, 0.2).observation,
            sample_episode(task, 8, 0, 0.2).observation);
}

TEST(ToyEnv, SharedEvidenceShrinksObservation) {
  ToyTaskConfig task;
  ToyTaskConfig shared;
  shared.shared_evidence = true;
  EXPECT_LT(observation_dim(shared), observation_dim(task));
  for (uint64_t i = 0; i < 20; ++i) {
    EXPECT_EQ(sample_episode_for(shared, Modality::kAudio, 1, i, 0.0)
                  .observation.size(),
              observation_dim(shared));
  }
}

TEST(ToyEnv, OracleReachesMaximum) {
  ToyTaskConfig task;
  const RewardConfig reward;
  for (uint64_t i = 0; i < 300; ++i) {
    const Episode e = sample_episode(task, 3, i, 0.0);
    const ParsedResponse r = oracle_response(e.truth);
    EXPECT_DOUBLE_EQ(score_parsed(r, e.truth, reward).total,
                     reward.max_total(e.truth.label))
        << i;
  }
}

TEST(ToyEnv, TokenEncodingRoundTrips) {
  ToyTaskConfig task;
  for (uint64_t i = 0; i < 300; ++i) {
    const Episode e = sample_episode(task, 4, i, 0.0);
    const ParsedResponse r = oracle_response(e.truth);
    const auto tokens = tokens_for_response(task.response, r);
    EXPECT_EQ(response_for_tokens(task.response, tokens), r) << i;
  }
}

TEST(ToyEnv, SampledResponsesParseAndScore) {
  ToyTaskConfig task;
  CounterRng prng(11, 0);
  const SlotPolicy policy =
      [&] {
        SlotPolicy p = make_policy(task.response, observation_dim(task));
        for (double& w : p.params()) w = 0.3 * prng.normal();
        return p;
      }();
  for (uint64_t i = 0; i < 200; ++i) {
    const Episode e = sample_episode(task, 5, i, 0.1);
    CounterRng rng(5, i);
    const SampledResponse s =
        policy_sample(policy, task.response, e.observation, rng);
    const std::string text = render_response(s.response);
    ParseContext ctx{e.truth.modality, e.truth.duration};
    EXPECT_EQ(render_response(parse_response(text, ctx)), text);
    EXPECT_EQ(tokens_for_response(task.response, s.response), s.tokens);
    const auto lp = token_logprobs(policy, e.observation, s.tokens);
    ASSERT_EQ(lp.size(), s.token_logprobs.size());
    double sum = 0.0;
    for (size_t t = 0; t < lp.size(); ++t) {
      EXPECT_NEAR(lp[t], s.token_logprobs[t], 1e-12);
      sum += lp[t];
    }
    EXPECT_NEAR(sum, s.logprob, 1e-9);
  }
}

TEST(ToyEnv, ArgmaxIsRepeatable) {
  ToyTaskConfig task;
  CounterRng prng(12, 0);
  SlotPolicy policy = make_policy(task.response, observation_dim(task));
  for (double& w : policy.params()) w = prng.normal();
  const Episode e = sample_episode(task, 9, 0, 0.0);
  CounterRng a(1, 0), b(2, 0);
  EXPECT_EQ(policy_sample(policy, task.response, e.observation, a,
                          DecodeMode::kArgmax)
                .tokens,
            policy_sample(policy, task.response, e.observation, b,
                          DecodeMode::kArgmax)
                .tokens);
}

TEST(SlotPolicy, UniformPolicyLogProb) {
  SlotPolicy p(3, {4, 6});
  const std::vector<double> obs = {1.0, -2.0, 0.5};
  const std::vector<Token> tokens = {{0, 2, 0}, {1, 5, 3}};
  const auto lp = token_logprobs(p, obs, tokens);
  EXPECT_NEAR(lp[0], -std::log(4.0), 1e-12);
  EXPECT_NEAR(lp[1], -std::log(3.0), 1e-12);
  const auto probs = p.probabilities(1, obs, 3);
  EXPECT_EQ(probs[0], 0.0);
  EXPECT_NEAR(probs[4], 1.0 / 3.0, 1e-12);
}

TEST(SlotPolicy, JsonRoundTrip) {
  CounterRng rng(3, 0);
  const SlotPolicy p = random_policy(rng, 5, 6);
  EXPECT_EQ(policy_from_json_text(policy_to_json_text(p)), p);
  EXPECT_THROW(policy_from_json_text("{\"dim\":2}"), Error);
}

TEST(SlotPolicy, GradientMatchesFiniteDifference) {
  CounterRng rng(21, 0);
  for (int c = 0; c < 50; ++c) {
    SlotPolicy p = random_policy(rng, 1 + rng.below(6), 6);
    const auto obs = random_vector(rng, p.dim());
    const auto tokens = random_tokens(rng, p);
    const auto w = random_vector(rng, tokens.size());
    std::vector<double> grad(p.num_params(), 0.0);
    accumulate_token_gradients(p, obs, tokens, w, grad);

    auto f = [&](const SlotPolicy& q) {
      const auto lp = token_logprobs(q, obs, tokens);
      double s = 0.0;
      for (size_t t = 0; t < lp.size(); ++t) s += w[t] * lp[t];
      return s;
    };
    const double h = 1e-6;
    for (size_t k = 0; k < p.num_params(); ++k) {
      SlotPolicy up = p, down = p;
      up.params()[k] += h;
      down.params()[k] -= h;
      EXPECT_NEAR(grad[k], (f(up) - f(down)) / (2 * h), 1e-6) << c << "/" << k;
    }
  }
}

TEST(SlotPolicy, UnemittedSlotsHaveZeroGradient) {
  SlotPolicy p(2, {3, 3, 3});
  CounterRng rng(1, 1);
  for (double& w : p.params()) w = rng.normal();
  const std::vector<double> obs = {0.4, -1.1};
  const std::vector<Token> tokens = {{1, 2, 0}};
  std::vector<double> grad(p.num_params(), 0.0);
  const std::vector<double> w = {1.0};
  accumulate_token_gradients(p, obs, tokens, w, grad);
  for (size_t k = 0; k < 3; ++k) {
    for (size_t d = 0; d < 2; ++d) {
      EXPECT_EQ(grad[p.offset(0, k) + d], 0.0);
      EXPECT_EQ(grad[p.offset(2, k) + d], 0.0);
    }
  }
}

TEST(SlotPolicy, LogProbAndGradMatchesTokens) {
  ToyTaskConfig task;
  CounterRng rng(4, 4);
  SlotPolicy p = make_policy(task.response, observation_dim(task));
  for (double& w : p.params()) w = 0.2 * rng.normal();
  const Episode e = sample_episode(task, 2, 3, 0.0);
  const ParsedResponse r = oracle_response(e.truth);
  const LogProbGrad g =
      policy_logprob_and_grad(p, task.response, e.observation, r);
  const auto tokens = tokens_for_response(task.response, r);
  const std::vector<double> ones(tokens.size(), 1.0);
  std::vector<double> grad(p.num_params(), 0.0);
  accumulate_token_gradients(p, e.observation, tokens, ones, grad);
  EXPECT_EQ(g.gradient, grad);
  EXPECT_EQ(g.token_logprobs, token_logprobs(p, e.observation, tokens));
}

}  // namespace
}  // namespace dlerl
