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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.h"

namespace dlerl {
namespace {

TEST(GroupAdvantages, Examples) {
  const auto a = group_advantages(std::vector<double>{0.0, 1.0}, 1e-8);
  EXPECT_NEAR(a[0], -1.0, 1e-7);
  EXPECT_NEAR(a[1], 1.0, 1e-7);

  const auto b = group_advantages(std::vector<double>{1.0, 2.0, 3.0}, 1e-8);
  EXPECT_NEAR(b[0], -1.224744871391589, 1e-7);
  EXPECT_NEAR(b[1], 0.0, 1e-12);
  EXPECT_NEAR(b[2], 1.224744871391589, 1e-7);

  const auto z = group_advantages(std::vector<double>{0.7, 0.7, 0.7}, 1e-8);
  for (double x : z) EXPECT_NEAR(x, 0.0, 1e-6);

  EXPECT_THROW(group_advantages(std::vector<double>{1.0}, 1e-8), Error);
  EXPECT_THROW(group_advantages(std::vector<double>{1.0, NAN}, 1e-8), Error);
}

TEST(GroupAdvantages, ZeroMeanUnitScale) {
  CounterRng rng(5, 0);
  for (int c = 0; c < 200; ++c) {
    std::vector<double> r(2 + rng.below(10));
    for (double& x : r) x = 2.8 * rng.uniform();
    const auto a = group_advantages(r, 1e-8);
    double mu = 0.0, var = 0.0, mean = 0.0, sq = 0.0;
    for (double x : r) mu += x;
    mu /= r.size();
    for (double x : r) var += (x - mu) * (x - mu);
    const double sd = std::sqrt(var / r.size());
    for (double x : a) mean += x;
    mean /= a.size();
    for (double x : a) sq += x * x;
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(sq / a.size()), sd / (sd + 1e-8), 1e-12);
  }
}

TEST(SequenceRatio, Examples) {
  const std::vector<double> old_lp = {-1.0, -2.0, -3.0};
  EXPECT_EQ(sequence_ratio(old_lp, old_lp), 1.0);
  const std::vector<double> up = {-0.9, -1.9, -2.9};
  EXPECT_NEAR(sequence_ratio(old_lp, up), 1.1051709180756477, 1e-12);
  const std::vector<double> old4 = {-1.0, -1.0, -1.0, -1.0};
  const std::vector<double> down = {-1.1, -1.1, -1.1, -1.1};
  EXPECT_NEAR(sequence_ratio(old4, down), 0.9048374180359595, 1e-12);
  EXPECT_THROW(sequence_ratio(old_lp, std::vector<double>{-1.0}), Error);
  EXPECT_THROW(sequence_ratio(std::vector<double>{}, std::vector<double>{}),
               Error);
}

GspoGroup two_response_group(double shift) {
  GspoGroup g;
  g.rewards = {1.0, 0.0};
  g.advantages = {1.0, -1.0};
  g.old_logprobs = {{-1.0, -1.0}, {-2.0}};
  g.new_logprobs = {{-1.0 + shift, -1.0 + shift}, {-2.0 + shift}};
  return g;
}

TEST(GspoObjective, OnPolicyEqualsMeanAdvantage) {
  GspoGroup g = two_response_group(0.0);
  const auto r = gspo_token_objective(g, 0.2);
  EXPECT_DOUBLE_EQ(r.objective, 0.0);
  EXPECT_EQ(g.ratios, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(r.clip_fraction, 0.0);
}

TEST(GspoObjective, ClipExamples) {
  // s = e^0.1 for both; eps 4e-4 clips the positive response to 1.0004.
  GspoGroup g = two_response_group(0.1);
  const auto r = gspo_token_objective(g, 4e-4);
  const double s = std::exp(0.1);
  EXPECT_NEAR(r.objective, 0.5 * (1.0004 * 1.0 + s * -1.0), 1e-12);
  EXPECT_EQ(r.clip_fraction, 1.0);

  GspoGroup h = two_response_group(-0.1);
  const auto q = gspo_token_objective(h, 4e-4);
  const double t = std::exp(-0.1);
  EXPECT_NEAR(q.objective, 0.5 * (t * 1.0 + 0.9996 * -1.0), 1e-12);
}

TEST(GspoObjective, SingleSequenceClipBranches) {
  const double eps = 0.1;
  GspoGroup up;
  up.rewards = {1.0};
  up.advantages = {1.0};
  up.old_logprobs = {{0.0}};
  up.new_logprobs = {{std::log(1.0 + 2 * eps)}};
  EXPECT_NEAR(gspo_token_objective(up, eps).objective, 1.0 + eps, 1e-12);

  GspoGroup down = up;
  down.advantages = {-1.0};
  down.new_logprobs = {{std::log(1.0 - 2 * eps)}};
  // min(-0.8, -0.9): with A < 0 and s below the band the clipped term is
  // the smaller one.
  EXPECT_NEAR(gspo_token_objective(down, eps).objective, -(1.0 - eps), 1e-12);
}

TEST(GspoObjective, GradientZeroWhenClipped) {
  GspoGroup g = two_response_group(0.1);
  TokenGradients src;
  src.num_params = 2;
  src.accumulate = [](size_t i, std::span<const double> w,
                      std::span<double> out) {
    for (double x : w) out[i] += x;
  };
  const auto r = gspo_token_objective(g, 4e-4, &src);
  EXPECT_EQ(r.gradient[0], 0.0);  // A > 0, s above band: clipped branch
  // A < 0, s above band: unclipped branch, weight A * s / (G * |y|).
  EXPECT_NEAR(r.gradient[1], -std::exp(0.1) / 2.0, 1e-12);
}

TEST(KlPenalty, Examples) {
  const std::vector<double> p = {0.5, 0.5};
  const std::vector<double> q = {0.25, 0.75};
  EXPECT_NEAR(categorical_kl(p, q), 0.14384103622589042, 1e-12);
  const std::vector<double> a = {0.6, 0.4};
  const std::vector<double> b = {0.3, 0.7};
  EXPECT_NEAR(categorical_kl(a, b), 0.6 * std::log(2.0) + 0.4 * std::log(4.0 / 7.0),
              1e-12);
  EXPECT_EQ(categorical_kl(p, p), 0.0);
}

TEST(KlPenalty, ReferenceExample) {
  // One slot, one feature: logits (1, 0) against a uniform reference.
  SlotPolicy pol(1, {2});
  pol.params()[0] = std::log(3.0);
  SlotPolicy ref(1, {2});
  const std::vector<std::vector<double>> ctx = {{1.0}};
  // p = (3/4, 1/4), q = (1/2, 1/2).
  EXPECT_NEAR(kl_penalty(pol, ref, ctx),
              0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-12);
  const std::vector<double> u = {0.5, 0.5};
  const std::vector<double> w = {0.1, 0.9};
  EXPECT_NEAR(categorical_kl(u, w), 0.5108256237659907, 1e-12);
}

TEST(KlPenalty, NonNegativeAndZeroAtReference) {
  CounterRng rng(8, 0);
  for (int c = 0; c < 200; ++c) {
    SlotPolicy p = testing_util::random_policy(rng, 1 + rng.below(5), 5);
    SlotPolicy q = p;
    for (double& w : q.params()) w += rng.normal();
    const std::vector<std::vector<double>> ctx = {
        testing_util::random_vector(rng, p.dim())};
    EXPECT_GE(kl_penalty(p, q, ctx), 0.0);
    EXPECT_NEAR(kl_penalty(p, p, ctx), 0.0, 1e-15);
  }
}

TEST(GspoObjective, GradientMatchesFiniteDifference) {
  CounterRng rng(77, 0);
  for (int c = 0; c < 40; ++c) {
    const auto in = testing_util::random_gspo_instance(rng);
    EXPECT_LT(testing_util::gradient_relative_error(in, 1e-6), 1e-4) << c;
  }
}

TEST(GspoConfig, Validation) {
  GspoConfig c;
  EXPECT_NO_THROW(c.validate());
  c.group_size = 1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.clip_epsilon = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Train, ZeroStepsLeavesPolicy) {
  ToyTaskConfig task;
  SlotPolicy p = make_policy(task.response, observation_dim(task));
  const SlotPolicy before = p;
  GspoConfig c;
  c.steps = 0;
  const auto h = train(c, toy_environment(task, 0.0, 0), p);
  EXPECT_TRUE(h.steps.empty());
  EXPECT_EQ(p, before);
}

TEST(Train, Deterministic) {
  ToyTaskConfig task;
  GspoConfig c;
  c.steps = 200;
  c.seed = 3;
  SlotPolicy a = make_policy(task.response, observation_dim(task));
  SlotPolicy b = a;
  const auto ha = train(c, toy_environment(task, 0.1, 3), a);
  const auto hb = train(c, toy_environment(task, 0.1, 3), b);
  EXPECT_EQ(a, b);
  ASSERT_EQ(ha.steps.size(), 200u);
  for (size_t i = 0; i < ha.steps.size(); ++i) {
    EXPECT_EQ(ha.steps[i].mean_reward, hb.steps[i].mean_reward);
    EXPECT_EQ(ha.steps[i].objective, hb.steps[i].objective);
  }
  std::ostringstream out;
  write_history_record(out, ha.steps[0]);
  EXPECT_NE(out.str().find("\"mean_reward\""), std::string::npos);
}

TEST(Train, ImprovesOverInitialPolicy) {
  ToyTaskConfig task;
  GspoConfig c;
  c.steps = 3000;
  SlotPolicy p = make_policy(task.response, observation_dim(task));
  std::vector<Episode> eval;
  for (uint64_t i = 0; i < 200; ++i) {
    eval.push_back(sample_episode(task, 1000, i, 0.0));
  }
  const double before = greedy_reward(p, task.response, eval);
  train(c, toy_environment(task, 0.0, 0), p);
  EXPECT_GT(greedy_reward(p, task.response, eval), before + 0.3);
}

}  // namespace
}  // namespace dlerl
