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

#include <algorithm>
#include <cmath>
#include <limits>

#include "dlerl/error.h"
#include "json.hpp"

namespace dlerl {
namespace {

constexpr double kGridTolerance = 1e-6;
constexpr std::string_view kThinkText = "slot policy response";

// Label slot order.
constexpr Label kSlotLabels[3] = {Label::kReal, Label::kTampered,
                                  Label::kFullSynthetic};

size_t label_index(Label label) {
  for (size_t i = 0; i < 3; ++i) {
    if (kSlotLabels[i] == label) return i;
  }
  throw Error(ErrorCode::kUnrepresentableResponse,
              "label " + std::string(label_name(label)) +
                  " has no slot category");
}

double logsumexp(std::span<const double> z, size_t lower) {
  double m = -std::numeric_limits<double>::infinity();
  for (size_t k = lower; k < z.size(); ++k) m = std::max(m, z[k]);
  double s = 0.0;
  for (size_t k = lower; k < z.size(); ++k) s += std::exp(z[k] - m);
  return m + std::log(s);
}

size_t to_bin(double value, double cell, size_t bins, bool is_end) {
  const double scaled = value / cell - (is_end ? 1.0 : 0.0);
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > kGridTolerance || rounded < 0.0 ||
      rounded >= static_cast<double>(bins)) {
    throw Error(ErrorCode::kUnrepresentableResponse,
                "coordinate off the slot grid");
  }
  return static_cast<size_t>(rounded);
}

}  // namespace

std::vector<size_t> ResponseTemplate::slot_sizes() const {
  std::vector<size_t> sizes = {3};
  if (boxes) sizes.insert(sizes.end(), {2, bins, bins, bins, bins});
  if (intervals) sizes.insert(sizes.end(), {2, bins, bins});
  return sizes;
}

SlotLayout::SlotLayout(const ResponseTemplate& t) {
  size_t next = 1;
  if (t.boxes) {
    box_gate = next;
    next += 5;
  }
  if (t.intervals) interval_gate = next;
}

SlotPolicy::SlotPolicy(size_t dim, std::vector<size_t> slot_sizes)
    : dim_(dim), slot_sizes_(std::move(slot_sizes)) {
  size_t total = 0;
  for (size_t k : slot_sizes_) {
    offsets_.push_back(total);
    total += k * dim_;
  }
  params_.assign(total, 0.0);
}

void SlotPolicy::logits(size_t slot, std::span<const double> obs,
                        std::span<double> out) const {
  if (obs.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "observation dimension");
  }
  const size_t k_count = slot_sizes_[slot];
  for (size_t k = 0; k < k_count; ++k) {
    const double* w = params_.data() + offset(slot, k);
    double z = 0.0;
    for (size_t d = 0; d < dim_; ++d) z += w[d] * obs[d];
    out[k] = z;
  }
}

std::vector<double> SlotPolicy::probabilities(size_t slot,
                                              std::span<const double> obs,
                                              size_t lower) const {
  std::vector<double> z(slot_sizes_[slot]);
  logits(slot, obs, z);
  const double lse = logsumexp(z, lower);
  std::vector<double> p(z.size(), 0.0);
  for (size_t k = lower; k < z.size(); ++k) p[k] = std::exp(z[k] - lse);
  return p;
}

SlotPolicy make_policy(const ResponseTemplate& t, size_t dim) {
  return SlotPolicy(dim, t.slot_sizes());
}

size_t observation_dim(const ToyTaskConfig& task) {
  const size_t bins = task.response.bins;
  if (task.shared_evidence) return 1 + 2 + 3 + 1 + 4 * bins;
  return 1 + 2 + 3 + 1 + 4 * bins + 1 + 2 * bins;
}

Episode sample_episode_for(const ToyTaskConfig& task, Modality modality,
                           uint64_t seed, uint64_t index, double noise_level) {
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_level outside [0,1]");
  }
  if (modality != Modality::kImage && modality != Modality::kAudio) {
    throw Error(ErrorCode::kInvalidArgument,
                "toy task supports image and audio episodes");
  }
  const size_t bins = task.response.bins;
  const double cell_t = task.response.duration / static_cast<double>(bins);
  CounterRng rng = CounterRng::derive(
      seed, {0x7e57, static_cast<uint64_t>(modality), index});

  Episode ep;
  GroundTruth& truth = ep.truth;
  truth.sample_id = std::string(modality_name(modality)) + "-" +
                    std::to_string(index);
  truth.modality = modality;
  truth.label = kSlotLabels[rng.below(3)];
  if (modality == Modality::kAudio) truth.duration = task.response.duration;

  std::vector<double>& obs = ep.observation;
  obs.assign(observation_dim(task), 0.0);
  obs[0] = 1.0;
  obs[modality == Modality::kImage ? 1 : 2] = 1.0;
  obs[3 + label_index(truth.label)] = 1.0;
  const size_t box_flag = 6;
  const size_t box_base = box_flag + 1;
  const size_t interval_flag =
      task.shared_evidence ? box_flag : box_base + 4 * bins;
  const size_t interval_base = interval_flag + 1;

  auto ordered_pair = [&] {
    size_t a = rng.below(bins);
    size_t b = rng.below(bins);
    if (a > b) std::swap(a, b);
    return std::pair{a, b};
  };
  if (truth.tampered()) {
    if (modality == Modality::kImage) {
      const auto [x1, x2] = ordered_pair();
      const auto [y1, y2] = ordered_pair();
      const double cell = 1.0 / static_cast<double>(bins);
      truth.gt_box = Box{x1 * cell, y1 * cell, (x2 + 1) * cell, (y2 + 1) * cell};
      obs[box_flag] = 1.0;
      obs[box_base + 0 * bins + x1] = task.evidence_scale;
      obs[box_base + 1 * bins + x2] = task.evidence_scale;
      obs[box_base + 2 * bins + y1] = task.evidence_scale;
      obs[box_base + 3 * bins + y2] = task.evidence_scale;
    } else {
      const auto [s, e] = ordered_pair();
      truth.gt_intervals.push_back(Interval{s * cell_t, (e + 1) * cell_t});
      obs[interval_flag] = 1.0;
      obs[interval_base + s] = task.evidence_scale;
      obs[interval_base + bins + e] = task.evidence_scale;
    }
  }
  if (noise_level > 0.0) {
    for (size_t d = 1; d < obs.size(); ++d) obs[d] += noise_level * rng.normal();
  }
  return ep;
}

Episode sample_episode(const ToyTaskConfig& task, uint64_t seed,
                       uint64_t index, double noise_level) {
  if (task.modalities.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "task has no modalities");
  }
  const Modality modality = task.modalities[index % task.modalities.size()];
  return sample_episode_for(task, modality, seed, index, noise_level);
}

ParsedResponse oracle_response(const GroundTruth& truth) {
  ParsedResponse r;
  r.think_text = std::string(kThinkText);
  r.label = truth.label;
  if (truth.tampered()) {
    if (truth.gt_box) r.boxes.push_back(*truth.gt_box);
    r.intervals = truth.gt_intervals;
  }
  return r;
}

ParsedResponse response_for_tokens(const ResponseTemplate& t,
                                   std::span<const Token> tokens) {
  const SlotLayout layout(t);
  const double cell = 1.0 / static_cast<double>(t.bins);
  const double cell_t = t.duration / static_cast<double>(t.bins);
  ParsedResponse r;
  r.think_text = std::string(kThinkText);
  std::vector<size_t> chosen(t.num_slots(), SlotLayout::kAbsent);
  for (const Token& tok : tokens) chosen.at(tok.slot) = tok.choice;
  r.label = kSlotLabels[chosen.at(layout.label)];
  if (layout.box_gate != SlotLayout::kAbsent &&
      chosen[layout.box_gate] == 1) {
    const size_t g = layout.box_gate;
    r.boxes.push_back(Box{chosen[g + 1] * cell, chosen[g + 3] * cell,
                          (chosen[g + 2] + 1) * cell,
                          (chosen[g + 4] + 1) * cell});
  }
  if (layout.interval_gate != SlotLayout::kAbsent &&
      chosen[layout.interval_gate] == 1) {
    const size_t g = layout.interval_gate;
    r.intervals.push_back(
        Interval{chosen[g + 1] * cell_t, (chosen[g + 2] + 1) * cell_t});
  }
  return r;
}

std::vector<Token> tokens_for_response(const ResponseTemplate& t,
                                       const ParsedResponse& response) {
  const SlotLayout layout(t);
  const double cell = 1.0 / static_cast<double>(t.bins);
  const double cell_t = t.duration / static_cast<double>(t.bins);
  std::vector<Token> tokens;
  tokens.push_back({layout.label, label_index(response.label), 0});

  if (!response.boxes.empty() && layout.box_gate == SlotLayout::kAbsent) {
    throw Error(ErrorCode::kUnrepresentableResponse, "template has no boxes");
  }
  if (!response.intervals.empty() &&
      layout.interval_gate == SlotLayout::kAbsent) {
    throw Error(ErrorCode::kUnrepresentableResponse,
                "template has no intervals");
  }
  if (response.boxes.size() > 1 || response.intervals.size() > 1) {
    throw Error(ErrorCode::kUnrepresentableResponse,
                "template holds at most one box and one interval");
  }
  if (layout.box_gate != SlotLayout::kAbsent) {
    const size_t g = layout.box_gate;
    if (response.boxes.empty()) {
      tokens.push_back({g, 0, 0});
    } else {
      const Box& b = response.boxes.front();
      const size_t x1 = to_bin(b.x1, cell, t.bins, false);
      const size_t x2 = to_bin(b.x2, cell, t.bins, true);
      const size_t y1 = to_bin(b.y1, cell, t.bins, false);
      const size_t y2 = to_bin(b.y2, cell, t.bins, true);
      tokens.push_back({g, 1, 0});
      tokens.push_back({g + 1, x1, 0});
      tokens.push_back({g + 2, x2, x1});
      tokens.push_back({g + 3, y1, 0});
      tokens.push_back({g + 4, y2, y1});
    }
  }
  if (layout.interval_gate != SlotLayout::kAbsent) {
    const size_t g = layout.interval_gate;
    if (response.intervals.empty()) {
      tokens.push_back({g, 0, 0});
    } else {
      const Interval& iv = response.intervals.front();
      const size_t s = to_bin(iv.start, cell_t, t.bins, false);
      const size_t e = to_bin(iv.end, cell_t, t.bins, true);
      tokens.push_back({g, 1, 0});
      tokens.push_back({g + 1, s, 0});
      tokens.push_back({g + 2, e, s});
    }
  }
  return tokens;
}

SampledResponse policy_sample(const SlotPolicy& policy,
                              const ResponseTemplate& t,
                              std::span<const double> observation,
                              CounterRng& rng, DecodeMode mode) {
  const SlotLayout layout(t);
  SampledResponse out;
  auto draw = [&](size_t slot, size_t lower) {
    const auto p = policy.probabilities(slot, observation, lower);
    size_t choice;
    if (mode == DecodeMode::kArgmax) {
      choice = static_cast<size_t>(
          std::max_element(p.begin() + lower, p.end()) - p.begin());
    } else {
      choice = rng.categorical(p);
    }
    out.tokens.push_back({slot, choice, lower});
    out.token_logprobs.push_back(std::log(p[choice]));
    return choice;
  };
  draw(layout.label, 0);
  if (layout.box_gate != SlotLayout::kAbsent) {
    const size_t g = layout.box_gate;
    if (draw(g, 0) == 1) {
      const size_t x1 = draw(g + 1, 0);
      draw(g + 2, x1);
      const size_t y1 = draw(g + 3, 0);
      draw(g + 4, y1);
    }
  }
  if (layout.interval_gate != SlotLayout::kAbsent) {
    const size_t g = layout.interval_gate;
    if (draw(g, 0) == 1) {
      const size_t s = draw(g + 1, 0);
      draw(g + 2, s);
    }
  }
  out.response = response_for_tokens(t, out.tokens);
  for (double lp : out.token_logprobs) out.logprob += lp;
  return out;
}

std::vector<double> token_logprobs(const SlotPolicy& policy,
                                   std::span<const double> observation,
                                   std::span<const Token> tokens) {
  std::vector<double> out;
  out.reserve(tokens.size());
  std::vector<double> z;
  for (const Token& tok : tokens) {
    z.resize(policy.slot_size(tok.slot));
    policy.logits(tok.slot, observation, z);
    out.push_back(z[tok.choice] - logsumexp(z, tok.lower));
  }
  return out;
}

void accumulate_token_gradients(const SlotPolicy& policy,
                                std::span<const double> observation,
                                std::span<const Token> tokens,
                                std::span<const double> weights,
                                std::span<double> grad) {
  const size_t dim = policy.dim();
  for (size_t t = 0; t < tokens.size(); ++t) {
    const double w = weights[t];
    if (w == 0.0) continue;
    const Token& tok = tokens[t];
    const auto p = policy.probabilities(tok.slot, observation, tok.lower);
    for (size_t k = tok.lower; k < p.size(); ++k) {
      const double coef = w * ((k == tok.choice ? 1.0 : 0.0) - p[k]);
      double* g = grad.data() + policy.offset(tok.slot, k);
      for (size_t d = 0; d < dim; ++d) g[d] += coef * observation[d];
    }
  }
}

LogProbGrad policy_logprob_and_grad(const SlotPolicy& policy,
                                    const ResponseTemplate& t,
                                    std::span<const double> observation,
                                    const ParsedResponse& response) {
  const auto tokens = tokens_for_response(t, response);
  LogProbGrad out;
  out.token_logprobs = token_logprobs(policy, observation, tokens);
  for (double lp : out.token_logprobs) out.logprob += lp;
  out.gradient.assign(policy.num_params(), 0.0);
  const std::vector<double> ones(tokens.size(), 1.0);
  accumulate_token_gradients(policy, observation, tokens, ones, out.gradient);
  return out;
}

std::string policy_to_json_text(const SlotPolicy& policy) {
  nlohmann::ordered_json j;
  j["dim"] = policy.dim();
  j["slot_sizes"] = policy.slot_sizes();
  j["params"] = std::vector<double>(policy.params().begin(),
                                    policy.params().end());
  return j.dump();
}

SlotPolicy policy_from_json_text(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SlotPolicy policy(j.at("dim").get<size_t>(),
                      j.at("slot_sizes").get<std::vector<size_t>>());
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != policy.num_params()) {
      throw Error(ErrorCode::kDimensionMismatch, "checkpoint parameter count");
    }
    std::copy(params.begin(), params.end(), policy.params().begin());
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace dlerl
