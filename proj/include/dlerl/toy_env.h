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

// Synthetic detect/locate/explain task and a slot-filling policy with
// analytic gradients.
//
// A response is a sequence of categorical "tokens", one per emitted slot:
//
//   label | box gate [x1 x2 y1 y2] | interval gate [start end]
//
// Coordinates live on a grid of `bins` cells. A box (a, b, c, d) maps to
// (a/B, c/B, (b+1)/B, (d+1)/B); the end slots are masked to bins >= their
// start slot, so every sampled response is valid. Gates choose between
// omitting (0) and emitting (1) the segment that follows them.

#ifndef DLERL_TOY_ENV_H_
#define DLERL_TOY_ENV_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlerl/rewards.h"
#include "dlerl/rng.h"
#include "dlerl/structured_output.h"

namespace dlerl {

struct ResponseTemplate {
  size_t bins = 20;
  double duration = 10.0;  // seconds spanned by the interval grid
  bool boxes = true;
  bool intervals = true;

  std::vector<size_t> slot_sizes() const;
  size_t num_slots() const { return slot_sizes().size(); }
};

// Slot indices inside the template layout; kAbsent when the segment is off.
struct SlotLayout {
  static constexpr size_t kAbsent = static_cast<size_t>(-1);
  size_t label = 0;
  size_t box_gate = kAbsent;  // followed by x1, x2, y1, y2
  size_t interval_gate = kAbsent;  // followed by start, end

  explicit SlotLayout(const ResponseTemplate& t);
};

// One emitted slot: the chosen category, sampled from categories
// [lower, K) of slot `slot`.
struct Token {
  size_t slot = 0;
  size_t choice = 0;
  size_t lower = 0;
  friend bool operator==(const Token&, const Token&) = default;
};

// Per-slot linear maps from observation features to categorical logits.
class SlotPolicy {
 public:
  SlotPolicy() = default;
  SlotPolicy(size_t dim, std::vector<size_t> slot_sizes);

  size_t dim() const { return dim_; }
  size_t num_slots() const { return slot_sizes_.size(); }
  size_t slot_size(size_t slot) const { return slot_sizes_[slot]; }
  const std::vector<size_t>& slot_sizes() const { return slot_sizes_; }
  size_t num_params() const { return params_.size(); }
  // Offset of W[slot][category][0] in the flat parameter vector.
  size_t offset(size_t slot, size_t category) const {
    return offsets_[slot] + category * dim_;
  }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  void logits(size_t slot, std::span<const double> obs,
              std::span<double> out) const;
  // Softmax over categories [lower, K); entries below `lower` are 0.
  std::vector<double> probabilities(size_t slot, std::span<const double> obs,
                                    size_t lower = 0) const;

  friend bool operator==(const SlotPolicy&, const SlotPolicy&) = default;

 private:
  size_t dim_ = 0;
  std::vector<size_t> slot_sizes_;
  std::vector<size_t> offsets_;
  std::vector<double> params_;
};

SlotPolicy make_policy(const ResponseTemplate& t, size_t dim);

// Task description for the synthetic episodes. Image episodes localize with
// a box, audio episodes with one interval.
struct ToyTaskConfig {
  ResponseTemplate response;
  std::vector<Modality> modalities = {Modality::kImage, Modality::kAudio};
  // Magnitude of the coordinate one-hot features. Larger values let the
  // per-bin weights outpace the shared bias and label features.
  double evidence_scale = 8.0;
  // One presence flag and one evidence block for both modalities: interval
  // start/end bins reuse the first 2B box positions.
  bool shared_evidence = false;
};

// Feature layout: [bias, modality one-hot (image, audio), label one-hot
// (REAL, TAMPERED, FULL_SYNTHETIC), box flag, x1 x2 y1 y2 bins one-hot,
// interval flag, start end bins one-hot]. Coordinate features carry
// task.evidence_scale instead of 1.
size_t observation_dim(const ToyTaskConfig& task);

struct Episode {
  std::vector<double> observation;
  GroundTruth truth;
};

// Modality is task.modalities[index % size]. Pure in all arguments.
Episode sample_episode(const ToyTaskConfig& task, uint64_t seed,
                       uint64_t index, double noise_level);
Episode sample_episode_for(const ToyTaskConfig& task, Modality modality,
                           uint64_t seed, uint64_t index, double noise_level);

// The truth-reading responder used as the Bayes ceiling.
ParsedResponse oracle_response(const GroundTruth& truth);

enum class DecodeMode { kSample, kArgmax };

struct SampledResponse {
  ParsedResponse response;
  std::vector<Token> tokens;
  std::vector<double> token_logprobs;
  double logprob = 0.0;
};

SampledResponse policy_sample(const SlotPolicy& policy,
                              const ResponseTemplate& t,
                              std::span<const double> observation,
                              CounterRng& rng,
                              DecodeMode mode = DecodeMode::kSample);

// Throws Error{kUnrepresentableResponse} when the response does not fit the
// template: more than one box or interval, off-grid coordinates, FAKE label,
// or a segment kind the template lacks.
std::vector<Token> tokens_for_response(const ResponseTemplate& t,
                                       const ParsedResponse& response);
ParsedResponse response_for_tokens(const ResponseTemplate& t,
                                   std::span<const Token> tokens);

std::vector<double> token_logprobs(const SlotPolicy& policy,
                                   std::span<const double> observation,
                                   std::span<const Token> tokens);

// grad += sum_t weights[t] * d log p(token t) / d params.
void accumulate_token_gradients(const SlotPolicy& policy,
                                std::span<const double> observation,
                                std::span<const Token> tokens,
                                std::span<const double> weights,
                                std::span<double> grad);

struct LogProbGrad {
  double logprob = 0.0;
  std::vector<double> token_logprobs;
  std::vector<double> gradient;  // size num_params()
};

LogProbGrad policy_logprob_and_grad(const SlotPolicy& policy,
                                    const ResponseTemplate& t,
                                    std::span<const double> observation,
                                    const ParsedResponse& response);

// Checkpoint I/O (JSON).
std::string policy_to_json_text(const SlotPolicy& policy);
SlotPolicy policy_from_json_text(std::string_view text);

}  // namespace dlerl

#endif  // DLERL_TOY_ENV_H_
