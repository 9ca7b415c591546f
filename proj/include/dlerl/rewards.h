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

// Verifiable reward terms for detect/locate/explain responses and their
// weighted composite:
//
//   total = w_fmt * r_fmt + w_acc * r_acc + w_bbox * r_bbox + w_int * r_int

#ifndef DLERL_REWARDS_H_
#define DLERL_REWARDS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlerl/geometry.h"
#include "dlerl/structured_output.h"
#include "dlerl/types.h"

namespace dlerl {

struct GroundTruth {
  std::string sample_id;
  Modality modality = Modality::kImage;
  Label label = Label::kReal;
  std::optional<Box> gt_box;
  std::vector<Interval> gt_intervals;
  std::optional<double> duration;
  std::optional<std::string> reference_explanation;
  std::vector<double> explanation_embedding;

  // Throws Error{kInvalidGroundTruth} describing the first broken invariant.
  void validate() const;
  bool tampered() const { return label == Label::kTampered; }
};

struct RewardWeights {
  double format = 0.3;
  double detection = 0.5;
  double bbox = 1.0;
  double interval = 1.0;

  void validate() const;
  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;
};

// Reward for a correct label; every wrong label earns 0.
struct DetectionRewardValues {
  double correct_tampered = 1.0;
  double correct_other = 0.7;
};

enum class BoxScoring {
  kFirstBox,  // IoU of the first predicted box
  kMaxIou,    // best IoU over all predicted boxes
};

struct RewardConfig {
  RewardWeights weights;
  DetectionRewardValues detection;
  BoxScoring box_scoring = BoxScoring::kFirstBox;
  MatchDenominator interval_denominator = MatchDenominator::kMaxCount;

  // Highest total reachable for a sample with the given label.
  double max_total(Label truth) const;
  // Highest total over all labels (2.8 with the default weights).
  double max_total() const;
};

struct RewardBreakdown {
  double r_fmt = 0.0;
  double r_acc = 0.0;
  double r_bbox = 0.0;
  double r_int = 0.0;
  RewardWeights weights;
  double total = 0.0;
};

double format_reward(std::string_view text, const ParseContext& context = {});

// Throws Error{kLabelSpaceMismatch} when one label is binary-only (FAKE) and
// the other ternary-only (TAMPERED, FULL_SYNTHETIC).
double detection_reward(Label pred, Label truth,
                        const DetectionRewardValues& values = {});

double spatial_reward(std::span<const Box> pred_boxes, const GroundTruth& truth,
                      BoxScoring scoring = BoxScoring::kFirstBox);

double temporal_reward(
    std::span<const Interval> pred_intervals, const GroundTruth& truth,
    MatchDenominator denominator = MatchDenominator::kMaxCount);

// Scores a parsed response. The format term is 1.
RewardBreakdown score_parsed(const ParsedResponse& response,
                             const GroundTruth& truth,
                             const RewardConfig& config = {});

// Unparseable text yields the all-zero breakdown.
RewardBreakdown composite_reward(std::string_view text,
                                 const GroundTruth& truth,
                                 const RewardConfig& config = {});

// Loads weights and the other reward knobs from a JSON object such as
// {"weights": {"format": 0.3, ...}, "detection": {...},
//  "box_scoring": "first"|"max", "interval_denominator": "max_count"|"pairs"}.
// Missing keys keep their defaults. Throws Error{kParseError/kIoError}.
RewardConfig load_reward_config(const std::string& path);
RewardConfig reward_config_from_json_text(std::string_view text);
std::string reward_config_to_json_text(const RewardConfig& config);

}  // namespace dlerl

#endif  // DLERL_REWARDS_H_
