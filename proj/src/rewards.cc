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

#include "dlerl/rewards.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dlerl/error.h"
#include "json.hpp"

namespace dlerl {

void GroundTruth::validate() const {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidGroundTruth, sample_id + ": " + what);
  };
  if (!label_in_space(label, modality)) {
    fail("label " + std::string(label_name(label)) + " not valid for " +
         std::string(modality_name(modality)));
  }
  if (gt_box && !gt_box->valid()) fail("invalid box");
  if (duration && !(std::isfinite(*duration) && *duration > 0.0)) {
    fail("invalid duration");
  }
  for (const Interval& interval : gt_intervals) {
    const bool ok =
        duration ? interval.valid_within(*duration) : interval.valid();
    if (!ok) fail("invalid interval");
  }
  if (tampered()) {
    if (!gt_box && gt_intervals.empty()) {
      fail("tampered sample without box or intervals");
    }
  } else if (gt_box || !gt_intervals.empty()) {
    fail("untampered sample carries localization");
  }
}

void RewardWeights::validate() const {
  for (double w : {format, detection, bbox, interval}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "reward weights must be finite and non-negative");
    }
  }
}

double RewardConfig::max_total(Label truth) const {
  const double acc = truth == Label::kTampered ? detection.correct_tampered
                                               : detection.correct_other;
  return weights.format + weights.detection * acc + weights.bbox +
         weights.interval;
}

double RewardConfig::max_total() const {
  return std::max(max_total(Label::kTampered), max_total(Label::kReal));
}

double format_reward(std::string_view text, const ParseContext& context) {
  return check_format(text, context).well_formed ? 1.0 : 0.0;
}

double detection_reward(Label pred, Label truth,
                        const DetectionRewardValues& values) {
  auto binary_only = [](Label l) { return l == Label::kFake; };
  auto ternary_only = [](Label l) {
    return l == Label::kTampered || l == Label::kFullSynthetic;
  };
  if ((binary_only(pred) && ternary_only(truth)) ||
      (ternary_only(pred) && binary_only(truth))) {
    throw Error(ErrorCode::kLabelSpaceMismatch,
                std::string(label_name(pred)) + " vs " +
                    std::string(label_name(truth)));
  }
  if (pred != truth) return 0.0;
  return truth == Label::kTampered ? values.correct_tampered
                                   : values.correct_other;
}

double spatial_reward(std::span<const Box> pred_boxes, const GroundTruth& truth,
                      BoxScoring scoring) {
  if (!truth.tampered() || !truth.gt_box) {
    return pred_boxes.empty() ? 1.0 : 0.0;
  }
  if (pred_boxes.empty()) return 0.0;
  if (scoring == BoxScoring::kFirstBox) {
    return box_iou(pred_boxes.front(), *truth.gt_box);
  }
  double best = 0.0;
  for (const Box& box : pred_boxes) {
    best = std::max(best, box_iou(box, *truth.gt_box));
  }
  return best;
}

double temporal_reward(std::span<const Interval> pred_intervals,
                       const GroundTruth& truth,
                       MatchDenominator denominator) {
  if (!truth.tampered() || truth.gt_intervals.empty()) {
    return pred_intervals.empty() ? 1.0 : 0.0;
  }
  return match_intervals(pred_intervals, truth.gt_intervals, denominator)
      .mean_iou;
}

RewardBreakdown score_parsed(const ParsedResponse& response,
                             const GroundTruth& truth,
                             const RewardConfig& config) {
  RewardBreakdown out;
  out.weights = config.weights;
  out.r_fmt = 1.0;
  out.r_acc = detection_reward(response.label, truth.label, config.detection);
  out.r_bbox = spatial_reward(response.boxes, truth, config.box_scoring);
  out.r_int =
      temporal_reward(response.intervals, truth, config.interval_denominator);
  const RewardWeights& w = config.weights;
  out.total = w.format * out.r_fmt + w.detection * out.r_acc +
              w.bbox * out.r_bbox + w.interval * out.r_int;
  return out;
}

RewardBreakdown composite_reward(std::string_view text,
                                 const GroundTruth& truth,
                                 const RewardConfig& config) {
  ParseContext context;
  context.modality = truth.modality;
  context.duration = truth.duration;
  auto outcome = try_parse_response(text, context);
  if (!outcome.response) {
    RewardBreakdown zero;
    zero.weights = config.weights;
    return zero;
  }
  return score_parsed(*outcome.response, truth, config);
}

RewardConfig reward_config_from_json_text(std::string_view text) {
  RewardConfig config;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      config.weights.format = w.value("format", config.weights.format);
      config.weights.detection = w.value("detection", config.weights.detection);
      config.weights.bbox = w.value("bbox", config.weights.bbox);
      config.weights.interval = w.value("interval", config.weights.interval);
    }
    if (j.contains("detection")) {
      const auto& d = j.at("detection");
      config.detection.correct_tampered =
          d.value("correct_tampered", config.detection.correct_tampered);
      config.detection.correct_other =
          d.value("correct_other", config.detection.correct_other);
    }
    if (j.contains("box_scoring")) {
      const std::string mode = j.at("box_scoring").get<std::string>();
      if (mode == "first") {
        config.box_scoring = BoxScoring::kFirstBox;
      } else if (mode == "max") {
        config.box_scoring = BoxScoring::kMaxIou;
      } else {
        throw Error(ErrorCode::kParseError, "unknown box_scoring " + mode);
      }
    }
    if (j.contains("interval_denominator")) {
      const std::string mode = j.at("interval_denominator").get<std::string>();
      if (mode == "max_count") {
        config.interval_denominator = MatchDenominator::kMaxCount;
      } else if (mode == "pairs") {
        config.interval_denominator = MatchDenominator::kMatchedPairs;
      } else {
        throw Error(ErrorCode::kParseError,
                    "unknown interval_denominator " + mode);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  config.weights.validate();
  return config;
}

RewardConfig load_reward_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return reward_config_from_json_text(buf.str());
}

std::string reward_config_to_json_text(const RewardConfig& config) {
  nlohmann::ordered_json j;
  j["weights"] = {{"format", config.weights.format},
                  {"detection", config.weights.detection},
                  {"bbox", config.weights.bbox},
                  {"interval", config.weights.interval}};
  j["detection"] = {{"correct_tampered", config.detection.correct_tampered},
                    {"correct_other", config.detection.correct_other}};
  j["box_scoring"] =
      config.box_scoring == BoxScoring::kFirstBox ? "first" : "max";
  j["interval_denominator"] =
      config.interval_denominator == MatchDenominator::kMaxCount ? "max_count"
                                                                 : "pairs";
  return j.dump();
}

}  // namespace dlerl
