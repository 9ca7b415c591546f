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

// Evaluation metrics: detection accuracy and macro F1, localization IoU and
// F1, ROUGE-L, cosine similarity, and per-modality run reports.

#ifndef DLERL_METRICS_H_
#define DLERL_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlerl/manifest.h"
#include "dlerl/rewards.h"

namespace dlerl {

inline constexpr double kDefaultIouThreshold = 0.5;

// counts[t][p]: truth labels[t] predicted as labels[p]; the extra last
// column counts unparseable predictions.
struct ConfusionMatrix {
  std::vector<Label> labels;
  std::vector<std::vector<size_t>> counts;

  size_t total() const;
  size_t correct() const;
  size_t invalid() const;
};

struct DetectionPair {
  std::optional<Label> pred;  // nullopt: no usable prediction
  Label truth = Label::kReal;
};

struct DetectionMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
};

// The label space is binary when any label is FAKE, ternary otherwise.
// Classes absent from both truths and predictions are left out of the
// macro mean. Throws Error{kEmptyInput} and Error{kLabelSpaceMismatch}.
DetectionMetrics detection_metrics(std::span<const DetectionPair> pairs);

struct LocalizationMetrics {
  std::optional<double> mean_iou;  // over tampered samples; none if absent
  double f1 = 1.0;
  size_t true_positives = 0;
  size_t false_positives = 0;
  size_t false_negatives = 0;
};

// Per tampered sample the IoU is the box IoU of the first predicted box,
// the matched interval IoU, or their mean when both are annotated. A hit
// needs IoU >= tau; a miss is a false negative only. Any box or interval
// predicted for a non-tampered sample is a false positive. With no
// possible errors f1 is 1. Throws Error{kLengthMismatch} and
// Error{kInvalidArgument} for tau outside (0, 1).
LocalizationMetrics localization_metrics(
    std::span<const std::optional<ParsedResponse>> preds,
    std::span<const GroundTruth> truths, double tau = kDefaultIouThreshold);

// IoU used by localization_metrics, or nullopt when the sample carries no
// localization truth.
std::optional<double> sample_localization_iou(
    const std::optional<ParsedResponse>& pred, const GroundTruth& truth);

// LCS F-measure (beta 1) over lowercased whitespace tokens. Two empty
// texts score 1.
double rouge_l(std::string_view candidate, std::string_view reference);

// Throws Error{kDimensionMismatch} and Error{kZeroVector}.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct ModalityReport {
  Modality modality = Modality::kImage;
  size_t samples = 0;
  size_t unparseable = 0;  // includes samples with no response row
  DetectionMetrics detection;
  LocalizationMetrics localization;
  std::optional<double> rouge_l;  // over samples with a reference text
  std::optional<double> css;      // over samples with both embeddings
};

struct EvalReport {
  double tau = kDefaultIouThreshold;
  std::vector<ModalityReport> modalities;  // present modalities only
};

// Every manifest sample is scored; a sample without a response row, or
// with one that does not parse, counts as a wrong label with no
// localization and an empty explanation. Throws Error{kEmptyInput} for no
// responses and Error{kUnknownSampleId} for rows not in the manifest.
EvalReport evaluate_run(std::span<const ResponseRecord> responses,
                        std::span<const SampleRecord> manifest,
                        double tau = kDefaultIouThreshold);
EvalReport evaluate_files(const std::string& responses_path,
                          const std::string& manifest_path,
                          double tau = kDefaultIouThreshold);

std::string eval_report_to_text(const EvalReport& report);
// Single JSON object; doubles use the shortest round-trip form.
std::string eval_report_to_json_text(const EvalReport& report);

}  // namespace dlerl

#endif  // DLERL_METRICS_H_
