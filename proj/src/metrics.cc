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

#include "dlerl/metrics.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "dlerl/error.h"
#include "json.hpp"

namespace dlerl {

size_t ConfusionMatrix::total() const {
  size_t n = 0;
  for (const auto& row : counts) {
    for (size_t c : row) n += c;
  }
  return n;
}

size_t ConfusionMatrix::correct() const {
  size_t n = 0;
  for (size_t i = 0; i < labels.size(); ++i) n += counts[i][i];
  return n;
}

size_t ConfusionMatrix::invalid() const {
  size_t n = 0;
  for (const auto& row : counts) n += row.back();
  return n;
}

namespace {

bool binary_only(Label l) { return l == Label::kFake; }
bool ternary_only(Label l) {
  return l == Label::kTampered || l == Label::kFullSynthetic;
}

size_t index_in(std::span<const Label> space, Label l) {
  const auto it = std::find(space.begin(), space.end(), l);
  if (it == space.end()) {
    throw Error(ErrorCode::kLabelSpaceMismatch,
                std::string(label_name(l)) + " outside the label space");
  }
  return static_cast<size_t>(it - space.begin());
}

std::vector<std::string> tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

size_t lcs_length(const std::vector<std::string>& a,
                  const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

DetectionMetrics detection_metrics(std::span<const DetectionPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "no detection pairs");
  bool binary = false, ternary = false;
  for (const DetectionPair& p : pairs) {
    binary |= binary_only(p.truth) || (p.pred && binary_only(*p.pred));
    ternary |= ternary_only(p.truth) || (p.pred && ternary_only(*p.pred));
  }
  if (binary && ternary) {
    throw Error(ErrorCode::kLabelSpaceMismatch,
                "binary and ternary labels in one evaluation");
  }
  const std::span<const Label> space =
      binary ? std::span<const Label>(kBinaryLabels)
             : std::span<const Label>(kTernaryLabels);
  const size_t k = space.size();

  DetectionMetrics out;
  ConfusionMatrix& cm = out.confusion;
  cm.labels.assign(space.begin(), space.end());
  cm.counts.assign(k, std::vector<size_t>(k + 1, 0));
  for (const DetectionPair& p : pairs) {
    const size_t t = index_in(space, p.truth);
    const size_t c = p.pred ? index_in(space, *p.pred) : k;
    ++cm.counts[t][c];
  }
  out.accuracy =
      static_cast<double>(cm.correct()) / static_cast<double>(cm.total());

  double f1_sum = 0.0;
  size_t classes = 0;
  for (size_t c = 0; c < k; ++c) {
    const size_t tp = cm.counts[c][c];
    size_t fp = 0, fn = 0;
    for (size_t t = 0; t < k; ++t) {
      if (t != c) fp += cm.counts[t][c];
    }
    for (size_t q = 0; q <= k; ++q) {
      if (q != c) fn += cm.counts[c][q];
    }
    if (tp + fp + fn == 0) continue;
    f1_sum += 2.0 * static_cast<double>(tp) /
              static_cast<double>(2 * tp + fp + fn);
    ++classes;
  }
  out.macro_f1 = f1_sum / static_cast<double>(classes);
  return out;
}

std::optional<double> sample_localization_iou(
    const std::optional<ParsedResponse>& pred, const GroundTruth& truth) {
  std::vector<double> parts;
  if (truth.gt_box) {
    parts.push_back(pred && !pred->boxes.empty()
                        ? box_iou(pred->boxes.front(), *truth.gt_box)
                        : 0.0);
  }
  if (!truth.gt_intervals.empty()) {
    const std::vector<Interval> none;
    parts.push_back(
        match_intervals(pred ? pred->intervals : none, truth.gt_intervals)
            .mean_iou);
  }
  if (parts.empty()) return std::nullopt;
  double sum = 0.0;
  for (double p : parts) sum += p;
  return sum / static_cast<double>(parts.size());
}

LocalizationMetrics localization_metrics(
    std::span<const std::optional<ParsedResponse>> preds,
    std::span<const GroundTruth> truths, double tau) {
  if (preds.size() != truths.size()) {
    throw Error(ErrorCode::kLengthMismatch, "predictions vs truths");
  }
  if (!(tau > 0.0 && tau < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau outside (0, 1)");
  }
  LocalizationMetrics out;
  double iou_sum = 0.0;
  size_t scored = 0;
  for (size_t i = 0; i < truths.size(); ++i) {
    const GroundTruth& t = truths[i];
    const auto& p = preds[i];
    if (!t.tampered()) {
      if (p && (!p->boxes.empty() || !p->intervals.empty())) {
        ++out.false_positives;
      }
      continue;
    }
    const auto iou = sample_localization_iou(p, t);
    if (!iou) continue;
    iou_sum += *iou;
    ++scored;
    if (*iou >= tau) {
      ++out.true_positives;
    } else {
      ++out.false_negatives;
    }
  }
  if (scored > 0) out.mean_iou = iou_sum / static_cast<double>(scored);
  const size_t denom =
      2 * out.true_positives + out.false_positives + out.false_negatives;
  out.f1 = denom == 0 ? 1.0
                      : 2.0 * static_cast<double>(out.true_positives) /
                            static_cast<double>(denom);
  return out;
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = tokens(candidate);
  const auto r = tokens(reference);
  if (c.empty() && r.empty()) return 1.0;
  if (c.empty() || r.empty()) return 0.0;
  const size_t lcs = lcs_length(c, r);
  if (lcs == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(c.size());
  const double rec = static_cast<double>(lcs) / static_cast<double>(r.size());
  return 2.0 * p * rec / (p + rec);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(ErrorCode::kZeroVector, "cosine");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

EvalReport evaluate_run(std::span<const ResponseRecord> responses,
                        std::span<const SampleRecord> manifest, double tau) {
  if (responses.empty()) throw Error(ErrorCode::kEmptyInput, "no responses");
  std::map<std::string, const ResponseRecord*> by_id;
  for (const ResponseRecord& r : responses) {
    if (!by_id.emplace(r.sample_id, &r).second) {
      throw Error(ErrorCode::kDuplicateSampleId, r.sample_id);
    }
  }
  std::map<std::string, const SampleRecord*> samples;
  for (const SampleRecord& s : manifest) samples.emplace(s.id(), &s);
  for (const auto& [id, r] : by_id) {
    if (!samples.count(id)) throw Error(ErrorCode::kUnknownSampleId, id);
  }

  EvalReport report;
  report.tau = tau;
  for (Modality m : kAllModalities) {
    std::vector<DetectionPair> pairs;
    std::vector<std::optional<ParsedResponse>> preds;
    std::vector<GroundTruth> truths;
    double rouge_sum = 0.0, css_sum = 0.0;
    size_t rouge_n = 0, css_n = 0, unparseable = 0;
    for (const auto& [id, s] : samples) {
      const GroundTruth& t = s->truth;
      if (t.modality != m) continue;
      std::optional<ParsedResponse> pred;
      const ResponseRecord* row = nullptr;
      if (const auto it = by_id.find(id); it != by_id.end()) {
        row = it->second;
        pred = try_parse_response(row->response_text, {m, t.duration}).response;
      }
      if (!pred) ++unparseable;
      pairs.push_back({pred ? std::optional(pred->label) : std::nullopt,
                       t.label});
      preds.push_back(pred);
      truths.push_back(t);
      if (t.reference_explanation) {
        rouge_sum += rouge_l(pred ? pred->think_text : std::string(),
                             *t.reference_explanation);
        ++rouge_n;
      }
      if (row && !row->embedding.empty() && !t.explanation_embedding.empty()) {
        css_sum += cosine_similarity(row->embedding, t.explanation_embedding);
        ++css_n;
      }
    }
    if (truths.empty()) continue;
    ModalityReport mr;
    mr.modality = m;
    mr.samples = truths.size();
    mr.unparseable = unparseable;
    mr.detection = detection_metrics(pairs);
    mr.localization = localization_metrics(preds, truths, tau);
    if (rouge_n > 0) mr.rouge_l = rouge_sum / static_cast<double>(rouge_n);
    if (css_n > 0) mr.css = css_sum / static_cast<double>(css_n);
    report.modalities.push_back(std::move(mr));
  }
  return report;
}

EvalReport evaluate_files(const std::string& responses_path,
                          const std::string& manifest_path, double tau) {
  const auto responses = load_response_records(responses_path);
  const auto manifest = load_sample_records(manifest_path);
  return evaluate_run(responses, manifest, tau);
}

namespace {

std::string fixed(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

}  // namespace

std::string eval_report_to_text(const EvalReport& report) {
  std::ostringstream out;
  char head[160];
  std::snprintf(head, sizeof(head),
                "%-6s %7s %7s %8s %8s %8s %8s %8s   (tau %.2f)\n", "mod",
                "n", "invalid", "acc", "macro_f1", "loc_iou", "loc_f1",
                "rouge_l", report.tau);
  out << head;
  for (const ModalityReport& m : report.modalities) {
    char line[200];
    std::snprintf(line, sizeof(line), "%-6s %7zu %7zu %8s %8s %8s %8s %8s",
                  std::string(modality_name(m.modality)).c_str(), m.samples,
                  m.unparseable, fixed(m.detection.accuracy).c_str(),
                  fixed(m.detection.macro_f1).c_str(),
                  fixed(m.localization.mean_iou).c_str(),
                  fixed(m.localization.f1).c_str(), fixed(m.rouge_l).c_str());
    out << line;
    if (m.css) out << "  css " << fixed(m.css);
    out << '\n';
  }
  return out.str();
}

std::string eval_report_to_json_text(const EvalReport& report) {
  using nlohmann::ordered_json;
  auto opt = [](std::optional<double> v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["tau"] = report.tau;
  ordered_json mods = ordered_json::array();
  for (const ModalityReport& m : report.modalities) {
    ordered_json e;
    e["modality"] = modality_name(m.modality);
    e["samples"] = m.samples;
    e["unparseable"] = m.unparseable;
    e["accuracy"] = m.detection.accuracy;
    e["macro_f1"] = m.detection.macro_f1;
    e["mean_loc_iou"] = opt(m.localization.mean_iou);
    e["loc_f1"] = m.localization.f1;
    e["rouge_l"] = opt(m.rouge_l);
    e["css"] = opt(m.css);
    ordered_json labels = ordered_json::array();
    for (Label l : m.detection.confusion.labels) labels.push_back(label_name(l));
    e["confusion"] = {{"labels", labels},
                      {"counts", m.detection.confusion.counts}};
    mods.push_back(std::move(e));
  }
  j["modalities"] = std::move(mods);
  return j.dump();
}

}  // namespace dlerl
