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

// Thin bindings: structured values cross the boundary as JSON text and
// are decoded by the Python package.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "dlerl/curriculum.h"
#include "dlerl/error.h"
#include "dlerl/harness.h"
#include "dlerl/manifest.h"
#include "dlerl/metrics.h"
#include "dlerl/rewards.h"
#include "dlerl/structured_output.h"
#include "json.hpp"

namespace py = pybind11;
using nlohmann::ordered_json;

namespace {

std::optional<dlerl::Modality> modality_arg(
    const std::optional<std::string>& name) {
  if (!name) return std::nullopt;
  auto m = dlerl::modality_from_name(*name);
  if (!m) {
    throw dlerl::Error(dlerl::ErrorCode::kInvalidArgument,
                       "unknown modality " + *name);
  }
  return m;
}

dlerl::RewardConfig reward_arg(const std::optional<std::string>& config) {
  return config ? dlerl::reward_config_from_json_text(*config)
                : dlerl::RewardConfig{};
}

std::string breakdown_json(const dlerl::RewardBreakdown& b) {
  ordered_json j;
  j["r_fmt"] = b.r_fmt;
  j["r_acc"] = b.r_acc;
  j["r_bbox"] = b.r_bbox;
  j["r_int"] = b.r_int;
  j["total"] = b.total;
  return j.dump();
}

std::string check_format_json(const std::string& text,
                              const std::optional<std::string>& modality,
                              std::optional<double> duration) {
  const auto report =
      dlerl::check_format(text, {modality_arg(modality), duration});
  ordered_json j;
  j["well_formed"] = report.well_formed;
  ordered_json v = ordered_json::array();
  for (auto code : report.violations) v.push_back(dlerl::violation_name(code));
  j["violations"] = v;
  return j.dump();
}

std::string parse_json(const std::string& text,
                       const std::optional<std::string>& modality,
                       std::optional<double> duration) {
  return dlerl::parsed_response_to_json_text(
      dlerl::parse_response(text, {modality_arg(modality), duration}));
}

std::string reward_json(const std::string& text, const std::string& truth_line,
                        const std::optional<std::string>& config) {
  const auto record = dlerl::parse_sample_record(truth_line);
  return breakdown_json(
      dlerl::composite_reward(text, record.truth, reward_arg(config)));
}

std::vector<double> score_batch(const std::vector<std::string>& texts,
                                const std::vector<std::string>& truth_lines,
                                const std::optional<std::string>& config) {
  if (texts.size() != truth_lines.size()) {
    throw dlerl::Error(dlerl::ErrorCode::kLengthMismatch,
                       "texts and truths differ in length");
  }
  const dlerl::RewardConfig reward = reward_arg(config);
  std::vector<dlerl::GroundTruth> truths;
  for (const auto& line : truth_lines) {
    truths.push_back(dlerl::parse_sample_record(line).truth);
  }
  std::vector<double> out(texts.size());
  py::gil_scoped_release release;
  for (size_t i = 0; i < texts.size(); ++i) {
    out[i] = dlerl::composite_reward(texts[i], truths[i], reward).total;
  }
  return out;
}

std::string evaluate_json(const std::string& responses,
                          const std::string& manifest, double tau) {
  dlerl::EvalReport report;
  {
    py::gil_scoped_release release;
    report = dlerl::evaluate_files(responses, manifest, tau);
  }
  return dlerl::eval_report_to_json_text(report);
}

std::string stage_plans_json(const std::vector<std::string>& manifest_paths,
                             double ratio, uint64_t seed) {
  std::vector<dlerl::SampleRecord> records;
  for (const auto& p : manifest_paths) {
    auto part = dlerl::load_sample_records(p);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto plan =
      dlerl::build_stage_plans(dlerl::group_by_modality(records), ratio, seed);
  ordered_json stages = ordered_json::array();
  for (const auto& s : plan.stages) {
    ordered_json j;
    j["stage"] = s.stage_index;
    j["new_modality"] = dlerl::modality_name(s.new_modality);
    ordered_json counts, ids;
    for (auto m : dlerl::kStageOrder) {
      const auto it = s.included.find(m);
      if (it == s.included.end()) continue;
      counts[std::string(dlerl::modality_name(m))] = it->second.size();
      ids[std::string(dlerl::modality_name(m))] = it->second;
    }
    j["counts"] = counts;
    j["ids"] = ids;
    stages.push_back(j);
  }
  return stages.dump();
}

}  // namespace

PYBIND11_MODULE(_dlerl, m) {
  m.doc() = "Native core of dlerl.";
  // Messages start with the error code name, e.g. "IoError: ...".
  py::register_exception<dlerl::Error>(m, "Error", PyExc_ValueError);

  m.def("check_format", &check_format_json, py::arg("text"),
        py::arg("modality") = py::none(), py::arg("duration") = py::none());
  m.def("parse_response", &parse_json, py::arg("text"),
        py::arg("modality") = py::none(), py::arg("duration") = py::none());
  m.def("composite_reward", &reward_json, py::arg("text"),
        py::arg("truth"), py::arg("config") = py::none());
  m.def("score_batch", &score_batch, py::arg("texts"), py::arg("truths"),
        py::arg("config") = py::none());
  m.def("evaluate_files", &evaluate_json, py::arg("responses"),
        py::arg("manifest"), py::arg("tau") = dlerl::kDefaultIouThreshold);
  m.def("build_stage_plans", &stage_plans_json, py::arg("manifests"),
        py::arg("replay_ratio") = dlerl::kDefaultReplayRatio,
        py::arg("seed") = 0);
}
