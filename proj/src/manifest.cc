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

#include "dlerl/manifest.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "dlerl/error.h"
#include "json.hpp"

namespace dlerl {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

Error parse_error(const std::string& what) {
  return Error(ErrorCode::kParseError, what);
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return in;
}

}  // namespace

SampleRecord parse_sample_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw parse_error(std::string("manifest line: ") + e.what());
  }
  SampleRecord r;
  GroundTruth& t = r.truth;
  try {
    t.sample_id = j.at("id").get<std::string>();
    const auto modality = modality_from_name(j.at("modality").get<std::string>());
    if (!modality) throw parse_error(t.sample_id + ": unknown modality");
    t.modality = *modality;
    const auto label = label_from_name(j.at("label").get<std::string>());
    if (!label) throw parse_error(t.sample_id + ": unknown label");
    t.label = *label;
    r.media = j.value("media", std::string());
    if (j.contains("box")) {
      const auto b = j.at("box").get<std::vector<double>>();
      if (b.size() != 4) throw parse_error(t.sample_id + ": box needs 4 values");
      t.gt_box = Box{b[0], b[1], b[2], b[3]};
    }
    if (j.contains("mask")) {
      r.mask_rle = j.at("mask").get<std::string>();
      if (!t.gt_box) {
        const Mask mask = mask_from_rle(*r.mask_rle);
        if (mask.popcount() > 0) t.gt_box = mask_to_bbox(mask);
      }
    }
    if (j.contains("intervals")) {
      for (const auto& iv : j.at("intervals")) {
        const auto v = iv.get<std::vector<double>>();
        if (v.size() != 2) {
          throw parse_error(t.sample_id + ": interval needs 2 values");
        }
        t.gt_intervals.push_back(Interval{v[0], v[1]});
      }
    }
    if (j.contains("duration")) t.duration = j.at("duration").get<double>();
    if (j.contains("explanation")) {
      t.reference_explanation = j.at("explanation").get<std::string>();
    }
    if (j.contains("embedding")) {
      t.explanation_embedding = j.at("embedding").get<std::vector<double>>();
    }
  } catch (const json::exception& e) {
    throw parse_error(std::string("manifest line: ") + e.what());
  }
  t.validate();
  return r;
}

std::string sample_record_to_json_line(const SampleRecord& r) {
  const GroundTruth& t = r.truth;
  ordered_json j;
  j["id"] = t.sample_id;
  j["modality"] = modality_name(t.modality);
  j["label"] = label_name(t.label);
  if (!r.media.empty()) j["media"] = r.media;
  if (r.mask_rle) {
    j["mask"] = *r.mask_rle;
  } else if (t.gt_box) {
    j["box"] = {t.gt_box->x1, t.gt_box->y1, t.gt_box->x2, t.gt_box->y2};
  }
  if (!t.gt_intervals.empty()) {
    ordered_json ivs = ordered_json::array();
    for (const Interval& iv : t.gt_intervals) ivs.push_back({iv.start, iv.end});
    j["intervals"] = ivs;
  }
  if (t.duration) j["duration"] = *t.duration;
  if (t.reference_explanation) j["explanation"] = *t.reference_explanation;
  if (!t.explanation_embedding.empty()) j["embedding"] = t.explanation_embedding;
  return j.dump();
}

std::vector<SampleRecord> read_sample_records(std::istream& in) {
  std::vector<SampleRecord> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    SampleRecord r = parse_sample_record(line);
    if (!seen.insert(r.id()).second) {
      throw Error(ErrorCode::kDuplicateSampleId, r.id());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SampleRecord> load_sample_records(const std::string& path) {
  auto in = open_or_throw(path);
  return read_sample_records(in);
}

std::vector<DatasetManifest> group_by_modality(
    const std::vector<SampleRecord>& records) {
  std::vector<DatasetManifest> out;
  for (Modality m : kAllModalities) {
    DatasetManifest manifest;
    manifest.modality = m;
    for (const SampleRecord& r : records) {
      if (r.truth.modality == m) manifest.entries.push_back(r);
    }
    if (!manifest.entries.empty()) out.push_back(std::move(manifest));
  }
  return out;
}

void write_sample_records(std::ostream& out,
                          const std::vector<SampleRecord>& records) {
  for (const SampleRecord& r : records) {
    out << sample_record_to_json_line(r) << '\n';
  }
}

std::vector<ResponseRecord> read_response_records(std::istream& in) {
  std::vector<ResponseRecord> out;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line)) continue;
    ResponseRecord r;
    try {
      const json j = json::parse(line);
      r.sample_id = j.at("sample_id").get<std::string>();
      r.response_text = j.at("response_text").get<std::string>();
      if (j.contains("embedding")) {
        r.embedding = j.at("embedding").get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      throw parse_error(std::string("response line: ") + e.what());
    }
    if (!seen.insert(r.sample_id).second) {
      throw Error(ErrorCode::kDuplicateSampleId, r.sample_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ResponseRecord> load_response_records(const std::string& path) {
  auto in = open_or_throw(path);
  return read_response_records(in);
}

std::string response_record_to_json_line(const ResponseRecord& r) {
  ordered_json j;
  j["sample_id"] = r.sample_id;
  j["response_text"] = r.response_text;
  if (!r.embedding.empty()) j["embedding"] = r.embedding;
  return j.dump();
}

}  // namespace dlerl
