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

// Line-delimited sample manifests and response files. docs/schema.md lists
// every field.

#ifndef DLERL_MANIFEST_H_
#define DLERL_MANIFEST_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dlerl/rewards.h"

namespace dlerl {

struct SampleRecord {
  GroundTruth truth;  // truth.sample_id is the record id
  std::string media;
  // Original mask annotation, kept so bundles re-emit it unchanged.
  std::optional<std::string> mask_rle;

  const std::string& id() const { return truth.sample_id; }
};

struct DatasetManifest {
  Modality modality = Modality::kImage;
  std::vector<SampleRecord> entries;
};

// Parses one manifest line. A "mask" without a "box" is reduced to its
// tight box; an empty mask leaves the sample without spatial truth.
// Throws Error{kParseError} or Error{kInvalidGroundTruth}.
SampleRecord parse_sample_record(std::string_view line);
std::string sample_record_to_json_line(const SampleRecord& record);

// Blank lines are skipped. Ids must be unique within the file
// (Error{kDuplicateSampleId}).
std::vector<SampleRecord> read_sample_records(std::istream& in);
std::vector<SampleRecord> load_sample_records(const std::string& path);

// Splits records by modality, preserving file order.
std::vector<DatasetManifest> group_by_modality(
    const std::vector<SampleRecord>& records);

void write_sample_records(std::ostream& out,
                          const std::vector<SampleRecord>& records);

struct ResponseRecord {
  std::string sample_id;
  std::string response_text;
  // Optional embedding of the response's explanation.
  std::vector<double> embedding;
};

// Throws Error{kDuplicateSampleId} on repeated ids.
std::vector<ResponseRecord> read_response_records(std::istream& in);
std::vector<ResponseRecord> load_response_records(const std::string& path);
std::string response_record_to_json_line(const ResponseRecord& record);

}  // namespace dlerl

#endif  // DLERL_MANIFEST_H_
