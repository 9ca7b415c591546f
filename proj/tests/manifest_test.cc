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

#include <gtest/gtest.h>

#include <sstream>

#include "dlerl/error.h"

namespace dlerl {
namespace {

ErrorCode code_of(std::string_view line) {
  try {
    parse_sample_record(line);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << line;
  return ErrorCode::kInvalidArgument;
}

TEST(SampleRecord, ParsesBoxRecord) {
  const SampleRecord r = parse_sample_record(
      R"({"id":"a","modality":"image","label":"TAMPERED",)"
      R"("media":"a.png","box":[0.1,0.2,0.5,0.6],"explanation":"x"})");
  EXPECT_EQ(r.id(), "a");
  EXPECT_EQ(r.truth.label, Label::kTampered);
  ASSERT_TRUE(r.truth.gt_box);
  EXPECT_EQ(r.truth.gt_box->y2, 0.6);
  EXPECT_EQ(r.truth.reference_explanation, "x");
}

TEST(SampleRecord, MaskGivesTightBox) {
  // 4x6 mask (width 6) with a 3x3 block: columns 1..3, rows 1..3.
  const SampleRecord r = parse_sample_record(
      R"({"id":"m","modality":"image","label":"TAMPERED",)"
      R"("mask":"6x4:7,3,3,3,3,3,2"})");
  ASSERT_TRUE(r.truth.gt_box);
  ASSERT_TRUE(r.mask_rle);
  EXPECT_EQ(parse_sample_record(sample_record_to_json_line(r)).truth.gt_box,
            r.truth.gt_box);
}

TEST(SampleRecord, RoundTrip) {
  const std::string line =
      R"({"id":"v","modality":"audio","label":"TAMPERED","media":"v.wav",)"
      R"("intervals":[[1.5,2.0]],"duration":10.0,"embedding":[0.5,-1.0]})";
  const SampleRecord r = parse_sample_record(line);
  const SampleRecord back =
      parse_sample_record(sample_record_to_json_line(r));
  EXPECT_EQ(back.truth.gt_intervals.size(), 1u);
  EXPECT_EQ(back.truth.gt_intervals[0].start, 1.5);
  EXPECT_EQ(back.truth.explanation_embedding, r.truth.explanation_embedding);
  EXPECT_EQ(sample_record_to_json_line(back), sample_record_to_json_line(r));
}

TEST(SampleRecord, Errors) {
  EXPECT_EQ(code_of("{"), ErrorCode::kParseError);
  EXPECT_EQ(code_of(R"({"id":"a","modality":"smell","label":"REAL"})"),
            ErrorCode::kParseError);
  EXPECT_EQ(code_of(R"({"id":"a","modality":"image","label":"MAYBE"})"),
            ErrorCode::kParseError);
  // A tampered image needs a box.
  EXPECT_EQ(code_of(R"({"id":"a","modality":"image","label":"TAMPERED"})"),
            ErrorCode::kInvalidGroundTruth);
  EXPECT_EQ(code_of(R"({"id":"a","modality":"image","label":"REAL",)"
                    R"("box":[0.5,0.5,0.1,0.1]})"),
            ErrorCode::kInvalidGroundTruth);
}

TEST(SampleRecords, ReadSkipsBlankLinesAndRejectsDuplicates) {
  std::istringstream in(
      "{\"id\":\"a\",\"modality\":\"image\",\"label\":\"REAL\"}\n\n"
      "{\"id\":\"b\",\"modality\":\"audio\",\"label\":\"REAL\","
      "\"duration\":3}\n");
  const auto records = read_sample_records(in);
  ASSERT_EQ(records.size(), 2u);
  const auto groups = group_by_modality(records);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].modality, Modality::kImage);
  EXPECT_EQ(groups[1].modality, Modality::kAudio);

  std::istringstream dup(
      "{\"id\":\"a\",\"modality\":\"image\",\"label\":\"REAL\"}\n"
      "{\"id\":\"a\",\"modality\":\"image\",\"label\":\"REAL\"}\n");
  try {
    read_sample_records(dup);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateSampleId);
  }
  try {
    load_sample_records("/nonexistent/manifest.jsonl");
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(ResponseRecords, RoundTrip) {
  ResponseRecord r{"a", "<think>x</think><answer>REAL</answer>", {1.0, 2.0}};
  std::istringstream in(response_record_to_json_line(r) + "\n");
  const auto back = read_response_records(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].sample_id, "a");
  EXPECT_EQ(back[0].response_text, r.response_text);
  EXPECT_EQ(back[0].embedding, r.embedding);
}

}  // namespace
}  // namespace dlerl
