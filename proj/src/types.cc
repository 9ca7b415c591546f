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

#include "dlerl/types.h"

#include <algorithm>
#include <cmath>

#include "dlerl/error.h"

namespace dlerl {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kEmptyMask: return "EmptyMaskError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLabelSpaceMismatch: return "LabelSpaceMismatch";
    case ErrorCode::kGroupTooSmall: return "GroupTooSmall";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kUnrepresentableResponse: return "UnrepresentableResponse";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kMissingModality: return "MissingModality";
    case ErrorCode::kStageOutOfRange: return "StageOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnknownSampleId: return "UnknownSampleId";
    case ErrorCode::kDuplicateSampleId: return "DuplicateSampleId";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kInvalidGroundTruth: return "InvalidGroundTruth";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

std::string_view label_name(Label label) {
  switch (label) {
    case Label::kReal: return "REAL";
    case Label::kTampered: return "TAMPERED";
    case Label::kFullSynthetic: return "FULL_SYNTHETIC";
    case Label::kFake: return "FAKE";
  }
  return "";
}

std::optional<Label> label_from_name(std::string_view name) {
  if (name == "REAL") return Label::kReal;
  if (name == "TAMPERED") return Label::kTampered;
  if (name == "FULL_SYNTHETIC") return Label::kFullSynthetic;
  if (name == "FAKE") return Label::kFake;
  return std::nullopt;
}

std::string_view modality_name(Modality modality) {
  switch (modality) {
    case Modality::kImage: return "image";
    case Modality::kAudio: return "audio";
    case Modality::kVideo: return "video";
    case Modality::kAvTalkingHead: return "avth";
  }
  return "";
}

std::optional<Modality> modality_from_name(std::string_view name) {
  if (name == "image") return Modality::kImage;
  if (name == "audio") return Modality::kAudio;
  if (name == "video") return Modality::kVideo;
  if (name == "avth") return Modality::kAvTalkingHead;
  return std::nullopt;
}

bool is_binary_modality(Modality modality) {
  return modality == Modality::kAvTalkingHead;
}

std::span<const Label> label_space(Modality modality) {
  if (is_binary_modality(modality)) return kBinaryLabels;
  return kTernaryLabels;
}

bool label_in_space(Label label, Modality modality) {
  auto space = label_space(modality);
  return std::find(space.begin(), space.end(), label) != space.end();
}

bool Box::valid() const {
  const bool finite = std::isfinite(x1) && std::isfinite(y1) &&
                      std::isfinite(x2) && std::isfinite(y2);
  return finite && 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 &&
         y1 < y2 && y2 <= 1.0;
}

bool Interval::valid() const {
  return std::isfinite(start) && std::isfinite(end) && 0.0 <= start &&
         start < end;
}

bool Interval::valid_within(double duration) const {
  return valid() && end <= duration;
}

}  // namespace dlerl
