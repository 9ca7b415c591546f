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

// Domain vocabulary shared by every module: labels, modalities, boxes and
// time intervals.

#ifndef DLERL_TYPES_H_
#define DLERL_TYPES_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace dlerl {

enum class Label { kReal, kTampered, kFullSynthetic, kFake };

// Image, audio and video share the ternary label space. Talking-head clips
// (kAvTalkingHead) are binary: real vs. fake.
enum class Modality { kImage, kAudio, kVideo, kAvTalkingHead };

inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::kImage, Modality::kAudio, Modality::kVideo,
    Modality::kAvTalkingHead};

inline constexpr std::array<Label, 3> kTernaryLabels = {
    Label::kReal, Label::kTampered, Label::kFullSynthetic};
inline constexpr std::array<Label, 2> kBinaryLabels = {Label::kReal,
                                                       Label::kFake};

std::string_view label_name(Label label);
std::optional<Label> label_from_name(std::string_view name);

std::string_view modality_name(Modality modality);
std::optional<Modality> modality_from_name(std::string_view name);

bool is_binary_modality(Modality modality);
std::span<const Label> label_space(Modality modality);
bool label_in_space(Label label, Modality modality);

// Normalized [0,1] image coordinates. Valid boxes satisfy
// 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  bool valid() const;
  double area() const { return (x2 - x1) * (y2 - y1); }
  friend bool operator==(const Box&, const Box&) = default;
};

// Seconds. Valid intervals satisfy 0 <= start < end.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  bool valid() const;
  bool valid_within(double duration) const;
  double length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

}  // namespace dlerl

#endif  // DLERL_TYPES_H_
