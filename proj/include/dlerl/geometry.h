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

// Overlap math for spatial and temporal localization.

#ifndef DLERL_GEOMETRY_H_
#define DLERL_GEOMETRY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlerl/types.h"

namespace dlerl {

// Row-major binary grid, 1 = manipulated pixel.
class Mask {
 public:
  Mask() = default;
  // Throws Error{kDimensionMismatch} when width * height != bits.size().
  Mask(size_t width, size_t height, std::vector<uint8_t> bits);
  static Mask zeros(size_t width, size_t height);

  size_t width() const { return width_; }
  size_t height() const { return height_; }
  bool at(size_t x, size_t y) const { return bits_[y * width_ + x] != 0; }
  void set(size_t x, size_t y, bool value) {
    bits_[y * width_ + x] = value ? 1 : 0;
  }
  size_t popcount() const;
  const std::vector<uint8_t>& bits() const { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  size_t width_ = 0;
  size_t height_ = 0;
  std::vector<uint8_t> bits_;
};

// Run-length text form used in manifests: "WxH:r0,r1,r2,..." where the runs
// alternate zeros and ones in row-major order, starting with zeros.
// Throws Error{kParseError} on malformed input.
Mask mask_from_rle(std::string_view text);
std::string mask_to_rle(const Mask& mask);

// Pixels whose centers fall inside `box` (normalized coords) are set.
Mask rasterize_box(const Box& box, size_t width, size_t height);

double box_iou(const Box& a, const Box& b);
double interval_iou(const Interval& a, const Interval& b);

// Tight box over the set pixels: x1 = xmin / width, x2 = (xmax + 1) / width,
// likewise for y. Multi-component masks collapse to one enclosing box.
// Throws Error{kEmptyMask} when no pixel is set.
Box mask_to_bbox(const Mask& mask);

// |a & b| / |a | b|, 1.0 when both are empty.
// Throws Error{kDimensionMismatch} on differing shapes.
double mask_iou(const Mask& a, const Mask& b);

struct MatchedPair {
  size_t pred = 0;
  size_t gt = 0;
  double iou = 0.0;
  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

// How mean_iou is normalized.
enum class MatchDenominator {
  // sum / max(|pred|, |gt|): unmatched and spurious intervals cost reward.
  kMaxCount,
  // sum / number of matched pairs (0 when nothing matched).
  kMatchedPairs,
};

struct IntervalMatching {
  std::vector<MatchedPair> pairs;  // sorted by pred index
  double total_iou = 0.0;          // summed in pred-index order
  double mean_iou = 0.0;
};

// Maximum-total-IoU bipartite matching. Among optimal assignments the one
// whose pred -> gt vector is lexicographically smallest wins (unmatched
// sorts after every gt index). Zero-IoU pairs are never reported.
// Both lists empty yields mean_iou 1.0.
IntervalMatching match_intervals(
    std::span<const Interval> pred, std::span<const Interval> gt,
    MatchDenominator denominator = MatchDenominator::kMaxCount);

// Optimal assignment maximizing the summed weight of a rows x cols matrix
// (row-major). Returns, per row, the assigned column or nullopt. Rows may be
// left unassigned when rows > cols.
std::vector<std::optional<size_t>> max_weight_assignment(
    std::span<const double> weights, size_t rows, size_t cols);

}  // namespace dlerl

#endif  // DLERL_GEOMETRY_H_
