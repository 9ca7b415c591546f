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

#include "dlerl/geometry.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "dlerl/error.h"

namespace dlerl {

Mask::Mask(size_t width, size_t height, std::vector<uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width_ * height_ != bits_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask bit count does not match width * height");
  }
  if (width_ == 0 && height_ == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "mask has no extent");
  }
}

Mask Mask::zeros(size_t width, size_t height) {
  return Mask(width, height, std::vector<uint8_t>(width * height, 0));
}

size_t Mask::popcount() const {
  return static_cast<size_t>(
      std::count_if(bits_.begin(), bits_.end(), [](uint8_t b) { return b; }));
}

Mask mask_from_rle(std::string_view text) {
  auto fail = [&] {
    return Error(ErrorCode::kParseError,
                 "bad mask RLE '" + std::string(text.substr(0, 40)) + "'");
  };
  auto read_uint = [&](std::string_view s) {
    size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw fail();
    }
    return value;
  };
  const size_t x = text.find('x');
  const size_t colon = text.find(':');
  if (x == std::string_view::npos || colon == std::string_view::npos ||
      colon < x) {
    throw fail();
  }
  const size_t width = read_uint(text.substr(0, x));
  const size_t height = read_uint(text.substr(x + 1, colon - x - 1));
  std::vector<uint8_t> bits;
  bits.reserve(width * height);
  std::string_view runs = text.substr(colon + 1);
  uint8_t value = 0;
  while (!runs.empty()) {
    const size_t comma = runs.find(',');
    const size_t run = read_uint(runs.substr(0, comma));
    if (bits.size() + run > width * height) throw fail();
    bits.insert(bits.end(), run, value);
    value ^= 1;
    if (comma == std::string_view::npos) break;
    runs.remove_prefix(comma + 1);
  }
  if (bits.size() != width * height) throw fail();
  return Mask(width, height, std::move(bits));
}

std::string mask_to_rle(const Mask& mask) {
  std::string out = std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()) + ":";
  const auto& bits = mask.bits();
  uint8_t current = 0;
  size_t run = 0;
  bool first = true;
  auto flush = [&] {
    if (!first) out += ',';
    out += std::to_string(run);
    first = false;
  };
  for (uint8_t b : bits) {
    const uint8_t v = b ? 1 : 0;
    if (v != current) {
      flush();
      current = v;
      run = 0;
    }
    ++run;
  }
  flush();
  return out;
}

Mask rasterize_box(const Box& box, size_t width, size_t height) {
  Mask mask = Mask::zeros(width, height);
  for (size_t y = 0; y < height; ++y) {
    const double cy = (static_cast<double>(y) + 0.5) / height;
    if (cy < box.y1 || cy > box.y2) continue;
    for (size_t x = 0; x < width; ++x) {
      const double cx = (static_cast<double>(x) + 0.5) / width;
      if (cx >= box.x1 && cx <= box.x2) mask.set(x, y, true);
    }
  }
  return mask;
}

double box_iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double interval_iou(const Interval& a, const Interval& b) {
  const double inter = std::min(a.end, b.end) - std::max(a.start, b.start);
  if (inter <= 0.0) return 0.0;
  const double uni = std::max(a.end, b.end) - std::min(a.start, b.start);
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box mask_to_bbox(const Mask& mask) {
  size_t xmin = mask.width(), ymin = mask.height(), xmax = 0, ymax = 0;
  bool any = false;
  for (size_t y = 0; y < mask.height(); ++y) {
    for (size_t x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      any = true;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!any) throw Error(ErrorCode::kEmptyMask, "mask has no set pixels");
  const double w = static_cast<double>(mask.width());
  const double h = static_cast<double>(mask.height());
  return Box{xmin / w, ymin / h, (xmax + 1) / w, (ymax + 1) / h};
}

double mask_iou(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kDimensionMismatch, "mask shapes differ");
  }
  size_t inter = 0, uni = 0;
  const auto& ab = a.bits();
  const auto& bb = b.bits();
  for (size_t i = 0; i < ab.size(); ++i) {
    inter += (ab[i] && bb[i]) ? 1 : 0;
    uni += (ab[i] || bb[i]) ? 1 : 0;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::optional<size_t>> max_weight_assignment(
    std::span<const double> weights, size_t rows, size_t cols) {
  std::vector<std::optional<size_t>> result(rows);
  if (rows == 0 || cols == 0) return result;
  // Shortest augmenting path Hungarian on the padded square cost matrix
  // cost = -weight, 1-based with a virtual column 0.
  const size_t n = std::max(rows, cols);
  auto cost = [&](size_t i, size_t j) -> double {
    if (i >= rows || j >= cols) return 0.0;
    return -weights[i * cols + j];
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<size_t> p(n + 1, 0), way(n + 1, 0);
  for (size_t i = 1; i <= n; ++i) {
    p[0] = i;
    size_t j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const size_t i0 = p[j0];
      double delta = kInf;
      size_t j1 = 0;
      for (size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (size_t j = 1; j <= n; ++j) {
    const size_t i = p[j] - 1;
    if (i < rows && j - 1 < cols) result[i] = j - 1;
  }
  return result;
}

namespace {

// Assignments whose totals differ by less than this are treated as ties.
constexpr double kTieTolerance = 1e-9;

// Best achievable total over rows [first_row, rows) using only free columns.
double best_remaining(const std::vector<double>& w, size_t rows, size_t cols,
                      size_t first_row, const std::vector<bool>& col_used) {
  std::vector<size_t> free_cols;
  for (size_t j = 0; j < cols; ++j) {
    if (!col_used[j]) free_cols.push_back(j);
  }
  const size_t sub_rows = rows - first_row;
  if (sub_rows == 0 || free_cols.empty()) return 0.0;
  std::vector<double> sub(sub_rows * free_cols.size());
  for (size_t i = 0; i < sub_rows; ++i) {
    for (size_t k = 0; k < free_cols.size(); ++k) {
      sub[i * free_cols.size() + k] = w[(first_row + i) * cols + free_cols[k]];
    }
  }
  const auto assignment =
      max_weight_assignment(sub, sub_rows, free_cols.size());
  double total = 0.0;
  for (size_t i = 0; i < sub_rows; ++i) {
    if (assignment[i]) total += sub[i * free_cols.size() + *assignment[i]];
  }
  return total;
}

}  // namespace

IntervalMatching match_intervals(std::span<const Interval> pred,
                                 std::span<const Interval> gt,
                                 MatchDenominator denominator) {
  IntervalMatching out;
  const size_t rows = pred.size();
  const size_t cols = gt.size();
  if (rows == 0 && cols == 0) {
    out.mean_iou = 1.0;
    return out;
  }
  std::vector<double> w(rows * cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) {
      w[i * cols + j] = interval_iou(pred[i], gt[j]);
    }
  }

  // Fix rows one at a time to the smallest column (then "unmatched") that
  // keeps the optimum reachable.
  std::vector<bool> col_used(cols, false);
  const double optimum = best_remaining(w, rows, cols, 0, col_used);
  double fixed = 0.0;
  for (size_t i = 0; i < rows; ++i) {
    bool assigned = false;
    for (size_t j = 0; j < cols && !assigned; ++j) {
      const double iou = w[i * cols + j];
      if (col_used[j] || iou <= 0.0) continue;
      col_used[j] = true;
      const double reachable =
          fixed + iou + best_remaining(w, rows, cols, i + 1, col_used);
      if (reachable >= optimum - kTieTolerance) {
        fixed += iou;
        out.pairs.push_back({i, j, iou});
        assigned = true;
      } else {
        col_used[j] = false;
      }
    }
  }

  for (const auto& pair : out.pairs) out.total_iou += pair.iou;
  switch (denominator) {
    case MatchDenominator::kMaxCount:
      out.mean_iou = out.total_iou / static_cast<double>(std::max(rows, cols));
      break;
    case MatchDenominator::kMatchedPairs:
      out.mean_iou = out.pairs.empty()
                         ? 0.0
                         : out.total_iou / static_cast<double>(out.pairs.size());
      break;
  }
  out.mean_iou = std::clamp(out.mean_iou, 0.0, 1.0);
  return out;
}

}  // namespace dlerl
