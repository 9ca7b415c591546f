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

#include "dlerl/structured_output.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <utility>

namespace dlerl {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool all_space(std::string_view s) {
  return std::all_of(s.begin(), s.end(), is_space);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<size_t> find_all(std::string_view text, std::string_view tag) {
  std::vector<size_t> out;
  for (size_t pos = text.find(tag); pos != std::string_view::npos;
       pos = text.find(tag, pos + tag.size())) {
    out.push_back(pos);
  }
  return out;
}

class ReportBuilder {
 public:
  void add(Violation v) {
    if (std::find(codes_.begin(), codes_.end(), v) == codes_.end()) {
      codes_.push_back(v);
    }
  }
  FormatReport finish() && {
    FormatReport report;
    report.well_formed = codes_.empty();
    report.violations = std::move(codes_);
    return report;
  }

 private:
  std::vector<Violation> codes_;
};

// Location of a block's content, [begin, end) within the full text, plus the
// span of the whole block including its tags.
struct Block {
  size_t open = 0;
  size_t content_begin = 0;
  size_t content_end = 0;
  size_t close_end = 0;
};

std::optional<Block> locate_block(std::string_view text, std::string_view open,
                                  std::string_view close, Violation missing,
                                  Violation duplicate, ReportBuilder& report) {
  const auto opens = find_all(text, open);
  const auto closes = find_all(text, close);
  if (opens.size() > 1 || closes.size() > 1) {
    report.add(duplicate);
    return std::nullopt;
  }
  if (opens.size() != 1 || closes.size() != 1 || closes[0] < opens[0]) {
    report.add(missing);
    return std::nullopt;
  }
  Block b;
  b.open = opens[0];
  b.content_begin = opens[0] + open.size();
  b.content_end = closes[0];
  b.close_end = closes[0] + close.size();
  return b;
}

// Strict decimal: digits, optionally '.' and more digits. Surrounding
// whitespace is ignored.
std::optional<double> parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  size_t i = 0;
  while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
  if (i == 0) return std::nullopt;
  if (i < s.size()) {
    if (s[i] != '.') return std::nullopt;
    size_t j = i + 1;
    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
    if (j == i + 1 || j != s.size()) return std::nullopt;
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value,
                                   std::chars_format::fixed);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

template <size_t N>
std::optional<std::array<double, N>> parse_tuple(std::string_view payload) {
  std::array<double, N> out{};
  for (size_t k = 0; k < N; ++k) {
    const size_t comma = payload.find(',');
    const bool last = k + 1 == N;
    if (last != (comma == std::string_view::npos)) return std::nullopt;
    auto value = parse_decimal(payload.substr(0, comma));
    if (!value) return std::nullopt;
    out[k] = *value;
    if (!last) payload.remove_prefix(comma + 1);
  }
  return out;
}

std::optional<Label> read_label(std::string_view token,
                                const ParseContext& context) {
  if (token == "FAKE") return std::nullopt;
  auto label = label_from_name(token);
  if (!label) return std::nullopt;
  if (context.modality && is_binary_modality(*context.modality)) {
    if (*label == Label::kTampered) return std::nullopt;
    if (*label == Label::kFullSynthetic) return Label::kFake;
  }
  return label;
}

void parse_answer(std::string_view body, const ParseContext& context,
                  ParsedResponse& out, ReportBuilder& report) {
  size_t pos = 0;
  auto skip_space = [&] {
    while (pos < body.size() && is_space(body[pos])) ++pos;
  };
  skip_space();
  size_t token_end = pos;
  while (token_end < body.size() && !is_space(body[token_end]) &&
         body[token_end] != '<') {
    ++token_end;
  }
  if (auto label = read_label(body.substr(pos, token_end - pos), context)) {
    out.label = *label;
  } else {
    report.add(Violation::kBadLabel);
  }
  pos = token_end;

  while (true) {
    skip_space();
    if (pos >= body.size()) return;
    const std::string_view rest = body.substr(pos);
    if (rest.starts_with(kBoxStart)) {
      const size_t end = rest.find(kBoxEnd);
      if (end == std::string_view::npos) {
        report.add(Violation::kMalformedBox);
        return;
      }
      auto v = parse_tuple<4>(
          rest.substr(kBoxStart.size(), end - kBoxStart.size()));
      Box box;
      if (v) box = Box{(*v)[0], (*v)[1], (*v)[2], (*v)[3]};
      if (v && box.valid()) {
        out.boxes.push_back(box);
      } else {
        report.add(Violation::kMalformedBox);
      }
      pos += end + kBoxEnd.size();
    } else if (rest.starts_with(kIntervalStart)) {
      const size_t end = rest.find(kIntervalEnd);
      if (end == std::string_view::npos) {
        report.add(Violation::kMalformedInterval);
        return;
      }
      auto v = parse_tuple<2>(
          rest.substr(kIntervalStart.size(), end - kIntervalStart.size()));
      Interval interval;
      if (v) interval = Interval{(*v)[0], (*v)[1]};
      const bool ok = v && (context.duration
                                ? interval.valid_within(*context.duration)
                                : interval.valid());
      if (ok) {
        out.intervals.push_back(interval);
      } else {
        report.add(Violation::kMalformedInterval);
      }
      pos += end + kIntervalEnd.size();
    } else {
      report.add(Violation::kTrailingGarbage);
      return;
    }
  }
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::kMissingThink: return "MISSING_THINK";
    case Violation::kDuplicateThink: return "DUPLICATE_THINK";
    case Violation::kMissingAnswer: return "MISSING_ANSWER";
    case Violation::kDuplicateAnswer: return "DUPLICATE_ANSWER";
    case Violation::kBlockOrder: return "BLOCK_ORDER";
    case Violation::kBadLabel: return "BAD_LABEL";
    case Violation::kMalformedBox: return "MALFORMED_BOX";
    case Violation::kMalformedInterval: return "MALFORMED_INTERVAL";
    case Violation::kTrailingGarbage: return "TRAILING_GARBAGE";
  }
  return "";
}

namespace {
std::string describe(const FormatReport& report) {
  std::string s;
  for (Violation v : report.violations) {
    if (!s.empty()) s += ",";
    s += violation_name(v);
  }
  return s;
}
}  // namespace

FormatError::FormatError(FormatReport report)
    : Error(ErrorCode::kFormatError, describe(report)),
      report_(std::move(report)) {}

ParseOutcome try_parse_response(std::string_view text,
                                const ParseContext& context) {
  ReportBuilder report;
  auto think = locate_block(text, kThinkOpen, kThinkClose,
                            Violation::kMissingThink,
                            Violation::kDuplicateThink, report);
  auto answer = locate_block(text, kAnswerOpen, kAnswerClose,
                             Violation::kMissingAnswer,
                             Violation::kDuplicateAnswer, report);
  if (think && answer) {
    if (think->close_end > answer->open) {
      report.add(Violation::kBlockOrder);
    } else if (!all_space(text.substr(0, think->open)) ||
               !all_space(text.substr(think->close_end,
                                      answer->open - think->close_end)) ||
               !all_space(text.substr(answer->close_end))) {
      report.add(Violation::kTrailingGarbage);
    }
  }

  ParsedResponse response;
  if (think) {
    response.think_text = std::string(text.substr(
        think->content_begin, think->content_end - think->content_begin));
  }
  if (answer) {
    parse_answer(text.substr(answer->content_begin,
                             answer->content_end - answer->content_begin),
                 context, response, report);
  }

  ParseOutcome outcome;
  outcome.report = std::move(report).finish();
  if (outcome.report.well_formed) outcome.response = std::move(response);
  return outcome;
}

ParsedResponse parse_response(std::string_view text,
                              const ParseContext& context) {
  auto outcome = try_parse_response(text, context);
  if (!outcome.response) throw FormatError(std::move(outcome.report));
  return std::move(*outcome.response);
}

FormatReport check_format(std::string_view text, const ParseContext& context) {
  return try_parse_response(text, context).report;
}

std::string render_box(const Box& box) {
  std::string s(kBoxStart);
  s += format_fixed(box.x1, kBoxDigits);
  s += ',';
  s += format_fixed(box.y1, kBoxDigits);
  s += ',';
  s += format_fixed(box.x2, kBoxDigits);
  s += ',';
  s += format_fixed(box.y2, kBoxDigits);
  s += kBoxEnd;
  return s;
}

std::string render_interval(const Interval& interval) {
  std::string s(kIntervalStart);
  s += format_fixed(interval.start, kIntervalDigits);
  s += ',';
  s += format_fixed(interval.end, kIntervalDigits);
  s += kIntervalEnd;
  return s;
}

std::string render_response(const ParsedResponse& response) {
  for (std::string_view tag : {kThinkOpen, kThinkClose, kAnswerOpen,
                               kAnswerClose}) {
    if (response.think_text.find(tag) != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "think text contains block markup");
    }
  }
  const Label token =
      response.label == Label::kFake ? Label::kFullSynthetic : response.label;
  std::string s(kThinkOpen);
  s += response.think_text;
  s += kThinkClose;
  s += kAnswerOpen;
  s += label_name(token);
  for (const Box& box : response.boxes) {
    if (!box.valid()) throw Error(ErrorCode::kInvalidArgument, "invalid box");
    s += ' ';
    s += render_box(box);
  }
  for (const Interval& interval : response.intervals) {
    if (!interval.valid()) {
      throw Error(ErrorCode::kInvalidArgument, "invalid interval");
    }
    s += ' ';
    s += render_interval(interval);
  }
  s += kAnswerClose;
  return s;
}

}  // namespace dlerl
