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

// Parser and serializer for tagged detect/locate/explain responses:
//
//   <think>free text</think><answer>LABEL <|box_start|>x1,y1,x2,y2<|box_end|>
//       <|interval_start|>start,end<|interval_end|></answer>
//
// The full grammar is in docs/grammar.md.

#ifndef DLERL_STRUCTURED_OUTPUT_H_
#define DLERL_STRUCTURED_OUTPUT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dlerl/error.h"
#include "dlerl/types.h"

namespace dlerl {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";
inline constexpr std::string_view kBoxStart = "<|box_start|>";
inline constexpr std::string_view kBoxEnd = "<|box_end|>";
inline constexpr std::string_view kIntervalStart = "<|interval_start|>";
inline constexpr std::string_view kIntervalEnd = "<|interval_end|>";

// Fractional digits used when rendering numeric payloads.
inline constexpr int kBoxDigits = 4;
inline constexpr int kIntervalDigits = 2;

enum class Violation {
  kMissingThink,
  kDuplicateThink,
  kMissingAnswer,
  kDuplicateAnswer,
  kBlockOrder,
  kBadLabel,
  kMalformedBox,
  kMalformedInterval,
  kTrailingGarbage,
};

std::string_view violation_name(Violation v);

struct FormatReport {
  bool well_formed = true;
  // Distinct codes in detection order; violations.front() failed first.
  std::vector<Violation> violations;
};

struct ParsedResponse {
  std::string think_text;
  Label label = Label::kReal;
  std::vector<Box> boxes;
  std::vector<Interval> intervals;

  friend bool operator==(const ParsedResponse&,
                         const ParsedResponse&) = default;
};

class FormatError : public Error {
 public:
  explicit FormatError(FormatReport report);

  Violation first() const { return report_.violations.front(); }
  const FormatReport& report() const { return report_; }

 private:
  FormatReport report_;
};

// Options that depend on the sample being answered. With a talking-head
// modality the label space is binary: the FULL_SYNTHETIC token reads as
// Label::kFake and TAMPERED is rejected. The token FAKE is never accepted.
struct ParseContext {
  std::optional<Modality> modality;
  // When set, interval ends beyond the media duration are malformed.
  std::optional<double> duration;
};

// Throws FormatError carrying the full report when `text` does not parse.
ParsedResponse parse_response(std::string_view text,
                              const ParseContext& context = {});

FormatReport check_format(std::string_view text,
                          const ParseContext& context = {});

// Non-throwing form: the report is always filled; the response is present
// iff report.well_formed.
struct ParseOutcome {
  std::optional<ParsedResponse> response;
  FormatReport report;
};
ParseOutcome try_parse_response(std::string_view text,
                                const ParseContext& context = {});

// Throws Error{kInvalidArgument} when `response` breaks its invariants
// (invalid boxes or intervals, tag markup inside the think text).
std::string render_response(const ParsedResponse& response);

std::string render_box(const Box& box);
std::string render_interval(const Interval& interval);

}  // namespace dlerl

#endif  // DLERL_STRUCTURED_OUTPUT_H_
