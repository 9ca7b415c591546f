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

#ifndef DLERL_RNG_H_
#define DLERL_RNG_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace dlerl {

// Counter-based generator: output n of stream (seed, stream) is a pure
// function of (seed, stream, n), so any worker can reproduce any stream
// without shared state. Draws are SplitMix64 outputs over a keyed counter.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream);

  // Stream keyed by a sequence of ids, e.g. {kTag, step, response}.
  static CounterRng derive(uint64_t seed, std::initializer_list<uint64_t> ids);

  uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();   // standard normal, Box-Muller without caching
  uint64_t below(uint64_t n);
  // Index drawn from unnormalized non-negative weights.
  size_t categorical(std::span<const double> weights);

  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

uint64_t mix64(uint64_t x);

}  // namespace dlerl

#endif  // DLERL_RNG_H_
