// Copyright 2026 The SeqTruth Authors.
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

#ifndef SEQTRUTH_CONSISTENCY_H_
#define SEQTRUTH_CONSISTENCY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "seqtruth/aggregation.h"
#include "seqtruth/tagset.h"

namespace seqtruth {

// Emission given to every label other than the current one at a position
// whose local pair is already consistent.
inline constexpr double kConsistentOffEmission = 1e-6;

enum class Traversal { kForward, kBackward };

// Log-emission table of the repair decoder: emissions[i][c].
//
// A position whose local pair is consistent emits its current label with
// probability 1 and every other label with kConsistentOffEmission; any other
// position emits its vote distribution (floored at kProbabilityFloor). The
// local pair is the incoming pair (previous, current) for the forward
// traversal and the outgoing pair (current, next) for the backward one;
// position 0 additionally needs a valid start in both directions.
std::vector<std::vector<double>> repair_log_emissions(const TagSet& tags,
                                                      std::span<const LabelId> hard,
                                                      std::span<const LabelDistribution> votes,
                                                      Traversal traversal);

// Max-product decoding over BIO-valid sequences only. Backpointer ties go to
// the lower label id.
LabelSequence constrained_viterbi(const TagSet& tags,
                                  const std::vector<std::vector<double>>& log_emissions);

LabelSequence forward_repair(const TagSet& tags, std::span<const LabelId> hard,
                             std::span<const LabelDistribution> votes);
// Decodes the reversed sentence with transposed transition validity.
LabelSequence backward_repair(const TagSet& tags, std::span<const LabelId> hard,
                              std::span<const LabelDistribution> votes);

// Small deterministic generator for the coin flips in resolve().
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform();

 private:
  std::uint64_t state_;
};

// Stream for sentence k of iteration `iteration`, independent of thread
// scheduling.
SplitMix64 sentence_rng(std::uint64_t seed, int iteration, int k);

// Keeps the candidate with more entity labels; on a tie between different
// sequences a coin flip picks one.
LabelSequence resolve(const TagSet& tags, const LabelSequence& forward,
                      const LabelSequence& backward, SplitMix64& rng,
                      EntityCountMode mode = EntityCountMode::kTokens);

// Forward and backward repair followed by resolve().
LabelSequence repair_sentence(const TagSet& tags, std::span<const LabelId> hard,
                              std::span<const LabelDistribution> votes, SplitMix64& rng,
                              EntityCountMode mode = EntityCountMode::kTokens);

}  // namespace seqtruth

#endif  // SEQTRUTH_CONSISTENCY_H_
