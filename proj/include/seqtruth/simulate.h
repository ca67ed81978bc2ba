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


#ifndef SEQTRUTH_SIMULATE_H_
#define SEQTRUTH_SIMULATE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqtruth/corpus.h"
#include "seqtruth/tagset.h"

namespace seqtruth {

struct WorkerProfile {
  std::string worker_id;
  // Probability that a token keeps its (post span noise) label.
  double token_accuracy = 1.0;
  // Row-stochastic J x J matrix sampled when a token errs. Unset: an entity
  // label becomes O with probability 0.5 and a uniform other entity label
  // otherwise; O becomes a uniform entity label.
  std::optional<std::vector<std::vector<double>>> confusion;
  double span_drop_rate = 0.0;    // [0, 1)
  double boundary_jitter = 0.0;   // [0, 1)
  double coverage = 1.0;          // (0, 1]
};

// Throws InvalidArgument on out-of-range fields or a malformed confusion.
void validate_profile(const WorkerProfile& profile, int num_labels);

struct SimulateOptions {
  // Rewrites orphan I-X to B-X after the flips.
  bool repair = true;
};

// Per worker, in profile order: picks round(coverage * n) sentences, then on
// each covered sentence erases spans, jitters span boundaries and flips
// tokens. Sentences no worker covers are left out of the result. Gold is
// attached to every sentence. One RNG stream seeded by `seed` drives all of
// it, so output depends only on (gold, profiles, seed, options).
AnnotationCorpus simulate(const LabeledCorpus& gold, std::span<const WorkerProfile> profiles,
                          std::uint64_t seed, const SimulateOptions& options = {});

// 200 sentences of 5 to 25 tokens over PER/LOC/ORG/MISC with about 20% entity
// tokens.
LabeledCorpus synthetic_gold(std::uint64_t seed, int num_sentences = 200);

// Six full-coverage workers, accuracies 0.95 down to 0.55.
std::vector<WorkerProfile> default_profiles();

// Mixed into the seed of the crowd stream so it differs from the stream that
// generated the synthetic gold.
inline constexpr std::uint64_t kCrowdSeedMix = 0x9e3779b97f4a7c15ULL;

struct Bench {
  LabeledCorpus gold;
  AnnotationCorpus crowd;
  std::vector<WorkerProfile> profiles;
};
Bench default_bench(std::uint64_t seed);

}  // namespace seqtruth

#endif  // SEQTRUTH_SIMULATE_H_
