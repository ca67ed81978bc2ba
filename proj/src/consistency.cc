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

#include "seqtruth/consistency.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqtruth/error.h"

namespace seqtruth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Viterbi over a chain whose allowed transitions are given by `allowed`.
// `first_ok`/`last_ok` restrict the labels at the chain ends.
template <typename Allowed, typename FirstOk, typename LastOk>
LabelSequence decode(int num_labels, const std::vector<std::vector<double>>& emissions,
                     Allowed allowed, FirstOk first_ok, LastOk last_ok) {
  const std::size_t n = emissions.size();
  const auto labels = static_cast<std::size_t>(num_labels);
  std::vector<std::vector<double>> score(n, std::vector<double>(labels, kNegInf));
  std::vector<std::vector<int>> back(n, std::vector<int>(labels, -1));
  for (std::size_t c = 0; c < labels; ++c) {
    if (first_ok(static_cast<LabelId>(c))) score[0][c] = emissions[0][c];
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t c = 0; c < labels; ++c) {
      double best = kNegInf;
      int arg = -1;
      for (std::size_t p = 0; p < labels; ++p) {
        if (score[i - 1][p] == kNegInf) continue;
        if (!allowed(static_cast<LabelId>(p), static_cast<LabelId>(c))) continue;
        if (score[i - 1][p] > best) {
          best = score[i - 1][p];
          arg = static_cast<int>(p);
        }
      }
      if (arg >= 0) {
        score[i][c] = best + emissions[i][c];
        back[i][c] = arg;
      }
    }
  }
  double best = kNegInf;
  int last = -1;
  for (std::size_t c = 0; c < labels; ++c) {
    if (!last_ok(static_cast<LabelId>(c)) || score[n - 1][c] == kNegInf) continue;
    if (score[n - 1][c] > best) {
      best = score[n - 1][c];
      last = static_cast<int>(c);
    }
  }
  if (last < 0) throw NumericalError("no BIO-consistent label sequence exists");
  LabelSequence path(n);
  path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) {
    path[i - 1] = back[i][static_cast<std::size_t>(path[i])];
  }
  return path;
}

void check_inputs(const TagSet& tags, std::span<const LabelId> hard,
                  std::span<const LabelDistribution> votes) {
  if (hard.empty()) throw InvalidArgument("repair of an empty sequence");
  if (votes.size() != hard.size()) throw InvalidArgument("vote rows do not match sequence length");
  for (const auto& row : votes) {
    if (row.size() != static_cast<std::size_t>(tags.size())) {
      throw InvalidArgument("vote row size differs from tag set size");
    }
  }
}

}  // namespace

std::vector<std::vector<double>> repair_log_emissions(const TagSet& tags,
                                                      std::span<const LabelId> hard,
                                                      std::span<const LabelDistribution> votes,
                                                      Traversal traversal) {
  check_inputs(tags, hard, votes);
  const std::size_t n = hard.size();
  const auto labels = static_cast<std::size_t>(tags.size());
  const double off = std::log(kConsistentOffEmission);
  std::vector<std::vector<double>> out(n, std::vector<double>(labels));
  for (std::size_t i = 0; i < n; ++i) {
    bool consistent = i > 0 || tags.start_valid(hard[0]);
    if (traversal == Traversal::kForward) {
      if (i > 0) consistent = tags.transition_valid(hard[i - 1], hard[i]);
    } else if (i + 1 < n) {
      consistent = consistent && tags.transition_valid(hard[i], hard[i + 1]);
    }
    for (std::size_t c = 0; c < labels; ++c) {
      if (consistent) {
        out[i][c] = static_cast<LabelId>(c) == hard[i] ? 0.0 : off;
      } else {
        out[i][c] = std::log(std::max(votes[i][c], kProbabilityFloor));
      }
    }
  }
  return out;
}

LabelSequence constrained_viterbi(const TagSet& tags,
                                  const std::vector<std::vector<double>>& log_emissions) {
  if (log_emissions.empty()) throw InvalidArgument("decode of an empty sequence");
  return decode(
      tags.size(), log_emissions,
      [&](LabelId a, LabelId b) { return tags.transition_valid(a, b); },
      [&](LabelId c) { return tags.start_valid(c); }, [](LabelId) { return true; });
}

LabelSequence forward_repair(const TagSet& tags, std::span<const LabelId> hard,
                             std::span<const LabelDistribution> votes) {
  return constrained_viterbi(tags, repair_log_emissions(tags, hard, votes, Traversal::kForward));
}

LabelSequence backward_repair(const TagSet& tags, std::span<const LabelId> hard,
                              std::span<const LabelDistribution> votes) {
  auto emissions = repair_log_emissions(tags, hard, votes, Traversal::kBackward);
  std::reverse(emissions.begin(), emissions.end());
  // In reversed order the chain runs next -> current, so validity is
  // transposed and the start constraint moves to the final position.
  LabelSequence reversed = decode(
      tags.size(), emissions, [&](LabelId a, LabelId b) { return tags.transition_valid(b, a); },
      [](LabelId) { return true; }, [&](LabelId c) { return tags.start_valid(c); });
  std::reverse(reversed.begin(), reversed.end());
  return reversed;
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SplitMix64 sentence_rng(std::uint64_t seed, int iteration, int k) {
  SplitMix64 mix(seed);
  std::uint64_t s = mix.next();
  s ^= SplitMix64(static_cast<std::uint64_t>(iteration) * 0x100000001b3ULL).next();
  s ^= SplitMix64(static_cast<std::uint64_t>(k) + 0x5851f42d4c957f2dULL).next();
  return SplitMix64(s);
}

LabelSequence resolve(const TagSet& tags, const LabelSequence& forward,
                      const LabelSequence& backward, SplitMix64& rng, EntityCountMode mode) {
  if (forward.size() != backward.size()) {
    throw InvalidArgument("resolve: candidate lengths differ");
  }
  if (forward == backward) return forward;
  const int f = tags.entity_count(forward, mode);
  const int b = tags.entity_count(backward, mode);
  if (f != b) return f > b ? forward : backward;
  return (rng.next() & 1U) == 0 ? forward : backward;
}

LabelSequence repair_sentence(const TagSet& tags, std::span<const LabelId> hard,
                              std::span<const LabelDistribution> votes, SplitMix64& rng,
                              EntityCountMode mode) {
  if (tags.sequence_inconsistency(hard) == 0) return LabelSequence(hard.begin(), hard.end());
  return resolve(tags, forward_repair(tags, hard, votes), backward_repair(tags, hard, votes), rng,
                 mode);
}

}  // namespace seqtruth
