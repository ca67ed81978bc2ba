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

#ifndef SEQTRUTH_AGGREGATION_H_
#define SEQTRUTH_AGGREGATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqtruth/corpus.h"
#include "seqtruth/tagset.h"

namespace seqtruth {

class SequenceTagger;

// Probability floor applied before every log.
inline constexpr double kProbabilityFloor = 1e-12;
// Floor for annotator losses entering the weight update, and for the
// resulting weights.
inline constexpr double kLossFloor = 1e-9;

// Probability vector over the tag set.
using LabelDistribution = std::vector<double>;

// Aggregated labels plus the reliability estimates that produced them.
struct AggregateState {
  // dists[k][i] is the distribution of token i of sentence k.
  std::vector<std::vector<LabelDistribution>> dists;
  // Argmax of dists, after consistency repair when it is enabled.
  std::vector<LabelSequence> hard;
  // Per-sentence confidence: mean token margin.
  std::vector<double> confidence;
  std::vector<double> worker_weights;
  double machine_weight = 0.0;
  int iteration = 0;
};

struct ObjectiveBreakdown {
  double l_agg = 0.0;
  double l_pred = 0.0;
  double l_inc = 0.0;
  double total = 0.0;
};

// The co-trained tagger's labels for some sentences, consumed exactly like a
// human worker's annotations.
struct MachineWorker {
  std::string worker_id{kMachineWorkerId};
  // (sentence index, labels), ascending by sentence.
  std::vector<std::pair<int, LabelSequence>> annotations;

  bool present() const { return !annotations.empty(); }
  const LabelSequence* find(int k) const;
};

struct EngineConfig {
  double tolerance = 1e-4;
  int max_iter = 20;
  double confidence_threshold = 0.9;
  bool use_class_weights = false;
  bool no_consistency = false;
  bool no_predictor = false;
  std::uint64_t seed = 42;
  // Keep the machine's loss out of the max used to normalize human workers.
  bool isolate_machine_weight = false;
  EntityCountMode entity_count = EntityCountMode::kTokens;
  int threads = 1;
  int predictor_epochs = 3;
  // The machine votes only once this many sentences have entered training.
  int predictor_min_pool = 20;
  std::string external_predictor_cmd;

  // "full", "no-consistency", "no-predictor" or "agg-only".
  std::string mode() const;
};

// -ln(max(p[label], kProbabilityFloor)).
double cross_entropy(LabelId worker_label, std::span<const double> dist);

// Gap between the two largest probabilities. Throws for fewer than 2 labels.
double token_margin(std::span<const double> dist);
double sentence_confidence(std::span<const LabelDistribution> dists);

// Lowest-index argmax.
LabelId argmax_label(std::span<const double> dist);

// Unweighted vote fractions, argmax hard labels and uniform weights
// ln(m + 1). Class weights, when given, tilt the fractions.
AggregateState init_majority_vote(const AnnotationCorpus& corpus,
                                  const ClassWeights* class_weights = nullptr);

// xi-weighted cross entropy of one annotator against the aggregate, divided by
// the number of tokens it labelled. `confidence` is the per-sentence xi.
double annotator_loss(std::span<const std::pair<int, const LabelSequence*>> annotated,
                      const AggregateState& state, std::span<const double> confidence);
double worker_loss(const AnnotationCorpus& corpus, int worker, const AggregateState& state,
                   std::span<const double> confidence);
double worker_loss(const AnnotationCorpus& corpus, int worker, const AggregateState& state);
double machine_loss(const MachineWorker& machine, const AggregateState& state,
                    std::span<const double> confidence);

// w = -ln(loss / max loss), losses floored at kLossFloor first. No weight
// floor is applied; the max-loss member maps to exactly 0.
std::vector<double> weights_from_losses(std::span<const double> losses);

struct WeightUpdate {
  std::vector<double> worker_weights;
  std::optional<double> machine_weight;  // set when the machine was in the pool
  bool degenerate = false;               // every loss was exactly zero
};

// Loss-to-weight update over the human workers plus the machine (when it has
// predictions). Weights are floored at kLossFloor.
WeightUpdate update_weights(const AnnotationCorpus& corpus, const AggregateState& state,
                            std::span<const double> confidence,
                            const MachineWorker* machine = nullptr,
                            bool isolate_machine = false);

struct WeightedVote {
  LabelId label = 0;
  double weight = 0.0;
};

// Minimizer over the simplex of sum_j w_j * H(vote_j, p):
// p[c] proportional to u(c) * (sum of weights voting c). Uniform when every
// effective weight is zero.
LabelDistribution update_token_distribution(int num_labels, std::span<const WeightedVote> votes,
                                            const ClassWeights* class_weights = nullptr);

// L_agg + L_pred + L_inc. The cross-entropy terms use `confidence`; L_inc is
// evaluated on the hard labels with interior violations counted in both
// directions (and skipped when `include_consistency` is false).
ObjectiveBreakdown objective(const AnnotationCorpus& corpus, const AggregateState& state,
                             std::span<const double> confidence,
                             const MachineWorker* machine = nullptr,
                             bool include_consistency = true);
ObjectiveBreakdown objective(const AnnotationCorpus& corpus, const AggregateState& state,
                             const MachineWorker* machine = nullptr,
                             bool include_consistency = true);

// L_inc contribution of one hard sequence.
int bidirectional_inconsistency(const TagSet& tags, std::span<const LabelId> seq);

struct IterationRecord {
  int iteration = 0;
  ObjectiveBreakdown objective;
  std::vector<double> worker_weights;
  double machine_weight = 0.0;
  bool machine_present = false;
  int pool_size = 0;        // high-confidence sentences in the training pool
  int trained_sentences = 0;
  int predicted_sentences = 0;
  int repaired_tokens = 0;
  double seconds = 0.0;
};

struct RunResult {
  AggregateState state;
  AggregateState majority_vote;
  ObjectiveBreakdown initial_objective;
  std::vector<IterationRecord> trajectory;
  bool converged = false;
  int sparsely_annotated_sentences = 0;
  std::vector<std::string> warnings;
};

// Majority-vote initialisation followed by alternating weight and aggregate
// updates until the relative objective change drops below the tolerance.
// `tagger` may be null, in which case a built-in perceptron (or the external
// bridge named in the config) is created when the predictor is enabled.
RunResult run(const AnnotationCorpus& corpus, const EngineConfig& config,
              SequenceTagger* tagger = nullptr);

}  // namespace seqtruth

#endif  // SEQTRUTH_AGGREGATION_H_
