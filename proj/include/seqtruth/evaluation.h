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

#ifndef SEQTRUTH_EVALUATION_H_
#define SEQTRUTH_EVALUATION_H_

#include <optional>
#include <span>
#include <vector>

#include "seqtruth/corpus.h"
#include "seqtruth/tagset.h"

namespace seqtruth {

// Precision/recall/F1 in [0, 1]. A zero denominator yields 0 and sets the
// matching flag, as conlleval does.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long true_positives = 0;
  long predicted = 0;
  long gold = 0;
  bool zero_predicted = false;
  bool zero_gold = false;
};

PRF prf_from_counts(long true_positives, long predicted, long gold);

// Exact (class, start, end) span matches, micro-averaged.
PRF strict_prf(const TagSet& tags, std::span<const LabelSequence> pred,
               std::span<const LabelSequence> gold);

enum class RelaxedAverage { kMicro, kMacro };

// Token-level scores over non-O labels. kMicro pools all tokens; kMacro
// averages the per-label scores of the labels seen in pred or gold.
PRF relaxed_prf(const TagSet& tags, std::span<const LabelSequence> pred,
                std::span<const LabelSequence> gold,
                RelaxedAverage average = RelaxedAverage::kMicro);

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);
// Pearson on average ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> values);

// Strict F1 of each worker against gold over the sentences it annotated.
std::vector<double> per_worker_strict_f1(const AnnotationCorpus& corpus);

struct WeightCorrelation {
  std::vector<double> worker_f1;
  std::optional<double> pearson;   // unset when either side has zero variance
  std::optional<double> spearman;
};

// Needs gold on every sentence and at least three workers.
WeightCorrelation weight_reliability_correlation(const AnnotationCorpus& corpus,
                                                 std::span<const double> worker_weights);

}  // namespace seqtruth

#endif  // SEQTRUTH_EVALUATION_H_
