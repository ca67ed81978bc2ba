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

#include "seqtruth/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "seqtruth/error.h"

namespace seqtruth {

namespace {

void check_aligned(std::span<const LabelSequence> pred, std::span<const LabelSequence> gold) {
  if (pred.size() != gold.size()) {
    throw InvalidArgument("prediction has " + std::to_string(pred.size()) + " sentences, gold " +
                          std::to_string(gold.size()));
  }
  for (std::size_t k = 0; k < pred.size(); ++k) {
    if (pred[k].size() != gold[k].size()) {
      throw InvalidArgument("sentence " + std::to_string(k) + ": prediction has " +
                            std::to_string(pred[k].size()) + " labels, gold " +
                            std::to_string(gold[k].size()));
    }
  }
}

}  // namespace

PRF prf_from_counts(long true_positives, long predicted, long gold) {
  PRF out;
  out.true_positives = true_positives;
  out.predicted = predicted;
  out.gold = gold;
  out.zero_predicted = predicted == 0;
  out.zero_gold = gold == 0;
  out.precision = predicted > 0 ? static_cast<double>(true_positives) / predicted : 0.0;
  out.recall = gold > 0 ? static_cast<double>(true_positives) / gold : 0.0;
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

PRF strict_prf(const TagSet& tags, std::span<const LabelSequence> pred,
               std::span<const LabelSequence> gold) {
  check_aligned(pred, gold);
  long tp = 0;
  long n_pred = 0;
  long n_gold = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const auto p = tags.spans_of(pred[k]);
    const auto g = tags.spans_of(gold[k]);
    n_pred += static_cast<long>(p.size());
    n_gold += static_cast<long>(g.size());
    // Both span lists are sorted by start and non-overlapping.
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < p.size() && b < g.size()) {
      if (p[a] == g[b]) {
        ++tp;
        ++a;
        ++b;
      } else if (p[a].start < g[b].start || (p[a].start == g[b].start && p[a].end < g[b].end)) {
        ++a;
      } else {
        ++b;
      }
    }
  }
  return prf_from_counts(tp, n_pred, n_gold);
}

PRF relaxed_prf(const TagSet& tags, std::span<const LabelSequence> pred,
                std::span<const LabelSequence> gold, RelaxedAverage average) {
  check_aligned(pred, gold);
  const auto labels = static_cast<std::size_t>(tags.size());
  std::vector<long> tp(labels, 0);
  std::vector<long> n_pred(labels, 0);
  std::vector<long> n_gold(labels, 0);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    for (std::size_t i = 0; i < pred[k].size(); ++i) {
      const LabelId p = pred[k][i];
      const LabelId g = gold[k][i];
      if (!tags.is_outside(p)) ++n_pred[static_cast<std::size_t>(p)];
      if (!tags.is_outside(g)) ++n_gold[static_cast<std::size_t>(g)];
      if (p == g && !tags.is_outside(p)) ++tp[static_cast<std::size_t>(p)];
    }
  }
  if (average == RelaxedAverage::kMicro) {
    return prf_from_counts(std::accumulate(tp.begin(), tp.end(), 0L),
                           std::accumulate(n_pred.begin(), n_pred.end(), 0L),
                           std::accumulate(n_gold.begin(), n_gold.end(), 0L));
  }
  PRF out;
  int seen = 0;
  for (std::size_t c = 1; c < labels; ++c) {
    if (n_pred[c] == 0 && n_gold[c] == 0) continue;
    const PRF one = prf_from_counts(tp[c], n_pred[c], n_gold[c]);
    out.precision += one.precision;
    out.recall += one.recall;
    out.f1 += one.f1;
    out.true_positives += tp[c];
    out.predicted += n_pred[c];
    out.gold += n_gold[c];
    ++seen;
  }
  if (seen > 0) {
    out.precision /= seen;
    out.recall /= seen;
    out.f1 /= seen;
  }
  out.zero_predicted = out.predicted == 0;
  out.zero_gold = out.gold == 0;
  return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::vector<double> per_worker_strict_f1(const AnnotationCorpus& corpus) {
  if (!corpus.has_gold()) throw InvalidArgument("per-worker F1 needs gold labels");
  std::vector<double> out;
  for (int j = 0; j < corpus.num_workers(); ++j) {
    std::vector<LabelSequence> pred;
    std::vector<LabelSequence> gold;
    for (int k : corpus.sentences_of(j)) {
      pred.push_back(*corpus.find(j, k));
      gold.push_back(*corpus.gold(k));
    }
    out.push_back(strict_prf(corpus.tag_set(), pred, gold).f1);
  }
  return out;
}

WeightCorrelation weight_reliability_correlation(const AnnotationCorpus& corpus,
                                                 std::span<const double> worker_weights) {
  if (corpus.num_workers() < 3) {
    throw InvalidArgument("weight-reliability correlation needs at least three workers");
  }
  if (worker_weights.size() != static_cast<std::size_t>(corpus.num_workers())) {
    throw InvalidArgument("one weight per worker expected");
  }
  WeightCorrelation out;
  out.worker_f1 = per_worker_strict_f1(corpus);
  out.pearson = pearson(worker_weights, out.worker_f1);
  out.spearman = spearman(worker_weights, out.worker_f1);
  return out;
}

}  // namespace seqtruth
