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

#include "seqtruth/aggregation.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

#include "parallel.h"
#include "seqtruth/consistency.h"
#include "seqtruth/error.h"
#include "seqtruth/predictor.h"

namespace seqtruth {

std::string EngineConfig::mode() const {
  if (no_consistency && no_predictor) return "agg-only";
  if (no_consistency) return "no-consistency";
  if (no_predictor) return "no-predictor";
  return "full";
}

const LabelSequence* MachineWorker::find(int k) const {
  auto it = std::lower_bound(annotations.begin(), annotations.end(), k,
                             [](const auto& entry, int key) { return entry.first < key; });
  if (it == annotations.end() || it->first != k) return nullptr;
  return &it->second;
}

double cross_entropy(LabelId worker_label, std::span<const double> dist) {
  return -std::log(std::max(dist[static_cast<std::size_t>(worker_label)], kProbabilityFloor));
}

double token_margin(std::span<const double> dist) {
  if (dist.size() < 2) throw InvalidArgument("token margin needs at least two labels");
  double first = -1.0;
  double second = -1.0;
  for (double p : dist) {
    if (p > first) {
      second = first;
      first = p;
    } else if (p > second) {
      second = p;
    }
  }
  return first - second;
}

double sentence_confidence(std::span<const LabelDistribution> dists) {
  if (dists.empty()) throw InvalidArgument("confidence of an empty sentence");
  double sum = 0.0;
  for (const auto& d : dists) sum += token_margin(d);
  return sum / static_cast<double>(dists.size());
}

LabelId argmax_label(std::span<const double> dist) {
  return static_cast<LabelId>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

LabelDistribution update_token_distribution(int num_labels, std::span<const WeightedVote> votes,
                                            const ClassWeights* class_weights) {
  const auto labels = static_cast<std::size_t>(num_labels);
  LabelDistribution dist(labels, 0.0);
  for (const auto& v : votes) dist[static_cast<std::size_t>(v.label)] += v.weight;
  if (class_weights) {
    for (std::size_t c = 0; c < labels; ++c) dist[c] *= (*class_weights)[static_cast<LabelId>(c)];
  }
  double total = 0.0;
  for (double x : dist) total += x;
  if (!(total > 0.0)) {
    std::fill(dist.begin(), dist.end(), 1.0 / static_cast<double>(labels));
    return dist;
  }
  for (double& x : dist) x /= total;
  return dist;
}

AggregateState init_majority_vote(const AnnotationCorpus& corpus,
                                  const ClassWeights* class_weights) {
  const int labels = corpus.tag_set().size();
  AggregateState state;
  state.dists.resize(static_cast<std::size_t>(corpus.num_sentences()));
  state.hard.resize(state.dists.size());
  state.confidence.resize(state.dists.size());
  std::vector<WeightedVote> votes;
  for (int k = 0; k < corpus.num_sentences(); ++k) {
    const auto n = corpus.sentence(k).length();
    auto& dists = state.dists[static_cast<std::size_t>(k)];
    auto& hard = state.hard[static_cast<std::size_t>(k)];
    dists.resize(n);
    hard.resize(n);
    if (corpus.annotations(k).empty()) {
      spdlog::warn("sentence '{}' has no annotations; using uniform label distributions",
                   corpus.sentence(k).id);
    }
    for (std::size_t i = 0; i < n; ++i) {
      votes.clear();
      for (const auto& a : corpus.annotations(k)) votes.push_back({a.labels[i], 1.0});
      dists[i] = update_token_distribution(labels, votes, class_weights);
      hard[i] = argmax_label(dists[i]);
    }
    state.confidence[static_cast<std::size_t>(k)] = sentence_confidence(dists);
  }
  const double uniform = std::log(static_cast<double>(corpus.num_workers()) + 1.0);
  state.worker_weights.assign(static_cast<std::size_t>(corpus.num_workers()), uniform);
  state.machine_weight = uniform;
  return state;
}

double annotator_loss(std::span<const std::pair<int, const LabelSequence*>> annotated,
                      const AggregateState& state, std::span<const double> confidence) {
  double loss = 0.0;
  long tokens = 0;
  for (const auto& [k, labels] : annotated) {
    const auto& dists = state.dists[static_cast<std::size_t>(k)];
    double sentence_loss = 0.0;
    for (std::size_t i = 0; i < labels->size(); ++i) {
      sentence_loss += cross_entropy((*labels)[i], dists[i]);
    }
    loss += confidence[static_cast<std::size_t>(k)] * sentence_loss;
    tokens += static_cast<long>(labels->size());
  }
  if (tokens == 0) throw InvalidArgument("loss of an annotator without annotations");
  return loss / static_cast<double>(tokens);
}

double worker_loss(const AnnotationCorpus& corpus, int worker, const AggregateState& state,
                   std::span<const double> confidence) {
  std::vector<std::pair<int, const LabelSequence*>> annotated;
  for (int k : corpus.sentences_of(worker)) annotated.emplace_back(k, corpus.find(worker, k));
  if (annotated.empty()) {
    throw InvalidArgument("worker '" + corpus.worker_ids()[static_cast<std::size_t>(worker)] +
                          "' annotated no sentences");
  }
  return annotator_loss(annotated, state, confidence);
}

double worker_loss(const AnnotationCorpus& corpus, int worker, const AggregateState& state) {
  return worker_loss(corpus, worker, state, state.confidence);
}

double machine_loss(const MachineWorker& machine, const AggregateState& state,
                    std::span<const double> confidence) {
  std::vector<std::pair<int, const LabelSequence*>> annotated;
  for (const auto& [k, labels] : machine.annotations) annotated.emplace_back(k, &labels);
  return annotator_loss(annotated, state, confidence);
}

std::vector<double> weights_from_losses(std::span<const double> losses) {
  if (losses.empty()) return {};
  std::vector<double> floored(losses.begin(), losses.end());
  for (double& l : floored) l = std::max(l, kLossFloor);
  const double max_loss = *std::max_element(floored.begin(), floored.end());
  std::vector<double> weights(floored.size());
  for (std::size_t j = 0; j < floored.size(); ++j) {
    weights[j] = floored[j] == max_loss ? 0.0 : -std::log(floored[j] / max_loss);
  }
  return weights;
}

WeightUpdate update_weights(const AnnotationCorpus& corpus, const AggregateState& state,
                            std::span<const double> confidence, const MachineWorker* machine,
                            bool isolate_machine) {
  std::vector<double> losses;
  for (int j = 0; j < corpus.num_workers(); ++j) {
    losses.push_back(worker_loss(corpus, j, state, confidence));
  }
  const bool with_machine = machine && machine->present();
  WeightUpdate update;
  if (with_machine) losses.push_back(machine_loss(*machine, state, confidence));

  if (std::all_of(losses.begin(), losses.end(), [](double l) { return l == 0.0; })) {
    spdlog::warn("every annotator has zero loss; weights reset to ln(m + 1)");
    const double w = std::log(static_cast<double>(corpus.num_workers()) + 1.0);
    update.worker_weights.assign(static_cast<std::size_t>(corpus.num_workers()), w);
    if (with_machine) update.machine_weight = w;
    update.degenerate = true;
    return update;
  }

  std::vector<double> weights;
  if (with_machine && isolate_machine) {
    std::vector<double> humans(losses.begin(), losses.end() - 1);
    weights = weights_from_losses(humans);
    const double max_human = *std::max_element(humans.begin(), humans.end());
    const double reference = std::max({max_human, losses.back(), kLossFloor});
    weights.push_back(-std::log(std::max(losses.back(), kLossFloor) / reference));
  } else {
    weights = weights_from_losses(losses);
  }
  for (double& w : weights) w = std::max(w, kLossFloor);
  if (with_machine) {
    update.machine_weight = weights.back();
    weights.pop_back();
  }
  update.worker_weights = std::move(weights);
  return update;
}

int bidirectional_inconsistency(const TagSet& tags, std::span<const LabelId> seq) {
  if (seq.empty()) return 0;
  int count = tags.start_valid(seq[0]) ? 0 : 1;
  for (std::size_t i = 1; i < seq.size(); ++i) count += 2 * tags.pair_inconsistency(seq[i - 1], seq[i]);
  return count;
}

ObjectiveBreakdown objective(const AnnotationCorpus& corpus, const AggregateState& state,
                             std::span<const double> confidence, const MachineWorker* machine,
                             bool include_consistency) {
  ObjectiveBreakdown out;
  for (int k = 0; k < corpus.num_sentences(); ++k) {
    const auto& dists = state.dists[static_cast<std::size_t>(k)];
    const double xi = confidence[static_cast<std::size_t>(k)];
    for (const auto& a : corpus.annotations(k)) {
      double h = 0.0;
      for (std::size_t i = 0; i < a.labels.size(); ++i) h += cross_entropy(a.labels[i], dists[i]);
      out.l_agg += state.worker_weights[static_cast<std::size_t>(a.worker)] * xi * h;
    }
    if (machine) {
      if (const auto* labels = machine->find(k)) {
        double h = 0.0;
        for (std::size_t i = 0; i < labels->size(); ++i) h += cross_entropy((*labels)[i], dists[i]);
        out.l_pred += state.machine_weight * xi * h;
      }
    }
    if (include_consistency) {
      out.l_inc += bidirectional_inconsistency(corpus.tag_set(), state.hard[static_cast<std::size_t>(k)]);
    }
  }
  out.total = out.l_agg + out.l_pred + out.l_inc;
  return out;
}

ObjectiveBreakdown objective(const AnnotationCorpus& corpus, const AggregateState& state,
                             const MachineWorker* machine, bool include_consistency) {
  return objective(corpus, state, state.confidence, machine, include_consistency);
}

namespace {

void check_finite(const ObjectiveBreakdown& obj, const AggregateState& state, int iteration) {
  if (std::isfinite(obj.total)) return;
  std::ostringstream dump;
  dump << "non-finite objective at iteration " << iteration << ": l_agg=" << obj.l_agg
       << " l_pred=" << obj.l_pred << " l_inc=" << obj.l_inc << "; weights=[";
  for (std::size_t j = 0; j < state.worker_weights.size(); ++j) {
    dump << (j ? "," : "") << state.worker_weights[j];
  }
  dump << "] machine_weight=" << state.machine_weight;
  throw NumericalError(dump.str());
}

}  // namespace

RunResult run(const AnnotationCorpus& corpus, const EngineConfig& config, SequenceTagger* tagger) {
  if (config.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (config.tolerance < 0.0) throw InvalidArgument("tolerance must be non-negative");
  if (config.predictor_min_pool < 1) throw InvalidArgument("predictor_min_pool must be at least 1");
  if (corpus.tag_set().size() < 2) throw InvalidArgument("tag set needs at least two labels");

  const TagSet& tags = corpus.tag_set();
  const int labels = tags.size();
  const int threads = std::max(1, config.threads);
  RunResult result;
  result.sparsely_annotated_sentences = corpus.sparsely_annotated_sentences();
  if (result.sparsely_annotated_sentences > 0) {
    result.warnings.push_back(std::to_string(result.sparsely_annotated_sentences) +
                              " sentences have fewer than two annotations");
  }

  std::optional<ClassWeights> class_weights;
  if (config.use_class_weights) class_weights = compute_class_weights(corpus);
  const ClassWeights* u = class_weights ? &*class_weights : nullptr;

  std::unique_ptr<SequenceTagger> owned;
  if (!config.no_predictor && !tagger) {
    owned = make_tagger(tags, config);
    tagger = owned.get();
  }
  TrainingPool pool;

  AggregateState state = init_majority_vote(corpus);
  result.majority_vote = state;
  const bool consistency = !config.no_consistency;
  result.initial_objective = objective(corpus, state, nullptr, consistency);
  double previous_total = result.initial_objective.total;

  for (int it = 1; it <= config.max_iter; ++it) {
    const auto started = std::chrono::steady_clock::now();
    IterationRecord record;
    record.iteration = it;
    const std::vector<double> lagged = state.confidence;

    MachineWorker machine;
    if (!config.no_predictor) {
      const auto selected = select_training_sentences(state.confidence, config.confidence_threshold);
      const auto batch_ids = pool.refresh(selected, state.hard);
      std::vector<LabeledSentence> batch;
      for (int k : batch_ids) {
        batch.push_back({&corpus.sentence(k), state.hard[static_cast<std::size_t>(k)]});
      }
      tagger->train_incremental(batch);
      for (std::size_t b = 0; b < batch.size(); ++b) pool.mark_trained(batch_ids[b], batch[b].labels);
      record.pool_size = static_cast<int>(pool.size());
      record.trained_sentences = static_cast<int>(batch.size());
      if (tagger->trained() && record.pool_size >= config.predictor_min_pool) {
        machine = predict_low_confidence(*tagger, corpus, state, config.confidence_threshold, threads);
      }
      record.predicted_sentences = static_cast<int>(machine.annotations.size());
    }

    const auto update = update_weights(corpus, state, lagged, &machine, config.isolate_machine_weight);
    if (update.degenerate) result.warnings.push_back("iteration " + std::to_string(it) + ": degenerate loss pool");
    state.worker_weights = update.worker_weights;
    if (update.machine_weight) state.machine_weight = *update.machine_weight;

    std::vector<int> repaired(static_cast<std::size_t>(corpus.num_sentences()), 0);
    internal::parallel_for(corpus.num_sentences(), threads, [&](int k) {
      const auto sk = static_cast<std::size_t>(k);
      const auto n = corpus.sentence(k).length();
      const LabelSequence* predicted = machine.find(k);
      std::vector<WeightedVote> votes;
      auto& dists = state.dists[sk];
      LabelSequence hard(n);
      for (std::size_t i = 0; i < n; ++i) {
        votes.clear();
        for (const auto& a : corpus.annotations(k)) {
          votes.push_back({a.labels[i], state.worker_weights[static_cast<std::size_t>(a.worker)]});
        }
        if (predicted) votes.push_back({(*predicted)[i], state.machine_weight});
        dists[i] = update_token_distribution(labels, votes, u);
        hard[i] = argmax_label(dists[i]);
      }
      if (consistency && tags.sequence_inconsistency(hard) > 0) {
        SplitMix64 rng = sentence_rng(config.seed, it, k);
        LabelSequence fixed = repair_sentence(tags, hard, dists, rng, config.entity_count);
        for (std::size_t i = 0; i < n; ++i) {
          if (fixed[i] == hard[i]) continue;
          // Swap the mass of the old argmax and the repaired label so the
          // distribution keeps its margin and agrees with the hard label.
          std::swap(dists[i][static_cast<std::size_t>(fixed[i])],
                    dists[i][static_cast<std::size_t>(hard[i])]);
          ++repaired[sk];
        }
        hard = std::move(fixed);
      }
      state.hard[sk] = std::move(hard);
      state.confidence[sk] = sentence_confidence(dists);
    });
    for (int r : repaired) record.repaired_tokens += r;
    state.iteration = it;

    const auto obj = objective(corpus, state, lagged, &machine, consistency);
    check_finite(obj, state, it);
    record.objective = obj;
    record.worker_weights = state.worker_weights;
    record.machine_weight = state.machine_weight;
    record.machine_present = machine.present();
    record.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.trajectory.push_back(record);

    const double change = std::abs(obj.total - previous_total) / std::max(previous_total, 1.0);
    previous_total = obj.total;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace seqtruth
