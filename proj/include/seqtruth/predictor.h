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

#ifndef SEQTRUTH_PREDICTOR_H_
#define SEQTRUTH_PREDICTOR_H_

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqtruth/aggregation.h"
#include "seqtruth/corpus.h"
#include "seqtruth/tagset.h"

namespace seqtruth {

struct LabeledSentence {
  const Sentence* sentence = nullptr;
  LabelSequence labels;
};

// A sequence tagger that can be trained in increments and whose predictions
// join the aggregation as one more worker.
class SequenceTagger {
 public:
  virtual ~SequenceTagger() = default;

  // Cumulative: earlier training is retained.
  virtual void train_incremental(std::span<const LabeledSentence> batch) = 0;
  virtual bool trained() const = 0;
  // Exactly one label per token.
  virtual LabelSequence predict(std::span<const std::string> tokens) const = 0;
  virtual std::vector<LabelSequence> predict_batch(std::span<const Sentence* const> sentences,
                                                   int threads = 1) const;
};

// Features of token i: bias, lowercased word, shape, 3-char prefix and
// suffix, neighbouring lowercased words and a capitalisation flag.
std::vector<std::string> token_features(std::span<const std::string> tokens, std::size_t i);

// Averaged structured perceptron with first-order transitions. Decoding only
// ever produces BIO-valid sequences.
class PerceptronTagger : public SequenceTagger {
 public:
  explicit PerceptronTagger(TagSet tags, int epochs = 3);

  void train_incremental(std::span<const LabeledSentence> batch) override;
  bool trained() const override { return instances_ > 0; }
  LabelSequence predict(std::span<const std::string> tokens) const override;

  // Current (non-averaged) parameters: feature weights then transitions.
  std::vector<double> raw_parameters() const;
  long updates() const { return updates_; }

 private:
  struct Param {
    double weight = 0.0;
    double total = 0.0;  // sum of weight over instances up to `stamp`
    long stamp = 0;
  };

  LabelSequence decode(std::span<const std::string> tokens, bool averaged) const;
  std::vector<int> feature_ids(std::span<const std::string> tokens, std::size_t i, bool grow);
  std::vector<int> known_feature_ids(std::span<const std::string> tokens, std::size_t i) const;
  void bump(Param& p, double delta);
  void refresh_average();

  TagSet tags_;
  int epochs_;
  std::unordered_map<std::string, int> feature_index_;
  std::vector<Param> emission_;    // feature * J + label
  std::vector<Param> transition_;  // (prev + 1) * J + label, prev = -1 is the start
  std::vector<double> avg_emission_;
  std::vector<double> avg_transition_;
  long instances_ = 0;
  long updates_ = 0;
};

// Sentences whose confidence is strictly above tau.
std::vector<int> select_training_sentences(std::span<const double> confidence, double tau);

// Sentences admitted for training, with the labels they were last trained on.
// The pool only grows; a member whose hard labels move is retrained.
class TrainingPool {
 public:
  // Admits `selected` and returns the sentences that need (re)training with
  // their latest labels, ascending by sentence index.
  std::vector<int> refresh(std::span<const int> selected, std::span<const LabelSequence> hard);
  void mark_trained(int k, const LabelSequence& labels) { trained_[k] = labels; }

  std::size_t size() const { return members_.size(); }
  bool contains(int k) const { return members_.count(k) != 0; }
  bool ever_trained(int k) const { return trained_.count(k) != 0; }
  const std::set<int>& members() const { return members_; }

 private:
  std::set<int> members_;
  std::map<int, LabelSequence> trained_;
};

// Predictions for every sentence with confidence <= tau. Empty (with a
// warning) when the tagger has not been trained.
MachineWorker predict_low_confidence(const SequenceTagger& tagger, const AnnotationCorpus& corpus,
                                     const AggregateState& state, double tau, int threads = 1);

// Wraps predictions (sentence index -> labels) as the machine worker.
MachineWorker machine_as_worker(std::map<int, LabelSequence> predictions);

// Bridge to an out-of-process tagger. Each exchange writes one JSONL batch
// to the command's standard input: {"id", "tokens", "labels"} lines for
// training items and {"id", "tokens"} lines for prediction requests. The
// command answers with {"id", "labels"} lines for every request.
class ExternalTagger : public SequenceTagger {
 public:
  ExternalTagger(TagSet tags, std::string command);

  void train_incremental(std::span<const LabeledSentence> batch) override;
  bool trained() const override { return trained_; }
  LabelSequence predict(std::span<const std::string> tokens) const override;
  std::vector<LabelSequence> predict_batch(std::span<const Sentence* const> sentences,
                                           int threads = 1) const override;

 private:
  TagSet tags_;
  std::string command_;
  bool trained_ = false;
  // Training items not yet sent; they ride along with the next exchange.
  mutable std::vector<std::pair<Sentence, LabelSequence>> pending_;
};

std::unique_ptr<SequenceTagger> make_tagger(const TagSet& tags, const EngineConfig& config);

}  // namespace seqtruth

#endif  // SEQTRUTH_PREDICTOR_H_
