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

#ifndef SEQTRUTH_TAGSET_H_
#define SEQTRUTH_TAGSET_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace seqtruth {

using LabelId = int;
using LabelSequence = std::vector<LabelId>;

class AnnotationCorpus;

// An entity mention: tokens [start, end) of class `entity_class`.
struct Span {
  std::string entity_class;
  int start = 0;
  int end = 0;

  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
};

// How "recognized entity labels" are counted when two repaired candidates
// are compared.
enum class EntityCountMode { kTokens, kSpans };

// BIO label inventory. Label 0 is always "O"; entity classes follow in
// declaration order, each contributing B-X then I-X.
//
// Transition validity: b may follow a unless b is I-X and a is neither B-X
// nor I-X. The sentence start behaves like a preceding "O".
class TagSet {
 public:
  TagSet() : TagSet(std::vector<std::string>{}) {}
  explicit TagSet(const std::vector<std::string>& entity_classes);

  // Collects the entity classes from BIO label strings; classes are sorted.
  // Throws SchemaError on anything that is not O, B-X or I-X.
  static TagSet Infer(std::span<const std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& entity_classes() const { return classes_; }

  LabelId outside() const { return 0; }
  bool contains(LabelId id) const { return id >= 0 && id < size(); }
  std::optional<LabelId> find(std::string_view label) const;
  // Throws SchemaError for labels outside the inventory.
  LabelId id(std::string_view label) const;
  const std::string& name(LabelId id) const;

  bool is_outside(LabelId id) const { return id == 0; }
  bool is_begin(LabelId id) const { return id > 0 && id % 2 == 1; }
  bool is_inside(LabelId id) const { return id > 0 && id % 2 == 0; }
  // -1 for "O".
  int class_of(LabelId id) const { return id == 0 ? -1 : (id - 1) / 2; }
  LabelId begin_of(int cls) const { return 1 + 2 * cls; }
  LabelId inside_of(int cls) const { return 2 + 2 * cls; }

  bool transition_valid(LabelId a, LabelId b) const;
  bool start_valid(LabelId b) const;
  int pair_inconsistency(LabelId a, LabelId b) const {
    return transition_valid(a, b) ? 0 : 1;
  }
  // Invalid adjacent pairs plus one for an invalid first label.
  int sequence_inconsistency(std::span<const LabelId> seq) const;

  // conlleval chunking: a span opens at B-X or at an I-X that does not
  // continue a span of class X.
  std::vector<Span> spans_of(std::span<const LabelId> seq) const;
  // Only B-X opens a span; orphan I-X tokens are ignored.
  std::vector<Span> strict_spans_of(std::span<const LabelId> seq) const;

  int entity_label_count(std::span<const LabelId> seq) const;
  int entity_count(std::span<const LabelId> seq, EntityCountMode mode) const;

  LabelSequence encode(std::span<const std::string> labels) const;
  std::vector<std::string> decode(std::span<const LabelId> seq) const;

  bool operator==(const TagSet& other) const { return labels_ == other.labels_; }

 private:
  void check(LabelId id) const;

  std::vector<std::string> classes_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> index_;
};

// Rewrites IOB1 (I-X may open a span; B-X only separates adjacent spans of
// the same class) into IOB2.
std::vector<std::string> iob1_to_iob2(std::span<const std::string> labels);

// Per-label multipliers inversely proportional to label frequency.
struct ClassWeights {
  std::vector<double> u;

  double operator[](LabelId id) const { return u[static_cast<std::size_t>(id)]; }
  static ClassWeights Uniform(int num_labels) {
    return ClassWeights{std::vector<double>(static_cast<std::size_t>(num_labels), 1.0)};
  }
};

// u(c) = T / (J * count(c)); labels never observed get the largest u.
ClassWeights class_weights_from_counts(std::span<const long> counts);
ClassWeights compute_class_weights(const AnnotationCorpus& corpus);

}  // namespace seqtruth

#endif  // SEQTRUTH_TAGSET_H_
