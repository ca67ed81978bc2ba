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

#include "seqtruth/tagset.h"

#include <algorithm>
#include <set>

#include "seqtruth/corpus.h"
#include "seqtruth/error.h"

namespace seqtruth {

namespace {

struct ParsedLabel {
  char prefix;  // 'O', 'B' or 'I'
  std::string cls;
};

std::optional<ParsedLabel> parse_label(std::string_view label) {
  if (label == "O") return ParsedLabel{'O', {}};
  if (label.size() < 3 || label[1] != '-') return std::nullopt;
  if (label[0] != 'B' && label[0] != 'I') return std::nullopt;
  return ParsedLabel{label[0], std::string(label.substr(2))};
}

}  // namespace

TagSet::TagSet(const std::vector<std::string>& entity_classes)
    : classes_(entity_classes) {
  labels_.push_back("O");
  for (const auto& cls : classes_) {
    if (cls.empty()) throw SchemaError("empty entity class name");
    labels_.push_back("B-" + cls);
    labels_.push_back("I-" + cls);
  }
  for (LabelId i = 0; i < size(); ++i) {
    if (!index_.emplace(labels_[static_cast<std::size_t>(i)], i).second) {
      throw SchemaError("duplicate label " + labels_[static_cast<std::size_t>(i)]);
    }
  }
}

TagSet TagSet::Infer(std::span<const std::string> labels) {
  std::set<std::string> classes;
  for (const auto& label : labels) {
    auto parsed = parse_label(label);
    if (!parsed) throw SchemaError("label '" + label + "' is not a BIO label");
    if (parsed->prefix != 'O') classes.insert(parsed->cls);
  }
  return TagSet(std::vector<std::string>(classes.begin(), classes.end()));
}

std::optional<LabelId> TagSet::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

LabelId TagSet::id(std::string_view label) const {
  auto found = find(label);
  if (!found) throw SchemaError("label '" + std::string(label) + "' is not in the tag set");
  return *found;
}

const std::string& TagSet::name(LabelId id) const {
  check(id);
  return labels_[static_cast<std::size_t>(id)];
}

void TagSet::check(LabelId id) const {
  if (!contains(id)) {
    throw InvalidArgument("label id " + std::to_string(id) + " outside tag set of size " +
                          std::to_string(size()));
  }
}

bool TagSet::transition_valid(LabelId a, LabelId b) const {
  check(a);
  check(b);
  if (!is_inside(b)) return true;
  return !is_outside(a) && class_of(a) == class_of(b);
}

bool TagSet::start_valid(LabelId b) const {
  check(b);
  return !is_inside(b);
}

int TagSet::sequence_inconsistency(std::span<const LabelId> seq) const {
  if (seq.empty()) throw InvalidArgument("sequence_inconsistency of an empty sequence");
  int count = start_valid(seq[0]) ? 0 : 1;
  for (std::size_t i = 1; i < seq.size(); ++i) count += pair_inconsistency(seq[i - 1], seq[i]);
  return count;
}

std::vector<Span> TagSet::spans_of(std::span<const LabelId> seq) const {
  std::vector<Span> spans;
  int open_class = -1;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const LabelId label = seq[i];
    check(label);
    const int cls = class_of(label);
    const bool continues = is_inside(label) && cls == open_class;
    if (!continues && open_class >= 0) {
      spans.back().end = static_cast<int>(i);
      open_class = -1;
    }
    if (!is_outside(label) && !continues) {
      spans.push_back(Span{classes_[static_cast<std::size_t>(cls)], static_cast<int>(i), 0});
      open_class = cls;
    }
  }
  if (open_class >= 0) spans.back().end = static_cast<int>(seq.size());
  return spans;
}

std::vector<Span> TagSet::strict_spans_of(std::span<const LabelId> seq) const {
  std::vector<Span> spans;
  int open_class = -1;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const LabelId label = seq[i];
    check(label);
    const int cls = class_of(label);
    const bool continues = is_inside(label) && cls == open_class;
    if (!continues && open_class >= 0) {
      spans.back().end = static_cast<int>(i);
      open_class = -1;
    }
    if (is_begin(label)) {
      spans.push_back(Span{classes_[static_cast<std::size_t>(cls)], static_cast<int>(i), 0});
      open_class = cls;
    }
  }
  if (open_class >= 0) spans.back().end = static_cast<int>(seq.size());
  return spans;
}

int TagSet::entity_label_count(std::span<const LabelId> seq) const {
  return static_cast<int>(
      std::count_if(seq.begin(), seq.end(), [this](LabelId id) { return !is_outside(id); }));
}

int TagSet::entity_count(std::span<const LabelId> seq, EntityCountMode mode) const {
  if (mode == EntityCountMode::kSpans) return static_cast<int>(spans_of(seq).size());
  return entity_label_count(seq);
}

LabelSequence TagSet::encode(std::span<const std::string> labels) const {
  LabelSequence out;
  out.reserve(labels.size());
  for (const auto& label : labels) out.push_back(id(label));
  return out;
}

std::vector<std::string> TagSet::decode(std::span<const LabelId> seq) const {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (LabelId id : seq) out.push_back(name(id));
  return out;
}

std::vector<std::string> iob1_to_iob2(std::span<const std::string> labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  std::string prev_class;
  bool prev_entity = false;
  for (auto& label : out) {
    auto parsed = parse_label(label);
    if (!parsed) throw SchemaError("label '" + label + "' is not a BIO label");
    if (parsed->prefix == 'I' && (!prev_entity || prev_class != parsed->cls)) {
      label = "B-" + parsed->cls;
    }
    prev_entity = parsed->prefix != 'O';
    prev_class = parsed->cls;
  }
  return out;
}

ClassWeights class_weights_from_counts(std::span<const long> counts) {
  if (counts.empty()) throw InvalidArgument("class weights need at least one label");
  long total = 0;
  for (long c : counts) total += c;
  if (total <= 0) throw InvalidArgument("class weights need at least one observed label");
  const double labels = static_cast<double>(counts.size());
  ClassWeights weights;
  weights.u.assign(counts.size(), 0.0);
  double max_u = 0.0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) {
      weights.u[c] = static_cast<double>(total) / (labels * static_cast<double>(counts[c]));
      max_u = std::max(max_u, weights.u[c]);
    }
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) weights.u[c] = max_u;
  }
  return weights;
}

ClassWeights compute_class_weights(const AnnotationCorpus& corpus) {
  return class_weights_from_counts(corpus.worker_label_counts());
}

}  // namespace seqtruth
