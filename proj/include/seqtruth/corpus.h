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

#ifndef SEQTRUTH_CORPUS_H_
#define SEQTRUTH_CORPUS_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "seqtruth/tagset.h"

namespace seqtruth {

// Worker id reserved for the co-trained tagger.
inline constexpr std::string_view kMachineWorkerId = "__machine__";

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;

  std::size_t length() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

// One worker's labels for one sentence.
struct WorkerAnnotation {
  std::string worker_id;
  std::string sentence_id;
  LabelSequence labels;
};

// Annotation as stored per sentence, keyed by dense worker index.
struct SentenceAnnotation {
  int worker = 0;
  LabelSequence labels;

  bool operator==(const SentenceAnnotation&) const = default;
};

// Sentences plus a partial map (worker, sentence) -> labels, with optional gold.
// Immutable once built; construct through CorpusBuilder.
class AnnotationCorpus {
 public:
  const TagSet& tag_set() const { return tag_set_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& sentence(int k) const { return sentences_[static_cast<std::size_t>(k)]; }
  int num_sentences() const { return static_cast<int>(sentences_.size()); }
  int num_workers() const { return static_cast<int>(worker_ids_.size()); }
  const std::vector<std::string>& worker_ids() const { return worker_ids_; }
  std::optional<int> worker_index(std::string_view worker_id) const;
  std::optional<int> sentence_index(std::string_view sentence_id) const;

  // Annotations of sentence k ordered by worker index.
  std::span<const SentenceAnnotation> annotations(int k) const {
    return by_sentence_[static_cast<std::size_t>(k)];
  }
  const LabelSequence* find(int worker, int k) const;
  // Sentences annotated by `worker`, ascending.
  std::span<const int> sentences_of(int worker) const {
    return by_worker_[static_cast<std::size_t>(worker)];
  }
  long tokens_of(int worker) const;
  long num_tokens() const;

  // True when every sentence carries gold labels.
  bool has_gold() const;
  const std::optional<LabelSequence>& gold(int k) const {
    return gold_[static_cast<std::size_t>(k)];
  }
  std::vector<LabelSequence> gold_sequences() const;

  // Occurrences of each label over all worker annotations.
  std::vector<long> worker_label_counts() const;
  // Sentences carrying fewer than two annotations.
  int sparsely_annotated_sentences() const;

  std::vector<WorkerAnnotation> worker_annotations() const;

  bool operator==(const AnnotationCorpus&) const = default;

 private:
  friend class CorpusBuilder;

  TagSet tag_set_;
  std::vector<Sentence> sentences_;
  std::vector<std::string> worker_ids_;
  std::vector<std::vector<SentenceAnnotation>> by_sentence_;
  std::vector<std::vector<int>> by_worker_;
  std::vector<std::optional<LabelSequence>> gold_;
  std::unordered_map<std::string, int> worker_lookup_;
  std::unordered_map<std::string, int> sentence_lookup_;
};

// Accumulates sentences and annotations, then validates every corpus
// invariant in build().
class CorpusBuilder {
 public:
  explicit CorpusBuilder(TagSet tag_set) : tag_set_(std::move(tag_set)) {}

  // Returns the sentence index. Throws SchemaError on duplicate ids or empty
  // token lists.
  int add_sentence(Sentence sentence);
  void add_annotation(const std::string& worker_id, int sentence, LabelSequence labels);
  void set_gold(int sentence, LabelSequence labels);

  // Workers are indexed in order of first appearance. Throws SchemaError
  // when a sentence has no annotation (unless allow_unannotated).
  AnnotationCorpus build(bool allow_unannotated = false) &&;

 private:
  TagSet tag_set_;
  std::vector<Sentence> sentences_;
  std::vector<std::string> worker_order_;
  std::unordered_map<std::string, int> worker_lookup_;
  std::map<std::pair<int, int>, LabelSequence> annotations_;
  std::vector<std::optional<LabelSequence>> gold_;
  std::unordered_map<std::string, int> sentence_lookup_;
};

struct LoadOptions {
  // Declared tag set; inferred from all labels in the input when unset.
  std::optional<TagSet> tag_set;
  // Input labels use IOB1 and are converted to IOB2 on load.
  bool iob1 = false;
};

// "s" followed by the zero-padded 1-based ordinal.
std::string default_sentence_id(std::size_t ordinal);

// JSONL, one sentence per line:
//   {"id": str, "tokens": [str], "annotations": {"<worker>": [label]},
//    "gold": [label]}
// "id" and "gold" are optional; unknown keys are ignored.
AnnotationCorpus read_jsonl(std::istream& in, const LoadOptions& options = {});
AnnotationCorpus load_jsonl(const std::filesystem::path& path, const LoadOptions& options = {});

// Writes the corpus in the JSONL schema above. When `aggregate` is given each
// record also carries an "aggregate" label list.
void write_jsonl(const AnnotationCorpus& corpus, std::ostream& out,
                 const std::vector<LabelSequence>* aggregate = nullptr);
void write_jsonl(const AnnotationCorpus& corpus, const std::filesystem::path& path,
                 const std::vector<LabelSequence>* aggregate = nullptr);

// Missing-label markers accepted in CoNLL worker columns.
bool is_missing_label(std::string_view label);

// Column files: "token label [label ...]", blank-line separated sentences,
// "-DOCSTART-" lines skipped. Each label column of each file is one worker,
// named after the file stem (suffixed "#<column>" when a file carries more
// than one). A worker whose labels are all missing ("?" or "_") in a
// sentence did not annotate it. The gold file's last column is the gold
// label.
AnnotationCorpus load_conll(std::span<const std::filesystem::path> worker_files,
                            const std::optional<std::filesystem::path>& gold_file = std::nullopt,
                            const LoadOptions& options = {});

// Tab-separated columns: token, one column per worker ("_" where the worker
// did not annotate the sentence), aggregated label. Every sentence is
// followed by one blank line.
void write_output(const AnnotationCorpus& corpus, std::span<const LabelSequence> aggregate,
                  std::ostream& out);
void write_output(const AnnotationCorpus& corpus, std::span<const LabelSequence> aggregate,
                  const std::filesystem::path& path);

// Reads one labelled column (negative index counts from the end) of a
// column file back as label strings, one vector per sentence.
struct ColumnSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};
std::vector<ColumnSentence> read_column_file(const std::filesystem::path& path, int column = -1);

// Sentences with one label sequence each (gold corpora, predictions).
struct LabeledCorpus {
  TagSet tag_set;
  std::vector<Sentence> sentences;
  std::vector<LabelSequence> labels;
};

// Label strings as read from disk, before a tag set is fixed.
struct LabeledText {
  std::vector<Sentence> sentences;
  std::vector<std::vector<std::string>> labels;
};

// Reads one label sequence per sentence. ".jsonl"/".json" files take the
// first present field of `fields` from each record; other files are column
// files whose last column is the label.
LabeledText read_labeled(const std::filesystem::path& path,
                         const std::vector<std::string>& fields = {"aggregate", "gold", "labels"});
LabeledCorpus to_labeled_corpus(LabeledText text, const LoadOptions& options = {});

// {"id", "tokens", "gold"} per line.
void write_labeled_jsonl(const LabeledCorpus& corpus, std::ostream& out);
void write_labeled_jsonl(const LabeledCorpus& corpus, const std::filesystem::path& path);

}  // namespace seqtruth

#endif  // SEQTRUTH_CORPUS_H_
