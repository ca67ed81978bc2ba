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

#include "seqtruth/corpus.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "seqtruth/error.h"

namespace seqtruth {

using ordered_json = nlohmann::ordered_json;

std::optional<int> AnnotationCorpus::worker_index(std::string_view worker_id) const {
  auto it = worker_lookup_.find(std::string(worker_id));
  if (it == worker_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> AnnotationCorpus::sentence_index(std::string_view sentence_id) const {
  auto it = sentence_lookup_.find(std::string(sentence_id));
  if (it == sentence_lookup_.end()) return std::nullopt;
  return it->second;
}

const LabelSequence* AnnotationCorpus::find(int worker, int k) const {
  for (const auto& a : annotations(k)) {
    if (a.worker == worker) return &a.labels;
  }
  return nullptr;
}

long AnnotationCorpus::tokens_of(int worker) const {
  long total = 0;
  for (int k : sentences_of(worker)) total += static_cast<long>(sentence(k).length());
  return total;
}

long AnnotationCorpus::num_tokens() const {
  long total = 0;
  for (const auto& s : sentences_) total += static_cast<long>(s.length());
  return total;
}

bool AnnotationCorpus::has_gold() const {
  return !gold_.empty() &&
         std::all_of(gold_.begin(), gold_.end(), [](const auto& g) { return g.has_value(); });
}

std::vector<LabelSequence> AnnotationCorpus::gold_sequences() const {
  if (!has_gold()) throw SchemaError("corpus has no gold labels for every sentence");
  std::vector<LabelSequence> out;
  out.reserve(gold_.size());
  for (const auto& g : gold_) out.push_back(*g);
  return out;
}

std::vector<long> AnnotationCorpus::worker_label_counts() const {
  std::vector<long> counts(static_cast<std::size_t>(tag_set_.size()), 0);
  for (const auto& sentence_annotations : by_sentence_) {
    for (const auto& a : sentence_annotations) {
      for (LabelId label : a.labels) ++counts[static_cast<std::size_t>(label)];
    }
  }
  return counts;
}

int AnnotationCorpus::sparsely_annotated_sentences() const {
  return static_cast<int>(std::count_if(by_sentence_.begin(), by_sentence_.end(),
                                        [](const auto& a) { return a.size() < 2; }));
}

std::vector<WorkerAnnotation> AnnotationCorpus::worker_annotations() const {
  std::vector<WorkerAnnotation> out;
  for (int k = 0; k < num_sentences(); ++k) {
    for (const auto& a : annotations(k)) {
      out.push_back({worker_ids_[static_cast<std::size_t>(a.worker)], sentence(k).id, a.labels});
    }
  }
  return out;
}

int CorpusBuilder::add_sentence(Sentence sentence) {
  if (sentence.tokens.empty()) {
    throw SchemaError("sentence '" + sentence.id + "' has no tokens");
  }
  const int index = static_cast<int>(sentences_.size());
  if (!sentence_lookup_.emplace(sentence.id, index).second) {
    throw SchemaError("duplicate sentence id '" + sentence.id + "'");
  }
  sentences_.push_back(std::move(sentence));
  gold_.emplace_back();
  return index;
}

void CorpusBuilder::add_annotation(const std::string& worker_id, int sentence,
                                   LabelSequence labels) {
  if (sentence < 0 || sentence >= static_cast<int>(sentences_.size())) {
    throw SchemaError("annotation by '" + worker_id + "' references an unknown sentence");
  }
  const auto& s = sentences_[static_cast<std::size_t>(sentence)];
  if (worker_id == kMachineWorkerId) {
    throw SchemaError("worker id '" + worker_id + "' is reserved for the machine worker");
  }
  if (labels.size() != s.length()) {
    throw SchemaError("sentence '" + s.id + "': worker '" + worker_id + "' gives " +
                      std::to_string(labels.size()) + " labels for " +
                      std::to_string(s.length()) + " tokens");
  }
  for (LabelId label : labels) {
    if (!tag_set_.contains(label)) {
      throw SchemaError("sentence '" + s.id + "': label id outside tag set");
    }
  }
  auto [it, inserted] = worker_lookup_.emplace(worker_id, static_cast<int>(worker_order_.size()));
  if (inserted) worker_order_.push_back(worker_id);
  if (!annotations_.emplace(std::pair{it->second, sentence}, std::move(labels)).second) {
    throw SchemaError("sentence '" + s.id + "': worker '" + worker_id + "' annotated it twice");
  }
}

void CorpusBuilder::set_gold(int sentence, LabelSequence labels) {
  const auto& s = sentences_.at(static_cast<std::size_t>(sentence));
  if (labels.size() != s.length()) {
    throw SchemaError("sentence '" + s.id + "': gold has " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(s.length()) + " tokens");
  }
  for (LabelId label : labels) {
    if (!tag_set_.contains(label)) throw SchemaError("sentence '" + s.id + "': bad gold label");
  }
  gold_[static_cast<std::size_t>(sentence)] = std::move(labels);
}

AnnotationCorpus CorpusBuilder::build(bool allow_unannotated) && {
  AnnotationCorpus corpus;
  corpus.tag_set_ = std::move(tag_set_);
  corpus.worker_ids_ = std::move(worker_order_);
  corpus.by_sentence_.resize(sentences_.size());
  corpus.by_worker_.resize(corpus.worker_ids_.size());
  for (auto& [key, labels] : annotations_) {
    auto [worker, sentence] = key;
    corpus.by_sentence_[static_cast<std::size_t>(sentence)].push_back({worker, std::move(labels)});
    corpus.by_worker_[static_cast<std::size_t>(worker)].push_back(sentence);
  }
  for (auto& w : corpus.by_worker_) std::sort(w.begin(), w.end());
  if (!allow_unannotated) {
    for (std::size_t k = 0; k < sentences_.size(); ++k) {
      if (corpus.by_sentence_[k].empty()) {
        throw SchemaError("sentence '" + sentences_[k].id + "' has no worker annotation");
      }
    }
  }
  corpus.sentences_ = std::move(sentences_);
  corpus.gold_ = std::move(gold_);
  corpus.worker_lookup_ = std::move(worker_lookup_);
  corpus.sentence_lookup_ = std::move(sentence_lookup_);
  return corpus;
}

std::string default_sentence_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06zu", ordinal);
  return buf;
}

namespace {

// Label strings as read, before the tag set is known.
struct RawRecord {
  Sentence sentence;
  std::vector<std::pair<std::string, std::vector<std::string>>> annotations;
  std::optional<std::vector<std::string>> gold;
  std::size_t line = 0;
};

std::vector<std::string> string_list(const ordered_json& value, const char* what,
                                     std::size_t line) {
  if (!value.is_array()) throw ParseError(std::string(what) + " must be an array", line);
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) throw ParseError(std::string(what) + " must contain strings", line);
    out.push_back(item.get<std::string>());
  }
  return out;
}

TagSet resolve_tag_set(std::vector<RawRecord>& records, const LoadOptions& options) {
  if (options.iob1) {
    for (auto& r : records) {
      for (auto& [worker, labels] : r.annotations) labels = iob1_to_iob2(labels);
      if (r.gold) *r.gold = iob1_to_iob2(*r.gold);
    }
  }
  if (options.tag_set) return *options.tag_set;
  std::vector<std::string> all;
  for (const auto& r : records) {
    for (const auto& [worker, labels] : r.annotations) {
      all.insert(all.end(), labels.begin(), labels.end());
    }
    if (r.gold) all.insert(all.end(), r.gold->begin(), r.gold->end());
  }
  TagSet inferred = TagSet::Infer(all);
  std::string classes;
  for (const auto& c : inferred.entity_classes()) classes += (classes.empty() ? "" : ",") + c;
  spdlog::info("inferred tag set with {} labels, entity classes [{}]", inferred.size(), classes);
  return inferred;
}

LabelSequence encode_checked(const TagSet& tag_set, const std::vector<std::string>& labels,
                             const std::string& sentence_id) {
  LabelSequence out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    auto id = tag_set.find(label);
    if (!id) {
      throw SchemaError("sentence '" + sentence_id + "': label '" + label +
                        "' is not in the tag set");
    }
    out.push_back(*id);
  }
  return out;
}

AnnotationCorpus build_corpus(std::vector<RawRecord> records, const LoadOptions& options) {
  TagSet tag_set = resolve_tag_set(records, options);
  CorpusBuilder builder(tag_set);
  for (auto& r : records) {
    const std::string id = r.sentence.id;
    const std::size_t length = r.sentence.length();
    const int k = builder.add_sentence(std::move(r.sentence));
    for (auto& [worker, labels] : r.annotations) {
      if (labels.size() != length) {
        throw SchemaError("sentence '" + id + "': worker '" + worker + "' gives " +
                          std::to_string(labels.size()) + " labels for " +
                          std::to_string(length) + " tokens");
      }
      builder.add_annotation(worker, k, encode_checked(tag_set, labels, id));
    }
    if (r.gold) {
      if (r.gold->size() != length) {
        throw SchemaError("sentence '" + id + "': gold gives " + std::to_string(r.gold->size()) +
                          " labels for " + std::to_string(length) + " tokens");
      }
      builder.set_gold(k, encode_checked(tag_set, *r.gold, id));
    }
  }
  return std::move(builder).build();
}

std::string trim_right(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\n')) {
    s.pop_back();
  }
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (in >> field) fields.push_back(field);
  return fields;
}

struct ColumnBlock {
  std::vector<std::vector<std::string>> rows;
  std::size_t first_line = 0;
};

std::vector<ColumnBlock> read_blocks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::vector<ColumnBlock> blocks;
  ColumnBlock current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(trim_right(line));
    if (fields.empty()) {
      if (!current.rows.empty()) blocks.push_back(std::move(current));
      current = ColumnBlock{};
      continue;
    }
    if (fields[0] == "-DOCSTART-") continue;
    if (fields.size() < 2) {
      throw ParseError(path.string() + ": expected \"token label\" columns", line_no);
    }
    if (current.rows.empty()) current.first_line = line_no;
    if (!current.rows.empty() && current.rows.front().size() != fields.size()) {
      throw ParseError(path.string() + ": inconsistent column count", line_no);
    }
    current.rows.push_back(std::move(fields));
  }
  if (!current.rows.empty()) blocks.push_back(std::move(current));
  return blocks;
}

}  // namespace

AnnotationCorpus read_jsonl(std::istream& in, const LoadOptions& options) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim_right(line).empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("record must be a JSON object", line_no);
    RawRecord r;
    r.line = line_no;
    if (obj.contains("id")) {
      if (!obj["id"].is_string()) throw ParseError("\"id\" must be a string", line_no);
      r.sentence.id = obj["id"].get<std::string>();
    } else {
      r.sentence.id = default_sentence_id(records.size() + 1);
    }
    if (!obj.contains("tokens")) throw ParseError("missing \"tokens\"", line_no);
    r.sentence.tokens = string_list(obj["tokens"], "\"tokens\"", line_no);
    if (obj.contains("annotations")) {
      const auto& ann = obj["annotations"];
      if (!ann.is_object()) throw ParseError("\"annotations\" must be an object", line_no);
      for (const auto& [worker, labels] : ann.items()) {
        r.annotations.emplace_back(worker, string_list(labels, "annotation", line_no));
      }
    }
    if (obj.contains("gold") && !obj["gold"].is_null()) {
      r.gold = string_list(obj["gold"], "\"gold\"", line_no);
    }
    records.push_back(std::move(r));
  }
  return build_corpus(std::move(records), options);
}

AnnotationCorpus load_jsonl(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  return read_jsonl(in, options);
}

void write_jsonl(const AnnotationCorpus& corpus, std::ostream& out,
                 const std::vector<LabelSequence>* aggregate) {
  const auto& tags = corpus.tag_set();
  for (int k = 0; k < corpus.num_sentences(); ++k) {
    const auto& s = corpus.sentence(k);
    ordered_json obj;
    obj["id"] = s.id;
    obj["tokens"] = s.tokens;
    ordered_json ann = ordered_json::object();
    for (const auto& a : corpus.annotations(k)) {
      ann[corpus.worker_ids()[static_cast<std::size_t>(a.worker)]] = tags.decode(a.labels);
    }
    obj["annotations"] = std::move(ann);
    if (corpus.gold(k)) obj["gold"] = tags.decode(*corpus.gold(k));
    if (aggregate) obj["aggregate"] = tags.decode((*aggregate)[static_cast<std::size_t>(k)]);
    out << obj.dump() << '\n';
  }
  if (!out) throw SchemaError("write failed");
}

void write_jsonl(const AnnotationCorpus& corpus, const std::filesystem::path& path,
                 const std::vector<LabelSequence>* aggregate) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  write_jsonl(corpus, out, aggregate);
}

bool is_missing_label(std::string_view label) { return label == "?" || label == "_"; }

AnnotationCorpus load_conll(std::span<const std::filesystem::path> worker_files,
                            const std::optional<std::filesystem::path>& gold_file,
                            const LoadOptions& options) {
  if (worker_files.empty()) throw InvalidArgument("load_conll needs at least one worker file");

  std::vector<std::vector<ColumnBlock>> files;
  for (const auto& path : worker_files) files.push_back(read_blocks(path));
  std::optional<std::vector<ColumnBlock>> gold_blocks;
  if (gold_file) gold_blocks = read_blocks(*gold_file);

  const auto& reference = files.front();
  auto check_alignment = [&](const std::vector<ColumnBlock>& blocks,
                             const std::filesystem::path& path) {
    if (blocks.size() != reference.size()) {
      throw AlignmentError(path.string() + " has " + std::to_string(blocks.size()) +
                           " sentences, " + worker_files.front().string() + " has " +
                           std::to_string(reference.size()));
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& a = reference[k].rows;
      const auto& b = blocks[k].rows;
      if (a.size() != b.size()) {
        throw AlignmentError(path.string() + ": sentence " + std::to_string(k) +
                             " has a different number of tokens");
      }
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i][0] != b[i][0]) {
          throw AlignmentError(path.string() + ": sentence " + std::to_string(k) + " token " +
                               std::to_string(i) + " is '" + b[i][0] + "', expected '" +
                               a[i][0] + "'");
        }
      }
    }
  };
  for (std::size_t f = 1; f < files.size(); ++f) check_alignment(files[f], worker_files[f]);
  if (gold_blocks) check_alignment(*gold_blocks, *gold_file);

  std::vector<RawRecord> records(reference.size());
  for (std::size_t k = 0; k < reference.size(); ++k) {
    records[k].sentence.id = default_sentence_id(k + 1);
    for (const auto& row : reference[k].rows) records[k].sentence.tokens.push_back(row[0]);
    records[k].line = reference[k].first_line;
  }
  for (std::size_t f = 0; f < files.size(); ++f) {
    const auto& blocks = files[f];
    const std::string stem = worker_files[f].stem().string();
    const std::size_t columns = blocks.empty() ? 0 : blocks.front().rows.front().size() - 1;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      if (blocks[k].rows.front().size() - 1 != columns) {
        throw ParseError(worker_files[f].string() + ": inconsistent column count",
                         blocks[k].first_line);
      }
      for (std::size_t c = 1; c <= columns; ++c) {
        std::vector<std::string> labels;
        std::size_t missing = 0;
        for (const auto& row : blocks[k].rows) {
          labels.push_back(row[c]);
          if (is_missing_label(row[c])) ++missing;
        }
        if (missing == labels.size()) continue;
        if (missing != 0) {
          throw SchemaError(worker_files[f].string() + ": sentence " + std::to_string(k) +
                            " is only partially annotated in column " + std::to_string(c));
        }
        const std::string worker = columns == 1 ? stem : stem + "#" + std::to_string(c);
        records[k].annotations.emplace_back(worker, std::move(labels));
      }
    }
  }
  if (gold_blocks) {
    for (std::size_t k = 0; k < gold_blocks->size(); ++k) {
      std::vector<std::string> labels;
      for (const auto& row : (*gold_blocks)[k].rows) labels.push_back(row.back());
      records[k].gold = std::move(labels);
    }
  }
  return build_corpus(std::move(records), options);
}

void write_output(const AnnotationCorpus& corpus, std::span<const LabelSequence> aggregate,
                  std::ostream& out) {
  if (aggregate.size() != static_cast<std::size_t>(corpus.num_sentences())) {
    throw InvalidArgument("aggregate does not cover every sentence");
  }
  const auto& tags = corpus.tag_set();
  for (int k = 0; k < corpus.num_sentences(); ++k) {
    const auto& s = corpus.sentence(k);
    const auto& agg = aggregate[static_cast<std::size_t>(k)];
    if (agg.size() != s.length()) throw InvalidArgument("aggregate length mismatch at " + s.id);
    std::vector<const LabelSequence*> columns;
    for (int j = 0; j < corpus.num_workers(); ++j) columns.push_back(corpus.find(j, k));
    for (std::size_t i = 0; i < s.length(); ++i) {
      out << s.tokens[i];
      for (const auto* labels : columns) {
        out << '\t' << (labels ? tags.name((*labels)[i]) : std::string("_"));
      }
      out << '\t' << tags.name(agg[i]) << '\n';
    }
    out << '\n';
  }
  if (!out) throw SchemaError("write failed");
}

void write_output(const AnnotationCorpus& corpus, std::span<const LabelSequence> aggregate,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  write_output(corpus, aggregate, out);
}

std::vector<ColumnSentence> read_column_file(const std::filesystem::path& path, int column) {
  std::vector<ColumnSentence> out;
  for (const auto& block : read_blocks(path)) {
    ColumnSentence s;
    for (const auto& row : block.rows) {
      const int n = static_cast<int>(row.size());
      const int c = column < 0 ? n + column : column;
      if (c < 1 || c >= n) throw ParseError(path.string() + ": no such column", block.first_line);
      s.tokens.push_back(row[0]);
      s.labels.push_back(row[static_cast<std::size_t>(c)]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

LabeledText read_labeled(const std::filesystem::path& path,
                         const std::vector<std::string>& fields) {
  LabeledText out;
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim_right(line).empty()) continue;
      ordered_json obj;
      try {
        obj = ordered_json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), line_no);
      }
      Sentence s;
      s.id = obj.contains("id") ? obj["id"].get<std::string>()
                                : default_sentence_id(out.sentences.size() + 1);
      if (!obj.contains("tokens")) throw ParseError("missing \"tokens\"", line_no);
      s.tokens = string_list(obj["tokens"], "\"tokens\"", line_no);
      std::optional<std::vector<std::string>> labels;
      for (const auto& field : fields) {
        if (obj.contains(field) && !obj[field].is_null()) {
          labels = string_list(obj[field], field.c_str(), line_no);
          break;
        }
      }
      if (!labels) throw ParseError("record has none of the label fields", line_no);
      if (labels->size() != s.length()) {
        throw SchemaError("sentence '" + s.id + "': " + std::to_string(labels->size()) +
                          " labels for " + std::to_string(s.length()) + " tokens");
      }
      out.sentences.push_back(std::move(s));
      out.labels.push_back(std::move(*labels));
    }
    return out;
  }
  std::size_t ordinal = 0;
  for (auto& column : read_column_file(path, -1)) {
    out.sentences.push_back({default_sentence_id(++ordinal), std::move(column.tokens)});
    out.labels.push_back(std::move(column.labels));
  }
  return out;
}

LabeledCorpus to_labeled_corpus(LabeledText text, const LoadOptions& options) {
  if (options.iob1) {
    for (auto& labels : text.labels) labels = iob1_to_iob2(labels);
  }
  LabeledCorpus out;
  if (options.tag_set) {
    out.tag_set = *options.tag_set;
  } else {
    std::vector<std::string> all;
    for (const auto& labels : text.labels) all.insert(all.end(), labels.begin(), labels.end());
    out.tag_set = TagSet::Infer(all);
  }
  for (std::size_t k = 0; k < text.sentences.size(); ++k) {
    out.labels.push_back(encode_checked(out.tag_set, text.labels[k], text.sentences[k].id));
  }
  out.sentences = std::move(text.sentences);
  return out;
}

void write_labeled_jsonl(const LabeledCorpus& corpus, std::ostream& out) {
  for (std::size_t k = 0; k < corpus.sentences.size(); ++k) {
    ordered_json obj;
    obj["id"] = corpus.sentences[k].id;
    obj["tokens"] = corpus.sentences[k].tokens;
    obj["gold"] = corpus.tag_set.decode(corpus.labels[k]);
    out << obj.dump() << '\n';
  }
  if (!out) throw SchemaError("write failed");
}

void write_labeled_jsonl(const LabeledCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write " + path.string());
  write_labeled_jsonl(corpus, out);
}

}  // namespace seqtruth
