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


#ifndef SEQTRUTH_TESTS_TEST_SUPPORT_H_
#define SEQTRUTH_TESTS_TEST_SUPPORT_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "seqtruth/corpus.h"
#include "seqtruth/tagset.h"

namespace seqtruth::testing {

inline std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline LabelSequence seq(const TagSet& tags, const std::string& text) {
  return tags.encode(words(text));
}

inline TagSet ner_tags() { return TagSet({"PER", "LOC", "ORG", "MISC"}); }

// Builds a corpus from rows of "sentence tokens | worker: labels | ...".
struct CorpusSpec {
  std::string tokens;
  std::vector<std::pair<std::string, std::string>> annotations;
  std::string gold;
};

inline AnnotationCorpus make_corpus(const TagSet& tags, const std::vector<CorpusSpec>& rows) {
  CorpusBuilder b(tags);
  std::size_t ordinal = 0;
  for (const auto& row : rows) {
    const int k = b.add_sentence({default_sentence_id(++ordinal), words(row.tokens)});
    for (const auto& [worker, labels] : row.annotations) b.add_annotation(worker, k, seq(tags, labels));
    if (!row.gold.empty()) b.set_gold(k, seq(tags, row.gold));
  }
  return std::move(b).build();
}

// Random probability vector with occasional exact zeros.
inline std::vector<double> random_distribution(std::mt19937_64& rng, int n, bool allow_zeros = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto& v : p) {
    v = allow_zeros && u(rng) < 0.2 ? 0.0 : u(rng);
    sum += v;
  }
  if (sum == 0.0) {
    p[0] = 1.0;
    sum = 1.0;
  }
  for (auto& v : p) v /= sum;
  return p;
}

// Random corpus of `sentences` sentences annotated by `workers` workers with
// independent noise, not necessarily BIO-valid.
inline AnnotationCorpus random_corpus(std::mt19937_64& rng, const TagSet& tags, int sentences,
                                      int workers, double coverage = 1.0) {
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_int_distribution<int> label(0, tags.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CorpusBuilder b(tags);
  for (int s = 0; s < sentences; ++s) {
    const int n = len(rng);
    std::vector<std::string> tokens;
    for (int i = 0; i < n; ++i) tokens.push_back("t" + std::to_string(label(rng)));
    const int k = b.add_sentence({default_sentence_id(static_cast<std::size_t>(s) + 1), tokens});
    LabelSequence truth(static_cast<std::size_t>(n));
    for (auto& l : truth) l = u(rng) < 0.7 ? 0 : label(rng);
    b.set_gold(k, truth);
    bool any = false;
    for (int w = 0; w < workers; ++w) {
      if (u(rng) >= coverage && !(w == workers - 1 && !any)) continue;
      any = true;
      const double acc = 0.5 + 0.45 * static_cast<double>(workers - w) / workers;
      LabelSequence labels = truth;
      for (auto& l : labels) {
        if (u(rng) > acc) l = label(rng);
      }
      b.add_annotation("w" + std::to_string(w), k, labels);
    }
  }
  return std::move(b).build();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("seqtruth_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace seqtruth::testing

#endif  // SEQTRUTH_TESTS_TEST_SUPPORT_H_
