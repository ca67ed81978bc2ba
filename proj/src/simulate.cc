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


#include "seqtruth/simulate.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "seqtruth/error.h"

namespace seqtruth {

namespace {

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  // 53-bit uniform in [0, 1); fixed across standard libraries.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  int below(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

 private:
  std::mt19937_64 engine_;
};

int sample_row(Stream& rng, const std::vector<double>& row) {
  const double r = rng.uniform();
  double acc = 0.0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    acc += row[c];
    if (r < acc) return static_cast<int>(c);
  }
  // Rounding left r above the cumulative sum.
  for (std::size_t c = row.size(); c-- > 0;) {
    if (row[c] > 0.0) return static_cast<int>(c);
  }
  return 0;
}

LabelId default_flip(const TagSet& tags, LabelId label, Stream& rng) {
  const int entity_labels = tags.size() - 1;
  if (entity_labels == 0) return label;
  if (tags.is_outside(label)) return 1 + rng.below(entity_labels);
  if (rng.uniform() < 0.5 || entity_labels == 1) return tags.outside();
  LabelId other = 1 + rng.below(entity_labels - 1);
  if (other >= label) ++other;
  return other;
}

void write_span(const TagSet& tags, LabelSequence& labels, int cls, int start, int end) {
  for (int i = start; i < end; ++i) {
    labels[static_cast<std::size_t>(i)] = i == start ? tags.begin_of(cls) : tags.inside_of(cls);
  }
}

void jitter_spans(const TagSet& tags, LabelSequence& labels, double rate, Stream& rng) {
  const int n = static_cast<int>(labels.size());
  const auto spans = tags.strict_spans_of(labels);
  for (const auto& span : spans) {
    if (rng.uniform() >= rate) continue;
    const int cls = tags.class_of(tags.find("B-" + span.entity_class).value());
    int start = span.start;
    int end = span.end;
    switch (rng.below(4)) {
      case 0:  // grow left
        if (start > 0 && tags.is_outside(labels[static_cast<std::size_t>(start - 1)])) --start;
        break;
      case 1:  // shrink left
        if (end - start > 1) ++start;
        break;
      case 2:  // grow right
        if (end < n && tags.is_outside(labels[static_cast<std::size_t>(end)])) ++end;
        break;
      default:  // shrink right
        if (end - start > 1) --end;
        break;
    }
    for (int i = span.start; i < span.end; ++i) labels[static_cast<std::size_t>(i)] = 0;
    write_span(tags, labels, cls, start, end);
  }
}

void repair_orphans(const TagSet& tags, LabelSequence& labels) {
  LabelId prev = tags.outside();
  for (auto& label : labels) {
    if (!tags.transition_valid(prev, label)) label = tags.begin_of(tags.class_of(label));
    prev = label;
  }
}

}  // namespace

void validate_profile(const WorkerProfile& p, int num_labels) {
  auto fail = [&](const std::string& what) {
    throw InvalidArgument("worker profile '" + p.worker_id + "': " + what);
  };
  if (p.worker_id.empty()) fail("empty worker id");
  if (p.worker_id == kMachineWorkerId) fail("reserved worker id");
  if (!(p.token_accuracy > 0.0 && p.token_accuracy <= 1.0)) fail("token_accuracy outside (0, 1]");
  if (!(p.span_drop_rate >= 0.0 && p.span_drop_rate < 1.0)) fail("span_drop_rate outside [0, 1)");
  if (!(p.boundary_jitter >= 0.0 && p.boundary_jitter < 1.0)) fail("boundary_jitter outside [0, 1)");
  if (!(p.coverage > 0.0 && p.coverage <= 1.0)) fail("coverage outside (0, 1]");
  if (p.confusion) {
    const auto& m = *p.confusion;
    if (m.size() != static_cast<std::size_t>(num_labels)) fail("confusion needs one row per label");
    for (const auto& row : m) {
      if (row.size() != static_cast<std::size_t>(num_labels)) fail("confusion row has wrong length");
      double sum = 0.0;
      for (double v : row) {
        if (!(v >= 0.0)) fail("negative confusion entry");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) fail("confusion row does not sum to 1");
    }
  }
}

AnnotationCorpus simulate(const LabeledCorpus& gold, std::span<const WorkerProfile> profiles,
                          std::uint64_t seed, const SimulateOptions& options) {
  const TagSet& tags = gold.tag_set;
  if (profiles.empty()) throw InvalidArgument("simulate needs at least one worker profile");
  if (gold.labels.size() != gold.sentences.size()) {
    throw InvalidArgument("gold corpus has one label sequence per sentence");
  }
  for (std::size_t k = 0; k < gold.labels.size(); ++k) {
    if (gold.labels[k].size() != gold.sentences[k].length()) {
      throw InvalidArgument("sentence '" + gold.sentences[k].id + "': gold length mismatch");
    }
    if (tags.sequence_inconsistency(gold.labels[k]) != 0) {
      throw InvalidArgument("sentence '" + gold.sentences[k].id + "': gold is not BIO-valid");
    }
  }
  for (std::size_t a = 0; a < profiles.size(); ++a) {
    validate_profile(profiles[a], tags.size());
    for (std::size_t b = 0; b < a; ++b) {
      if (profiles[a].worker_id == profiles[b].worker_id) {
        throw InvalidArgument("duplicate worker id '" + profiles[a].worker_id + "'");
      }
    }
  }

  Stream rng(seed);
  const int n = static_cast<int>(gold.sentences.size());
  // output[w] maps sentence -> labels
  std::vector<std::vector<std::optional<LabelSequence>>> output(
      profiles.size(), std::vector<std::optional<LabelSequence>>(static_cast<std::size_t>(n)));
  for (std::size_t w = 0; w < profiles.size(); ++w) {
    const auto& p = profiles[w];
    const int take = static_cast<int>(std::lround(p.coverage * n));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < take; ++i) {
      const int j = i + rng.below(n - i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<int> covered(order.begin(), order.begin() + take);
    std::sort(covered.begin(), covered.end());
    for (int k : covered) {
      LabelSequence labels = gold.labels[static_cast<std::size_t>(k)];
      for (const auto& span : tags.strict_spans_of(labels)) {
        if (rng.uniform() < p.span_drop_rate) {
          for (int i = span.start; i < span.end; ++i) labels[static_cast<std::size_t>(i)] = 0;
        }
      }
      jitter_spans(tags, labels, p.boundary_jitter, rng);
      for (auto& label : labels) {
        if (rng.uniform() < p.token_accuracy) continue;
        label = p.confusion ? sample_row(rng, (*p.confusion)[static_cast<std::size_t>(label)])
                            : default_flip(tags, label, rng);
      }
      if (options.repair) repair_orphans(tags, labels);
      output[w][static_cast<std::size_t>(k)] = std::move(labels);
    }
  }

  CorpusBuilder builder(tags);
  for (int k = 0; k < n; ++k) {
    const bool any = std::any_of(output.begin(), output.end(), [&](const auto& per_worker) {
      return per_worker[static_cast<std::size_t>(k)].has_value();
    });
    if (!any) continue;
    const int index = builder.add_sentence(gold.sentences[static_cast<std::size_t>(k)]);
    builder.set_gold(index, gold.labels[static_cast<std::size_t>(k)]);
    for (std::size_t w = 0; w < profiles.size(); ++w) {
      auto& labels = output[w][static_cast<std::size_t>(k)];
      if (labels) builder.add_annotation(profiles[w].worker_id, index, std::move(*labels));
    }
  }
  return std::move(builder).build();
}

namespace {

constexpr std::array<const char*, 48> kWords = {
    "the",    "a",       "of",     "in",      "to",     "and",     "said",  "on",
    "for",    "with",    "was",    "at",      "by",     "from",    "has",   "after",
    "will",   "were",    "its",    "that",    "is",     "an",      "as",    "would",
    "week",   "market",  "year",   "told",    "talks",  "percent", "new",   "over",
    "shares", "team",    "match",  "against", "minister", "police", "last", "two",
    "first",  "officials", "friday", "monday", "second", "game",   "won",   "into"};

constexpr std::array<const char*, 24> kPer = {
    "Maria",  "Johnson", "Ahmed",  "Chen",   "Peter",    "Novak",  "Lucia",  "Okafor",
    "Hans",   "Silva",   "Yuki",   "Tanaka", "Olga",     "Petrov", "Carlos", "Mendes",
    "Sarah",  "Klein",   "Ivan",   "Dubois", "Fatima",   "Rossi",  "James",  "Walsh"};
constexpr std::array<const char*, 24> kLoc = {
    "Berlin", "Kenya",   "Lisbon",  "Ohio",    "Nairobi", "Peru",    "Madrid", "Seoul",
    "Texas",  "Hamburg", "Bombay",  "Chile",   "Quebec",  "Sydney",  "Oslo",   "Cairo",
    "Zurich", "Bavaria", "Jakarta", "Moscow",  "Dublin",  "Lagos",   "Rio",    "Vienna"};
constexpr std::array<const char*, 24> kOrg = {
    "Siemens", "Reuters",  "Fiat",     "NATO",    "Unilever", "Barclays", "Ajax",   "Inter",
    "Corp",    "Bank",     "Holdings", "Airways", "Motors",   "Group",    "FIFA",   "UEFA",
    "Nestle",  "Daewoo",   "Petrobras", "Telkom", "Vodafone", "Lazio",    "Celtic", "Benfica"};
constexpr std::array<const char*, 24> kMisc = {
    "German",  "Olympic", "Dutch",    "Asian",    "Christian", "Euro",   "Cup",    "Open",
    "Kenyan",  "French",  "Grand",    "Prix",     "Islamic",   "Serie",  "Derby",  "Games",
    "Italian", "Swiss",   "Nigerian", "Japanese", "Masters",   "League", "Latin",  "Nordic"};

const char* lexicon_word(int cls, Stream& rng) {
  switch (cls) {
    case 0: return kLoc[static_cast<std::size_t>(rng.below(kLoc.size()))];
    case 1: return kMisc[static_cast<std::size_t>(rng.below(kMisc.size()))];
    case 2: return kOrg[static_cast<std::size_t>(rng.below(kOrg.size()))];
    default: return kPer[static_cast<std::size_t>(rng.below(kPer.size()))];
  }
}

}  // namespace

LabeledCorpus synthetic_gold(std::uint64_t seed, int num_sentences) {
  constexpr double kSpanStart = 0.1316;
  constexpr std::array<double, 3> kSpanLength = {0.5, 0.35, 0.15};
  LabeledCorpus out;
  out.tag_set = TagSet({"LOC", "MISC", "ORG", "PER"});
  const TagSet& tags = out.tag_set;
  Stream rng(seed);
  for (int k = 0; k < num_sentences; ++k) {
    const int n = 5 + rng.below(21);
    Sentence sentence{default_sentence_id(static_cast<std::size_t>(k) + 1), {}};
    LabelSequence labels;
    while (static_cast<int>(labels.size()) < n) {
      if (rng.uniform() < kSpanStart) {
        const int cls = rng.below(4);
        const double r = rng.uniform();
        int len = r < kSpanLength[0] ? 1 : r < kSpanLength[0] + kSpanLength[1] ? 2 : 3;
        len = std::min(len, n - static_cast<int>(labels.size()));
        for (int t = 0; t < len; ++t) {
          labels.push_back(t == 0 ? tags.begin_of(cls) : tags.inside_of(cls));
          sentence.tokens.emplace_back(lexicon_word(cls, rng));
        }
        if (static_cast<int>(labels.size()) == n) break;
      }
      std::string word = kWords[static_cast<std::size_t>(rng.below(kWords.size()))];
      if (labels.empty()) word[0] = static_cast<char>(word[0] - 'a' + 'A');
      labels.push_back(tags.outside());
      sentence.tokens.push_back(std::move(word));
    }
    out.sentences.push_back(std::move(sentence));
    out.labels.push_back(std::move(labels));
  }
  return out;
}

std::vector<WorkerProfile> default_profiles() {
  constexpr std::array<double, 6> kAccuracy = {0.95, 0.9, 0.85, 0.75, 0.65, 0.55};
  constexpr std::array<double, 6> kDrop = {0.02, 0.05, 0.10, 0.25, 0.40, 0.55};
  constexpr std::array<double, 6> kJitter = {0.02, 0.04, 0.06, 0.10, 0.15, 0.20};
  std::vector<WorkerProfile> out;
  for (std::size_t w = 0; w < kAccuracy.size(); ++w) {
    WorkerProfile p;
    p.worker_id = "w" + std::to_string(w + 1);
    p.token_accuracy = kAccuracy[w];
    p.span_drop_rate = kDrop[w];
    p.boundary_jitter = kJitter[w];
    out.push_back(std::move(p));
  }
  return out;
}

Bench default_bench(std::uint64_t seed) {
  Bench bench;
  bench.gold = synthetic_gold(seed);
  bench.profiles = default_profiles();
  bench.crowd = simulate(bench.gold, bench.profiles, seed ^ kCrowdSeedMix);
  return bench;
}

}  // namespace seqtruth
