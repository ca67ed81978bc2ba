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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <sstream>

#include "seqtruth/aggregation.h"
#include "seqtruth/error.h"
#include "seqtruth/evaluation.h"
#include "seqtruth/simulate.h"
#include "test_support.h"

namespace seqtruth {
namespace {

WorkerProfile profile(const std::string& id, double accuracy, double drop = 0.0,
                      double jitter = 0.0, double coverage = 1.0) {
  WorkerProfile p;
  p.worker_id = id;
  p.token_accuracy = accuracy;
  p.span_drop_rate = drop;
  p.boundary_jitter = jitter;
  p.coverage = coverage;
  return p;
}

std::string dump(const AnnotationCorpus& c) {
  std::ostringstream out;
  write_jsonl(c, out);
  return out.str();
}

// Token agreement of one worker with gold, pooled over its sentences.
double agreement(const AnnotationCorpus& c, int worker) {
  long same = 0;
  long total = 0;
  for (int k : c.sentences_of(worker)) {
    const auto& y = *c.find(worker, k);
    const auto& g = *c.gold(k);
    for (std::size_t i = 0; i < y.size(); ++i) same += y[i] == g[i] ? 1 : 0;
    total += static_cast<long>(y.size());
  }
  return static_cast<double>(same) / static_cast<double>(total);
}

TEST_CASE("a noiseless worker copies gold") {
  const auto gold = synthetic_gold(1, 50);
  const std::vector<WorkerProfile> ps = {profile("a", 1.0), profile("b", 1.0)};
  const auto c = simulate(gold, ps, 9);
  REQUIRE(c.num_sentences() == 50);
  for (int k = 0; k < c.num_sentences(); ++k) {
    CHECK(*c.find(0, k) == gold.labels[static_cast<std::size_t>(k)]);
    CHECK(*c.find(1, k) == gold.labels[static_cast<std::size_t>(k)]);
    CHECK(*c.gold(k) == gold.labels[static_cast<std::size_t>(k)]);
    CHECK(c.sentence(k) == gold.sentences[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("half coverage picks the same half every time") {
  const auto gold = synthetic_gold(2, 100);
  const std::vector<WorkerProfile> ps = {profile("full", 0.9), profile("half", 0.9, 0, 0, 0.5)};
  const auto a = simulate(gold, ps, 17);
  const auto b = simulate(gold, ps, 17);
  const auto sa = a.sentences_of(1);
  const auto sb = b.sentences_of(1);
  CHECK(sa.size() == 50);
  CHECK(std::vector<int>(sa.begin(), sa.end()) == std::vector<int>(sb.begin(), sb.end()));
  const auto other = simulate(gold, ps, 18).sentences_of(1);
  CHECK(std::vector<int>(sa.begin(), sa.end()) != std::vector<int>(other.begin(), other.end()));
}

TEST_CASE("sentences nobody covers are left out") {
  const auto gold = synthetic_gold(3, 40);
  const std::vector<WorkerProfile> ps = {profile("a", 1.0, 0, 0, 0.25)};
  const auto c = simulate(gold, ps, 5);
  CHECK(c.num_sentences() == 10);
  for (int k = 0; k < c.num_sentences(); ++k) CHECK(c.annotations(k).size() == 1);
}

TEST_CASE("token accuracy 0.8 agrees with gold on 78 to 82 percent of 10,000 tokens") {
  const auto gold = synthetic_gold(4, 800);
  const std::vector<WorkerProfile> ps = {profile("w", 0.8)};
  SimulateOptions raw;
  raw.repair = false;
  const auto c = simulate(gold, ps, 23, raw);
  REQUIRE(c.tokens_of(0) >= 10000);
  const double a = agreement(c, 0);
  CHECK(a >= 0.78);
  CHECK(a <= 0.82);
}

TEST_CASE("property: higher accuracy means higher agreement") {
  const auto gold = synthetic_gold(5, 800);
  const std::vector<WorkerProfile> ps = {profile("a", 0.55), profile("b", 0.65),
                                         profile("c", 0.75), profile("d", 0.85),
                                         profile("e", 0.95)};
  for (bool repair : {false, true}) {
    SimulateOptions options;
    options.repair = repair;
    const auto c = simulate(gold, ps, 29, options);
    for (int j = 1; j < c.num_workers(); ++j) CHECK(agreement(c, j) > agreement(c, j - 1));
  }
}

TEST_CASE("property: repaired workers are BIO-valid, raw ones need not be") {
  const auto gold = synthetic_gold(6, 200);
  const auto ps = default_profiles();
  const auto repaired = simulate(gold, ps, 31);
  long invalid_raw = 0;
  SimulateOptions raw;
  raw.repair = false;
  const auto unrepaired = simulate(gold, ps, 31, raw);
  for (int k = 0; k < repaired.num_sentences(); ++k) {
    for (const auto& a : repaired.annotations(k)) {
      CHECK(repaired.tag_set().sequence_inconsistency(a.labels) == 0);
    }
    for (const auto& a : unrepaired.annotations(k)) {
      invalid_raw += unrepaired.tag_set().sequence_inconsistency(a.labels);
    }
  }
  CHECK(invalid_raw > 0);
}

TEST_CASE("property: identical inputs give identical corpora") {
  const auto gold = synthetic_gold(7, 60);
  const auto ps = default_profiles();
  CHECK(dump(simulate(gold, ps, 37)) == dump(simulate(gold, ps, 37)));
  CHECK(dump(simulate(gold, ps, 37)) != dump(simulate(gold, ps, 38)));
}

TEST_CASE("dropped spans become O and nothing else changes") {
  const auto gold = synthetic_gold(8, 100);
  const std::vector<WorkerProfile> ps = {profile("d", 1.0, 0.6)};
  const auto c = simulate(gold, ps, 41);
  const TagSet& tags = c.tag_set();
  long kept = 0;
  long total = 0;
  for (int k = 0; k < c.num_sentences(); ++k) {
    const auto& y = *c.find(0, k);
    const auto& g = *c.gold(k);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK((y[i] == g[i] || tags.is_outside(y[i])));
    const auto ws = tags.spans_of(y);
    const auto gs = tags.spans_of(g);
    for (const auto& s : ws) CHECK(std::find(gs.begin(), gs.end(), s) != gs.end());
    kept += static_cast<long>(ws.size());
    total += static_cast<long>(gs.size());
  }
  const double rate = 1.0 - static_cast<double>(kept) / static_cast<double>(total);
  CHECK(rate > 0.5);
  CHECK(rate < 0.7);
}

TEST_CASE("jitter moves one boundary of a span by one token") {
  const auto gold = synthetic_gold(9, 100);
  const std::vector<WorkerProfile> ps = {profile("j", 1.0, 0.0, 0.9)};
  const auto c = simulate(gold, ps, 43);
  const TagSet& tags = c.tag_set();
  long moved = 0;
  for (int k = 0; k < c.num_sentences(); ++k) {
    const auto ws = tags.spans_of(*c.find(0, k));
    const auto gs = tags.spans_of(*c.gold(k));
    REQUIRE(ws.size() == gs.size());
    for (std::size_t s = 0; s < ws.size(); ++s) {
      CHECK(ws[s].entity_class == gs[s].entity_class);
      const int shift = std::abs(ws[s].start - gs[s].start) + std::abs(ws[s].end - gs[s].end);
      CHECK(shift <= 1);
      moved += shift;
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("a confusion matrix steers the errors") {
  const auto gold = synthetic_gold(10, 100);
  const int j = gold.tag_set.size();
  std::vector<std::vector<double>> to_outside(static_cast<std::size_t>(j),
                                              std::vector<double>(static_cast<std::size_t>(j), 0.0));
  for (auto& row : to_outside) row[0] = 1.0;
  auto p = profile("c", 0.5);
  p.confusion = to_outside;
  const std::vector<WorkerProfile> ps = {p};
  const auto c = simulate(gold, ps, 47);
  for (int k = 0; k < c.num_sentences(); ++k) {
    const auto& y = *c.find(0, k);
    const auto& g = *c.gold(k);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] != g[i]) CHECK((y[i] == 0 || c.tag_set().is_begin(y[i])));
    }
  }
}

TEST_CASE("invalid profiles are rejected") {
  const int j = 9;
  auto check_bad = [&](WorkerProfile p) { CHECK_THROWS_AS(validate_profile(p, j), InvalidArgument); };
  check_bad(profile("", 0.9));
  check_bad(profile(std::string(kMachineWorkerId), 0.9));
  check_bad(profile("a", 0.0));
  check_bad(profile("a", 1.1));
  check_bad(profile("a", 0.9, 1.0));
  check_bad(profile("a", 0.9, 0.0, -0.1));
  check_bad(profile("a", 0.9, 0.0, 0.0, 0.0));
  auto wrong_rows = profile("a", 0.9);
  wrong_rows.confusion = std::vector<std::vector<double>>(3, std::vector<double>(9, 1.0 / 9));
  check_bad(wrong_rows);
  auto not_stochastic = profile("a", 0.9);
  not_stochastic.confusion = std::vector<std::vector<double>>(9, std::vector<double>(9, 0.2));
  check_bad(not_stochastic);
  CHECK_NOTHROW(validate_profile(profile("a", 1.0, 0.5, 0.5, 1.0), j));

  const auto gold = synthetic_gold(11, 5);
  CHECK_THROWS_AS(simulate(gold, {}, 1), InvalidArgument);
}

TEST_CASE("synthetic gold shape") {
  const auto g = synthetic_gold(42);
  CHECK(g.sentences.size() == 200);
  CHECK(g.tag_set.entity_classes().size() == 4);
  long tokens = 0;
  long entity = 0;
  for (std::size_t k = 0; k < g.labels.size(); ++k) {
    CHECK(g.sentences[k].length() >= 5);
    CHECK(g.sentences[k].length() <= 25);
    CHECK(g.tag_set.sequence_inconsistency(g.labels[k]) == 0);
    for (LabelId y : g.labels[k]) entity += g.tag_set.is_outside(y) ? 0 : 1;
    tokens += static_cast<long>(g.labels[k].size());
  }
  const double frac = static_cast<double>(entity) / static_cast<double>(tokens);
  CHECK(frac > 0.15);
  CHECK(frac < 0.25);
}

TEST_CASE("default bench") {
  const Bench a = default_bench(42);
  const Bench b = default_bench(42);
  CHECK(dump(a.crowd) == dump(b.crowd));
  CHECK(a.gold.labels == b.gold.labels);
  REQUIRE(a.profiles.size() == 6);
  const std::vector<double> acc = {0.95, 0.9, 0.85, 0.75, 0.65, 0.55};
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(a.profiles[j].token_accuracy == acc[j]);
    CHECK(a.profiles[j].coverage == 1.0);
  }
  CHECK(a.crowd.num_sentences() == 200);
  CHECK(a.crowd.has_gold());

  const auto f1 = per_worker_strict_f1(a.crowd);
  for (std::size_t j = 1; j < f1.size(); ++j) CHECK(f1[j] < f1[j - 1]);

  const auto mv = init_majority_vote(a.crowd);
  const auto gold = a.crowd.gold_sequences();
  const TagSet& tags = a.crowd.tag_set();
  std::vector<LabelSequence> best;
  for (int k = 0; k < a.crowd.num_sentences(); ++k) best.push_back(*a.crowd.find(0, k));
  CHECK(strict_prf(tags, mv.hard, gold).recall < strict_prf(tags, best, gold).recall);
}

}  // namespace
}  // namespace seqtruth
