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

#include <random>
#include <set>

#include "seqtruth/error.h"
#include "seqtruth/predictor.h"
#include "test_support.h"

namespace seqtruth {
namespace {

using testing::seq;
using testing::words;

std::vector<LabeledSentence> batch_of(const std::vector<Sentence>& sentences,
                                      const std::vector<LabelSequence>& labels) {
  std::vector<LabeledSentence> out;
  for (std::size_t k = 0; k < sentences.size(); ++k) out.push_back({&sentences[k], labels[k]});
  return out;
}

std::string external_cmd(const std::filesystem::path& state, const std::string& flag = "") {
  std::string cmd = std::string(SEQTRUTH_PYTHON) + " " + SEQTRUTH_FIXTURES + "/echo_tagger.py " +
                    state.string();
  return flag.empty() ? cmd : cmd + " " + flag;
}

TEST_CASE("selection threshold is strict") {
  const std::vector<double> xi = {0.95, 0.9, 0.85};
  CHECK(select_training_sentences(xi, 0.9) == std::vector<int>{0});
  CHECK(select_training_sentences(xi, 0.0) == std::vector<int>{0, 1, 2});
  const std::vector<double> hot = {1.0, 0.99, 1.0};
  CHECK(select_training_sentences(hot, 1.0).empty());
  CHECK(select_training_sentences(hot, 0.995) == std::vector<int>{0, 2});
}

TEST_CASE("features of a token") {
  const auto t = words("In New York");
  const auto f = token_features(t, 1);
  const std::vector<std::string> want = {"bias",   "w=new",  "shape=Xx", "p3=new",
                                         "s3=new", "w-1=in", "w+1=york", "cap=1"};
  CHECK(f == want);
  const auto edge = token_features(words("ibm-2024"), 0);
  CHECK(edge[2] == "shape=x-d");
  CHECK(edge[4] == "s3=024");
  CHECK(edge[5] == "w-1=<s>");
  CHECK(edge[6] == "w+1=</s>");
  CHECK(edge[7] == "cap=0");
}

TEST_CASE("property: features depend only on the local window") {
  std::mt19937_64 rng(41);
  const std::vector<std::string> vocab = {"Paris", "the", "IBM", "rose", "3.5%", "x", "Ann"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a;
    for (int i = 0; i < 6; ++i) a.push_back(vocab[rng() % vocab.size()]);
    auto b = a;
    b[0] = vocab[rng() % vocab.size()];
    b[5] = vocab[rng() % vocab.size()];
    for (std::size_t i = 2; i < 4; ++i) CHECK(token_features(a, i) == token_features(b, i));
    CHECK(token_features(a, 0) == token_features(a, 0));
  }
}

TEST_CASE("an empty batch leaves the model untouched") {
  PerceptronTagger tagger(testing::ner_tags());
  const auto before = tagger.raw_parameters();
  tagger.train_incremental({});
  CHECK_FALSE(tagger.trained());
  CHECK(tagger.raw_parameters() == before);
  CHECK(tagger.updates() == 0);
}

TEST_CASE("a memorized token is recalled") {
  const TagSet tags = testing::ner_tags();
  PerceptronTagger tagger(tags);
  const std::vector<Sentence> s = {{"s1", words("Paris")}};
  tagger.train_incremental(batch_of(s, {seq(tags, "B-LOC")}));
  CHECK(tagger.trained());
  CHECK(tagger.predict(words("Paris")) == seq(tags, "B-LOC"));
}

TEST_CASE("a perfectly scored sentence stops moving the weights") {
  const TagSet tags = testing::ner_tags();
  PerceptronTagger tagger(tags, 1);
  const std::vector<Sentence> s = {{"s1", words("John Smith visited Paris")}};
  const auto batch = batch_of(s, {seq(tags, "B-PER I-PER O B-LOC")});
  long last = -1;
  for (int round = 0; round < 20 && tagger.updates() != last; ++round) {
    last = tagger.updates();
    tagger.train_incremental(batch);
  }
  REQUIRE(tagger.updates() == last);
  const auto frozen = tagger.raw_parameters();
  tagger.train_incremental(batch);
  CHECK(tagger.raw_parameters() == frozen);
  CHECK(tagger.updates() == last);
}

TEST_CASE("training is cumulative across calls") {
  const TagSet tags = testing::ner_tags();
  PerceptronTagger tagger(tags);
  const std::vector<Sentence> first = {{"a", words("Paris is big")}};
  const std::vector<Sentence> second = {{"b", words("Ann sings")}};
  tagger.train_incremental(batch_of(first, {seq(tags, "B-LOC O O")}));
  tagger.train_incremental(batch_of(second, {seq(tags, "B-PER O")}));
  CHECK(tagger.predict(words("Paris is big")) == seq(tags, "B-LOC O O"));
  CHECK(tagger.predict(words("Ann sings")) == seq(tags, "B-PER O"));
}

TEST_CASE("property: predictions are BIO-valid even after noisy training") {
  std::mt19937_64 rng(43);
  const TagSet tags = testing::ner_tags();
  const std::vector<std::string> vocab = {"Paris", "the", "IBM", "rose", "Ann", "of", "Bank", "x"};
  std::uniform_int_distribution<LabelId> pick(0, tags.size() - 1);
  PerceptronTagger tagger(tags);
  for (int round = 0; round < 5; ++round) {
    std::vector<Sentence> sentences;
    std::vector<LabelSequence> labels;
    for (int k = 0; k < 20; ++k) {
      Sentence s{"r" + std::to_string(round) + "_" + std::to_string(k), {}};
      LabelSequence y;
      for (int i = 0; i < 1 + k % 7; ++i) {
        s.tokens.push_back(vocab[rng() % vocab.size()]);
        y.push_back(pick(rng));
      }
      sentences.push_back(s);
      labels.push_back(y);
    }
    tagger.train_incremental(batch_of(sentences, labels));
    for (const auto& s : sentences) {
      const auto out = tagger.predict(s.tokens);
      CHECK(out.size() == s.length());
      CHECK(tags.sequence_inconsistency(out) == 0);
    }
  }
}

TEST_CASE("training pool admits, retains and relabels") {
  const TagSet tags({"PER"});
  std::vector<LabelSequence> hard = {seq(tags, "O"), seq(tags, "B-PER"), seq(tags, "O O")};
  TrainingPool pool;
  const std::vector<int> first = {0, 2};
  CHECK(pool.refresh(first, hard) == std::vector<int>{0, 2});
  pool.mark_trained(0, hard[0]);
  pool.mark_trained(2, hard[2]);
  CHECK(pool.refresh(first, hard).empty());

  const std::vector<int> later = {1};
  CHECK(pool.refresh(later, hard) == std::vector<int>{1});
  CHECK(pool.size() == 3);
  pool.mark_trained(1, hard[1]);

  hard[2] = seq(tags, "B-PER O");
  const std::vector<int> none;
  CHECK(pool.refresh(none, hard) == std::vector<int>{2});
  CHECK(pool.contains(0));
  CHECK(pool.ever_trained(2));
}

TEST_CASE("property: batches B1 then B2 train every member at least once") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 30;
    std::vector<LabelSequence> hard(n, LabelSequence{0});
    TrainingPool pool;
    std::set<int> trained;
    std::set<int> admitted;
    for (int round = 0; round < 4; ++round) {
      std::vector<int> selected;
      for (int k = 0; k < n; ++k) {
        if (rng() % 4 == 0) selected.push_back(k);
      }
      admitted.insert(selected.begin(), selected.end());
      for (int k : pool.refresh(selected, hard)) {
        pool.mark_trained(k, hard[static_cast<std::size_t>(k)]);
        trained.insert(k);
      }
      CHECK(pool.members() == admitted);
    }
    CHECK(trained == admitted);
  }
}

TEST_CASE("low-confidence prediction") {
  const TagSet tags = testing::ner_tags();
  const auto corpus = testing::make_corpus(
      tags, {{"Paris is big", {{"a", "B-LOC O O"}}, ""}, {"Ann sings", {{"a", "B-PER O"}}, ""}});
  AggregateState state = init_majority_vote(corpus);

  PerceptronTagger untrained(tags);
  CHECK_FALSE(predict_low_confidence(untrained, corpus, state, 0.9).present());

  PerceptronTagger tagger(tags);
  const std::vector<Sentence> memo = {corpus.sentence(0)};
  tagger.train_incremental(batch_of(memo, {seq(tags, "B-LOC O O")}));
  state.confidence = {1.0, 1.0};
  CHECK_FALSE(predict_low_confidence(tagger, corpus, state, 0.9).present());

  state.confidence = {0.5, 0.95};
  const auto m = predict_low_confidence(tagger, corpus, state, 0.9);
  REQUIRE(m.annotations.size() == 1);
  CHECK(m.worker_id == kMachineWorkerId);
  CHECK(m.annotations[0].first == 0);
  CHECK(m.annotations[0].second == seq(tags, "B-LOC O O"));
  CHECK(m.find(1) == nullptr);

  state.confidence = {0.9, 0.9};
  CHECK(predict_low_confidence(tagger, corpus, state, 0.9, 4).annotations.size() == 2);
}

TEST_CASE("machine worker wrapping") {
  const TagSet tags({"PER"});
  CHECK_FALSE(machine_as_worker({}).present());
  const auto m = machine_as_worker({{3, seq(tags, "O")}, {1, seq(tags, "B-PER")}});
  REQUIRE(m.annotations.size() == 2);
  CHECK(m.annotations[0].first == 1);
  CHECK(m.annotations[1].first == 3);
  CHECK(*m.find(3) == seq(tags, "O"));
}

TEST_CASE("external tagger round trip") {
  const TagSet tags = testing::ner_tags();
  testing::TempDir dir("external");
  ExternalTagger tagger(tags, external_cmd(dir.path() / "state.json"));
  CHECK_FALSE(tagger.trained());
  const std::vector<Sentence> s = {{"s1", words("Ann met Bob in Paris")}};
  tagger.train_incremental(batch_of(s, {seq(tags, "B-PER O B-PER O B-LOC")}));
  CHECK(tagger.trained());
  CHECK(tagger.predict(words("Paris met Ann")) == seq(tags, "B-LOC O B-PER"));

  const Sentence a{"x", words("Bob")};
  const Sentence b{"y", words("unknown Paris")};
  const std::vector<const Sentence*> both = {&a, &b};
  const auto out = tagger.predict_batch(both);
  CHECK(out[0] == seq(tags, "B-PER"));
  CHECK(out[1] == seq(tags, "O B-LOC"));
}

TEST_CASE("external tagger failures surface as data errors") {
  const TagSet tags = testing::ner_tags();
  testing::TempDir dir("external_fail");
  const std::vector<Sentence> s = {{"s1", words("Paris")}};
  ExternalTagger failing(tags, external_cmd(dir.path() / "a.json", "--fail"));
  failing.train_incremental(batch_of(s, {seq(tags, "B-LOC")}));
  CHECK_THROWS_AS(failing.predict(words("Paris")), SchemaError);

  ExternalTagger dropping(tags, external_cmd(dir.path() / "b.json", "--drop"));
  dropping.train_incremental(batch_of(s, {seq(tags, "B-LOC")}));
  CHECK_THROWS_AS(dropping.predict(words("Paris")), SchemaError);
}

TEST_CASE("tagger factory honours the external command") {
  const TagSet tags({"PER"});
  EngineConfig config;
  CHECK(dynamic_cast<PerceptronTagger*>(make_tagger(tags, config).get()) != nullptr);
  config.external_predictor_cmd = "true";
  CHECK(dynamic_cast<ExternalTagger*>(make_tagger(tags, config).get()) != nullptr);
}

}  // namespace
}  // namespace seqtruth
