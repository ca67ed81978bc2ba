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

#include <numeric>
#include <random>

#include "seqtruth/error.h"
#include "seqtruth/tagset.h"
#include "test_support.h"

namespace seqtruth {
namespace {

using testing::seq;

TEST_CASE("label layout puts O first, then B/I per class") {
  const TagSet tags({"PER", "LOC"});
  CHECK(tags.labels() == std::vector<std::string>{"O", "B-PER", "I-PER", "B-LOC", "I-LOC"});
  CHECK(tags.id("I-LOC") == 4);
  CHECK(tags.name(3) == "B-LOC");
  CHECK(tags.is_begin(tags.id("B-PER")));
  CHECK(tags.is_inside(tags.id("I-PER")));
  CHECK(tags.class_of(tags.id("I-LOC")) == 1);
  CHECK_THROWS_AS(tags.id("B-ORG"), SchemaError);
  CHECK_THROWS_AS(tags.name(7), InvalidArgument);
}

TEST_CASE("inference sorts classes and rejects non-BIO labels") {
  const std::vector<std::string> labels = {"O", "I-PER", "B-LOC", "B-PER"};
  const TagSet tags = TagSet::Infer(labels);
  CHECK(tags.entity_classes() == std::vector<std::string>{"LOC", "PER"});
  const std::vector<std::string> bad = {"O", "E-PER"};
  CHECK_THROWS_AS(TagSet::Infer(bad), SchemaError);
  const std::vector<std::string> bare = {"PER"};
  CHECK_THROWS_AS(TagSet::Infer(bare), SchemaError);
}

TEST_CASE("transition validity examples") {
  const TagSet tags = testing::ner_tags();
  CHECK(tags.transition_valid(tags.id("B-PER"), tags.id("I-PER")));
  CHECK_FALSE(tags.transition_valid(tags.id("O"), tags.id("I-PER")));
  CHECK(tags.transition_valid(tags.id("I-LOC"), tags.id("B-PER")));
  CHECK_FALSE(tags.transition_valid(tags.id("B-LOC"), tags.id("I-PER")));
  CHECK_THROWS_AS(tags.transition_valid(0, 99), InvalidArgument);
}

TEST_CASE("pair inconsistency examples") {
  const TagSet tags = testing::ner_tags();
  CHECK(tags.pair_inconsistency(tags.id("B-PER"), tags.id("I-PER")) == 0);
  CHECK(tags.pair_inconsistency(tags.id("O"), tags.id("I-ORG")) == 1);
  CHECK(tags.pair_inconsistency(tags.id("I-MISC"), tags.id("I-MISC")) == 0);
}

TEST_CASE("sequence inconsistency examples") {
  const TagSet tags = testing::ner_tags();
  CHECK(tags.sequence_inconsistency(seq(tags, "O B-PER I-PER")) == 0);
  CHECK(tags.sequence_inconsistency(seq(tags, "O I-PER I-PER")) == 1);
  CHECK(tags.sequence_inconsistency(seq(tags, "I-LOC O I-ORG")) == 2);
  CHECK_THROWS_AS(tags.sequence_inconsistency(LabelSequence{}), InvalidArgument);
}

TEST_CASE("the transition table is complete and matches the BIO rule") {
  const TagSet tags = testing::ner_tags();
  for (LabelId a = 0; a < tags.size(); ++a) {
    for (LabelId b = 0; b < tags.size(); ++b) {
      const bool expect_invalid =
          tags.is_inside(b) && !(tags.class_of(a) == tags.class_of(b) && a != 0);
      CHECK(tags.transition_valid(a, b) == !expect_invalid);
    }
    CHECK(tags.start_valid(a) == !tags.is_inside(a));
  }
}

TEST_CASE("span extraction examples") {
  const TagSet tags = testing::ner_tags();
  CHECK(tags.spans_of(seq(tags, "B-PER I-PER O")) == std::vector<Span>{{"PER", 0, 2}});
  CHECK(tags.spans_of(seq(tags, "O I-LOC")) == std::vector<Span>{{"LOC", 1, 2}});
  CHECK(tags.spans_of(seq(tags, "B-PER B-PER")) ==
        std::vector<Span>{{"PER", 0, 1}, {"PER", 1, 2}});
  CHECK(tags.spans_of(seq(tags, "B-PER I-LOC I-LOC")) ==
        std::vector<Span>{{"PER", 0, 1}, {"LOC", 1, 3}});
  CHECK(tags.strict_spans_of(seq(tags, "O I-LOC B-ORG")) == std::vector<Span>{{"ORG", 2, 3}});
}

TEST_CASE("entity label count examples") {
  const TagSet tags = testing::ner_tags();
  CHECK(tags.entity_label_count(seq(tags, "O O O")) == 0);
  CHECK(tags.entity_label_count(seq(tags, "B-PER I-PER O")) == 2);
  CHECK(tags.entity_label_count(seq(tags, "B-LOC")) == 1);
  CHECK(tags.entity_count(seq(tags, "B-PER I-PER O B-LOC"), EntityCountMode::kSpans) == 2);
}

TEST_CASE("class weight examples") {
  const std::vector<long> counts = {8, 2};
  const auto u = class_weights_from_counts(counts);
  CHECK(u[0] == doctest::Approx(0.625));
  CHECK(u[1] == doctest::Approx(2.5));

  const std::vector<long> uniform = {5, 5, 5};
  for (double v : class_weights_from_counts(uniform).u) CHECK(v == doctest::Approx(1.0));

  const std::vector<long> absent = {6, 3, 0};
  const auto w = class_weights_from_counts(absent);
  CHECK(w[2] == doctest::Approx(std::max(w[0], w[1])));
}

TEST_CASE("class weights come from worker label counts") {
  const TagSet tags({"PER"});
  const auto corpus = testing::make_corpus(
      tags, {{"a b c d e", {{"w1", "O O O O B-PER"}, {"w2", "O O O B-PER O"}}, ""}});
  const auto u = compute_class_weights(corpus);
  // O: 8, B-PER: 2, I-PER: 0 over T = 10 and J = 3
  CHECK(u[0] == doctest::Approx(10.0 / (3 * 8)));
  CHECK(u[1] == doctest::Approx(10.0 / (3 * 2)));
  CHECK(u[2] == doctest::Approx(u[1]));
}

TEST_CASE("property: observed class weights preserve total mass") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> count(1, 500);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<long> counts(static_cast<std::size_t>(2 + trial % 7));
    for (auto& c : counts) c = count(rng);
    const auto u = class_weights_from_counts(counts);
    double mass = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) mass += static_cast<double>(counts[c]) * u.u[c];
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0L));
    CHECK(mass == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("property: zero inconsistency iff strict and lenient spans agree and start is valid") {
  const TagSet tags({"PER", "LOC"});
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> label(0, tags.size() - 1);
  std::uniform_int_distribution<int> len(1, 7);
  for (int trial = 0; trial < 2000; ++trial) {
    LabelSequence s(static_cast<std::size_t>(len(rng)));
    for (auto& l : s) l = label(rng);
    const bool consistent = tags.sequence_inconsistency(s) == 0;
    const bool same_spans = tags.spans_of(s) == tags.strict_spans_of(s) && tags.start_valid(s[0]);
    CHECK(consistent == same_spans);
  }
}

TEST_CASE("encode and decode round-trip") {
  const TagSet tags = testing::ner_tags();
  const auto names = testing::words("O B-ORG I-ORG B-MISC");
  CHECK(tags.decode(tags.encode(names)) == names);
}

TEST_CASE("IOB1 conversion opens spans with B") {
  const auto in = testing::words("I-PER I-PER O I-LOC B-LOC I-LOC I-PER");
  CHECK(iob1_to_iob2(in) == testing::words("B-PER I-PER O B-LOC B-LOC I-LOC B-PER"));
}

}  // namespace
}  // namespace seqtruth
