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

#include "seqtruth/predictor.h"

#include <spdlog/spdlog.h>
#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "parallel.h"
#include "seqtruth/error.h"

namespace seqtruth {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

// Maps characters to X/x/d/other and collapses repeats: "McDonald" -> "XxXx".
std::string word_shape(std::string_view s) {
  std::string shape;
  for (char ch : s) {
    const auto u = static_cast<unsigned char>(ch);
    char cls = std::isupper(u) ? 'X' : std::islower(u) ? 'x' : std::isdigit(u) ? 'd' : ch;
    if (shape.empty() || shape.back() != cls) shape.push_back(cls);
  }
  return shape;
}

}  // namespace

std::vector<LabelSequence> SequenceTagger::predict_batch(
    std::span<const Sentence* const> sentences, int threads) const {
  std::vector<LabelSequence> out(sentences.size());
  internal::parallel_for(static_cast<int>(sentences.size()), threads, [&](int i) {
    out[static_cast<std::size_t>(i)] = predict(sentences[static_cast<std::size_t>(i)]->tokens);
  });
  return out;
}

std::vector<std::string> token_features(std::span<const std::string> tokens, std::size_t i) {
  const std::string& word = tokens[i];
  const std::string low = lower(word);
  std::vector<std::string> f;
  f.reserve(8);
  f.push_back("bias");
  f.push_back("w=" + low);
  f.push_back("shape=" + word_shape(word));
  f.push_back("p3=" + low.substr(0, 3));
  f.push_back("s3=" + (low.size() > 3 ? low.substr(low.size() - 3) : low));
  f.push_back("w-1=" + (i > 0 ? lower(tokens[i - 1]) : std::string("<s>")));
  f.push_back("w+1=" + (i + 1 < tokens.size() ? lower(tokens[i + 1]) : std::string("</s>")));
  const bool cap = !word.empty() && std::isupper(static_cast<unsigned char>(word[0]));
  f.push_back(cap ? "cap=1" : "cap=0");
  return f;
}

PerceptronTagger::PerceptronTagger(TagSet tags, int epochs)
    : tags_(std::move(tags)), epochs_(epochs) {
  const auto labels = static_cast<std::size_t>(tags_.size());
  transition_.resize((labels + 1) * labels);
  avg_transition_.assign(transition_.size(), 0.0);
}

std::vector<int> PerceptronTagger::feature_ids(std::span<const std::string> tokens,
                                               std::size_t i, bool grow) {
  if (!grow) return known_feature_ids(tokens, i);
  std::vector<int> ids;
  const auto labels = static_cast<std::size_t>(tags_.size());
  for (auto& name : token_features(tokens, i)) {
    auto [it, inserted] =
        feature_index_.emplace(std::move(name), static_cast<int>(feature_index_.size()));
    if (inserted) emission_.resize(feature_index_.size() * labels);
    ids.push_back(it->second);
  }
  return ids;
}

std::vector<int> PerceptronTagger::known_feature_ids(std::span<const std::string> tokens,
                                                     std::size_t i) const {
  std::vector<int> ids;
  for (const auto& name : token_features(tokens, i)) {
    auto it = feature_index_.find(name);
    if (it != feature_index_.end()) ids.push_back(it->second);
  }
  return ids;
}

LabelSequence PerceptronTagger::decode(std::span<const std::string> tokens, bool averaged) const {
  const std::size_t n = tokens.size();
  const auto labels = static_cast<std::size_t>(tags_.size());
  auto emit = [&](int f, std::size_t c) {
    const std::size_t idx = static_cast<std::size_t>(f) * labels + c;
    return averaged ? avg_emission_[idx] : emission_[idx].weight;
  };
  auto trans = [&](int prev, std::size_t c) {
    const std::size_t idx = static_cast<std::size_t>(prev + 1) * labels + c;
    return averaged ? avg_transition_[idx] : transition_[idx].weight;
  };
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> score(n, std::vector<double>(labels, kNegInf));
  std::vector<std::vector<int>> back(n, std::vector<int>(labels, -1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ids = known_feature_ids(tokens, i);
    std::vector<double> local(labels, 0.0);
    for (int f : ids) {
      for (std::size_t c = 0; c < labels; ++c) local[c] += emit(f, c);
    }
    for (std::size_t c = 0; c < labels; ++c) {
      const auto label = static_cast<LabelId>(c);
      if (i == 0) {
        if (tags_.start_valid(label)) score[0][c] = local[c] + trans(-1, c);
        continue;
      }
      for (std::size_t p = 0; p < labels; ++p) {
        if (score[i - 1][p] == kNegInf) continue;
        if (!tags_.transition_valid(static_cast<LabelId>(p), label)) continue;
        const double s = score[i - 1][p] + trans(static_cast<int>(p), c) + local[c];
        if (s > score[i][c]) {
          score[i][c] = s;
          back[i][c] = static_cast<int>(p);
        }
      }
    }
  }
  LabelSequence path(n);
  std::size_t best = 0;
  for (std::size_t c = 1; c < labels; ++c) {
    if (score[n - 1][c] > score[n - 1][best]) best = c;
  }
  path[n - 1] = static_cast<LabelId>(best);
  for (std::size_t i = n - 1; i > 0; --i) {
    path[i - 1] = back[i][static_cast<std::size_t>(path[i])];
  }
  return path;
}

void PerceptronTagger::bump(Param& p, double delta) {
  p.total += p.weight * static_cast<double>(instances_ - p.stamp);
  p.stamp = instances_;
  p.weight += delta;
}

void PerceptronTagger::refresh_average() {
  const double c = static_cast<double>(instances_);
  auto avg = [&](const Param& p) {
    return (p.total + p.weight * static_cast<double>(instances_ - p.stamp)) / c;
  };
  avg_emission_.resize(emission_.size());
  for (std::size_t i = 0; i < emission_.size(); ++i) avg_emission_[i] = avg(emission_[i]);
  for (std::size_t i = 0; i < transition_.size(); ++i) avg_transition_[i] = avg(transition_[i]);
}

void PerceptronTagger::train_incremental(std::span<const LabeledSentence> batch) {
  if (batch.empty()) return;
  const auto labels = static_cast<std::size_t>(tags_.size());
  for (int epoch = 0; epoch < epochs_; ++epoch) {
    for (const auto& example : batch) {
      const auto& tokens = example.sentence->tokens;
      const auto& gold = example.labels;
      if (gold.size() != tokens.size()) throw InvalidArgument("training labels length mismatch");
      std::vector<std::vector<int>> ids(tokens.size());
      for (std::size_t i = 0; i < tokens.size(); ++i) ids[i] = feature_ids(tokens, i, true);
      const LabelSequence guess = decode(tokens, false);
      if (guess != gold) {
        ++updates_;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
          const auto g = static_cast<std::size_t>(gold[i]);
          const auto p = static_cast<std::size_t>(guess[i]);
          if (g != p) {
            for (int f : ids[i]) {
              bump(emission_[static_cast<std::size_t>(f) * labels + g], 1.0);
              bump(emission_[static_cast<std::size_t>(f) * labels + p], -1.0);
            }
          }
          const int gp = i == 0 ? -1 : gold[i - 1];
          const int pp = i == 0 ? -1 : guess[i - 1];
          if (gp != pp || g != p) {
            bump(transition_[static_cast<std::size_t>(gp + 1) * labels + g], 1.0);
            bump(transition_[static_cast<std::size_t>(pp + 1) * labels + p], -1.0);
          }
        }
      }
      ++instances_;
    }
  }
  refresh_average();
}

LabelSequence PerceptronTagger::predict(std::span<const std::string> tokens) const {
  if (tokens.empty()) return {};
  return decode(tokens, instances_ > 0);
}

std::vector<double> PerceptronTagger::raw_parameters() const {
  std::vector<double> out;
  out.reserve(emission_.size() + transition_.size());
  for (const auto& p : emission_) out.push_back(p.weight);
  for (const auto& p : transition_) out.push_back(p.weight);
  return out;
}

std::vector<int> select_training_sentences(std::span<const double> confidence, double tau) {
  std::vector<int> out;
  for (std::size_t k = 0; k < confidence.size(); ++k) {
    if (confidence[k] > tau) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> TrainingPool::refresh(std::span<const int> selected,
                                       std::span<const LabelSequence> hard) {
  members_.insert(selected.begin(), selected.end());
  std::vector<int> batch;
  for (int k : members_) {
    auto it = trained_.find(k);
    if (it == trained_.end() || it->second != hard[static_cast<std::size_t>(k)]) {
      batch.push_back(k);
    }
  }
  return batch;
}

MachineWorker machine_as_worker(std::map<int, LabelSequence> predictions) {
  MachineWorker machine;
  for (auto& [k, labels] : predictions) machine.annotations.emplace_back(k, std::move(labels));
  return machine;
}

MachineWorker predict_low_confidence(const SequenceTagger& tagger, const AnnotationCorpus& corpus,
                                     const AggregateState& state, double tau, int threads) {
  if (!tagger.trained()) {
    spdlog::warn("predictor has not been trained yet; no machine predictions this round");
    return {};
  }
  std::vector<int> targets;
  std::vector<const Sentence*> sentences;
  for (int k = 0; k < corpus.num_sentences(); ++k) {
    if (state.confidence[static_cast<std::size_t>(k)] <= tau) {
      targets.push_back(k);
      sentences.push_back(&corpus.sentence(k));
    }
  }
  if (targets.empty()) return {};
  auto labels = tagger.predict_batch(sentences, threads);
  std::map<int, LabelSequence> predictions;
  const auto& tags = corpus.tag_set();
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (labels[t].size() != sentences[t]->length()) {
      throw SchemaError("predictor returned " + std::to_string(labels[t].size()) +
                        " labels for sentence '" + sentences[t]->id + "'");
    }
    for (LabelId l : labels[t]) {
      if (!tags.contains(l)) throw SchemaError("predictor returned a label outside the tag set");
    }
    predictions.emplace(targets[t], std::move(labels[t]));
  }
  return machine_as_worker(std::move(predictions));
}

ExternalTagger::ExternalTagger(TagSet tags, std::string command)
    : tags_(std::move(tags)), command_(std::move(command)) {}

void ExternalTagger::train_incremental(std::span<const LabeledSentence> batch) {
  for (const auto& example : batch) pending_.emplace_back(*example.sentence, example.labels);
  if (!batch.empty()) trained_ = true;
}

LabelSequence ExternalTagger::predict(std::span<const std::string> tokens) const {
  Sentence s{"q000001", std::vector<std::string>(tokens.begin(), tokens.end())};
  const Sentence* ptr = &s;
  return predict_batch(std::span<const Sentence* const>(&ptr, 1)).front();
}

std::vector<LabelSequence> ExternalTagger::predict_batch(
    std::span<const Sentence* const> sentences, int /*threads*/) const {
  char path[] = "/tmp/seqtruth-batch-XXXXXX";
  const int fd = mkstemp(path);
  if (fd < 0) throw SchemaError("cannot create a temporary batch file");
  close(fd);
  struct Cleanup {
    const char* p;
    ~Cleanup() { std::remove(p); }
  } cleanup{path};
  {
    std::ofstream out(path);
    for (const auto& [sentence, labels] : pending_) {
      nlohmann::json item{{"id", sentence.id}, {"tokens", sentence.tokens},
                          {"labels", tags_.decode(labels)}};
      out << item.dump() << '\n';
    }
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      nlohmann::json item{{"id", "q" + std::to_string(i)}, {"tokens", sentences[i]->tokens}};
      out << item.dump() << '\n';
    }
    if (!out) throw SchemaError("cannot write the predictor batch");
  }
  const std::string cmd = command_ + " < " + path;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw SchemaError("cannot start external predictor: " + command_);
  std::string output;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  const int status = pclose(pipe);
  if (status != 0) {
    throw SchemaError("external predictor exited with status " + std::to_string(status));
  }
  pending_.clear();

  std::vector<std::optional<LabelSequence>> answers(sentences.size());
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < output.size()) {
    std::size_t end = output.find('\n', start);
    if (end == std::string::npos) end = output.size();
    const std::string line = output.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json item;
    try {
      item = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("external predictor output: ") + e.what(), line_no);
    }
    const auto id = item.at("id").get<std::string>();
    if (id.size() < 2 || id[0] != 'q') continue;
    const std::size_t idx = std::stoul(id.substr(1));
    if (idx >= answers.size()) throw SchemaError("external predictor answered unknown id " + id);
    answers[idx] = tags_.encode(item.at("labels").get<std::vector<std::string>>());
  }
  std::vector<LabelSequence> out;
  out.reserve(answers.size());
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (!answers[i]) throw SchemaError("external predictor gave no answer for " + sentences[i]->id);
    out.push_back(std::move(*answers[i]));
  }
  return out;
}

std::unique_ptr<SequenceTagger> make_tagger(const TagSet& tags, const EngineConfig& config) {
  if (!config.external_predictor_cmd.empty()) {
    return std::make_unique<ExternalTagger>(tags, config.external_predictor_cmd);
  }
  return std::make_unique<PerceptronTagger>(tags, config.predictor_epochs);
}

}  // namespace seqtruth
