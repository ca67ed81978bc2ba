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


#include "seqtruth/cli.h"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "seqtruth/consistency.h"

namespace seqtruth::cli {

using nlohmann::ordered_json;

namespace {

std::string joined_key(const CLI::ConfigItem& item) {
  std::string key;
  for (const auto& parent : item.parents) key += parent + ".";
  return key + item.name;
}

const std::string& single(const CLI::ConfigItem& item) {
  if (item.inputs.size() != 1) throw UsageError("config key '" + joined_key(item) + "' needs one value");
  return item.inputs.front();
}

double parse_double(const std::string& text, const std::string& key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw UsageError("'" + key + "': not a number: " + text);
  return value;
}

template <typename Int>
Int parse_int(const std::string& text, const std::string& key) {
  Int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw UsageError("'" + key + "': not an integer: " + text);
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw UsageError("'" + key + "': not a boolean: " + text);
}

EntityCountMode parse_entity_count(const std::string& text) {
  if (text == "tokens") return EntityCountMode::kTokens;
  if (text == "spans") return EntityCountMode::kSpans;
  throw UsageError("entity_count must be \"tokens\" or \"spans\", got \"" + text + "\"");
}

std::vector<CLI::ConfigItem> read_items(std::istream& in) {
  try {
    return CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return in;
}

void validate_config(const EngineConfig& c) {
  if (!(c.tolerance >= 0.0)) throw UsageError("tolerance must be non-negative");
  if (c.max_iter < 1) throw UsageError("max_iter must be at least 1");
  if (!(c.confidence_threshold >= 0.0 && c.confidence_threshold <= 1.0)) {
    throw UsageError("confidence_threshold must lie in [0, 1]");
  }
  if (c.threads < 1) throw UsageError("threads must be at least 1");
  if (c.predictor_epochs < 1) throw UsageError("predictor.epochs must be at least 1");
  if (c.predictor_min_pool < 1) throw UsageError("predictor.min_pool must be at least 1");
}

}  // namespace

std::set<std::string> apply_config(std::istream& in, EngineConfig& c) {
  std::set<std::string> seen;
  for (const auto& item : read_items(in)) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = joined_key(item);
    const std::string& v = single(item);
    if (key == "tolerance") {
      c.tolerance = parse_double(v, key);
    } else if (key == "max_iter") {
      c.max_iter = parse_int<int>(v, key);
    } else if (key == "confidence_threshold") {
      c.confidence_threshold = parse_double(v, key);
    } else if (key == "use_class_weights") {
      c.use_class_weights = parse_bool(v, key);
    } else if (key == "no_consistency") {
      c.no_consistency = parse_bool(v, key);
    } else if (key == "no_predictor") {
      c.no_predictor = parse_bool(v, key);
    } else if (key == "seed") {
      c.seed = parse_int<std::uint64_t>(v, key);
    } else if (key == "isolate_machine_weight") {
      c.isolate_machine_weight = parse_bool(v, key);
    } else if (key == "entity_count") {
      c.entity_count = parse_entity_count(v);
    } else if (key == "threads") {
      c.threads = parse_int<int>(v, key);
    } else if (key == "predictor.epochs") {
      c.predictor_epochs = parse_int<int>(v, key);
    } else if (key == "predictor.min_pool") {
      c.predictor_min_pool = parse_int<int>(v, key);
    } else if (key == "predictor.external_cmd") {
      c.external_predictor_cmd = v;
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
    seen.insert(key);
  }
  validate_config(c);
  return seen;
}

std::set<std::string> apply_config_file(const std::filesystem::path& path, EngineConfig& config) {
  auto in = open_or_throw(path);
  return apply_config(in, config);
}

ordered_json config_to_json(const EngineConfig& c) {
  ordered_json out;
  out["tolerance"] = c.tolerance;
  out["max_iter"] = c.max_iter;
  out["confidence_threshold"] = c.confidence_threshold;
  out["use_class_weights"] = c.use_class_weights;
  out["no_consistency"] = c.no_consistency;
  out["no_predictor"] = c.no_predictor;
  out["seed"] = c.seed;
  out["isolate_machine_weight"] = c.isolate_machine_weight;
  out["entity_count"] = c.entity_count == EntityCountMode::kTokens ? "tokens" : "spans";
  out["threads"] = c.threads;
  out["predictor"] = {{"epochs", c.predictor_epochs},
                      {"min_pool", c.predictor_min_pool},
                      {"external_cmd", c.external_predictor_cmd}};
  return out;
}

std::vector<WorkerProfile> load_profiles(std::istream& in, int num_labels) {
  std::vector<WorkerProfile> out;
  for (const auto& item : read_items(in)) {
    if (item.parents.size() != 1) {
      throw UsageError("profile key '" + joined_key(item) + "' is outside a [worker] section");
    }
    const std::string& worker = item.parents.front();
    if (item.name == "++") {
      out.push_back(WorkerProfile{});
      out.back().worker_id = worker;
      continue;
    }
    if (item.name == "--") continue;
    if (out.empty() || out.back().worker_id != worker) {
      throw UsageError("profile section '" + worker + "' is split");
    }
    auto& p = out.back();
    const std::string key = joined_key(item);
    if (item.name == "confusion") {
      const auto n = static_cast<std::size_t>(num_labels);
      if (item.inputs.size() != n * n) {
        throw UsageError("'" + key + "' needs " + std::to_string(n * n) + " values");
      }
      std::vector<std::vector<double>> m(n, std::vector<double>(n));
      for (std::size_t i = 0; i < n * n; ++i) m[i / n][i % n] = parse_double(item.inputs[i], key);
      p.confusion = std::move(m);
      continue;
    }
    const double v = parse_double(single(item), key);
    if (item.name == "token_accuracy") {
      p.token_accuracy = v;
    } else if (item.name == "span_drop_rate") {
      p.span_drop_rate = v;
    } else if (item.name == "boundary_jitter") {
      p.boundary_jitter = v;
    } else if (item.name == "coverage") {
      p.coverage = v;
    } else {
      throw UsageError("unknown profile key '" + key + "'");
    }
  }
  if (out.empty()) throw UsageError("profile file defines no workers");
  for (const auto& p : out) {
    try {
      validate_profile(p, num_labels);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::vector<WorkerProfile> load_profiles_file(const std::filesystem::path& path, int num_labels) {
  auto in = open_or_throw(path);
  return load_profiles(in, num_labels);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag,
                           std::optional<std::uint64_t> config_file) {
  if (flag) return *flag;
  if (config_file) return *config_file;
  if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
    return parse_int<std::uint64_t>(env, kSeedEnv);
  }
  return EngineConfig{}.seed;
}

ordered_json prf_to_json(const PRF& prf) {
  return ordered_json{{"precision", prf.precision},
                      {"recall", prf.recall},
                      {"f1", prf.f1},
                      {"true_positives", prf.true_positives},
                      {"predicted", prf.predicted},
                      {"gold", prf.gold},
                      {"zero_predicted", prf.zero_predicted},
                      {"zero_gold", prf.zero_gold}};
}

ordered_json objective_to_json(const ObjectiveBreakdown& o) {
  return ordered_json{{"l_agg", o.l_agg}, {"l_pred", o.l_pred}, {"l_inc", o.l_inc}, {"total", o.total}};
}

namespace {

ordered_json optional_number(const std::optional<double>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

ordered_json weights_by_worker(const AnnotationCorpus& corpus, const std::vector<double>& w) {
  ordered_json out = ordered_json::object();
  for (int j = 0; j < corpus.num_workers(); ++j) {
    out[corpus.worker_ids()[static_cast<std::size_t>(j)]] = w[static_cast<std::size_t>(j)];
  }
  return out;
}

ordered_json metrics_block(const TagSet& tags, const std::vector<LabelSequence>& pred,
                           const std::vector<LabelSequence>& gold) {
  return ordered_json{{"strict", prf_to_json(strict_prf(tags, pred, gold))},
                      {"relaxed", prf_to_json(relaxed_prf(tags, pred, gold))},
                      {"relaxed_macro",
                       prf_to_json(relaxed_prf(tags, pred, gold, RelaxedAverage::kMacro))}};
}

}  // namespace

ordered_json build_report(const AnnotationCorpus& corpus, const EngineConfig& config,
                          const RunResult& result, const std::string& input) {
  ordered_json report;
  report["tool"] = "seqtruth";
  report["version"] = kVersion;
  report["mode"] = config.mode();
  report["seed"] = config.seed;
  report["config"] = config_to_json(config);
  report["input"] = {{"path", input},
                     {"sentences", corpus.num_sentences()},
                     {"workers", corpus.num_workers()},
                     {"tokens", corpus.num_tokens()},
                     {"labels", corpus.tag_set().labels()},
                     {"sparsely_annotated_sentences", result.sparsely_annotated_sentences}};
  report["converged"] = result.converged;
  report["iterations"] = result.trajectory.size();
  report["initial_objective"] = objective_to_json(result.initial_objective);
  ordered_json trajectory = ordered_json::array();
  double total_seconds = 0.0;
  for (const auto& r : result.trajectory) {
    total_seconds += r.seconds;
    trajectory.push_back({{"iteration", r.iteration},
                          {"objective", objective_to_json(r.objective)},
                          {"worker_weights", weights_by_worker(corpus, r.worker_weights)},
                          {"machine_weight", r.machine_weight},
                          {"machine_present", r.machine_present},
                          {"pool_size", r.pool_size},
                          {"trained_sentences", r.trained_sentences},
                          {"predicted_sentences", r.predicted_sentences},
                          {"repaired_tokens", r.repaired_tokens},
                          {"seconds", r.seconds}});
  }
  report["trajectory"] = std::move(trajectory);
  report["weights"] = {{"workers", weights_by_worker(corpus, result.state.worker_weights)},
                       {"machine", result.state.machine_weight}};
  if (corpus.has_gold()) {
    const auto gold = corpus.gold_sequences();
    const TagSet& tags = corpus.tag_set();
    ordered_json metrics;
    metrics["aggregate"] = metrics_block(tags, result.state.hard, gold);
    metrics["majority_vote"] = metrics_block(tags, result.majority_vote.hard, gold);
    const auto f1 = per_worker_strict_f1(corpus);
    ordered_json correlation;
    correlation["worker_f1"] = weights_by_worker(corpus, f1);
    if (corpus.num_workers() >= 3) {
      const auto wc = weight_reliability_correlation(corpus, result.state.worker_weights);
      correlation["pearson"] = optional_number(wc.pearson);
      correlation["spearman"] = optional_number(wc.spearman);
    } else {
      correlation["pearson"] = nullptr;
      correlation["spearman"] = nullptr;
    }
    metrics["weight_correlation"] = std::move(correlation);
    report["metrics"] = std::move(metrics);
  } else {
    report["metrics"] = nullptr;
  }
  report["warnings"] = result.warnings;
  report["timing"] = {{"total_seconds", total_seconds}};
  return report;
}

void write_objective_csv(const RunResult& result, std::ostream& out) {
  auto row = [&](int iteration, const ObjectiveBreakdown& o) {
    out << iteration << ',' << ordered_json(o.l_agg).dump() << ',' << ordered_json(o.l_pred).dump()
        << ',' << ordered_json(o.l_inc).dump() << ',' << ordered_json(o.total).dump() << '\n';
  };
  out << "iteration,l_agg,l_pred,l_inc,total\n";
  row(0, result.initial_objective);
  for (const auto& r : result.trajectory) row(r.iteration, r.objective);
}

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  std::vector<CLI::Option*> seed_opts;
  int threads = 1;
  CLI::Option* threads_opt = nullptr;
  bool verbose = false;
};

void add_seed(CLI::App* app, CommonFlags& f) {
  f.seed_opts.push_back(app->add_option("--seed", f.seed, "RNG seed (falls back to $SEQTRUTH_SEED, then 42)"));
}

std::optional<std::uint64_t> flag_seed(const CommonFlags& f) {
  for (const auto* opt : f.seed_opts) {
    if (opt->count() > 0) return f.seed;
  }
  return std::nullopt;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write " + path.string());
  out << text;
  if (!out) throw SchemaError("write failed: " + path.string());
}

bool is_jsonl(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".json";
}

std::optional<TagSet> declared_tags(const std::string& classes) {
  if (classes.empty()) return std::nullopt;
  std::vector<std::string> list;
  std::stringstream ss(classes);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw UsageError("--classes has an empty class name");
    list.push_back(item);
  }
  return TagSet(list);
}

// --- aggregate -------------------------------------------------------------

struct AggregateArgs {
  std::vector<std::string> inputs;
  std::string gold;
  std::string out_dir;
  std::string classes;
  bool iob1 = false;
  bool no_consistency = false;
  bool no_predictor = false;
  bool class_weights = false;
  bool no_class_weights = false;
  bool isolate_machine = false;
  double tolerance = 0.0;
  int max_iter = 0;
  double tau = 0.0;
  std::string entity_count;
  std::string predictor_cmd;
  CLI::Option* tolerance_opt = nullptr;
  CLI::Option* max_iter_opt = nullptr;
  CLI::Option* tau_opt = nullptr;
};

int cmd_aggregate(const AggregateArgs& a, const CommonFlags& f, std::ostream& out) {
  EngineConfig config;
  std::set<std::string> from_file;
  if (!f.config_path.empty()) from_file = apply_config_file(f.config_path, config);
  const auto file_seed =
      from_file.count("seed") ? std::optional<std::uint64_t>(config.seed) : std::nullopt;
  config.seed = resolve_seed(flag_seed(f), file_seed);
  if (f.threads_opt->count() > 0) {
    config.threads = f.threads;
  } else if (!from_file.count("threads")) {
    config.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  if (a.tolerance_opt->count() > 0) config.tolerance = a.tolerance;
  if (a.max_iter_opt->count() > 0) config.max_iter = a.max_iter;
  if (a.tau_opt->count() > 0) config.confidence_threshold = a.tau;
  if (a.no_consistency) config.no_consistency = true;
  if (a.no_predictor) config.no_predictor = true;
  if (a.class_weights) config.use_class_weights = true;
  if (a.no_class_weights) config.use_class_weights = false;
  if (a.isolate_machine) config.isolate_machine_weight = true;
  if (!a.entity_count.empty()) config.entity_count = parse_entity_count(a.entity_count);
  if (!a.predictor_cmd.empty()) config.external_predictor_cmd = a.predictor_cmd;
  validate_config(config);

  LoadOptions load;
  load.tag_set = declared_tags(a.classes);
  load.iob1 = a.iob1;
  AnnotationCorpus corpus;
  std::string input_desc;
  if (a.inputs.size() == 1 && is_jsonl(a.inputs.front())) {
    if (!a.gold.empty()) throw UsageError("--gold applies to column-file input only");
    corpus = load_jsonl(a.inputs.front(), load);
    input_desc = a.inputs.front();
  } else {
    std::vector<std::filesystem::path> files(a.inputs.begin(), a.inputs.end());
    std::optional<std::filesystem::path> gold;
    if (!a.gold.empty()) gold = a.gold;
    corpus = load_conll(files, gold, load);
    for (const auto& in : a.inputs) input_desc += (input_desc.empty() ? "" : " ") + in;
  }
  spdlog::info("loaded {} sentences, {} workers, {} labels", corpus.num_sentences(),
               corpus.num_workers(), corpus.tag_set().size());

  const RunResult result = run(corpus, config);
  for (const auto& w : result.warnings) spdlog::warn("{}", w);

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  write_output(corpus, result.state.hard, dir / "labels.conll");
  write_jsonl(corpus, dir / "labels.jsonl", &result.state.hard);
  write_text(dir / "report.json", build_report(corpus, config, result, input_desc).dump(2) + "\n");
  std::ostringstream csv;
  write_objective_csv(result, csv);
  write_text(dir / "objective.csv", csv.str());

  out << "mode " << config.mode() << ", " << result.trajectory.size() << " iterations"
      << (result.converged ? " (converged)" : " (max_iter reached)") << ", output in "
      << dir.string() << "\n";
  return kOk;
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string pred;
  std::string gold;
  std::string out;
  bool iob1 = false;
  bool strict = false;
  bool relaxed = false;
  bool both = false;
  bool json = false;
};

// Scores are printed x100 with two decimals.
std::string metrics_table(const ordered_json& metrics) {
  std::string text = "metric         precision   recall       f1       tp     pred     gold\n";
  char line[160];
  for (const auto& [name, m] : metrics.items()) {
    std::snprintf(line, sizeof(line), "%-13s %10.2f %8.2f %8.2f %8ld %8ld %8ld\n", name.c_str(),
                  100.0 * m["precision"].get<double>(), 100.0 * m["recall"].get<double>(),
                  100.0 * m["f1"].get<double>(), m["true_positives"].get<long>(),
                  m["predicted"].get<long>(), m["gold"].get<long>());
    text += line;
  }
  return text;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  LabeledText pred = read_labeled(a.pred, {"aggregate", "labels", "gold"});
  LabeledText gold = read_labeled(a.gold, {"gold", "labels"});
  if (pred.sentences.size() != gold.sentences.size()) {
    throw AlignmentError("prediction has " + std::to_string(pred.sentences.size()) +
                         " sentences, gold " + std::to_string(gold.sentences.size()));
  }
  for (std::size_t k = 0; k < pred.sentences.size(); ++k) {
    if (pred.sentences[k].tokens != gold.sentences[k].tokens) {
      throw AlignmentError("sentence " + std::to_string(k + 1) + " ('" + gold.sentences[k].id +
                           "'): tokens differ between prediction and gold");
    }
  }
  if (a.iob1) {
    for (auto& l : pred.labels) l = iob1_to_iob2(l);
    for (auto& l : gold.labels) l = iob1_to_iob2(l);
  }
  std::vector<std::string> all;
  for (const auto* side : {&pred, &gold}) {
    for (const auto& l : side->labels) all.insert(all.end(), l.begin(), l.end());
  }
  LoadOptions load;
  load.tag_set = TagSet::Infer(all);
  const LabeledCorpus p = to_labeled_corpus(std::move(pred), load);
  const LabeledCorpus g = to_labeled_corpus(std::move(gold), load);
  ordered_json metrics = metrics_block(load.tag_set.value(), p.labels, g.labels);
  if (a.strict && !a.both) {
    metrics.erase("relaxed");
    metrics.erase("relaxed_macro");
  } else if (a.relaxed && !a.both) {
    metrics.erase("strict");
  }
  ordered_json report = metrics;
  report["sentences"] = g.sentences.size();
  const std::string text = report.dump(2) + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  out << (a.json ? text : metrics_table(metrics));
  return kOk;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string profiles;
  std::string gold;
  std::string out_dir;
  int sentences = 200;
  bool raw = false;
};

int cmd_simulate(const SimulateArgs& a, const CommonFlags& f, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(flag_seed(f), std::nullopt);
  if (a.sentences < 1) throw UsageError("--sentences must be at least 1");
  LabeledCorpus gold = a.gold.empty()
                           ? synthetic_gold(seed, a.sentences)
                           : to_labeled_corpus(read_labeled(a.gold, {"gold", "labels"}));
  const auto profiles = a.profiles.empty() ? default_profiles()
                                           : load_profiles_file(a.profiles, gold.tag_set.size());
  SimulateOptions options;
  options.repair = !a.raw;
  const AnnotationCorpus crowd = simulate(gold, profiles, seed ^ kCrowdSeedMix, options);
  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  write_labeled_jsonl(gold, dir / "gold.jsonl");
  write_jsonl(crowd, dir / "crowd.jsonl");
  out << crowd.num_sentences() << " sentences, " << crowd.num_workers() << " workers, seed "
      << seed << ", output in " << dir.string() << "\n";
  return kOk;
}

// --- repair ----------------------------------------------------------------

struct RepairArgs {
  std::string labels;
  std::string in;
  std::string classes;
  std::string entity_count = "tokens";
};

std::vector<std::string> split_labels(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ' || ch == ',' || ch == '\t' || ch == '[' || ch == ']' || ch == '"') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

int cmd_repair(const RepairArgs& a, const CommonFlags& f, std::ostream& out) {
  if (a.labels.empty() == a.in.empty()) throw UsageError("give exactly one of --labels or --in");
  std::vector<std::string> labels;
  std::optional<std::vector<std::vector<double>>> votes;
  std::optional<TagSet> tags = declared_tags(a.classes);
  if (!a.labels.empty()) {
    labels = split_labels(a.labels);
  } else {
    std::ifstream in(a.in);
    if (!in) throw SchemaError("cannot open " + a.in);
    ordered_json doc;
    try {
      doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(e.what(), 1);
    }
    if (!doc.contains("labels")) throw SchemaError("repair input needs a \"labels\" list");
    labels = doc["labels"].get<std::vector<std::string>>();
    if (doc.contains("votes")) votes = doc["votes"].get<std::vector<std::vector<double>>>();
    if (!tags && doc.contains("classes")) {
      tags = TagSet(doc["classes"].get<std::vector<std::string>>());
    }
  }
  if (labels.empty()) throw SchemaError("no labels to repair");
  if (!tags) tags = TagSet::Infer(labels);
  const LabelSequence hard = tags->encode(labels);
  std::vector<LabelDistribution> dists;
  if (votes) {
    if (votes->size() != hard.size()) throw SchemaError("one vote distribution per label expected");
    for (const auto& row : *votes) {
      if (row.size() != static_cast<std::size_t>(tags->size())) {
        throw SchemaError("vote rows need one entry per label of the tag set (" +
                          std::to_string(tags->size()) + ")");
      }
    }
    dists = *votes;
  } else {
    for (LabelId l : hard) {
      LabelDistribution d(static_cast<std::size_t>(tags->size()), 0.0);
      d[static_cast<std::size_t>(l)] = 1.0;
      dists.push_back(std::move(d));
    }
  }
  const std::uint64_t seed = resolve_seed(flag_seed(f), std::nullopt);
  SplitMix64 rng = sentence_rng(seed, 0, 0);
  const LabelSequence fixed =
      repair_sentence(*tags, hard, dists, rng, parse_entity_count(a.entity_count));
  const auto names = tags->decode(fixed);
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? " " : "") << names[i];
  out << "\n";
  return kOk;
}

void setup_logging(bool verbose) {
  auto logger = spdlog::get("seqtruth");
  if (!logger) {
    logger = spdlog::stderr_logger_mt("seqtruth");
    logger->set_pattern("seqtruth: %l: %v");
  }
  logger->set_level(verbose ? spdlog::level::info : spdlog::level::warn);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Truth discovery for crowd-sourced sequence labels", "seqtruth"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_flag("-v,--verbose", flags.verbose, "Log progress to standard error");

  AggregateArgs agg;
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate crowd annotations");
  aggregate->add_option("--in", agg.inputs, "crowd.jsonl, or one column file per worker")
      ->required()
      ->expected(1, -1);
  aggregate->add_option("--gold", agg.gold, "Gold column file for column-file input");
  aggregate->add_option("--out", agg.out_dir, "Output directory")->required();
  aggregate->add_option("--config", flags.config_path, "Engine config file (key = value)");
  add_seed(aggregate, flags);
  flags.threads_opt = aggregate->add_option("--threads", flags.threads, "Worker threads")
                          ->check(CLI::PositiveNumber);
  agg.tolerance_opt = aggregate->add_option("--tolerance", agg.tolerance, "Relative objective change to stop at");
  agg.max_iter_opt = aggregate->add_option("--max-iter", agg.max_iter, "Iteration cap");
  agg.tau_opt = aggregate->add_option("--tau", agg.tau, "Confidence threshold for predictor training");
  aggregate->add_flag("--no-consistency", agg.no_consistency, "Disable the consistency repair");
  aggregate->add_flag("--no-predictor", agg.no_predictor, "Disable the co-trained tagger");
  auto* cw = aggregate->add_flag("--class-weights", agg.class_weights, "Enable class weights");
  aggregate->add_flag("--no-class-weights", agg.no_class_weights, "Disable class weights")
      ->excludes(cw);
  aggregate->add_flag("--isolate-machine", agg.isolate_machine,
                      "Keep the tagger's loss out of the workers' normalizer");
  aggregate->add_option("--entity-count", agg.entity_count, "tokens | spans")
      ->check(CLI::IsMember({"tokens", "spans"}));
  aggregate->add_option("--predictor-cmd", agg.predictor_cmd, "External tagger command");
  aggregate->add_option("--classes", agg.classes, "Comma-separated entity classes, in order");
  aggregate->add_flag("--iob1", agg.iob1, "Input labels are IOB1");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score predicted labels against gold");
  evaluate->add_option("--pred", ev.pred, "Predictions (JSONL or column file)")->required();
  evaluate->add_option("--gold", ev.gold, "Gold labels (JSONL or column file)")->required();
  evaluate->add_option("--out", ev.out, "Also write the JSON report to this file");
  evaluate->add_flag("--iob1", ev.iob1, "Labels are IOB1");
  auto* strict_flag = evaluate->add_flag("--strict", ev.strict, "Span-level scores only");
  auto* relaxed_flag = evaluate->add_flag("--relaxed", ev.relaxed, "Token-level scores only");
  evaluate->add_flag("--both", ev.both, "Span and token scores (default)")
      ->excludes(strict_flag)
      ->excludes(relaxed_flag);
  strict_flag->excludes(relaxed_flag);
  evaluate->add_flag("--json", ev.json, "Print the JSON report instead of the table");

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic crowd corpus");
  simulate_cmd->add_option("--profiles", sim.profiles, "Worker profile file ([worker] sections)");
  simulate_cmd->add_option("--gold", sim.gold, "Gold corpus to corrupt (default: synthetic)");
  simulate_cmd->add_option("--sentences", sim.sentences, "Synthetic gold size");
  simulate_cmd->add_option("--out", sim.out_dir, "Output directory for gold.jsonl and crowd.jsonl")
      ->required();
  simulate_cmd->add_flag("--raw", sim.raw, "Keep BIO-invalid worker output");
  add_seed(simulate_cmd, flags);

  RepairArgs rep;
  auto* repair = app.add_subcommand("repair", "Make one label sequence BIO-consistent");
  repair->add_option("--labels", rep.labels, "Labels, e.g. \"O I-PER\"");
  repair->add_option("--in", rep.in, "JSON file {labels, votes?, classes?}");
  repair->add_option("--classes", rep.classes, "Comma-separated entity classes, in order");
  repair->add_option("--entity-count", rep.entity_count, "tokens | spans")
      ->check(CLI::IsMember({"tokens", "spans"}));
  add_seed(repair, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  setup_logging(flags.verbose);

  try {
    if (aggregate->parsed()) return cmd_aggregate(agg, flags, out);
    if (evaluate->parsed()) return cmd_evaluate(ev, out);
    if (simulate_cmd->parsed()) return cmd_simulate(sim, flags, out);
    if (repair->parsed()) return cmd_repair(rep, flags, out);
  } catch (const UsageError& e) {
    err << "seqtruth: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "seqtruth: numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "seqtruth: " << e.what() << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "seqtruth: " << e.what() << "\n";
    return kDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "seqtruth: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace seqtruth::cli
