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


#ifndef SEQTRUTH_CLI_H_
#define SEQTRUTH_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqtruth/aggregation.h"
#include "seqtruth/corpus.h"
#include "seqtruth/error.h"
#include "seqtruth/evaluation.h"
#include "seqtruth/simulate.h"

namespace seqtruth::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalFailure = 3 };

// Bad flags or configuration values.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kSeedEnv = "SEQTRUTH_SEED";
inline constexpr const char* kVersion = "0.1.0";

// Applies "key = value" lines (TOML subset) onto `config`. Keys:
//   tolerance, max_iter, confidence_threshold, use_class_weights,
//   no_consistency, no_predictor, seed, isolate_machine_weight,
//   entity_count ("tokens" | "spans"), threads,
//   [predictor] epochs, min_pool, external_cmd
// Returns the dotted keys that were set. Unknown keys and bad values throw
// UsageError.
std::set<std::string> apply_config(std::istream& in, EngineConfig& config);
std::set<std::string> apply_config_file(const std::filesystem::path& path, EngineConfig& config);

// Every key accepted by apply_config, with its effective value.
nlohmann::ordered_json config_to_json(const EngineConfig& config);

// One "[worker_id]" section per worker, in file order, with the fields of
// WorkerProfile; "confusion" is a flat row-major J*J list.
std::vector<WorkerProfile> load_profiles(std::istream& in, int num_labels);
std::vector<WorkerProfile> load_profiles_file(const std::filesystem::path& path, int num_labels);

// Flag, then config file, then $SEQTRUTH_SEED, then 42. A malformed
// environment value throws UsageError.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag,
                           std::optional<std::uint64_t> config_file);

nlohmann::ordered_json prf_to_json(const PRF& prf);
nlohmann::ordered_json objective_to_json(const ObjectiveBreakdown& objective);

// Report layout is documented in docs/report_schema.md. Wall-clock fields
// are the only ones that vary between identical runs.
nlohmann::ordered_json build_report(const AnnotationCorpus& corpus, const EngineConfig& config,
                                    const RunResult& result, const std::string& input);

// iteration,l_agg,l_pred,l_inc,total; iteration 0 is the initial state.
void write_objective_csv(const RunResult& result, std::ostream& out);

// Entry point of the seqtruth binary.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seqtruth::cli

#endif  // SEQTRUTH_CLI_H_
