/*
 * Copyright 2026 The PLANT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef PLANT_CLI_HPP_
#define PLANT_CLI_HPP_

#include <stdexcept>
#include <string>

#include "plant/config.hpp"
#include "plant/corpus.hpp"
#include "plant/gain.hpp"
#include "plant/trainer.hpp"

namespace plant::cli {

// Exit codes: 0 success, 2 config error, 3 missing prerequisite, 4 numeric.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitNumeric = 4;

class MissingPrerequisite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Full argv entry point; catches the error taxonomy and maps to exit codes.
int main_entry(int argc, const char* const* argv);

// Individual commands (tests drive these directly). Each writes its
// artifacts plus a manifest into the config's run_dir and throws on failure.
void cmd_synth(const config::RunConfig& cfg);
void cmd_ingest(const config::RunConfig& cfg, const std::string& input_jsonl);
void cmd_gain(const config::RunConfig& cfg);
void cmd_pretrain_l2r(const config::RunConfig& cfg);
void cmd_train(const config::RunConfig& cfg);
void cmd_eval(const config::RunConfig& cfg);
void cmd_ablate(const config::RunConfig& cfg);
void cmd_ensemble(const config::RunConfig& cfg, const std::string& preds_a,
                  const std::string& preds_b);
void cmd_inspect(const config::RunConfig& cfg);

// Shared loading helpers (also used by the acceptance suite).
corpus::Corpus load_run_corpus(const std::string& run_dir);
corpus::SignalOracle load_oracle(const std::string& path);
void save_oracle(const std::string& path, const corpus::SignalOracle& oracle,
                 const corpus::Vocabulary& vocab);

struct Predictions {
  metrics::ScoreMatrix scores;
  std::vector<std::string> doc_ids;
};
void save_predictions(const std::string& path, const Predictions& preds);
Predictions load_predictions(const std::string& path);

}  // namespace plant::cli

#endif  // PLANT_CLI_HPP_
