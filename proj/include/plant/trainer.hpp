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
#ifndef PLANT_TRAINER_HPP_
#define PLANT_TRAINER_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "plant/corpus.hpp"
#include "plant/decoder.hpp"
#include "plant/encoder.hpp"
#include "plant/gain.hpp"
#include "plant/metrics.hpp"
#include "plant/params.hpp"
#include "plant/ranker.hpp"

namespace plant::trainer {

enum class UnfreezeMode { kGradual, kFull, kFrozenEncoder };

struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double adam_eps = 1e-8;
  double lr_max = 3e-2;   // start of the decreasing schedule
  double lr_min = 1e-5;   // end
  double wd_min = 1e-2;   // start of the increasing schedule
  double wd_max = 3e-1;   // end
  double lr_factor_encoder = 1.0 / 3.0;
  double lr_factor_l2r = 1.0 / 3.0;  // "1/3 of the lr" to pretrained parameters
  double lr_factor_decoder = 1.0;
  UnfreezeMode unfreeze = UnfreezeMode::kGradual;
  int unfreeze_l2r_epoch = 2;
  int unfreeze_encoder_epoch = 4;
  double clip_norm = 1.0;
  int patience = 10;  // early stop on validation micro-F1
  std::uint64_t seed = 0;

  void validate() const;
};

// Linear interpolation between the schedule endpoints across epochs.
double lr_at_epoch(const TrainConfig& c, int epoch);
double wd_at_epoch(const TrainConfig& c, int epoch);

// Trainable groups at an epoch under the unfreezing protocol.
std::set<ParamGroup> gradual_unfreeze(int epoch, const TrainConfig& c);

// Every model the decoder pipeline owns. l2r is meaningful only when
// has_l2r; the gain matrix rides along for the static attention lookup.
struct ModelBundle {
  encoder::EncoderModel enc;
  ranker::L2RModel l2r;
  bool has_l2r = false;
  decoder::DecoderParams dec;

  std::vector<ParamRef> all_params();
  decoder::Models views(const gain::GainMatrix* G) const;
};

struct AdamState {
  std::map<std::string, Eigen::MatrixXd> m, v;
  std::map<std::string, std::int64_t> steps;
};

struct EpochLogRow {
  int epoch;
  std::string split;
  std::string metric;
  double value;
};
std::string log_to_csv(const std::vector<EpochLogRow>& rows);

struct TrainerState {
  ModelBundle bundle;
  AdamState adam;
  int next_epoch = 0;
  double best_metric = -1.0;
  int best_epoch = -1;
  int since_best = 0;
  ModelBundle best;
};

struct TrainResult {
  std::vector<EpochLogRow> log;  // rows produced by this call only
  int epochs_run = 0;
  bool aborted_nan = false;
  double best_metric = -1.0;
  int best_epoch = -1;
};

// Fine-tunes the bundle in place. checkpoint_dir, when non-empty, receives
// last/ and best/ snapshots every epoch. Resumable: state carries everything.
TrainResult train(TrainerState& state, const corpus::Corpus& corpus,
                  const std::vector<int>& train_ids, const std::vector<int>& val_ids,
                  const gain::GainMatrix& G, const TrainConfig& config,
                  const std::string& checkpoint_dir = "");

// Scores for the given documents under the bundle's decode mode.
metrics::ScoreMatrix predict_scores(const ModelBundle& bundle, const gain::GainMatrix& G,
                                    const corpus::Corpus& corpus, const std::vector<int>& ids);
metrics::GoldSets gold_sets(const corpus::Corpus& corpus, const std::vector<int>& ids);

// Elementwise mean of two probability matrices (forward/backward ensemble).
metrics::ScoreMatrix ensemble_average(const metrics::ScoreMatrix& pred_forward,
                                      const metrics::ScoreMatrix& pred_backward);

void save_trainer_state(const std::string& dir, const TrainerState& state,
                        const std::string& config_hash);
TrainerState load_trainer_state(const std::string& dir);

// ---- system-level harness (one fully wired training run) ----

struct SystemSpec {
  encoder::Arch arch = encoder::Arch::kRecurrent;
  encoder::Direction direction = encoder::Direction::kForward;
  int s_e = 32;
  int window = 0;
  ranker::L2RTrainConfig l2r;
  bool use_learned = true;
  bool use_static = true;
  bool use_planted = true;
  bool use_inattention = true;
  bool static_normalize = false;
  decoder::InattentionMode inattention_mode = decoder::InattentionMode::kNegInfMask;
  decoder::Phi phi = decoder::Phi::kElementwiseMax;
  int inattention_k = 8;
  int segment_len = 72;
  bool stateful = false;
  bool u_init_from_l2r = true;
  TrainConfig train;
};

struct TrainedSystem {
  ModelBundle bundle;
  TrainResult result;
};

// Initializes encoder/decoder (pretraining the L2R model from G when planted
// and no pretrained model is supplied), then fine-tunes.
TrainedSystem train_system(const corpus::Corpus& corpus, const std::vector<int>& train_ids,
                           const std::vector<int>& val_ids, const gain::GainMatrix& G,
                           const SystemSpec& spec, std::uint64_t seed,
                           const ranker::L2RModel* pretrained_l2r = nullptr,
                           const std::string& checkpoint_dir = "");

// ---- ablation harness ----

struct AblationCell {
  std::string axis;
  std::string cell;
  std::map<std::string, double> metric_mean;
  std::map<std::string, double> metric_sd;
  int seeds = 0;
};

struct AblationTable {
  std::vector<AblationCell> cells;
  std::map<std::string, double> p_value;  // per axis, on/off paired comparison
  std::string to_csv() const;
};

// Six axes: planted, inattention, stateful, disc, unfreeze, ensemble.
// Each cell reports mean +- sd over the seeds; p-values come from the
// approximate-randomization test on the seed-stacked test predictions.
AblationTable run_ablation(const corpus::Corpus& corpus, const corpus::Split& split,
                           const gain::GainMatrix& G, const SystemSpec& base,
                           const std::vector<std::uint64_t>& seeds, int ar_iterations = 2000);

}  // namespace plant::trainer

#endif  // PLANT_TRAINER_HPP_
