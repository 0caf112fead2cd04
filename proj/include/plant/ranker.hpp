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
#ifndef PLANT_RANKER_HPP_
#define PLANT_RANKER_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plant/gain.hpp"
#include "plant/params.hpp"
#include "plant/rng.hpp"

namespace plant::ranker {

// Feed-forward ranking network over concatenated (label, token) embeddings.
// Hidden layers use ReLU; the final layer is linear so scores stay unbounded.
struct L2RModel {
  int d_emb = 0;
  Eigen::MatrixXd label_emb;  // |L| x d_emb
  Eigen::MatrixXd token_emb;  // |T| x d_emb
  struct Layer {
    Eigen::MatrixXd w;  // out x in
    Eigen::MatrixXd b;  // out x 1
  };
  std::vector<Layer> layers;  // layers.front() takes width 2*d_emb, back() emits 1

  int num_labels() const { return static_cast<int>(label_emb.rows()); }
  int num_tokens() const { return static_cast<int>(token_emb.rows()); }
  std::vector<ParamRef> params();
};

L2RModel init_l2r(int num_labels, int num_tokens, int d_emb, int hidden, int num_layers,
                  std::uint64_t seed);

struct L2RTrainConfig {
  int k_prime = 5;        // nDCG cutoff of the training objective
  double sigma = 1.0;     // lambda sigmoid shape
  double eta = 0.05;      // SGD learning rate
  int epochs = 20;
  int candidate_pool = 256;  // tokens per instance
  int pair_cap = 5000;       // max ordered pairs per lambda step (0 = unlimited)
  int grade_bins = 5;        // gain quantization levels (>= 2)
  bool raw_gains = false;    // skip quantization, use MIG values directly
  bool dcg_minus_one = false;  // 2^g - 1 numerator variant
  int d_emb = 16;
  int hidden = 32;
  int num_layers = 2;
  std::uint64_t seed = 0;
};

// One label's training instance: candidate tokens with graded relevance.
struct RankingInstance {
  int label_id = -1;
  std::vector<int> token_ids;
  Eigen::VectorXd gains;  // aligned with token_ids, >= 0
};

// Psi: [label embedding ; token embedding], width 2*d_emb.
Eigen::VectorXd build_feature(const L2RModel& model, int label_id, int token_id);

// Feature columns for many pairs at once (2*d_emb x m).
Eigen::MatrixXd build_features(const L2RModel& model,
                               const std::vector<std::pair<int, int>>& pairs);

struct ForwardCache {
  Eigen::MatrixXd input;                    // 2*d_emb x m
  std::vector<Eigen::MatrixXd> activations;  // post-activation per layer
};

double score(const L2RModel& model, const Eigen::VectorXd& feature);
Eigen::RowVectorXd score_batch(const L2RModel& model, const Eigen::MatrixXd& features,
                               ForwardCache* cache = nullptr);

// d score / d feature for a single input (used by gradient checks).
Eigen::VectorXd score_input_gradient(const L2RModel& model, const Eigen::VectorXd& feature);

// Accumulates d(sum_j dz_j * z_j)/d(params) into grads, including the
// embedding rows referenced by pairs.
void backprop_scores(const L2RModel& model, const std::vector<std::pair<int, int>>& pairs,
                     const ForwardCache& cache, const Eigen::RowVectorXd& dz, GradMap& grads);

// Gains already arranged in model-rank order; sum of 2^g / log2(rank+1).
double dcg_at_k(const std::vector<double>& ranked_gains, int k, bool minus_one = false);

// Indices sorted by score descending, ties by ascending index.
std::vector<int> rank_order(const Eigen::VectorXd& scores);

double ndcg_at_k(const Eigen::VectorXd& model_scores, const Eigen::VectorXd& gains, int k,
                 bool minus_one = false);

// Quantile grades {0..bins-1}: nonpositive gains get 0; positive gains are
// binned by the fraction of strictly smaller positive gains, so equal values
// share a grade.
Eigen::VectorXd quantize_grades(const Eigen::VectorXd& gains, int bins);

// One LambdaRank update on this instance. Returns false (no-op) when no
// strictly ordered pair exists.
bool lambda_step(L2RModel& model, const RankingInstance& instance, const L2RTrainConfig& config,
                 Rng& rng);

// Pairwise logistic surrogate sum log(1 + exp(sigma * (z_k - z_j))) over
// strictly ordered pairs, with analytic parameter gradients; exercised by the
// gradient-check suite (the lambda rule itself is not a gradient of a smooth
// objective).
double pairwise_surrogate(const L2RModel& model, const RankingInstance& instance, double sigma,
                          GradMap* grads);

std::vector<RankingInstance> build_instances(const gain::GainMatrix& G,
                                             const L2RTrainConfig& config);

struct PretrainResult {
  L2RModel model;
  std::vector<double> ndcg_curve;  // mean nDCG@k_prime per epoch, post-update
  std::int64_t skipped_instances = 0;
};

PretrainResult pretrain(const gain::GainMatrix& G, const L2RTrainConfig& config);

// Scores z^(i) for the given tokens under one label.
Eigen::VectorXd rank_tokens(const L2RModel& model, int label_id, const std::vector<int>& token_ids);

void save_l2r(const std::string& path, const L2RModel& model, const std::string& meta_json);
L2RModel load_l2r(const std::string& path, std::string* meta_json = nullptr);

}  // namespace plant::ranker

#endif  // PLANT_RANKER_HPP_
