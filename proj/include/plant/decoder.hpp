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
#ifndef PLANT_DECODER_HPP_
#define PLANT_DECODER_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "plant/encoder.hpp"
#include "plant/gain.hpp"
#include "plant/params.hpp"
#include "plant/ranker.hpp"

namespace plant::decoder {

enum class InattentionMode { kNegInfMask, kLiteralZero };
enum class Phi { kElementwiseMax, kGated };

struct DecoderParams {
  Eigen::MatrixXd U;       // L x s_e, learned attention queries
  Eigen::MatrixXd W;       // L x s_e, multiplicative boost
  Eigen::MatrixXd b;       // L x 1, label bias
  Eigen::MatrixXd gate_w;  // s_e x 2*s_e, gated state combiner
  Eigen::MatrixXd gate_b;  // s_e x 1
  int inattention_k = 8;
  bool use_learned = true;
  bool use_static = true;
  bool use_planted = true;
  bool use_inattention = true;
  bool static_normalize = false;
  InattentionMode inattention_mode = InattentionMode::kNegInfMask;
  Phi phi = Phi::kElementwiseMax;
  int segment_len = 72;
  bool stateful = false;

  int num_labels() const { return static_cast<int>(U.rows()); }
  int s_e() const { return static_cast<int>(U.cols()); }
  std::vector<ParamRef> params();
  void validate() const;
};

// U comes from the L2R label embeddings when provided (zero-padded /
// truncated to s_e); otherwise uniform random. W starts at all-ones so the
// initial combine is the plain attention sum.
DecoderParams init_decoder(int num_labels, int s_e, std::uint64_t seed,
                           const ranker::L2RModel* l2r_for_u = nullptr);

// Column-stochastic learned attention softmax(H U^T), softmax over positions.
Eigen::MatrixXd learned_attention(const Eigen::MatrixXd& H, const Eigen::MatrixXd& U);

// Per-position gain lookup; optional per-column sum normalization.
Eigen::MatrixXd static_attention(const std::vector<int>& tokens, const gain::GainMatrix& G,
                                 bool normalize);

// Top-k thresholding of one pre-softmax column. Ties by ascending index.
Eigen::VectorXd inattention(const Eigen::VectorXd& column, int k, InattentionMode mode);

// Raw L2R scores per (position, label); differentiable into the L2R model.
Eigen::MatrixXd planted_raw(const std::vector<int>& tokens, const ranker::L2RModel& l2r);

// Full differentiable-planted attention: raw scores, inattention (when
// enabled), column softmax.
Eigen::MatrixXd planted_attention(const std::vector<int>& tokens, const ranker::L2RModel& l2r,
                                  const DecoderParams& params);

// V = (A^T H + S^T H + P^T H) elementwise* W; disabled sources pass zeros.
Eigen::MatrixXd combine(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S,
                        const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                        const Eigen::MatrixXd& W);

// y_hat_i = sigmoid(sum_d V(i,d) + b_i).
Eigen::VectorXd predict(const Eigen::MatrixXd& V, const Eigen::MatrixXd& b);

// Summed binary cross entropy with probabilities clamped at 1e-12.
double bce_loss(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y);

// One decoded segment: hidden block plus the token ids it covers (the planted
// and static attentions are token lookups, so H alone does not determine them).
struct SegmentInput {
  Eigen::MatrixXd H;       // len x s_e
  std::vector<int> tokens;  // len
};

struct Models {
  const encoder::EncoderModel* enc = nullptr;
  const ranker::L2RModel* l2r = nullptr;  // required when use_planted
  const gain::GainMatrix* G = nullptr;    // required when use_static
};

// Forward cache for one document; everything backward needs.
struct Forward {
  Eigen::MatrixXd H;  // whole document (empty when built from explicit segments)
  struct Segment {
    int begin = 0;
    std::vector<int> tokens;
    Eigen::MatrixXd Hs;    // len x s_e
    Eigen::MatrixXd A, S, P;  // len x L
    std::vector<std::vector<int>> kept;  // per label: surviving positions (inattention)
    Eigen::MatrixXd M;  // L x s_e, pre-boost
    Eigen::MatrixXd V;  // L x s_e
    Eigen::MatrixXd D_prev, Z;  // gated phi caches
  };
  std::vector<Segment> segments;
  Eigen::MatrixXd D;  // final state, L x s_e
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> winner;  // max phi provenance
  Eigen::VectorXd logits, y_hat;
};

// Stateful decode over explicit segments (state folded by params.phi).
Forward decode_segments(const std::vector<SegmentInput>& segments, const DecoderParams& params,
                        const Models& models);
Eigen::VectorXd decode_stateful(const std::vector<SegmentInput>& segments,
                                const DecoderParams& params, const Models& models);

// Encode + segment (params.stateful ? segment_len slices : one block) + decode.
Forward forward_document(const Models& models, const DecoderParams& params,
                         const std::vector<int>& tokens);

// Reverse-mode gradients of bce_loss(y_hat, y) into U, W, b, gate, the L2R
// parameters (when train_l2r) and the encoder (when train_encoder). The static
// path carries no gradient; inattention masks are constants of the forward
// pass. Returns the loss.
double backward_document(const Models& models, const DecoderParams& params,
                         const std::vector<int>& tokens, const Eigen::VectorXd& y,
                         const Forward& fwd, GradMap& grads, bool train_l2r, bool train_encoder);

void save_decoder(const std::string& path, const DecoderParams& params);
DecoderParams load_decoder(const std::string& path);

}  // namespace plant::decoder

#endif  // PLANT_DECODER_HPP_
