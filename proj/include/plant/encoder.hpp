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
#ifndef PLANT_ENCODER_HPP_
#define PLANT_ENCODER_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "plant/params.hpp"

namespace plant::encoder {

enum class Arch { kMeanWindow, kRecurrent };
enum class Direction { kForward, kBackward };

// Per-position hidden features for a token sequence. Row j is a causal
// function of tokens 1..j (forward) or n..j (backward). Stands in for a
// heavier sequence encoder behind the same interface.
struct EncoderModel {
  Arch arch = Arch::kRecurrent;
  Direction direction = Direction::kForward;
  int s_e = 64;
  int window = 0;  // mean_window trailing width; 0 = unbounded running mean
  Eigen::MatrixXd emb;    // |T| x s_e
  Eigen::MatrixXd w_in;   // s_e x s_e (recurrent only)
  Eigen::MatrixXd w_rec;  // s_e x s_e
  Eigen::MatrixXd bias;   // s_e x 1

  int num_tokens() const { return static_cast<int>(emb.rows()); }
  std::vector<ParamRef> params();
};

EncoderModel init_encoder(int num_tokens, int s_e, Arch arch, Direction direction,
                          std::uint64_t seed, int window = 0);

// H: n_seq x s_e. Throws on an empty document.
Eigen::MatrixXd encode(const EncoderModel& model, const std::vector<int>& tokens);

// Exact parameter/embedding gradients for dL/dH; BPTT for the recurrent arch,
// uniform redistribution for the window mean.
void encode_backward(const EncoderModel& model, const std::vector<int>& tokens,
                     const Eigen::MatrixXd& H, const Eigen::MatrixXd& dH, GradMap& grads);

void save_encoder(const std::string& path, const EncoderModel& model);
EncoderModel load_encoder(const std::string& path);

}  // namespace plant::encoder

#endif  // PLANT_ENCODER_HPP_
