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
#include "plant/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "plant/rng.hpp"
#include "plant/tensor_io.hpp"

namespace plant::encoder {

namespace {

// Positions in processing order: identity for forward, reversed for backward.
std::vector<int> processing_order(const EncoderModel& model, std::size_t n) {
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = model.direction == Direction::kForward ? static_cast<int>(i)
                                                      : static_cast<int>(n - 1 - i);
  }
  return order;
}

}  // namespace

std::vector<ParamRef> EncoderModel::params() {
  std::vector<ParamRef> out;
  out.push_back({"enc/emb", &emb, ParamGroup::kEncoder, true});
  if (arch == Arch::kRecurrent) {
    out.push_back({"enc/w_in", &w_in, ParamGroup::kEncoder, true});
    out.push_back({"enc/w_rec", &w_rec, ParamGroup::kEncoder, true});
    out.push_back({"enc/bias", &bias, ParamGroup::kEncoder, false});
  }
  return out;
}

EncoderModel init_encoder(int num_tokens, int s_e, Arch arch, Direction direction,
                          std::uint64_t seed, int window) {
  EncoderModel m;
  m.arch = arch;
  m.direction = direction;
  m.s_e = s_e;
  m.window = window;
  Rng rng = substream(seed, "encoder-init");
  auto fill_uniform = [&](Eigen::MatrixXd& t, double bound) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = rng.uniform(-bound, bound);
    }
  };
  m.emb.resize(num_tokens, s_e);
  fill_uniform(m.emb, 0.1);
  if (arch == Arch::kRecurrent) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(s_e));
    m.w_in.resize(s_e, s_e);
    m.w_rec.resize(s_e, s_e);
    fill_uniform(m.w_in, bound);
    fill_uniform(m.w_rec, bound);
    // Scale the recurrence down so early hidden states are token-dominated.
    m.w_rec *= 0.5;
    m.bias = Eigen::MatrixXd::Zero(s_e, 1);
  } else {
    m.w_in.resize(0, 0);
    m.w_rec.resize(0, 0);
    m.bias.resize(0, 0);
  }
  return m;
}

Eigen::MatrixXd encode(const EncoderModel& model, const std::vector<int>& tokens) {
  if (tokens.empty()) throw std::invalid_argument("encode: empty document");
  const auto n = static_cast<Eigen::Index>(tokens.size());
  Eigen::MatrixXd H(n, model.s_e);
  const auto order = processing_order(model, tokens.size());

  if (model.arch == Arch::kMeanWindow) {
    Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(model.s_e);
    for (std::size_t step = 0; step < tokens.size(); ++step) {
      const int pos = order[step];
      if (model.window > 0) {
        const std::size_t w = static_cast<std::size_t>(model.window);
        const std::size_t lo = step + 1 > w ? step + 1 - w : 0;
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(model.s_e);
        for (std::size_t s = lo; s <= step; ++s) {
          sum += model.emb.row(tokens[static_cast<std::size_t>(order[s])]);
        }
        H.row(pos) = sum / static_cast<double>(step - lo + 1);
      } else {
        running += model.emb.row(tokens[static_cast<std::size_t>(pos)]);
        H.row(pos) = running / static_cast<double>(step + 1);
      }
    }
    return H;
  }

  Eigen::VectorXd h = Eigen::VectorXd::Zero(model.s_e);
  for (std::size_t step = 0; step < tokens.size(); ++step) {
    const int pos = order[step];
    const Eigen::VectorXd pre = model.w_in * model.emb.row(tokens[static_cast<std::size_t>(pos)]).transpose() +
                                model.w_rec * h + model.bias.col(0);
    h = pre.array().tanh();
    H.row(pos) = h.transpose();
  }
  return H;
}

void encode_backward(const EncoderModel& model, const std::vector<int>& tokens,
                     const Eigen::MatrixXd& H, const Eigen::MatrixXd& dH, GradMap& grads) {
  if (dH.rows() != static_cast<Eigen::Index>(tokens.size()) || dH.cols() != model.s_e) {
    throw std::invalid_argument("encode_backward: dH shape mismatch");
  }
  const auto order = processing_order(model, tokens.size());
  auto& g_emb = grads.accum("enc/emb", model.emb.rows(), model.emb.cols());

  if (model.arch == Arch::kMeanWindow) {
    for (std::size_t step = 0; step < tokens.size(); ++step) {
      const int pos = order[step];
      const std::size_t lo =
          model.window > 0 && step + 1 > static_cast<std::size_t>(model.window)
              ? step + 1 - static_cast<std::size_t>(model.window)
              : 0;
      const double inv = 1.0 / static_cast<double>(step - lo + 1);
      for (std::size_t s = lo; s <= step; ++s) {
        g_emb.row(tokens[static_cast<std::size_t>(order[s])]) += inv * dH.row(pos);
      }
    }
    return;
  }

  auto& g_w_in = grads.accum("enc/w_in", model.s_e, model.s_e);
  auto& g_w_rec = grads.accum("enc/w_rec", model.s_e, model.s_e);
  auto& g_bias = grads.accum("enc/bias", model.s_e, 1);

  Eigen::VectorXd carry = Eigen::VectorXd::Zero(model.s_e);  // dL/dh_{step} from later steps
  for (std::size_t step = tokens.size(); step-- > 0;) {
    const int pos = order[step];
    const Eigen::VectorXd h_here = H.row(pos).transpose();
    const Eigen::VectorXd dh = dH.row(pos).transpose() + carry;
    const Eigen::VectorXd dpre = dh.cwiseProduct((1.0 - h_here.array().square()).matrix());
    const Eigen::VectorXd h_prev =
        step == 0 ? Eigen::VectorXd::Zero(model.s_e)
                  : Eigen::VectorXd(H.row(order[step - 1]).transpose());
    const int tok = tokens[static_cast<std::size_t>(pos)];
    g_w_in += dpre * model.emb.row(tok);
    g_w_rec += dpre * h_prev.transpose();
    g_bias += dpre;
    g_emb.row(tok) += (model.w_in.transpose() * dpre).transpose();
    carry = model.w_rec.transpose() * dpre;
  }
}

void save_encoder(const std::string& path, const EncoderModel& model) {
  TensorFile tf;
  nlohmann::json meta;
  meta["schema"] = "encoder";
  meta["arch"] = model.arch == Arch::kMeanWindow ? "mean_window" : "recurrent";
  meta["direction"] = model.direction == Direction::kForward ? "forward" : "backward";
  meta["s_e"] = model.s_e;
  meta["window"] = model.window;
  meta["num_tokens"] = model.num_tokens();
  tf.meta_json = meta.dump();
  tf.tensors["emb"] = model.emb;
  if (model.arch == Arch::kRecurrent) {
    tf.tensors["w_in"] = model.w_in;
    tf.tensors["w_rec"] = model.w_rec;
    tf.tensors["bias"] = model.bias;
  }
  save_tensor_file(path, tf);
}

EncoderModel load_encoder(const std::string& path) {
  TensorFile tf = load_tensor_file(path);
  nlohmann::json meta = nlohmann::json::parse(tf.meta_json);
  if (meta.value("schema", "") != "encoder") throw IoError("not an encoder checkpoint: " + path);
  EncoderModel m;
  m.arch = meta.at("arch").get<std::string>() == "mean_window" ? Arch::kMeanWindow : Arch::kRecurrent;
  m.direction = meta.at("direction").get<std::string>() == "backward" ? Direction::kBackward
                                                                      : Direction::kForward;
  m.s_e = meta.at("s_e").get<int>();
  m.window = meta.at("window").get<int>();
  m.emb = tf.at("emb");
  if (m.arch == Arch::kRecurrent) {
    m.w_in = tf.at("w_in");
    m.w_rec = tf.at("w_rec");
    m.bias = tf.at("bias");
  }
  return m;
}

}  // namespace plant::encoder
