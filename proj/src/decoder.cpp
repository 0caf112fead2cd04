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
#include "plant/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "plant/tensor_io.hpp"

namespace plant::decoder {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProbClamp = 1e-12;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd softmax_column(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  Eigen::VectorXd e(v.size());
  double sum = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    e[i] = std::isinf(v[i]) && v[i] < 0 ? 0.0 : std::exp(v[i] - m);
    sum += e[i];
  }
  return e / sum;
}

// dL/d(pre-softmax) given the softmax output p and dL/dp.
Eigen::VectorXd softmax_backward_column(const Eigen::VectorXd& p, const Eigen::VectorXd& dp) {
  const double dot = p.dot(dp);
  return p.cwiseProduct(dp.array().matrix() - Eigen::VectorXd::Constant(p.size(), dot));
}

std::vector<int> top_k_positions(const Eigen::VectorXd& column, int k) {
  std::vector<int> idx(static_cast<std::size_t>(column.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (column[a] != column[b]) return column[a] > column[b];
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(std::min<Eigen::Index>(k, column.size())));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<ParamRef> DecoderParams::params() {
  std::vector<ParamRef> out;
  out.push_back({"dec/U", &U, ParamGroup::kDecoderOther, true});
  out.push_back({"dec/W", &W, ParamGroup::kDecoderOther, true});
  out.push_back({"dec/b", &b, ParamGroup::kDecoderOther, false});
  if (phi == Phi::kGated) {
    out.push_back({"dec/gate_w", &gate_w, ParamGroup::kDecoderOther, true});
    out.push_back({"dec/gate_b", &gate_b, ParamGroup::kDecoderOther, false});
  }
  return out;
}

void DecoderParams::validate() const {
  if (inattention_k < 1) throw std::invalid_argument("inattention_k must be >= 1");
  if (!use_learned && !use_static && !use_planted) {
    throw std::invalid_argument("at least one attention source must be enabled");
  }
  if (segment_len < 1) throw std::invalid_argument("segment_len must be >= 1");
}

DecoderParams init_decoder(int num_labels, int s_e, std::uint64_t seed,
                           const ranker::L2RModel* l2r_for_u) {
  DecoderParams p;
  Rng rng = substream(seed, "decoder-init");
  p.U.setZero(num_labels, s_e);
  if (l2r_for_u) {
    const int copy = std::min<int>(s_e, l2r_for_u->d_emb);
    if (l2r_for_u->num_labels() != num_labels) {
      throw std::invalid_argument("decoder/l2r label count mismatch");
    }
    p.U.leftCols(copy) = l2r_for_u->label_emb.leftCols(copy);
  } else {
    for (Eigen::Index r = 0; r < p.U.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.U.cols(); ++c) p.U(r, c) = rng.uniform(-0.1, 0.1);
    }
  }
  p.W = Eigen::MatrixXd::Ones(num_labels, s_e);
  p.b = Eigen::MatrixXd::Zero(num_labels, 1);
  p.gate_w.resize(s_e, 2 * s_e);
  const double bound = 1.0 / std::sqrt(static_cast<double>(2 * s_e));
  for (Eigen::Index r = 0; r < p.gate_w.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.gate_w.cols(); ++c) p.gate_w(r, c) = rng.uniform(-bound, bound);
  }
  p.gate_b = Eigen::MatrixXd::Zero(s_e, 1);
  return p;
}

Eigen::MatrixXd learned_attention(const Eigen::MatrixXd& H, const Eigen::MatrixXd& U) {
  if (H.rows() == 0) throw std::invalid_argument("learned_attention: empty H");
  if (H.cols() != U.cols()) throw std::invalid_argument("learned_attention: width mismatch");
  Eigen::MatrixXd A = H * U.transpose();  // n x L logits
  for (Eigen::Index c = 0; c < A.cols(); ++c) A.col(c) = softmax_column(A.col(c));
  return A;
}

Eigen::MatrixXd static_attention(const std::vector<int>& tokens, const gain::GainMatrix& G,
                                 bool normalize) {
  Eigen::MatrixXd S(static_cast<Eigen::Index>(tokens.size()), G.num_labels());
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const int t = tokens[j];
    if (t >= 0 && t < G.num_tokens()) {
      S.row(static_cast<Eigen::Index>(j)) = G.g.row(t);
    } else {
      S.row(static_cast<Eigen::Index>(j)).setZero();
    }
  }
  if (normalize) {
    for (Eigen::Index c = 0; c < S.cols(); ++c) {
      const double sum = S.col(c).sum();
      if (sum > 0) S.col(c) /= sum;
    }
  }
  return S;
}

Eigen::VectorXd inattention(const Eigen::VectorXd& column, int k, InattentionMode mode) {
  if (k < 1) throw std::invalid_argument("inattention: k must be >= 1");
  const auto kept = top_k_positions(column, k);
  Eigen::VectorXd out = Eigen::VectorXd::Constant(
      column.size(), mode == InattentionMode::kNegInfMask ? kNegInf : 0.0);
  for (int j : kept) out[j] = column[j];
  return out;
}

Eigen::MatrixXd planted_raw(const std::vector<int>& tokens, const ranker::L2RModel& l2r) {
  // Scores depend on the token id only; batch one forward per unique token.
  std::map<int, int> uniq_index;
  std::vector<int> uniq;
  for (int t : tokens) {
    if (uniq_index.emplace(t, static_cast<int>(uniq.size())).second) uniq.push_back(t);
  }
  const int L = l2r.num_labels();
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(uniq.size() * static_cast<std::size_t>(L));
  for (int t : uniq) {
    for (int i = 0; i < L; ++i) pairs.emplace_back(i, t);
  }
  const Eigen::RowVectorXd z = ranker::score_batch(l2r, ranker::build_features(l2r, pairs));
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(tokens.size()), L);
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    const int u = uniq_index.at(tokens[j]);
    raw.row(static_cast<Eigen::Index>(j)) = z.segment(u * L, L);
  }
  return raw;
}

Eigen::MatrixXd planted_attention(const std::vector<int>& tokens, const ranker::L2RModel& l2r,
                                  const DecoderParams& params) {
  Eigen::MatrixXd P = planted_raw(tokens, l2r);
  for (Eigen::Index c = 0; c < P.cols(); ++c) {
    Eigen::VectorXd col = P.col(c);
    if (params.use_inattention) {
      col = inattention(col, params.inattention_k, params.inattention_mode);
    }
    P.col(c) = softmax_column(col);
  }
  return P;
}

Eigen::MatrixXd combine(const Eigen::MatrixXd& A, const Eigen::MatrixXd& S,
                        const Eigen::MatrixXd& P, const Eigen::MatrixXd& H,
                        const Eigen::MatrixXd& W) {
  const Eigen::Index n = H.rows();
  const Eigen::Index L = W.rows();
  auto check = [&](const Eigen::MatrixXd& M, const char* name) {
    if (M.size() != 0 && (M.rows() != n || M.cols() != L)) {
      throw std::invalid_argument(std::string("combine: bad shape for ") + name);
    }
  };
  check(A, "A");
  check(S, "S");
  check(P, "P");
  if (H.cols() != W.cols()) throw std::invalid_argument("combine: H/W width mismatch");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, L);
  if (A.size()) T += A;
  if (S.size()) T += S;
  if (P.size()) T += P;
  return (T.transpose() * H).cwiseProduct(W);
}

Eigen::VectorXd predict(const Eigen::MatrixXd& V, const Eigen::MatrixXd& b) {
  if (V.rows() != b.rows()) throw std::invalid_argument("predict: V/b shape mismatch");
  Eigen::VectorXd y(V.rows());
  for (Eigen::Index i = 0; i < V.rows(); ++i) y[i] = sigmoid(V.row(i).sum() + b(i, 0));
  return y;
}

double bce_loss(const Eigen::VectorXd& y_hat, const Eigen::VectorXd& y) {
  if (y_hat.size() != y.size()) throw std::invalid_argument("bce_loss: size mismatch");
  double loss = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(y_hat[i], kProbClamp, 1.0 - kProbClamp);
    loss -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return loss;
}

namespace {

// Shared attention construction for one segment.
void fill_segment(Forward::Segment& seg, const DecoderParams& params, const Models& models) {
  const auto n = static_cast<Eigen::Index>(seg.tokens.size());
  const int L = params.num_labels();
  seg.A = params.use_learned ? learned_attention(seg.Hs, params.U)
                             : Eigen::MatrixXd::Zero(n, L);
  if (params.use_static) {
    if (!models.G) throw std::invalid_argument("static attention requested without a gain matrix");
    seg.S = static_attention(seg.tokens, *models.G, params.static_normalize);
  } else {
    seg.S = Eigen::MatrixXd::Zero(n, L);
  }
  if (params.use_planted) {
    if (!models.l2r) throw std::invalid_argument("planted attention requested without an L2R model");
    Eigen::MatrixXd raw = planted_raw(seg.tokens, *models.l2r);
    seg.P.resize(n, L);
    seg.kept.assign(static_cast<std::size_t>(L), {});
    for (int c = 0; c < L; ++c) {
      Eigen::VectorXd col = raw.col(c);
      if (params.use_inattention) {
        seg.kept[static_cast<std::size_t>(c)] = top_k_positions(col, params.inattention_k);
        Eigen::VectorXd masked = Eigen::VectorXd::Constant(
            n, params.inattention_mode == InattentionMode::kNegInfMask ? kNegInf : 0.0);
        for (int j : seg.kept[static_cast<std::size_t>(c)]) masked[j] = col[j];
        col = masked;
      }
      seg.P.col(c) = softmax_column(col);
    }
  } else {
    seg.P = Eigen::MatrixXd::Zero(n, L);
    seg.kept.clear();
  }
  const Eigen::MatrixXd T = seg.A + seg.S + seg.P;
  seg.M = T.transpose() * seg.Hs;
  seg.V = seg.M.cwiseProduct(params.W);
}

}  // namespace

Forward decode_segments(const std::vector<SegmentInput>& segments, const DecoderParams& params,
                        const Models& models) {
  params.validate();
  if (segments.empty()) throw std::invalid_argument("decode: needs at least one segment");
  Forward fwd;
  const int L = params.num_labels();
  const int s_e = params.s_e();

  Eigen::MatrixXd D;
  if (params.phi == Phi::kElementwiseMax) {
    D = Eigen::MatrixXd::Constant(L, s_e, kNegInf);
    fwd.winner.setConstant(L, s_e, -1);
  } else {
    D = Eigen::MatrixXd::Zero(L, s_e);
  }

  int begin = 0;
  for (std::size_t t = 0; t < segments.size(); ++t) {
    Forward::Segment seg;
    seg.begin = begin;
    seg.tokens = segments[t].tokens;
    seg.Hs = segments[t].H;
    if (seg.Hs.rows() != static_cast<Eigen::Index>(seg.tokens.size()) || seg.Hs.cols() != s_e) {
      throw std::invalid_argument("decode: segment H shape mismatch");
    }
    if (seg.tokens.empty()) throw std::invalid_argument("decode: empty segment");
    begin += static_cast<int>(seg.tokens.size());
    fill_segment(seg, params, models);

    if (params.phi == Phi::kElementwiseMax) {
      for (Eigen::Index i = 0; i < D.rows(); ++i) {
        for (Eigen::Index d = 0; d < D.cols(); ++d) {
          if (seg.V(i, d) > D(i, d)) {
            D(i, d) = seg.V(i, d);
            fwd.winner(i, d) = static_cast<int>(t);
          }
        }
      }
    } else {
      seg.D_prev = D;
      Eigen::MatrixXd concat(L, 2 * s_e);
      concat << D, seg.V;
      Eigen::MatrixXd pre = concat * params.gate_w.transpose();
      pre.rowwise() += params.gate_b.col(0).transpose();
      seg.Z = pre.unaryExpr([](double v) { return sigmoid(v); });
      D = seg.Z.cwiseProduct(D) + (Eigen::MatrixXd::Ones(L, s_e) - seg.Z).cwiseProduct(seg.V);
    }
    fwd.segments.push_back(std::move(seg));
  }
  fwd.D = D;
  fwd.logits = D.rowwise().sum() + params.b.col(0);
  fwd.y_hat.resize(L);
  for (int i = 0; i < L; ++i) fwd.y_hat[i] = sigmoid(fwd.logits[i]);
  return fwd;
}

Eigen::VectorXd decode_stateful(const std::vector<SegmentInput>& segments,
                                const DecoderParams& params, const Models& models) {
  return decode_segments(segments, params, models).y_hat;
}

Forward forward_document(const Models& models, const DecoderParams& params,
                         const std::vector<int>& tokens) {
  if (!models.enc) throw std::invalid_argument("forward_document: encoder required");
  Eigen::MatrixXd H = encoder::encode(*models.enc, tokens);
  std::vector<SegmentInput> segments;
  const auto n = static_cast<int>(tokens.size());
  const int step = params.stateful ? params.segment_len : n;
  for (int lo = 0; lo < n; lo += step) {
    const int len = std::min(step, n - lo);
    SegmentInput s;
    s.H = H.middleRows(lo, len);
    s.tokens.assign(tokens.begin() + lo, tokens.begin() + lo + len);
    segments.push_back(std::move(s));
  }
  Forward fwd = decode_segments(segments, params, models);
  fwd.H = std::move(H);
  return fwd;
}

double backward_document(const Models& models, const DecoderParams& params,
                         const std::vector<int>& tokens, const Eigen::VectorXd& y,
                         const Forward& fwd, GradMap& grads, bool train_l2r, bool train_encoder) {
  const int L = params.num_labels();
  const int s_e = params.s_e();
  const double loss = bce_loss(fwd.y_hat, y);

  const Eigen::VectorXd dlogits = fwd.y_hat - y;
  grads.accum("dec/b", L, 1) += dlogits;
  Eigen::MatrixXd dD = dlogits.replicate(1, s_e);  // d loss / d D, L x s_e

  // Per-segment dV, unfolded through phi.
  std::vector<Eigen::MatrixXd> dV(fwd.segments.size());
  if (params.phi == Phi::kElementwiseMax) {
    for (std::size_t t = 0; t < fwd.segments.size(); ++t) {
      dV[t] = Eigen::MatrixXd::Zero(L, s_e);
    }
    for (Eigen::Index i = 0; i < dD.rows(); ++i) {
      for (Eigen::Index d = 0; d < dD.cols(); ++d) {
        const int t = fwd.winner(i, d);
        if (t >= 0) dV[static_cast<std::size_t>(t)](i, d) = dD(i, d);
      }
    }
  } else {
    Eigen::MatrixXd dDt = dD;
    for (std::size_t t = fwd.segments.size(); t-- > 0;) {
      const auto& seg = fwd.segments[t];
      const Eigen::MatrixXd one_minus_z = Eigen::MatrixXd::Ones(L, s_e) - seg.Z;
      const Eigen::MatrixXd dZ = dDt.cwiseProduct(seg.D_prev - seg.V);
      dV[t] = dDt.cwiseProduct(one_minus_z);
      Eigen::MatrixXd dPrev = dDt.cwiseProduct(seg.Z);
      const Eigen::MatrixXd dPre = dZ.cwiseProduct(seg.Z).cwiseProduct(one_minus_z);
      Eigen::MatrixXd concat(L, 2 * s_e);
      concat << seg.D_prev, seg.V;
      grads.accum("dec/gate_w", s_e, 2 * s_e) += dPre.transpose() * concat;
      grads.accum("dec/gate_b", s_e, 1) += dPre.colwise().sum().transpose();
      const Eigen::MatrixXd dConcat = dPre * params.gate_w;  // L x 2*s_e
      dPrev += dConcat.leftCols(s_e);
      dV[t] += dConcat.rightCols(s_e);
      dDt = std::move(dPrev);
    }
  }

  Eigen::MatrixXd dH;
  const bool need_dh = train_encoder;
  if (need_dh && fwd.H.size()) dH = Eigen::MatrixXd::Zero(fwd.H.rows(), fwd.H.cols());

  for (std::size_t t = 0; t < fwd.segments.size(); ++t) {
    const auto& seg = fwd.segments[t];
    const auto n = static_cast<Eigen::Index>(seg.tokens.size());
    grads.accum("dec/W", L, s_e) += dV[t].cwiseProduct(seg.M);
    const Eigen::MatrixXd dM = dV[t].cwiseProduct(params.W);
    const Eigen::MatrixXd T = seg.A + seg.S + seg.P;
    const Eigen::MatrixXd dT = seg.Hs * dM.transpose();  // n x L
    Eigen::MatrixXd dHs = T * dM;                        // n x s_e

    if (params.use_learned) {
      Eigen::MatrixXd dZa(n, L);
      for (int c = 0; c < L; ++c) {
        dZa.col(c) = softmax_backward_column(seg.A.col(c), dT.col(c));
      }
      grads.accum("dec/U", L, s_e) += dZa.transpose() * seg.Hs;
      dHs += dZa * params.U;
    }

    if (params.use_planted && train_l2r) {
      Eigen::MatrixXd dPraw(n, L);
      for (int c = 0; c < L; ++c) {
        Eigen::VectorXd dcol = softmax_backward_column(seg.P.col(c), dT.col(c));
        if (params.use_inattention) {
          Eigen::VectorXd masked = Eigen::VectorXd::Zero(n);
          for (int j : seg.kept[static_cast<std::size_t>(c)]) masked[j] = dcol[j];
          dcol = masked;
        }
        dPraw.col(c) = dcol;
      }
      // Aggregate by unique token, then one batched backprop through f.
      std::map<int, int> uniq_index;
      std::vector<int> uniq;
      for (int tok : seg.tokens) {
        if (uniq_index.emplace(tok, static_cast<int>(uniq.size())).second) uniq.push_back(tok);
      }
      std::vector<std::pair<int, int>> pairs;
      pairs.reserve(uniq.size() * static_cast<std::size_t>(L));
      for (int tok : uniq) {
        for (int i = 0; i < L; ++i) pairs.emplace_back(i, tok);
      }
      Eigen::RowVectorXd dz = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(pairs.size()));
      for (Eigen::Index j = 0; j < n; ++j) {
        const int u = uniq_index.at(seg.tokens[static_cast<std::size_t>(j)]);
        for (int i = 0; i < L; ++i) dz[u * L + i] += dPraw(j, i);
      }
      ranker::ForwardCache cache;
      ranker::score_batch(*models.l2r, ranker::build_features(*models.l2r, pairs), &cache);
      ranker::backprop_scores(*models.l2r, pairs, cache, dz, grads);
    }

    if (need_dh && fwd.H.size()) {
      dH.middleRows(seg.begin, n) += dHs;
    }
  }

  if (train_encoder) {
    if (!models.enc || fwd.H.size() == 0) {
      throw std::invalid_argument("backward_document: encoder gradients need forward_document");
    }
    encoder::encode_backward(*models.enc, tokens, fwd.H, dH, grads);
  }
  return loss;
}

void save_decoder(const std::string& path, const DecoderParams& p) {
  TensorFile tf;
  nlohmann::json meta;
  meta["schema"] = "decoder";
  meta["inattention_k"] = p.inattention_k;
  meta["use_learned"] = p.use_learned;
  meta["use_static"] = p.use_static;
  meta["use_planted"] = p.use_planted;
  meta["use_inattention"] = p.use_inattention;
  meta["static_normalize"] = p.static_normalize;
  meta["inattention_mode"] =
      p.inattention_mode == InattentionMode::kNegInfMask ? "neg_inf_mask" : "literal_zero";
  meta["phi"] = p.phi == Phi::kElementwiseMax ? "elementwise_max" : "gated";
  meta["segment_len"] = p.segment_len;
  meta["stateful"] = p.stateful;
  tf.meta_json = meta.dump();
  tf.tensors["U"] = p.U;
  tf.tensors["W"] = p.W;
  tf.tensors["b"] = p.b;
  tf.tensors["gate_w"] = p.gate_w;
  tf.tensors["gate_b"] = p.gate_b;
  save_tensor_file(path, tf);
}

DecoderParams load_decoder(const std::string& path) {
  TensorFile tf = load_tensor_file(path);
  nlohmann::json meta = nlohmann::json::parse(tf.meta_json);
  if (meta.value("schema", "") != "decoder") throw IoError("not a decoder checkpoint: " + path);
  DecoderParams p;
  p.U = tf.at("U");
  p.W = tf.at("W");
  p.b = tf.at("b");
  p.gate_w = tf.at("gate_w");
  p.gate_b = tf.at("gate_b");
  p.inattention_k = meta.at("inattention_k").get<int>();
  p.use_learned = meta.at("use_learned").get<bool>();
  p.use_static = meta.at("use_static").get<bool>();
  p.use_planted = meta.at("use_planted").get<bool>();
  p.use_inattention = meta.at("use_inattention").get<bool>();
  p.static_normalize = meta.at("static_normalize").get<bool>();
  p.inattention_mode = meta.at("inattention_mode").get<std::string>() == "literal_zero"
                           ? InattentionMode::kLiteralZero
                           : InattentionMode::kNegInfMask;
  p.phi = meta.at("phi").get<std::string>() == "gated" ? Phi::kGated : Phi::kElementwiseMax;
  p.segment_len = meta.at("segment_len").get<int>();
  p.stateful = meta.at("stateful").get<bool>();
  return p;
}

}  // namespace plant::decoder
