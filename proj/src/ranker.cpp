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
#include "plant/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "plant/tensor_io.hpp"

namespace plant::ranker {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_label(const L2RModel& m, int label_id) {
  if (label_id < 0 || label_id >= m.num_labels()) {
    throw std::invalid_argument("invalid label id " + std::to_string(label_id));
  }
}

void check_token(const L2RModel& m, int token_id) {
  if (token_id < 0 || token_id >= m.num_tokens()) {
    throw std::invalid_argument("invalid token id " + std::to_string(token_id));
  }
}

double gain_numerator(double g, bool minus_one) {
  return minus_one ? std::exp2(g) - 1.0 : std::exp2(g);
}

}  // namespace

std::vector<ParamRef> L2RModel::params() {
  std::vector<ParamRef> out;
  out.push_back({"l2r/label_emb", &label_emb, ParamGroup::kL2R, true});
  out.push_back({"l2r/token_emb", &token_emb, ParamGroup::kL2R, true});
  for (std::size_t i = 0; i < layers.size(); ++i) {
    out.push_back({"l2r/w" + std::to_string(i + 1), &layers[i].w, ParamGroup::kL2R, true});
    out.push_back({"l2r/b" + std::to_string(i + 1), &layers[i].b, ParamGroup::kL2R, false});
  }
  return out;
}

L2RModel init_l2r(int num_labels, int num_tokens, int d_emb, int hidden, int num_layers,
                  std::uint64_t seed) {
  if (num_layers < 1) throw std::invalid_argument("l2r needs at least one layer");
  L2RModel m;
  m.d_emb = d_emb;
  Rng rng = substream(seed, "l2r-init");
  auto fill_uniform = [&](Eigen::MatrixXd& t, double lo, double hi) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = rng.uniform(lo, hi);
    }
  };
  m.label_emb.resize(num_labels, d_emb);
  m.token_emb.resize(num_tokens, d_emb);
  fill_uniform(m.label_emb, -0.05, 0.05);
  fill_uniform(m.token_emb, -0.05, 0.05);
  int in = 2 * d_emb;
  for (int l = 0; l < num_layers; ++l) {
    const int out_width = (l == num_layers - 1) ? 1 : hidden;
    L2RModel::Layer layer;
    layer.w.resize(out_width, in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    fill_uniform(layer.w, -bound, bound);
    layer.b = Eigen::MatrixXd::Zero(out_width, 1);
    m.layers.push_back(std::move(layer));
    in = out_width;
  }
  return m;
}

Eigen::VectorXd build_feature(const L2RModel& model, int label_id, int token_id) {
  check_label(model, label_id);
  check_token(model, token_id);
  Eigen::VectorXd x(2 * model.d_emb);
  x.head(model.d_emb) = model.label_emb.row(label_id).transpose();
  x.tail(model.d_emb) = model.token_emb.row(token_id).transpose();
  return x;
}

Eigen::MatrixXd build_features(const L2RModel& model,
                               const std::vector<std::pair<int, int>>& pairs) {
  Eigen::MatrixXd X(2 * model.d_emb, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    check_label(model, pairs[i].first);
    check_token(model, pairs[i].second);
    X.col(static_cast<Eigen::Index>(i)).head(model.d_emb) =
        model.label_emb.row(pairs[i].first).transpose();
    X.col(static_cast<Eigen::Index>(i)).tail(model.d_emb) =
        model.token_emb.row(pairs[i].second).transpose();
  }
  return X;
}

Eigen::RowVectorXd score_batch(const L2RModel& model, const Eigen::MatrixXd& features,
                               ForwardCache* cache) {
  if (features.rows() != 2 * model.d_emb) {
    throw std::invalid_argument("feature width does not match 2*d_emb");
  }
  if (cache) {
    cache->input = features;
    cache->activations.clear();
  }
  Eigen::MatrixXd a = features;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = layer.w * a;
    z.colwise() += Eigen::VectorXd(layer.b.col(0));
    if (l + 1 < model.layers.size()) z = z.cwiseMax(0.0);  // ReLU on hidden layers
    if (cache) cache->activations.push_back(z);
    a = std::move(z);
  }
  return a.row(0);
}

double score(const L2RModel& model, const Eigen::VectorXd& feature) {
  return score_batch(model, feature)(0);
}

Eigen::VectorXd score_input_gradient(const L2RModel& model, const Eigen::VectorXd& feature) {
  ForwardCache cache;
  score_batch(model, feature, &cache);
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(1, 1);
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    d = model.layers[l].w.transpose() * d;  // d now w.r.t. layer l input
    if (l > 0) {
      const auto& act = cache.activations[l - 1];
      d = d.cwiseProduct((act.array() > 0.0).cast<double>().matrix());
    }
  }
  return d.col(0);
}

void backprop_scores(const L2RModel& model, const std::vector<std::pair<int, int>>& pairs,
                     const ForwardCache& cache, const Eigen::RowVectorXd& dz, GradMap& grads) {
  const auto m = static_cast<Eigen::Index>(pairs.size());
  if (dz.size() != m || cache.input.cols() != m) {
    throw std::invalid_argument("backprop_scores: batch size mismatch");
  }
  Eigen::MatrixXd delta = dz;  // 1 x m, gradient at the network output
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const Eigen::MatrixXd& input_act = (l == 0) ? cache.input : cache.activations[l - 1];
    auto& gw = grads.accum("l2r/w" + std::to_string(l + 1), model.layers[l].w.rows(),
                           model.layers[l].w.cols());
    gw += delta * input_act.transpose();
    auto& gb = grads.accum("l2r/b" + std::to_string(l + 1), model.layers[l].b.rows(), 1);
    gb += delta.rowwise().sum();
    delta = model.layers[l].w.transpose() * delta;
    if (l > 0) {
      delta = delta.cwiseProduct((cache.activations[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  // delta is now d/d(input features); split into the two embedding halves.
  auto& glab = grads.accum("l2r/label_emb", model.label_emb.rows(), model.label_emb.cols());
  auto& gtok = grads.accum("l2r/token_emb", model.token_emb.rows(), model.token_emb.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    glab.row(pairs[static_cast<std::size_t>(i)].first) +=
        delta.col(i).head(model.d_emb).transpose();
    gtok.row(pairs[static_cast<std::size_t>(i)].second) +=
        delta.col(i).tail(model.d_emb).transpose();
  }
}

double dcg_at_k(const std::vector<double>& ranked_gains, int k, bool minus_one) {
  if (k < 1) throw std::invalid_argument("dcg_at_k: k must be >= 1");
  double dcg = 0;
  const int top = std::min<int>(k, static_cast<int>(ranked_gains.size()));
  for (int l = 0; l < top; ++l) {
    dcg += gain_numerator(ranked_gains[static_cast<std::size_t>(l)], minus_one) /
           std::log2(static_cast<double>(l) + 2.0);
  }
  return dcg;
}

std::vector<int> rank_order(const Eigen::VectorXd& scores) {
  std::vector<int> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

double ndcg_at_k(const Eigen::VectorXd& model_scores, const Eigen::VectorXd& gains, int k,
                 bool minus_one) {
  if (model_scores.size() != gains.size()) {
    throw std::invalid_argument("ndcg_at_k: score/gain length mismatch");
  }
  const auto order = rank_order(model_scores);
  std::vector<double> by_score, ideal;
  by_score.reserve(order.size());
  ideal.reserve(order.size());
  for (int i : order) by_score.push_back(gains[i]);
  const auto ideal_order = rank_order(gains);
  for (int i : ideal_order) ideal.push_back(gains[i]);
  const double max_dcg = dcg_at_k(ideal, k, minus_one);
  if (max_dcg <= 0.0) return 1.0;
  return dcg_at_k(by_score, k, minus_one) / max_dcg;
}

Eigen::VectorXd quantize_grades(const Eigen::VectorXd& gains, int bins) {
  if (bins < 2) throw std::invalid_argument("grade_bins must be >= 2");
  std::vector<double> positive;
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    if (gains[i] > 0.0) positive.push_back(gains[i]);
  }
  Eigen::VectorXd grades = Eigen::VectorXd::Zero(gains.size());
  if (positive.empty()) return grades;
  std::sort(positive.begin(), positive.end());
  const auto n = static_cast<double>(positive.size());
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    if (gains[i] <= 0.0) continue;
    const auto below = static_cast<double>(
        std::lower_bound(positive.begin(), positive.end(), gains[i]) - positive.begin());
    int grade = 1 + static_cast<int>(std::floor((below / n) * (bins - 1)));
    grades[i] = std::min(grade, bins - 1);
  }
  return grades;
}

bool lambda_step(L2RModel& model, const RankingInstance& instance, const L2RTrainConfig& config,
                 Rng& rng) {
  const auto n = static_cast<int>(instance.token_ids.size());
  if (n < 2) return false;
  if (instance.gains.size() != n) throw std::invalid_argument("instance gains misaligned");

  std::vector<std::pair<int, int>> feature_pairs;
  feature_pairs.reserve(static_cast<std::size_t>(n));
  for (int t : instance.token_ids) feature_pairs.emplace_back(instance.label_id, t);
  ForwardCache cache;
  const Eigen::MatrixXd X = build_features(model, feature_pairs);
  const Eigen::RowVectorXd z = score_batch(model, X, &cache);

  // Ordered candidate pairs with strictly larger gain first.
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (instance.gains[j] > instance.gains[k]) pairs.emplace_back(j, k);
    }
  }
  if (pairs.empty()) return false;
  if (config.pair_cap > 0 && static_cast<int>(pairs.size()) > config.pair_cap) {
    rng.shuffle(pairs);
    pairs.resize(static_cast<std::size_t>(config.pair_cap));
  }

  const auto order = rank_order(z.transpose());
  std::vector<int> rank_of(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) rank_of[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r + 1;

  std::vector<double> ideal(static_cast<std::size_t>(n));
  const auto ideal_order = rank_order(instance.gains);
  for (int r = 0; r < n; ++r) ideal[static_cast<std::size_t>(r)] = instance.gains[ideal_order[static_cast<std::size_t>(r)]];
  const double max_dcg = dcg_at_k(ideal, config.k_prime, config.dcg_minus_one);
  if (max_dcg <= 0.0) return false;

  auto discount = [&](int rank) {
    return rank <= config.k_prime ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
  };

  Eigen::RowVectorXd lambda = Eigen::RowVectorXd::Zero(n);
  for (const auto& [j, k] : pairs) {
    const double delta_ndcg =
        std::abs((gain_numerator(instance.gains[j], config.dcg_minus_one) -
                  gain_numerator(instance.gains[k], config.dcg_minus_one)) *
                 (discount(rank_of[static_cast<std::size_t>(j)]) -
                  discount(rank_of[static_cast<std::size_t>(k)]))) /
        max_dcg;
    const double lambda_jk =
        -config.sigma * stable_sigmoid(-config.sigma * (z[j] - z[k])) * delta_ndcg;
    lambda[j] += lambda_jk;
    lambda[k] -= lambda_jk;
  }

  GradMap grads;
  backprop_scores(model, feature_pairs, cache, lambda, grads);
  for (auto& ref : model.params()) {
    if (grads.has(ref.name)) *ref.tensor -= config.eta * grads.all().at(ref.name);
  }
  return true;
}

double pairwise_surrogate(const L2RModel& model, const RankingInstance& instance, double sigma,
                          GradMap* grads) {
  const auto n = static_cast<int>(instance.token_ids.size());
  std::vector<std::pair<int, int>> feature_pairs;
  for (int t : instance.token_ids) feature_pairs.emplace_back(instance.label_id, t);
  ForwardCache cache;
  const Eigen::MatrixXd X = build_features(model, feature_pairs);
  const Eigen::RowVectorXd z = score_batch(model, X, &cache);

  double loss = 0;
  Eigen::RowVectorXd dz = Eigen::RowVectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (!(instance.gains[j] > instance.gains[k])) continue;
      const double t = sigma * (z[k] - z[j]);
      // log(1 + e^t), stable for both signs
      loss += t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
      const double s = stable_sigmoid(t);
      dz[k] += sigma * s;
      dz[j] -= sigma * s;
    }
  }
  if (grads) backprop_scores(model, feature_pairs, cache, dz, *grads);
  return loss;
}

std::vector<RankingInstance> build_instances(const gain::GainMatrix& G,
                                             const L2RTrainConfig& config) {
  const int T = G.num_tokens();
  const int L = G.num_labels();
  std::vector<RankingInstance> out;
  out.reserve(static_cast<std::size_t>(L));
  Rng rng = substream(config.seed, "l2r-pool");
  const int pool_size = std::min(config.candidate_pool, T - 1);  // excludes <unk>
  const int top_take = pool_size / 2;
  for (int l = 0; l < L; ++l) {
    RankingInstance inst;
    inst.label_id = l;
    std::vector<char> taken(static_cast<std::size_t>(T), 0);
    taken[corpus::kUnkId] = 1;
    for (const auto& [tok, g] : gain::top_tokens(G, l, std::max(1, top_take))) {
      if (taken[static_cast<std::size_t>(tok)]) continue;
      inst.token_ids.push_back(tok);
      taken[static_cast<std::size_t>(tok)] = 1;
    }
    while (static_cast<int>(inst.token_ids.size()) < pool_size) {
      const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T - 1)));
      if (taken[static_cast<std::size_t>(t)]) continue;
      inst.token_ids.push_back(t);
      taken[static_cast<std::size_t>(t)] = 1;
    }
    Eigen::VectorXd raw(static_cast<Eigen::Index>(inst.token_ids.size()));
    for (std::size_t i = 0; i < inst.token_ids.size(); ++i) {
      raw[static_cast<Eigen::Index>(i)] = G.g(inst.token_ids[i], l);
    }
    inst.gains = config.raw_gains ? raw : quantize_grades(raw, config.grade_bins);
    out.push_back(std::move(inst));
  }
  return out;
}

PretrainResult pretrain(const gain::GainMatrix& G, const L2RTrainConfig& config) {
  if (G.g.size() == 0 || G.g.maxCoeff() <= 0.0) {
    throw std::invalid_argument(
        "gain matrix is degenerate (all zeros); inspect the corpus before pretraining");
  }
  PretrainResult res;
  res.model = init_l2r(G.num_labels(), G.num_tokens(), config.d_emb, config.hidden,
                       config.num_layers, config.seed);
  auto instances = build_instances(G, config);

  auto mean_ndcg = [&]() {
    double sum = 0;
    for (const auto& inst : instances) {
      const Eigen::VectorXd z = rank_tokens(res.model, inst.label_id, inst.token_ids);
      sum += ndcg_at_k(z, inst.gains, config.k_prime, config.dcg_minus_one);
    }
    return instances.empty() ? 0.0 : sum / static_cast<double>(instances.size());
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng = substream(config.seed, "l2r-pairs", static_cast<std::uint64_t>(epoch));
    for (const auto& inst : instances) {
      if (!lambda_step(res.model, inst, config, rng)) res.skipped_instances++;
    }
    res.ndcg_curve.push_back(mean_ndcg());
  }
  return res;
}

Eigen::VectorXd rank_tokens(const L2RModel& model, int label_id,
                            const std::vector<int>& token_ids) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(token_ids.size());
  for (int t : token_ids) pairs.emplace_back(label_id, t);
  return score_batch(model, build_features(model, pairs)).transpose();
}

void save_l2r(const std::string& path, const L2RModel& model, const std::string& meta_json) {
  TensorFile tf;
  nlohmann::json meta = meta_json.empty() ? nlohmann::json::object()
                                          : nlohmann::json::parse(meta_json);
  meta["schema"] = "l2r";
  meta["d_emb"] = model.d_emb;
  meta["num_labels"] = model.num_labels();
  meta["num_tokens"] = model.num_tokens();
  auto widths = nlohmann::json::array();
  for (const auto& l : model.layers) widths.push_back({l.w.rows(), l.w.cols()});
  meta["layer_shapes"] = widths;
  tf.meta_json = meta.dump();
  tf.tensors["label_emb"] = model.label_emb;
  tf.tensors["token_emb"] = model.token_emb;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    tf.tensors["w" + std::to_string(i + 1)] = model.layers[i].w;
    tf.tensors["b" + std::to_string(i + 1)] = model.layers[i].b;
  }
  save_tensor_file(path, tf);
}

L2RModel load_l2r(const std::string& path, std::string* meta_json) {
  TensorFile tf = load_tensor_file(path);
  nlohmann::json meta = nlohmann::json::parse(tf.meta_json);
  if (meta.value("schema", "") != "l2r") throw IoError("not an l2r checkpoint: " + path);
  L2RModel m;
  m.d_emb = meta.at("d_emb").get<int>();
  m.label_emb = tf.at("label_emb");
  m.token_emb = tf.at("token_emb");
  for (int i = 1; tf.has("w" + std::to_string(i)); ++i) {
    m.layers.push_back({tf.at("w" + std::to_string(i)), tf.at("b" + std::to_string(i))});
  }
  if (m.layers.empty()) throw IoError("l2r checkpoint has no layers: " + path);
  if (meta_json) *meta_json = tf.meta_json;
  return m;
}

}  // namespace plant::ranker
