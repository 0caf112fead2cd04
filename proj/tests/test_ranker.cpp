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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "plant/gain.hpp"
#include "plant/ranker.hpp"
#include "testutil.hpp"

using namespace plant;
using namespace plant::ranker;

namespace {

L2RModel tiny_model(std::uint64_t seed = 1) { return init_l2r(4, 6, 3, 5, 2, seed); }

corpus::SynthSpec pretrain_spec() {
  corpus::SynthSpec s;
  s.num_labels = 50;
  s.num_docs = 600;
  s.zipf_exponent = 1.1;
  s.signal_tokens_per_label = 4;
  s.signal_injection_prob = 1.0;
  s.noise_vocab_size = 799;  // 1 + 200 signal + 799 noise = 1000 tokens
  s.doc_length_min = 30;
  s.doc_length_max = 60;
  s.labels_per_doc = 2.5;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("build_feature concatenates the embedding pair") {
  L2RModel m = tiny_model();
  m.d_emb = 2;
  m.label_emb.resize(1, 2);
  m.label_emb << 1, 2;
  m.token_emb.resize(1, 2);
  m.token_emb << 3, 4;
  const auto x = build_feature(m, 0, 0);
  REQUIRE(x.size() == 4);
  CHECK(x[0] == 1);
  CHECK(x[1] == 2);
  CHECK(x[2] == 3);
  CHECK(x[3] == 4);

  // Identical halves when the embeddings coincide.
  m.token_emb << 1, 2;
  const auto dup = build_feature(m, 0, 0);
  CHECK(dup.head(2) == dup.tail(2));

  m.label_emb.setZero();
  m.token_emb.setZero();
  CHECK(build_feature(m, 0, 0).isZero());

  CHECK_THROWS(build_feature(m, 7, 0));
}

TEST_CASE("score forward pass on hand-built networks") {
  L2RModel m;
  m.d_emb = 2;
  m.label_emb = Eigen::MatrixXd::Zero(1, 2);
  m.token_emb = Eigen::MatrixXd::Zero(1, 2);
  const int w = 4;
  // Layer 1 identity, layer 2 all-ones row: input of all ones scores w.
  m.layers.push_back({Eigen::MatrixXd::Identity(w, w), Eigen::MatrixXd::Zero(w, 1)});
  m.layers.push_back({Eigen::MatrixXd::Ones(1, w), Eigen::MatrixXd::Zero(1, 1)});
  CHECK(score(m, Eigen::VectorXd::Ones(w)) == doctest::Approx(w));

  // All-zero parameters score zero everywhere.
  L2RModel z = tiny_model();
  for (auto& layer : z.layers) {
    layer.w.setZero();
    layer.b.setZero();
  }
  CHECK(score(z, Eigen::VectorXd::Ones(2 * z.d_emb)) == 0.0);

  CHECK_THROWS(score(m, Eigen::VectorXd::Ones(3)));
}

TEST_CASE("analytic input gradient matches central differences") {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    L2RModel m = tiny_model(100 + static_cast<std::uint64_t>(trial));
    Eigen::VectorXd x(2 * m.d_emb);
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXd analytic = score_input_gradient(m, x);
    const double eps = 1e-6;
    double worst = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Eigen::VectorXd up = x, dn = x;
      up[i] += eps;
      dn[i] -= eps;
      const double fd = (score(m, up) - score(m, dn)) / (2 * eps);
      const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
      worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("dcg hand values") {
  CHECK(dcg_at_k({3, 2, 0}, 2) == doctest::Approx(10.5237).epsilon(1e-4));
  CHECK(dcg_at_k({0, 2, 3}, 2) == doctest::Approx(3.5237).epsilon(1e-4));
  CHECK(dcg_at_k({2.5}, 1) == doctest::Approx(std::exp2(2.5)));
  CHECK(dcg_at_k({}, 3) == 0.0);
  // Paper-literal numerator 2^g; the -1 variant behind the flag.
  CHECK(dcg_at_k({0, 0}, 2) > 0.0);
  CHECK(dcg_at_k({0, 0}, 2, true) == 0.0);
}

TEST_CASE("ndcg hand values and bounds") {
  Eigen::VectorXd g(3);
  g << 3, 2, 0;
  Eigen::VectorXd ideal_scores(3);
  ideal_scores << 0.9, 0.5, 0.1;
  CHECK(ndcg_at_k(ideal_scores, g, 2) == 1.0);

  Eigen::VectorXd z(3);
  z << 0.1, 0.5, 0.9;
  CHECK(ndcg_at_k(z, g, 2) == doctest::Approx(0.3348).epsilon(1e-4));

  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
  CHECK(ndcg_at_k(ideal_scores, zeros, 2) == 1.0);

  CHECK_THROWS(ndcg_at_k(ideal_scores, Eigen::VectorXd::Zero(2), 2));

  // Property: always within [0, 1].
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.range_int(2, 12);
    Eigen::VectorXd gains(n), scores(n);
    for (int i = 0; i < n; ++i) {
      gains[i] = static_cast<double>(rng.range_int(0, 4));
      scores[i] = rng.uniform(-2, 2);
    }
    const double v = ndcg_at_k(scores, gains, rng.range_int(1, n));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("quantize_grades: quantile bins, ties share grades, zeros stay zero") {
  Eigen::VectorXd gains(8);
  gains << 0.0, 0.1, 0.1, 0.2, 0.3, 0.5, 0.5, 0.9;
  const auto grades = quantize_grades(gains, 5);
  CHECK(grades[0] == 0);
  CHECK(grades[1] == grades[2]);  // equal gains share a grade
  CHECK(grades[5] == grades[6]);
  CHECK(grades[7] == 4);          // top value reaches the top grade
  for (Eigen::Index i = 1; i + 1 < gains.size(); ++i) {
    CHECK(grades[i] <= grades[i + 1]);  // fixture is sorted ascending
  }
  CHECK(quantize_grades(Eigen::VectorXd::Zero(4), 5).isZero());
}

TEST_CASE("lambda hand value and antisymmetry of the applied update") {
  // Two candidates, grades [1, 0], equal scores, sigma 1, k = 2:
  // |Delta nDCG@2| = 1 - 2.26186/2.63093 = 0.14028, lambda_12 = -0.07014.
  L2RModel m;
  m.d_emb = 1;
  m.label_emb = Eigen::MatrixXd::Zero(1, 1);
  m.token_emb.resize(2, 1);
  m.token_emb << 1.0, 0.0;  // features x_1 = [0;1], x_2 = [0;0]
  m.layers.push_back({Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 1)});

  RankingInstance inst;
  inst.label_id = 0;
  inst.token_ids = {0, 1};
  inst.gains.resize(2);
  inst.gains << 1, 0;

  L2RTrainConfig cfg;
  cfg.k_prime = 2;
  cfg.sigma = 1.0;
  cfg.eta = 1.0;
  cfg.pair_cap = 0;
  Rng rng(1);
  REQUIRE(lambda_step(m, inst, cfg, rng));
  // dw = -eta * (lambda_1 * x_1 + lambda_2 * x_2); only w[0,1] moves, by
  // -lambda_1 = +0.07014.
  CHECK(m.layers[0].w(0, 1) == doctest::Approx(0.0701407).epsilon(1e-4));
  // dz/db = 1 for both candidates, so the bias sees lambda_1 + lambda_2 = 0.
  CHECK(m.layers[0].b(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lambda_step no-op and saturation behavior") {
  L2RModel m = tiny_model();
  RankingInstance inst;
  inst.label_id = 0;
  inst.token_ids = {0, 1};
  inst.gains.resize(2);
  inst.gains << 1, 1;  // no strict pair
  L2RTrainConfig cfg;
  Rng rng(1);
  CHECK_FALSE(lambda_step(m, inst, cfg, rng));

  // Correctly ordered pair with a huge score margin: sigmoid saturates and
  // the update vanishes.
  L2RModel sat;
  sat.d_emb = 1;
  sat.label_emb = Eigen::MatrixXd::Zero(1, 1);
  sat.token_emb.resize(2, 1);
  sat.token_emb << 100.0, -100.0;
  sat.layers.push_back({(Eigen::MatrixXd(1, 2) << 0.0, 1.0).finished(),
                        Eigen::MatrixXd::Zero(1, 1)});
  RankingInstance wide;
  wide.label_id = 0;
  wide.token_ids = {0, 1};
  wide.gains.resize(2);
  wide.gains << 3, 0;
  L2RModel before = sat;
  Rng rng2(2);
  lambda_step(sat, wide, cfg, rng2);
  CHECK((sat.layers[0].w - before.layers[0].w).cwiseAbs().maxCoeff() < 1e-20);
  CHECK((sat.token_emb - before.token_emb).cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("equal-gain swaps below the cutoff contribute nothing") {
  // gains [5, 0, 0], k = 1, top candidate far ahead: the only strict pairs
  // are saturated, and the equal-gain pair (1, 2) is outside the pair set.
  L2RModel m;
  m.d_emb = 1;
  m.label_emb = Eigen::MatrixXd::Zero(1, 1);
  m.token_emb.resize(3, 1);
  m.token_emb << 100.0, 0.0, 0.0;
  m.layers.push_back({(Eigen::MatrixXd(1, 2) << 0.0, 1.0).finished(),
                      Eigen::MatrixXd::Zero(1, 1)});
  RankingInstance inst;
  inst.label_id = 0;
  inst.token_ids = {0, 1, 2};
  inst.gains.resize(3);
  inst.gains << 5, 0, 0;
  L2RTrainConfig cfg;
  cfg.k_prime = 1;
  cfg.eta = 1.0;
  L2RModel before = m;
  Rng rng(3);
  lambda_step(m, inst, cfg, rng);
  CHECK((m.layers[0].w - before.layers[0].w).cwiseAbs().maxCoeff() < 1e-20);
}

TEST_CASE("pairwise surrogate gradients match finite differences") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    L2RModel m = tiny_model(200 + static_cast<std::uint64_t>(trial));
    RankingInstance inst;
    inst.label_id = static_cast<int>(rng.below(4));
    inst.token_ids = {0, 1, 2, 3, 4};
    inst.gains.resize(5);
    for (int i = 0; i < 5; ++i) inst.gains[i] = static_cast<double>(rng.range_int(0, 3));
    if ((inst.gains.array() == inst.gains[0]).all()) inst.gains[0] += 1;

    GradMap grads;
    pairwise_surrogate(m, inst, 1.3, &grads);
    const auto report = testutil::finite_difference_check(
        m.params(), grads, [&]() { return pairwise_surrogate(m, inst, 1.3, nullptr); }, 1e-6);
    INFO("worst tensor: ", report.worst_name);
    CHECK(report.worst_rel_err < 1e-5);
  }
}

TEST_CASE("pretraining reaches high nDCG and is deterministic") {
  const auto res = corpus::generate_synthetic(pretrain_spec());
  const auto G = gain::compute_gain(res.corpus);
  L2RTrainConfig cfg;
  cfg.epochs = 12;
  cfg.eta = 0.1;
  cfg.candidate_pool = 128;
  cfg.pair_cap = 1500;
  cfg.grade_bins = 17;
  cfg.seed = 42;

  const auto run = pretrain(G, cfg);
  REQUIRE(run.ndcg_curve.size() == 12);
  CHECK(run.ndcg_curve.back() >= 0.95);
  CHECK(run.ndcg_curve.back() > run.ndcg_curve.front());

  const auto rerun = pretrain(G, cfg);
  CHECK(run.model.label_emb == rerun.model.label_emb);
  CHECK(run.model.token_emb == rerun.model.token_emb);
  for (std::size_t i = 0; i < run.model.layers.size(); ++i) {
    CHECK(run.model.layers[i].w == rerun.model.layers[i].w);
  }
  CHECK(run.ndcg_curve == rerun.ndcg_curve);

  // Zero epochs return the initialization untouched.
  L2RTrainConfig zero = cfg;
  zero.epochs = 0;
  const auto init_run = pretrain(G, zero);
  const auto fresh = init_l2r(G.num_labels(), G.num_tokens(), cfg.d_emb, cfg.hidden,
                              cfg.num_layers, cfg.seed);
  CHECK(init_run.model.label_emb == fresh.label_emb);
  CHECK(init_run.model.token_emb == fresh.token_emb);

  // Trained model ranks oracle signal tokens on top for most labels.
  int hits = 0;
  std::vector<int> all_tokens;
  for (int t = 1; t < G.num_tokens(); ++t) all_tokens.push_back(t);
  for (const auto& [label, signals] : res.oracle) {
    const Eigen::VectorXd z = rank_tokens(run.model, label, all_tokens);
    const auto order = rank_order(z);
    std::set<int> top;
    for (std::size_t i = 0; i < signals.size(); ++i) {
      top.insert(all_tokens[static_cast<std::size_t>(order[i])]);
    }
    bool all_in = true;
    for (int s : signals) all_in &= top.count(s) > 0;
    if (all_in) hits++;
  }
  CHECK(static_cast<double>(hits) >= 0.9 * static_cast<double>(res.oracle.size()));
}

TEST_CASE("degenerate gain matrix is rejected") {
  gain::GainMatrix G;
  G.g.setZero(10, 3);
  L2RTrainConfig cfg;
  CHECK_THROWS(pretrain(G, cfg));
}

TEST_CASE("rank_tokens is an elementwise map consistent with score") {
  L2RModel m = tiny_model(12);
  const std::vector<int> toks{3, 1, 4};
  const Eigen::VectorXd z = rank_tokens(m, 2, toks);
  REQUIRE(z.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(z[i] == doctest::Approx(score(m, build_feature(m, 2, toks[static_cast<std::size_t>(i)])))
                      .epsilon(1e-12));
  }
  const std::vector<int> perm{4, 3, 1};
  const Eigen::VectorXd zp = rank_tokens(m, 2, perm);
  CHECK(zp[0] == z[2]);
  CHECK(zp[1] == z[0]);
  CHECK(zp[2] == z[1]);
}

TEST_CASE("monotone improvement across a 5-seed suite") {
  corpus::SynthSpec spec = pretrain_spec();
  spec.num_labels = 20;
  spec.num_docs = 300;
  spec.noise_vocab_size = 200;
  const auto res = corpus::generate_synthetic(spec);
  const auto G = gain::compute_gain(res.corpus);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    L2RTrainConfig cfg;
    cfg.epochs = 6;
    cfg.eta = 0.1;
    cfg.candidate_pool = 96;
    cfg.pair_cap = 1000;
    cfg.grade_bins = 17;
    cfg.seed = seed;
    const auto run = pretrain(G, cfg);
    CHECK(run.ndcg_curve.back() > run.ndcg_curve.front());
  }
}

TEST_CASE("l2r checkpoint round trip") {
  namespace fs = std::filesystem;
  L2RModel m = tiny_model(3);
  const auto path = (fs::temp_directory_path() / "plant_l2r_rt.ckpt").string();
  save_l2r(path, m, R"({"note":"fixture"})");
  std::string meta;
  const L2RModel loaded = load_l2r(path, &meta);
  CHECK(loaded.d_emb == m.d_emb);
  CHECK(loaded.label_emb == m.label_emb);
  CHECK(loaded.token_emb == m.token_emb);
  REQUIRE(loaded.layers.size() == m.layers.size());
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    CHECK(loaded.layers[i].w == m.layers[i].w);
    CHECK(loaded.layers[i].b == m.layers[i].b);
  }
  CHECK(meta.find("fixture") != std::string::npos);
  fs::remove(path);
}
