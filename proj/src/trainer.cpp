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
#include "plant/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "plant/rng.hpp"
#include "plant/tensor_io.hpp"

namespace plant::trainer {

namespace {

namespace fs = std::filesystem;

Eigen::VectorXd label_vector(const corpus::Document& doc, int num_labels) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(num_labels);
  for (int l : doc.labels) y[l] = 1.0;
  return y;
}

bool finite(double v) { return std::isfinite(v); }

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0 || batch_size < 1) throw corpus::ConfigError("trainer: bad epochs/batch_size");
  if (lr_factor_encoder <= 0 || lr_factor_encoder > 1 || lr_factor_l2r < 0 ||
      lr_factor_l2r > 1 || lr_factor_decoder <= 0 || lr_factor_decoder > 1) {
    throw corpus::ConfigError("trainer: group lr factors must lie in (0, 1]");
  }
  if (lr_max < lr_min || wd_max < wd_min) {
    throw corpus::ConfigError("trainer: lr schedule must decrease and wd schedule increase");
  }
}

double lr_at_epoch(const TrainConfig& c, int epoch) {
  if (c.epochs <= 1) return c.lr_max;
  const double f = static_cast<double>(epoch) / static_cast<double>(c.epochs - 1);
  return c.lr_max + (c.lr_min - c.lr_max) * std::min(1.0, f);
}

double wd_at_epoch(const TrainConfig& c, int epoch) {
  if (c.epochs <= 1) return c.wd_min;
  const double f = static_cast<double>(epoch) / static_cast<double>(c.epochs - 1);
  return c.wd_min + (c.wd_max - c.wd_min) * std::min(1.0, f);
}

std::set<ParamGroup> gradual_unfreeze(int epoch, const TrainConfig& c) {
  std::set<ParamGroup> groups{ParamGroup::kDecoderOther};
  switch (c.unfreeze) {
    case UnfreezeMode::kFull:
      groups.insert(ParamGroup::kL2R);
      groups.insert(ParamGroup::kEncoder);
      break;
    case UnfreezeMode::kGradual:
      if (epoch >= c.unfreeze_l2r_epoch) groups.insert(ParamGroup::kL2R);
      if (epoch >= c.unfreeze_encoder_epoch) groups.insert(ParamGroup::kEncoder);
      break;
    case UnfreezeMode::kFrozenEncoder:
      if (epoch >= c.unfreeze_l2r_epoch) groups.insert(ParamGroup::kL2R);
      break;
  }
  return groups;
}

std::vector<ParamRef> ModelBundle::all_params() {
  std::vector<ParamRef> out;
  for (auto& p : enc.params()) out.push_back(p);
  if (has_l2r) {
    for (auto& p : l2r.params()) out.push_back(p);
  }
  for (auto& p : dec.params()) out.push_back(p);
  return out;
}

decoder::Models ModelBundle::views(const gain::GainMatrix* G) const {
  decoder::Models m;
  m.enc = &enc;
  m.l2r = has_l2r ? &l2r : nullptr;
  m.G = G;
  return m;
}

std::string log_to_csv(const std::vector<EpochLogRow>& rows) {
  std::ostringstream os;
  os << "epoch,split,metric,value\n";
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.split << ',' << r.metric << ',' << format_double(r.value) << '\n';
  }
  return os.str();
}

metrics::GoldSets gold_sets(const corpus::Corpus& corpus, const std::vector<int>& ids) {
  metrics::GoldSets out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(corpus.docs[static_cast<std::size_t>(id)].labels);
  return out;
}

metrics::ScoreMatrix predict_scores(const ModelBundle& bundle, const gain::GainMatrix& G,
                                    const corpus::Corpus& corpus, const std::vector<int>& ids) {
  metrics::ScoreMatrix scores(static_cast<Eigen::Index>(ids.size()), bundle.dec.num_labels());
  const auto models = bundle.views(&G);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& doc = corpus.docs[static_cast<std::size_t>(ids[i])];
    scores.row(static_cast<Eigen::Index>(i)) =
        decoder::forward_document(models, bundle.dec, doc.tokens).y_hat.transpose();
  }
  return scores;
}

metrics::ScoreMatrix ensemble_average(const metrics::ScoreMatrix& pred_forward,
                                      const metrics::ScoreMatrix& pred_backward) {
  if (pred_forward.rows() != pred_backward.rows() ||
      pred_forward.cols() != pred_backward.cols()) {
    throw std::invalid_argument("ensemble_average: shape mismatch");
  }
  return 0.5 * (pred_forward + pred_backward);
}

namespace {

void adam_step(ModelBundle& bundle, const GradMap& grads, AdamState& adam,
               const std::set<ParamGroup>& unfrozen, const TrainConfig& c, double lr,
               double wd, bool l2r_active) {
  for (auto& ref : bundle.all_params()) {
    if (!unfrozen.count(ref.group)) continue;
    if (ref.group == ParamGroup::kL2R && !l2r_active) continue;
    if (!grads.has(ref.name)) continue;
    const Eigen::MatrixXd& g = grads.all().at(ref.name);
    auto& m = adam.m[ref.name];
    auto& v = adam.v[ref.name];
    if (m.size() == 0) {
      m = Eigen::MatrixXd::Zero(g.rows(), g.cols());
      v = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    }
    auto& t = adam.steps[ref.name];
    t += 1;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
    const double group_lr = lr * (ref.group == ParamGroup::kEncoder  ? c.lr_factor_encoder
                                  : ref.group == ParamGroup::kL2R    ? c.lr_factor_l2r
                                                                     : c.lr_factor_decoder);
    const Eigen::MatrixXd m_hat = m / bc1;
    const Eigen::MatrixXd v_hat = v / bc2;
    *ref.tensor -= group_lr * (m_hat.array() / (v_hat.array().sqrt() + c.adam_eps)).matrix();
    if (ref.decay) *ref.tensor -= group_lr * wd * (*ref.tensor);  // decoupled decay
  }
}

void append_report_rows(std::vector<EpochLogRow>& log, int epoch, const std::string& split,
                        const metrics::MetricsReport& r) {
  log.push_back({epoch, split, "micro_f1", r.prf.micro_f1});
  log.push_back({epoch, split, "macro_f1", r.prf.macro_f1});
  log.push_back({epoch, split, "micro_auc", r.auc.micro});
  log.push_back({epoch, split, "macro_auc", r.auc.macro});
  for (std::size_t i = 0; i < r.k_values.size(); ++i) {
    log.push_back({epoch, split, "p_at_" + std::to_string(r.k_values[i]), r.p_at_k[i]});
    log.push_back({epoch, split, "ndcg_at_" + std::to_string(r.k_values[i]), r.ndcg_at_k[i]});
  }
}

}  // namespace

TrainResult train(TrainerState& state, const corpus::Corpus& corpus,
                  const std::vector<int>& train_ids, const std::vector<int>& val_ids,
                  const gain::GainMatrix& G, const TrainConfig& config,
                  const std::string& checkpoint_dir) {
  config.validate();
  state.bundle.dec.validate();
  TrainResult res;
  if (state.bundle.dec.use_planted && !state.bundle.has_l2r) {
    throw corpus::ConfigError("use_planted requires a pretrained L2R model in the bundle");
  }
  const int L = state.bundle.dec.num_labels();
  const auto models = state.bundle.views(&G);

  for (int epoch = state.next_epoch; epoch < config.epochs; ++epoch) {
    const double lr = lr_at_epoch(config, epoch);
    const double wd = wd_at_epoch(config, epoch);
    const auto unfrozen = gradual_unfreeze(epoch, config);
    const bool l2r_active = state.bundle.has_l2r && state.bundle.dec.use_planted;
    const bool train_l2r = l2r_active && unfrozen.count(ParamGroup::kL2R) > 0;
    const bool train_encoder = unfrozen.count(ParamGroup::kEncoder) > 0;

    // Snapshot for NaN rollback.
    const ModelBundle epoch_start = state.bundle;

    std::vector<int> order = train_ids;
    Rng shuffle_rng = substream(config.seed, "epoch-shuffle", static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0;
    bool nan_hit = false;
    for (std::size_t lo = 0; lo < order.size() && !nan_hit; lo += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(config.batch_size));
      GradMap grads;
      double batch_loss = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        const auto& doc = corpus.docs[static_cast<std::size_t>(order[i])];
        const auto fwd = decoder::forward_document(models, state.bundle.dec, doc.tokens);
        batch_loss += decoder::backward_document(models, state.bundle.dec, doc.tokens,
                                                 label_vector(doc, L), fwd, grads, train_l2r,
                                                 train_encoder);
      }
      const double scale = 1.0 / static_cast<double>(hi - lo);
      grads.scale(scale);
      batch_loss *= scale;
      epoch_loss += batch_loss * static_cast<double>(hi - lo);
      if (!finite(batch_loss)) {
        nan_hit = true;
        break;
      }
      if (config.clip_norm > 0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (norm > config.clip_norm) grads.scale(config.clip_norm / norm);
      }
      adam_step(state.bundle, grads, state.adam, unfrozen, config, lr, wd, l2r_active);
    }

    if (nan_hit) {
      state.bundle = epoch_start;  // last good checkpoint
      res.aborted_nan = true;
      std::cerr << "[trainer] loss diverged (NaN) at epoch " << epoch
                << "; restored previous parameters and stopped\n";
      break;
    }

    res.log.push_back({epoch, "train", "loss",
                       train_ids.empty() ? 0.0 : epoch_loss / static_cast<double>(train_ids.size())});
    res.log.push_back({epoch, "train", "lr", lr});
    res.log.push_back({epoch, "train", "wd", wd});

    double val_micro_f1 = 0;
    if (!val_ids.empty()) {
      const auto scores = predict_scores(state.bundle, G, corpus, val_ids);
      const auto report = metrics::full_report(scores, gold_sets(corpus, val_ids));
      append_report_rows(res.log, epoch, "val", report);
      val_micro_f1 = report.prf.micro_f1;
    }

    if (val_micro_f1 > state.best_metric) {
      state.best_metric = val_micro_f1;
      state.best_epoch = epoch;
      state.since_best = 0;
      state.best = state.bundle;
    } else {
      state.since_best++;
    }
    state.next_epoch = epoch + 1;
    res.epochs_run++;

    if (!checkpoint_dir.empty()) {
      save_trainer_state(checkpoint_dir, state, "");
    }
    if (!val_ids.empty() && state.since_best > config.patience) break;
  }

  res.best_metric = state.best_metric;
  res.best_epoch = state.best_epoch;
  return res;
}

void save_trainer_state(const std::string& dir, const TrainerState& state,
                        const std::string& config_hash) {
  fs::create_directories(dir);
  encoder::save_encoder(dir + "/enc.ckpt", state.bundle.enc);
  decoder::save_decoder(dir + "/dec.ckpt", state.bundle.dec);
  if (state.bundle.has_l2r) ranker::save_l2r(dir + "/l2r.ckpt", state.bundle.l2r, "{}");
  if (state.best_epoch >= 0) {
    encoder::save_encoder(dir + "/best_enc.ckpt", state.best.enc);
    decoder::save_decoder(dir + "/best_dec.ckpt", state.best.dec);
    if (state.best.has_l2r) ranker::save_l2r(dir + "/best_l2r.ckpt", state.best.l2r, "{}");
  }

  TensorFile tf;
  nlohmann::json meta;
  meta["schema"] = "trainer_state";
  meta["next_epoch"] = state.next_epoch;
  meta["best_metric"] = state.best_metric;
  meta["best_epoch"] = state.best_epoch;
  meta["since_best"] = state.since_best;
  meta["has_l2r"] = state.bundle.has_l2r;
  meta["config_hash"] = config_hash;
  auto steps = nlohmann::json::object();
  for (const auto& [name, t] : state.adam.steps) steps[name] = t;
  meta["adam_steps"] = steps;
  tf.meta_json = meta.dump();
  for (const auto& [name, m] : state.adam.m) tf.tensors["adam_m/" + name] = m;
  for (const auto& [name, v] : state.adam.v) tf.tensors["adam_v/" + name] = v;
  save_tensor_file(dir + "/optim.ckpt", tf);
}

TrainerState load_trainer_state(const std::string& dir) {
  TrainerState state;
  state.bundle.enc = encoder::load_encoder(dir + "/enc.ckpt");
  state.bundle.dec = decoder::load_decoder(dir + "/dec.ckpt");

  TensorFile tf = load_tensor_file(dir + "/optim.ckpt");
  nlohmann::json meta = nlohmann::json::parse(tf.meta_json);
  if (meta.value("schema", "") != "trainer_state") {
    throw IoError("not a trainer state: " + dir);
  }
  state.bundle.has_l2r = meta.at("has_l2r").get<bool>();
  if (state.bundle.has_l2r) state.bundle.l2r = ranker::load_l2r(dir + "/l2r.ckpt");
  state.next_epoch = meta.at("next_epoch").get<int>();
  state.best_metric = meta.at("best_metric").get<double>();
  state.best_epoch = meta.at("best_epoch").get<int>();
  state.since_best = meta.at("since_best").get<int>();
  for (const auto& [name, t] : meta.at("adam_steps").items()) {
    state.adam.steps[name] = t.get<std::int64_t>();
  }
  for (const auto& [name, m] : tf.tensors) {
    if (name.rfind("adam_m/", 0) == 0) state.adam.m[name.substr(7)] = m;
    if (name.rfind("adam_v/", 0) == 0) state.adam.v[name.substr(7)] = m;
  }
  if (state.best_epoch >= 0) {
    state.best.enc = encoder::load_encoder(dir + "/best_enc.ckpt");
    state.best.dec = decoder::load_decoder(dir + "/best_dec.ckpt");
    state.best.has_l2r = fs::exists(dir + "/best_l2r.ckpt");
    if (state.best.has_l2r) state.best.l2r = ranker::load_l2r(dir + "/best_l2r.ckpt");
  }
  return state;
}

TrainedSystem train_system(const corpus::Corpus& corpus, const std::vector<int>& train_ids,
                           const std::vector<int>& val_ids, const gain::GainMatrix& G,
                           const SystemSpec& spec, std::uint64_t seed,
                           const ranker::L2RModel* pretrained_l2r,
                           const std::string& checkpoint_dir) {
  TrainerState state;
  state.bundle.enc = encoder::init_encoder(corpus.vocab.num_tokens(), spec.s_e, spec.arch,
                                           spec.direction, seed, spec.window);
  if (spec.use_planted) {
    if (pretrained_l2r) {
      state.bundle.l2r = *pretrained_l2r;
    } else {
      ranker::L2RTrainConfig l2r_cfg = spec.l2r;
      l2r_cfg.seed = seed;
      state.bundle.l2r = ranker::pretrain(G, l2r_cfg).model;
    }
    state.bundle.has_l2r = true;
  }
  state.bundle.dec = decoder::init_decoder(
      corpus.vocab.num_labels(), spec.s_e, seed,
      spec.use_planted && spec.u_init_from_l2r ? &state.bundle.l2r : nullptr);
  state.bundle.dec.inattention_k = spec.inattention_k;
  state.bundle.dec.use_learned = spec.use_learned;
  state.bundle.dec.use_static = spec.use_static;
  state.bundle.dec.use_planted = spec.use_planted;
  state.bundle.dec.use_inattention = spec.use_inattention;
  state.bundle.dec.static_normalize = spec.static_normalize;
  state.bundle.dec.inattention_mode = spec.inattention_mode;
  state.bundle.dec.phi = spec.phi;
  state.bundle.dec.segment_len = spec.segment_len;
  state.bundle.dec.stateful = spec.stateful;

  TrainConfig cfg = spec.train;
  cfg.seed = seed;
  TrainedSystem out;
  out.result = train(state, corpus, train_ids, val_ids, G, cfg, checkpoint_dir);
  out.bundle = state.best_epoch >= 0 ? state.best : state.bundle;
  // The best snapshot keeps the runtime decode flags of the live bundle.
  out.bundle.dec.stateful = state.bundle.dec.stateful;
  return out;
}

namespace {

struct CellRuns {
  std::vector<metrics::ScoreMatrix> per_seed_scores;  // on the shared test set
  std::vector<metrics::MetricsReport> reports;
};

void fill_cell(AblationCell& cell, const CellRuns& runs) {
  auto add = [&](const std::string& name, auto getter) {
    double sum = 0, sq = 0;
    for (const auto& r : runs.reports) {
      const double v = getter(r);
      sum += v;
      sq += v * v;
    }
    const auto n = static_cast<double>(runs.reports.size());
    const double mean = sum / n;
    cell.metric_mean[name] = mean;
    cell.metric_sd[name] = n > 1 ? std::sqrt(std::max(0.0, sq / n - mean * mean) * n / (n - 1)) : 0.0;
  };
  add("micro_f1", [](const metrics::MetricsReport& r) { return r.prf.micro_f1; });
  add("macro_f1", [](const metrics::MetricsReport& r) { return r.prf.macro_f1; });
  add("micro_auc", [](const metrics::MetricsReport& r) { return r.auc.micro; });
  add("macro_auc", [](const metrics::MetricsReport& r) { return r.auc.macro; });
  add("p_at_5", [](const metrics::MetricsReport& r) { return r.p_at_k[2]; });
  add("p_at_8", [](const metrics::MetricsReport& r) { return r.p_at_k[3]; });
  add("p_at_15", [](const metrics::MetricsReport& r) { return r.p_at_k[4]; });
  cell.seeds = static_cast<int>(runs.reports.size());
}

metrics::ScoreMatrix stack_rows(const std::vector<metrics::ScoreMatrix>& mats) {
  Eigen::Index rows = 0;
  for (const auto& m : mats) rows += m.rows();
  metrics::ScoreMatrix out(rows, mats.front().cols());
  Eigen::Index at = 0;
  for (const auto& m : mats) {
    out.middleRows(at, m.rows()) = m;
    at += m.rows();
  }
  return out;
}

}  // namespace

std::string AblationTable::to_csv() const {
  std::ostringstream os;
  os << "axis,cell,seeds";
  std::vector<std::string> names;
  if (!cells.empty()) {
    for (const auto& [k, v] : cells.front().metric_mean) names.push_back(k);
    for (const auto& n : names) os << ',' << n << "_mean," << n << "_sd";
  }
  os << ",p_value\n";
  for (const auto& c : cells) {
    os << c.axis << ',' << c.cell << ',' << c.seeds;
    for (const auto& n : names) {
      os << ',' << format_double(c.metric_mean.at(n)) << ',' << format_double(c.metric_sd.at(n));
    }
    os << ',' << format_double(p_value.count(c.axis) ? p_value.at(c.axis) : 1.0) << '\n';
  }
  return os.str();
}

AblationTable run_ablation(const corpus::Corpus& corpus, const corpus::Split& split,
                           const gain::GainMatrix& G, const SystemSpec& base,
                           const std::vector<std::uint64_t>& seeds, int ar_iterations) {
  AblationTable table;
  const auto gold = gold_sets(corpus, split.test);

  // One pretrained L2R per seed, shared by every cell that plants attention.
  std::map<std::uint64_t, ranker::L2RModel> l2r_by_seed;
  for (auto seed : seeds) {
    ranker::L2RTrainConfig cfg = base.l2r;
    cfg.seed = seed;
    l2r_by_seed.emplace(seed, ranker::pretrain(G, cfg).model);
  }

  auto run_cell = [&](const SystemSpec& spec) {
    CellRuns runs;
    for (auto seed : seeds) {
      const ranker::L2RModel* l2r = spec.use_planted ? &l2r_by_seed.at(seed) : nullptr;
      auto sys = train_system(corpus, split.train, split.val, G, spec, seed, l2r);
      metrics::ScoreMatrix scores = predict_scores(sys.bundle, G, corpus, split.test);
      runs.reports.push_back(metrics::full_report(scores, gold));
      runs.per_seed_scores.push_back(std::move(scores));
    }
    return runs;
  };

  auto run_ensemble_cell = [&](const SystemSpec& spec) {
    CellRuns runs;
    for (auto seed : seeds) {
      const ranker::L2RModel* l2r = spec.use_planted ? &l2r_by_seed.at(seed) : nullptr;
      SystemSpec fwd = spec;
      fwd.direction = encoder::Direction::kForward;
      SystemSpec bwd = spec;
      bwd.direction = encoder::Direction::kBackward;
      auto sys_f = train_system(corpus, split.train, split.val, G, fwd, seed, l2r);
      auto sys_b = train_system(corpus, split.train, split.val, G, bwd, seed + 1, l2r);
      metrics::ScoreMatrix scores =
          ensemble_average(predict_scores(sys_f.bundle, G, corpus, split.test),
                           predict_scores(sys_b.bundle, G, corpus, split.test));
      runs.reports.push_back(metrics::full_report(scores, gold));
      runs.per_seed_scores.push_back(std::move(scores));
    }
    return runs;
  };

  auto p_at_15_fn = [](const metrics::ScoreMatrix& s, const metrics::GoldSets& g) {
    double sum = 0;
    for (Eigen::Index d = 0; d < s.rows(); ++d) {
      sum += metrics::precision_at_k(s.row(d), g[static_cast<std::size_t>(d)], 15);
    }
    return s.rows() ? sum / static_cast<double>(s.rows()) : 0.0;
  };

  metrics::GoldSets stacked_gold;
  for (std::size_t r = 0; r < seeds.size(); ++r) {
    stacked_gold.insert(stacked_gold.end(), gold.begin(), gold.end());
  }

  auto add_axis = [&](const std::string& axis, const std::string& on_name,
                      const std::string& off_name, const CellRuns& on, const CellRuns& off) {
    AblationCell c_on{axis, on_name, {}, {}, 0};
    AblationCell c_off{axis, off_name, {}, {}, 0};
    fill_cell(c_on, on);
    fill_cell(c_off, off);
    table.cells.push_back(c_on);
    table.cells.push_back(c_off);
    table.p_value[axis] = metrics::approx_randomization_test(
        p_at_15_fn, stack_rows(on.per_seed_scores), stack_rows(off.per_seed_scores), stacked_gold,
        ar_iterations, 929 + fnv1a64(axis));
  };

  {  // planted attention (P and S) on/off
    SystemSpec off = base;
    off.use_planted = false;
    off.use_static = false;
    off.u_init_from_l2r = false;
    add_axis("planted", "with_plant", "without_plant", run_cell(base), run_cell(off));
  }
  {  // inattention on/off
    SystemSpec off = base;
    off.use_inattention = false;
    add_axis("inattention", "with_inattention", "without_inattention", run_cell(base),
             run_cell(off));
  }
  {  // stateful vs stateless
    SystemSpec on = base;
    on.stateful = true;
    SystemSpec off = base;
    off.stateful = false;
    add_axis("stateful", "stateful", "stateless", run_cell(on), run_cell(off));
  }
  {  // discriminative fine-tuning on/off
    SystemSpec off = base;
    off.train.lr_factor_encoder = 1.0;
    off.train.lr_factor_l2r = 1.0;
    off.train.lr_factor_decoder = 1.0;
    add_axis("disc", "with_disc", "without_disc", run_cell(base), run_cell(off));
  }
  {  // gradual vs full unfreezing
    SystemSpec grad = base;
    grad.train.unfreeze = UnfreezeMode::kGradual;
    SystemSpec full = base;
    full.train.unfreeze = UnfreezeMode::kFull;
    add_axis("unfreeze", "gradual_unfreezing", "full_unfreezing", run_cell(grad), run_cell(full));
  }
  {  // forward/backward ensemble on/off
    add_axis("ensemble", "fwd_bwd_ensemble", "forward_only", run_ensemble_cell(base),
             run_cell(base));
  }
  return table;
}

}  // namespace plant::trainer
