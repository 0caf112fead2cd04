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
#include "plant/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plant/decoder.hpp"
#include "plant/tensor_io.hpp"

namespace plant::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw MissingPrerequisite("missing " + path + "; run " + producer + " first");
  }
}

struct ManifestWriter {
  std::string run_dir;
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::array();
  Clock::time_point started = Clock::now();

  void input(const std::string& path) { inputs[path] = file_hash_hex(path); }
  void output(const std::string& path) { outputs.push_back(path); }
  void write(const config::RunConfig& cfg) {
    nlohmann::json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["seed"] = cfg.seed();
    j["wall_time_s"] =
        std::chrono::duration<double>(Clock::now() - started).count();
    write_file(join(run_dir, "manifest_" + command + ".json"), j.dump(2) + "\n");
  }
};

ManifestWriter begin_command(const config::RunConfig& cfg, const std::string& command) {
  const std::string dir = cfg.run_dir();
  fs::create_directories(dir);
  write_file(join(dir, "config_echo.json"), cfg.echo());
  return ManifestWriter{dir, command};
}

corpus::Split split_run(const config::RunConfig& cfg, const corpus::Corpus& c) {
  return corpus::split(c, cfg.split_spec());
}

trainer::ModelBundle load_bundle_for_eval(const config::RunConfig& cfg, bool prefer_best) {
  const std::string ckpt = join(cfg.run_dir(), "ckpt");
  require_artifact(join(ckpt, "dec.ckpt"), "train");
  trainer::TrainerState state = trainer::load_trainer_state(ckpt);
  if (prefer_best && state.best_epoch >= 0) {
    trainer::ModelBundle b = state.best;
    b.dec.stateful = state.bundle.dec.stateful;
    return b;
  }
  return state.bundle;
}

}  // namespace

corpus::Corpus load_run_corpus(const std::string& run_dir) {
  const std::string corpus_path = join(run_dir, "corpus.jsonl");
  const std::string vocab_path = join(run_dir, "vocab.json");
  require_artifact(corpus_path, "synth or ingest");
  require_artifact(vocab_path, "synth or ingest");
  corpus::Corpus c;
  c.vocab = corpus::load_vocabulary(vocab_path);
  c.docs = corpus::ingest_with_vocab(corpus::read_jsonl(corpus_path), c.vocab,
                                     &c.dropped_empty_docs);
  return c;
}

void save_oracle(const std::string& path, const corpus::SignalOracle& oracle,
                 const corpus::Vocabulary& vocab) {
  nlohmann::json j;
  for (const auto& [label, tokens] : oracle) {
    nlohmann::json toks = nlohmann::json::array();
    for (int t : tokens) toks.push_back(vocab.tokens[static_cast<std::size_t>(t)]);
    j[vocab.labels[static_cast<std::size_t>(label)]] = {
        {"label_id", label}, {"token_ids", tokens}, {"tokens", toks}};
  }
  write_file(path, j.dump(2) + "\n");
}

corpus::SignalOracle load_oracle(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  corpus::SignalOracle oracle;
  for (const auto& [label_name, entry] : j.items()) {
    (void)label_name;
    oracle[entry.at("label_id").get<int>()] = entry.at("token_ids").get<std::vector<int>>();
  }
  return oracle;
}

void save_predictions(const std::string& path, const Predictions& preds) {
  TensorFile tf;
  nlohmann::json meta;
  meta["schema"] = "predictions";
  meta["doc_ids"] = preds.doc_ids;
  tf.meta_json = meta.dump();
  tf.tensors["scores"] = preds.scores;
  save_tensor_file(path, tf);
}

Predictions load_predictions(const std::string& path) {
  TensorFile tf = load_tensor_file(path);
  nlohmann::json meta = nlohmann::json::parse(tf.meta_json);
  if (meta.value("schema", "") != "predictions") throw IoError("not a predictions file: " + path);
  Predictions p;
  p.scores = tf.at("scores");
  p.doc_ids = meta.at("doc_ids").get<std::vector<std::string>>();
  return p;
}

void cmd_synth(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "synth");
  auto result = corpus::generate_synthetic(cfg.synth_spec());
  const std::string corpus_path = join(m.run_dir, "corpus.jsonl");
  const std::string vocab_path = join(m.run_dir, "vocab.json");
  const std::string oracle_path = join(m.run_dir, "oracle.json");
  corpus::write_jsonl(corpus_path, result.corpus);
  corpus::save_vocabulary(vocab_path, result.corpus.vocab);
  save_oracle(oracle_path, result.oracle, result.corpus.vocab);

  m.output(corpus_path);
  m.output(vocab_path);
  m.output(oracle_path);
  m.write(cfg);
  std::cout << "synth: " << result.corpus.docs.size() << " documents, "
            << result.corpus.vocab.num_tokens() << " tokens, "
            << result.corpus.vocab.num_labels() << " labels -> " << m.run_dir << "\n";
}

void cmd_ingest(const config::RunConfig& cfg, const std::string& input_jsonl) {
  auto m = begin_command(cfg, "ingest");
  require_artifact(input_jsonl, "an external corpus export");
  m.input(input_jsonl);
  auto records = corpus::read_jsonl(input_jsonl);
  corpus::Corpus c = corpus::ingest(records, cfg.min_token_df());

  // The run corpus keeps the raw text; tokenization is redone against the
  // persisted vocabulary on every load.
  const std::string corpus_path = join(m.run_dir, "corpus.jsonl");
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["labels"] = r.labels;
    out += j.dump();
    out += "\n";
  }
  write_file(corpus_path, out);
  const std::string vocab_path = join(m.run_dir, "vocab.json");
  corpus::save_vocabulary(vocab_path, c.vocab);
  m.output(corpus_path);
  m.output(vocab_path);
  m.write(cfg);
  std::cout << "ingest: " << c.docs.size() << " documents (" << c.dropped_empty_docs
            << " dropped empty), vocabulary " << c.vocab.num_tokens() << " tokens\n";
}

void cmd_gain(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "gain");
  corpus::Corpus c = load_run_corpus(m.run_dir);
  m.input(join(m.run_dir, "corpus.jsonl"));
  m.input(join(m.run_dir, "vocab.json"));
  const auto split = split_run(cfg, c);
  const auto G = gain::compute_gain(c, split.train, cfg.laplace_alpha());
  const std::string gain_path = join(m.run_dir, "gain.bin");
  gain::save_gain(gain_path, G, join(m.run_dir, "vocab.json"));
  m.output(gain_path);
  m.output(gain_path + ".json");
  m.write(cfg);
  std::cout << "gain: " << G.num_tokens() << " x " << G.num_labels() << " matrix from "
            << split.train.size() << " training documents\n";
}

void cmd_pretrain_l2r(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "pretrain-l2r");
  const std::string gain_path = join(m.run_dir, "gain.bin");
  require_artifact(gain_path, "gain");
  m.input(gain_path);
  const auto G = gain::load_gain(gain_path);
  const auto cfg_l2r = cfg.l2r_config();
  auto result = ranker::pretrain(G, cfg_l2r);
  if (!result.ndcg_curve.empty() && !std::isfinite(result.ndcg_curve.back())) {
    throw NumericFailure("L2R pretraining diverged");
  }
  nlohmann::json meta;
  meta["ndcg_curve"] = result.ndcg_curve;
  meta["k_prime"] = cfg_l2r.k_prime;
  meta["skipped_instances"] = result.skipped_instances;
  meta["vocabulary_hash"] = file_hash_hex(join(m.run_dir, "vocab.json"));
  const std::string ckpt_path = join(m.run_dir, "l2r.ckpt");
  ranker::save_l2r(ckpt_path, result.model, meta.dump());
  write_file(join(m.run_dir, "l2r_manifest.json"), meta.dump(2) + "\n");
  m.output(ckpt_path);
  m.output(join(m.run_dir, "l2r_manifest.json"));
  m.write(cfg);
  std::cout << "pretrain-l2r: final mean nDCG@" << cfg_l2r.k_prime << " = "
            << (result.ndcg_curve.empty() ? 0.0 : result.ndcg_curve.back()) << "\n";
}

void cmd_train(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "train");
  corpus::Corpus c = load_run_corpus(m.run_dir);
  const std::string gain_path = join(m.run_dir, "gain.bin");
  require_artifact(gain_path, "gain");
  m.input(gain_path);
  const auto G = gain::load_gain(gain_path);
  const auto split = split_run(cfg, c);
  const auto spec = cfg.system_spec();

  const std::string ckpt_dir = join(m.run_dir, "ckpt");
  const bool resume = cfg.tree().contains("trainer") &&
                      cfg.tree()["trainer"].value("resume", false);

  trainer::TrainResult result;
  if (resume) {
    require_artifact(join(ckpt_dir, "optim.ckpt"), "train (nothing to resume)");
    trainer::TrainerState state = trainer::load_trainer_state(ckpt_dir);
    result = trainer::train(state, c, split.train, split.val, G, spec.train, ckpt_dir);
  } else {
    const ranker::L2RModel* pretrained = nullptr;
    ranker::L2RModel loaded;
    if (spec.use_planted) {
      const std::string l2r_path = join(m.run_dir, "l2r.ckpt");
      require_artifact(l2r_path, "pretrain-l2r");
      m.input(l2r_path);
      loaded = ranker::load_l2r(l2r_path);
      pretrained = &loaded;
    }
    auto sys = trainer::train_system(c, split.train, split.val, G, spec, spec.train.seed,
                                     pretrained, ckpt_dir);
    result = sys.result;
  }
  if (result.aborted_nan) {
    throw NumericFailure("training diverged (NaN loss); last good checkpoint kept in " + ckpt_dir);
  }

  const std::string log_path = join(m.run_dir, "metrics.csv");
  // Resumed runs append to the existing log.
  std::string csv = trainer::log_to_csv(result.log);
  if (resume && fs::exists(log_path)) {
    std::string prior = read_file(log_path);
    csv = prior + csv.substr(csv.find('\n') + 1);
  }
  write_file(log_path, csv);
  m.output(log_path);
  m.output(ckpt_dir);
  m.write(cfg);
  std::cout << "train: " << result.epochs_run << " epochs, best val micro-F1 "
            << result.best_metric << " at epoch " << result.best_epoch << "\n";
}

void cmd_eval(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "eval");
  corpus::Corpus c = load_run_corpus(m.run_dir);
  const std::string gain_path = join(m.run_dir, "gain.bin");
  require_artifact(gain_path, "gain");
  const auto G = gain::load_gain(gain_path);
  const auto split = split_run(cfg, c);
  const bool use_best = !cfg.tree().contains("metrics") ||
                        cfg.tree()["metrics"].value("use_best", true);
  auto bundle = load_bundle_for_eval(cfg, use_best);

  const std::string split_name =
      cfg.tree().contains("metrics") ? cfg.tree()["metrics"].value("split", "test") : "test";
  const std::vector<int>& ids = split_name == "train" ? split.train
                                : split_name == "val" ? split.val
                                                      : split.test;
  Predictions preds;
  preds.scores = trainer::predict_scores(bundle, G, c, ids);
  for (int id : ids) preds.doc_ids.push_back(c.docs[static_cast<std::size_t>(id)].id);
  if (!preds.scores.allFinite()) throw NumericFailure("evaluation produced non-finite scores");

  const auto gold = trainer::gold_sets(c, ids);
  const auto report = metrics::full_report(preds.scores, gold, cfg.metrics_threshold());

  const std::string pred_path = join(m.run_dir, "predictions_" + split_name + ".bin");
  save_predictions(pred_path, preds);
  const std::string report_path = join(m.run_dir, "metrics_" + split_name + ".json");
  write_file(report_path, metrics::report_to_json(report));
  const std::string csv_path = join(m.run_dir, "metrics_" + split_name + ".csv");
  write_file(csv_path, metrics::report_csv_header(report) + "\n" + metrics::report_csv_row(report) + "\n");
  m.output(pred_path);
  m.output(report_path);
  m.output(csv_path);
  m.write(cfg);
  std::cout << "eval[" << split_name << "]: micro-F1 " << report.prf.micro_f1 << ", P@5 "
            << report.p_at_k[2] << ", P@15 " << report.p_at_k[4] << "\n";
}

void cmd_ablate(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "ablate");
  corpus::Corpus c = load_run_corpus(m.run_dir);
  const std::string gain_path = join(m.run_dir, "gain.bin");
  require_artifact(gain_path, "gain");
  const auto G = gain::load_gain(gain_path);
  const auto split = split_run(cfg, c);
  const auto table = trainer::run_ablation(c, split, G, cfg.system_spec(), cfg.ablation_seeds());
  const std::string path = join(m.run_dir, "ablation.csv");
  write_file(path, table.to_csv());
  m.output(path);
  m.write(cfg);
  std::cout << "ablate: " << table.cells.size() << " cells -> " << path << "\n";
}

void cmd_ensemble(const config::RunConfig& cfg, const std::string& preds_a,
                  const std::string& preds_b) {
  auto m = begin_command(cfg, "ensemble");
  require_artifact(preds_a, "eval (forward model)");
  require_artifact(preds_b, "eval (backward model)");
  m.input(preds_a);
  m.input(preds_b);
  auto a = load_predictions(preds_a);
  auto b = load_predictions(preds_b);
  if (a.doc_ids != b.doc_ids) {
    throw corpus::ConfigError("ensemble: prediction files cover different documents");
  }
  Predictions avg;
  avg.scores = trainer::ensemble_average(a.scores, b.scores);
  avg.doc_ids = a.doc_ids;
  const std::string out_path = join(m.run_dir, "predictions_ensemble.bin");
  save_predictions(out_path, avg);

  corpus::Corpus c = load_run_corpus(m.run_dir);
  std::map<std::string, const corpus::Document*> by_id;
  for (const auto& d : c.docs) by_id[d.id] = &d;
  metrics::GoldSets gold;
  for (const auto& id : avg.doc_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw corpus::ConfigError("ensemble: unknown document id " + id);
    gold.push_back(it->second->labels);
  }
  const auto report = metrics::full_report(avg.scores, gold, cfg.metrics_threshold());
  const std::string report_path = join(m.run_dir, "metrics_ensemble.json");
  write_file(report_path, metrics::report_to_json(report));
  m.output(out_path);
  m.output(report_path);
  m.write(cfg);
  std::cout << "ensemble: micro-F1 " << report.prf.micro_f1 << ", P@15 " << report.p_at_k[4]
            << "\n";
}

void cmd_inspect(const config::RunConfig& cfg) {
  auto m = begin_command(cfg, "inspect");
  corpus::Corpus c = load_run_corpus(m.run_dir);
  const std::string gain_path = join(m.run_dir, "gain.bin");
  require_artifact(gain_path, "gain");
  const auto G = gain::load_gain(gain_path);
  const auto split = split_run(cfg, c);
  auto bundle = load_bundle_for_eval(cfg, true);
  const auto models = bundle.views(&G);

  const std::string split_name =
      cfg.tree().contains("inspect") ? cfg.tree()["inspect"].value("split", "test") : "test";
  const std::vector<int>& ids = split_name == "train" ? split.train
                                : split_name == "val" ? split.val
                                                      : split.test;
  const int top_n = 5;
  std::string out;
  for (int id : ids) {
    const auto& doc = c.docs[static_cast<std::size_t>(id)];
    const Eigen::MatrixXd H = encoder::encode(bundle.enc, doc.tokens);
    const Eigen::MatrixXd A = bundle.dec.use_learned
                                  ? decoder::learned_attention(H, bundle.dec.U)
                                  : Eigen::MatrixXd::Zero(H.rows(), bundle.dec.num_labels());
    const Eigen::MatrixXd S = bundle.dec.use_static
                                  ? decoder::static_attention(doc.tokens, G,
                                                              bundle.dec.static_normalize)
                                  : Eigen::MatrixXd::Zero(H.rows(), bundle.dec.num_labels());
    const Eigen::MatrixXd P =
        bundle.dec.use_planted && bundle.has_l2r
            ? decoder::planted_attention(doc.tokens, bundle.l2r, bundle.dec)
            : Eigen::MatrixXd::Zero(H.rows(), bundle.dec.num_labels());
    for (int label : doc.labels) {
      const Eigen::VectorXd combined = A.col(label) + S.col(label) + P.col(label);
      std::vector<int> pos(static_cast<std::size_t>(combined.size()));
      std::iota(pos.begin(), pos.end(), 0);
      std::stable_sort(pos.begin(), pos.end(), [&](int x, int y) {
        if (combined[x] != combined[y]) return combined[x] > combined[y];
        return x < y;
      });
      nlohmann::json top = nlohmann::json::array();
      for (int i = 0; i < std::min<int>(top_n, static_cast<int>(pos.size())); ++i) {
        const int j = pos[static_cast<std::size_t>(i)];
        top.push_back({{"position", j},
                       {"token", c.vocab.tokens[static_cast<std::size_t>(doc.tokens[static_cast<std::size_t>(j)])]},
                       {"A", A(j, label)},
                       {"S", S(j, label)},
                       {"P", P(j, label)}});
      }
      nlohmann::json line;
      line["doc_id"] = doc.id;
      line["label"] = c.vocab.labels[static_cast<std::size_t>(label)];
      line["top_tokens"] = top;
      out += line.dump();
      out += "\n";
    }
  }
  const std::string path = join(m.run_dir, "inspect_" + split_name + ".jsonl");
  write_file(path, out);
  m.output(path);
  m.write(cfg);
  std::cout << "inspect: wrote " << path << "\n";
}

int main_entry(int argc, const char* const* argv) {
  CLI::App app{"PLANT: planted-attention extreme multi-label text classification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_dir_flag;
  std::int64_t seed_flag = -1;
  std::vector<std::string> overrides;
  std::string ingest_input;
  std::string ens_a, ens_b;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--run-dir", run_dir_flag, "output directory (overrides config)");
    sub->add_option("--seed", seed_flag, "global seed (overrides config)");
    sub->add_option("--set", overrides, "dotted-path config override key=value")
        ->take_all();
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  CLI::App* ingest = app.add_subcommand("ingest", "preprocess an external JSONL corpus");
  ingest->add_option("--input", ingest_input, "JSONL corpus to ingest")->required();
  CLI::App* gain_cmd = app.add_subcommand("gain", "compute the mutual-information gain matrix");
  CLI::App* pretrain = app.add_subcommand("pretrain-l2r", "LambdaRank-pretrain the L2R model");
  CLI::App* train = app.add_subcommand("train", "fine-tune the decoder");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model");
  CLI::App* ablate = app.add_subcommand("ablate", "run the ablation matrix");
  CLI::App* ensemble = app.add_subcommand("ensemble", "average two prediction files");
  ensemble->add_option("--a", ens_a, "first predictions file")->required();
  ensemble->add_option("--b", ens_b, "second predictions file")->required();
  CLI::App* inspect = app.add_subcommand("inspect", "dump top attended tokens per gold label");
  for (CLI::App* sub : {synth, ingest, gain_cmd, pretrain, train, eval, ablate, ensemble, inspect}) {
    add_common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const std::optional<std::string> run_dir =
        run_dir_flag.empty() ? std::nullopt : std::optional<std::string>(run_dir_flag);
    const std::optional<std::uint64_t> seed =
        seed_flag < 0 ? std::nullopt : std::optional<std::uint64_t>(static_cast<std::uint64_t>(seed_flag));
    const config::RunConfig cfg =
        config_path.empty()
            ? config::RunConfig::from_json(nlohmann::json::object(), overrides, run_dir, seed)
            : config::RunConfig::from_file(config_path, overrides, run_dir, seed);

    if (synth->parsed()) cmd_synth(cfg);
    else if (ingest->parsed()) cmd_ingest(cfg, ingest_input);
    else if (gain_cmd->parsed()) cmd_gain(cfg);
    else if (pretrain->parsed()) cmd_pretrain_l2r(cfg);
    else if (train->parsed()) cmd_train(cfg);
    else if (eval->parsed()) cmd_eval(cfg);
    else if (ablate->parsed()) cmd_ablate(cfg);
    else if (ensemble->parsed()) cmd_ensemble(cfg, ens_a, ens_b);
    else if (inspect->parsed()) cmd_inspect(cfg);
    return kExitOk;
  } catch (const corpus::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MissingPrerequisite& e) {
    std::cerr << "missing prerequisite: " << e.what() << "\n";
    return kExitMissing;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace plant::cli
