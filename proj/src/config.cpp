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
#include "plant/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "plant/tensor_io.hpp"

namespace plant::config {

namespace {

const nlohmann::json kEmpty = nlohmann::json::object();

const nlohmann::json& block(const nlohmann::json& tree, const char* name) {
  auto it = tree.find(name);
  return it == tree.end() ? kEmpty : *it;
}

template <typename T>
T get(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  return it->get<T>();
}

}  // namespace

void apply_override(nlohmann::json& tree, const std::string& key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string::npos) {
    throw corpus::ConfigError("--set expects key=value, got: " + key_value);
  }
  const std::string path = key_value.substr(0, eq);
  const std::string raw = key_value.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;  // bare strings stay strings
  }
  nlohmann::json* node = &tree;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw corpus::ConfigError("--set: empty path segment in " + key_value);
    parts.push_back(part);
  }
  if (parts.empty()) throw corpus::ConfigError("--set: empty key in " + key_value);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    node = &(*node)[parts[i]];
    if (!node->is_object() && !node->is_null()) {
      throw corpus::ConfigError("--set: " + parts[i] + " is not an object in " + key_value);
    }
  }
  (*node)[parts.back()] = value;
}

RunConfig RunConfig::from_file(const std::string& path, const std::vector<std::string>& overrides,
                               const std::optional<std::string>& run_dir,
                               const std::optional<std::uint64_t>& seed) {
  nlohmann::json tree;
  try {
    tree = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw corpus::ConfigError(std::string("config parse error in ") + path + ": " + e.what());
  }
  return from_json(std::move(tree), overrides, run_dir, seed);
}

RunConfig RunConfig::from_json(nlohmann::json tree, const std::vector<std::string>& overrides,
                               const std::optional<std::string>& run_dir,
                               const std::optional<std::uint64_t>& seed) {
  RunConfig c;
  c.tree_ = std::move(tree);
  if (!c.tree_.is_object()) throw corpus::ConfigError("config root must be a JSON object");
  for (const auto& kv : overrides) apply_override(c.tree_, kv);
  if (run_dir) c.tree_["run_dir"] = *run_dir;
  if (seed) c.tree_["seed"] = *seed;
  c.validate();
  return c;
}

std::string RunConfig::run_dir() const {
  std::string dir = get<std::string>(tree_, "run_dir", "run");
  std::filesystem::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("PLANT_RUN_DIR")) p = std::filesystem::path(root) / p;
  }
  return p.string();
}

std::uint64_t RunConfig::seed() const { return get<std::uint64_t>(tree_, "seed", 17); }

corpus::SynthSpec RunConfig::synth_spec() const {
  const auto& s = block(block(tree_, "corpus"), "synth");
  corpus::SynthSpec spec;
  spec.num_labels = get<int>(s, "num_labels", 0);
  spec.num_docs = get<int>(s, "num_docs", 0);
  spec.zipf_exponent = get<double>(s, "zipf_exponent", 1.0);
  spec.signal_tokens_per_label = get<int>(s, "signal_tokens_per_label", 3);
  spec.signal_injection_prob = get<double>(s, "signal_injection_prob", 1.0);
  spec.noise_vocab_size = get<int>(s, "noise_vocab_size", 0);
  if (s.contains("doc_length")) {
    spec.doc_length_min = s["doc_length"].at(0).get<int>();
    spec.doc_length_max = s["doc_length"].at(1).get<int>();
  }
  spec.labels_per_doc = get<double>(s, "labels_per_doc", 3.0);
  spec.seed = get<std::uint64_t>(s, "seed", seed());
  return spec;
}

corpus::SplitSpec RunConfig::split_spec() const {
  const auto& s = block(block(tree_, "corpus"), "split");
  corpus::SplitSpec spec;
  spec.train = get<double>(s, "train", 0.8);
  spec.val = get<double>(s, "val", 0.1);
  spec.test = get<double>(s, "test", 0.1);
  spec.seed = get<std::uint64_t>(s, "seed", seed());
  return spec;
}

int RunConfig::min_token_df() const {
  return get<int>(block(tree_, "corpus"), "min_token_df", 3);
}

double RunConfig::laplace_alpha() const {
  return get<double>(block(tree_, "gain"), "laplace_alpha", 0.0);
}

ranker::L2RTrainConfig RunConfig::l2r_config() const {
  const auto& r = block(tree_, "ranker");
  ranker::L2RTrainConfig c;
  c.k_prime = get<int>(r, "k_prime", 5);
  c.sigma = get<double>(r, "sigma", 1.0);
  c.eta = get<double>(r, "eta", 0.05);
  c.epochs = get<int>(r, "epochs", 20);
  c.candidate_pool = get<int>(r, "candidate_pool", 256);
  c.pair_cap = get<int>(r, "pair_cap", 5000);
  c.grade_bins = get<int>(r, "grade_bins", 5);
  c.raw_gains = get<bool>(r, "raw_gains", false);
  c.dcg_minus_one = get<bool>(r, "dcg_minus_one", false);
  c.d_emb = get<int>(r, "d_emb", 16);
  c.hidden = get<int>(r, "hidden", 32);
  c.num_layers = get<int>(r, "layers", 2);
  c.seed = get<std::uint64_t>(r, "seed", seed());
  return c;
}

trainer::TrainConfig RunConfig::train_config() const {
  const auto& t = block(tree_, "trainer");
  trainer::TrainConfig c;
  c.epochs = get<int>(t, "epochs", 10);
  c.batch_size = get<int>(t, "batch_size", 16);
  c.beta1 = get<double>(t, "beta1", 0.9);
  c.beta2 = get<double>(t, "beta2", 0.99);
  c.lr_max = get<double>(t, "lr_max", 3e-2);
  c.lr_min = get<double>(t, "lr_min", 1e-5);
  c.wd_min = get<double>(t, "wd_min", 1e-2);
  c.wd_max = get<double>(t, "wd_max", 3e-1);
  c.lr_factor_encoder = get<double>(t, "lr_factor_encoder", 1.0 / 3.0);
  c.lr_factor_l2r = get<double>(t, "lr_factor_l2r", 1.0 / 3.0);
  c.lr_factor_decoder = get<double>(t, "lr_factor_decoder", 1.0);
  const std::string mode = get<std::string>(t, "unfreeze", "gradual");
  c.unfreeze = mode == "full"             ? trainer::UnfreezeMode::kFull
               : mode == "frozen_encoder" ? trainer::UnfreezeMode::kFrozenEncoder
                                          : trainer::UnfreezeMode::kGradual;
  c.unfreeze_l2r_epoch = get<int>(t, "unfreeze_l2r_epoch", 2);
  c.unfreeze_encoder_epoch = get<int>(t, "unfreeze_encoder_epoch", 4);
  c.clip_norm = get<double>(t, "clip_norm", 1.0);
  c.patience = get<int>(t, "patience", 10);
  c.seed = get<std::uint64_t>(t, "seed", seed());
  return c;
}

trainer::SystemSpec RunConfig::system_spec() const {
  const auto& e = block(tree_, "encoder");
  const auto& d = block(tree_, "decoder");
  trainer::SystemSpec s;
  s.arch = get<std::string>(e, "arch", "recurrent") == "mean_window"
               ? encoder::Arch::kMeanWindow
               : encoder::Arch::kRecurrent;
  s.direction = get<std::string>(e, "direction", "forward") == "backward"
                    ? encoder::Direction::kBackward
                    : encoder::Direction::kForward;
  s.s_e = get<int>(e, "s_e", 32);
  s.window = get<int>(e, "window", 0);
  s.l2r = l2r_config();
  s.use_learned = get<bool>(d, "use_learned", true);
  s.use_static = get<bool>(d, "use_static", true);
  s.use_planted = get<bool>(d, "use_planted", true);
  s.use_inattention = get<bool>(d, "use_inattention", true);
  s.static_normalize = get<bool>(d, "static_normalize", false);
  s.inattention_mode = get<std::string>(d, "inattention_mode", "neg_inf_mask") == "literal_zero"
                           ? decoder::InattentionMode::kLiteralZero
                           : decoder::InattentionMode::kNegInfMask;
  s.phi = get<std::string>(d, "phi", "elementwise_max") == "gated" ? decoder::Phi::kGated
                                                                   : decoder::Phi::kElementwiseMax;
  s.inattention_k = get<int>(d, "inattention_k", 8);
  s.segment_len = get<int>(d, "segment_len", 72);
  s.stateful = get<bool>(d, "stateful", false);
  s.u_init_from_l2r = get<bool>(d, "u_init_from_l2r", true);
  s.train = train_config();
  return s;
}

double RunConfig::metrics_threshold() const {
  return get<double>(block(tree_, "metrics"), "threshold", 0.5);
}

std::vector<std::uint64_t> RunConfig::ablation_seeds() const {
  const auto& t = block(tree_, "trainer");
  if (t.contains("ablation_seeds")) {
    return t["ablation_seeds"].get<std::vector<std::uint64_t>>();
  }
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 5; ++i) seeds.push_back(seed() + i);
  return seeds;
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  auto expect = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  const auto& corpus_block = block(tree_, "corpus");
  if (corpus_block.contains("split")) {
    const auto& s = corpus_block["split"];
    const double sum = get<double>(s, "train", 0.8) + get<double>(s, "val", 0.1) +
                       get<double>(s, "test", 0.1);
    expect(std::abs(sum - 1.0) <= 1e-9, "corpus.split fractions must sum to 1");
    expect(get<double>(s, "train", 0.8) >= 0 && get<double>(s, "val", 0.1) >= 0 &&
               get<double>(s, "test", 0.1) >= 0,
           "corpus.split fractions must be nonnegative");
  }
  if (corpus_block.contains("synth")) {
    const auto& s = corpus_block["synth"];
    expect(get<int>(s, "num_labels", 0) > 0, "corpus.synth.num_labels must be > 0");
    expect(get<int>(s, "num_docs", 0) > 0, "corpus.synth.num_docs must be > 0");
    expect(get<double>(s, "zipf_exponent", 1.0) > 0, "corpus.synth.zipf_exponent must be > 0");
    const double p = get<double>(s, "signal_injection_prob", 1.0);
    expect(p >= 0 && p <= 1, "corpus.synth.signal_injection_prob must be a probability");
    expect(get<int>(s, "noise_vocab_size", 0) > 0, "corpus.synth.noise_vocab_size must be > 0");
    if (s.contains("doc_length")) {
      expect(s["doc_length"].is_array() && s["doc_length"].size() == 2,
             "corpus.synth.doc_length must be [min, max]");
    }
  }
  expect(get<int>(corpus_block, "min_token_df", 3) >= 1, "corpus.min_token_df must be >= 1");

  const auto& r = block(tree_, "ranker");
  expect(get<int>(r, "k_prime", 5) >= 1, "ranker.k_prime must be >= 1");
  expect(get<double>(r, "sigma", 1.0) > 0, "ranker.sigma must be > 0");
  expect(get<double>(r, "eta", 0.05) > 0, "ranker.eta must be > 0");
  expect(get<int>(r, "grade_bins", 5) >= 2, "ranker.grade_bins must be >= 2");
  expect(get<int>(r, "candidate_pool", 256) >= 2, "ranker.candidate_pool must be >= 2");

  const auto& d = block(tree_, "decoder");
  expect(get<int>(d, "inattention_k", 8) >= 1, "decoder.inattention_k must be >= 1");
  expect(get<bool>(d, "use_learned", true) || get<bool>(d, "use_static", true) ||
             get<bool>(d, "use_planted", true),
         "decoder: at least one attention source must be enabled");
  const std::string mode = get<std::string>(d, "inattention_mode", "neg_inf_mask");
  expect(mode == "neg_inf_mask" || mode == "literal_zero",
         "decoder.inattention_mode must be neg_inf_mask or literal_zero");
  const std::string phi = get<std::string>(d, "phi", "elementwise_max");
  expect(phi == "elementwise_max" || phi == "gated",
         "decoder.phi must be elementwise_max or gated");
  expect(get<int>(d, "segment_len", 72) >= 1, "decoder.segment_len must be >= 1");

  const auto& t = block(tree_, "trainer");
  expect(get<int>(t, "epochs", 10) >= 0, "trainer.epochs must be >= 0");
  expect(get<int>(t, "batch_size", 16) >= 1, "trainer.batch_size must be >= 1");
  auto factor_ok = [&](const char* key) {
    const double f = get<double>(t, key, 1.0 / 3.0);
    return f > 0 && f <= 1.0;
  };
  expect(factor_ok("lr_factor_encoder"), "trainer.lr_factor_encoder must lie in (0, 1]");
  expect(get<double>(t, "lr_factor_l2r", 1.0 / 3.0) >= 0 &&
             get<double>(t, "lr_factor_l2r", 1.0 / 3.0) <= 1.0,
         "trainer.lr_factor_l2r must lie in [0, 1]");
  expect(get<double>(t, "lr_max", 3e-2) >= get<double>(t, "lr_min", 1e-5),
         "trainer lr schedule must be decreasing (lr_max >= lr_min)");
  expect(get<double>(t, "wd_max", 3e-1) >= get<double>(t, "wd_min", 1e-2),
         "trainer wd schedule must be increasing (wd_max >= wd_min)");
  const std::string unfreeze = get<std::string>(t, "unfreeze", "gradual");
  expect(unfreeze == "gradual" || unfreeze == "full" || unfreeze == "frozen_encoder",
         "trainer.unfreeze must be gradual, full or frozen_encoder");

  const auto& m = block(tree_, "metrics");
  const double th = get<double>(m, "threshold", 0.5);
  expect(th >= 0 && th <= 1, "metrics.threshold must lie in [0, 1]");

  const auto& e = block(tree_, "encoder");
  const std::string arch = get<std::string>(e, "arch", "recurrent");
  expect(arch == "recurrent" || arch == "mean_window",
         "encoder.arch must be recurrent or mean_window");
  const std::string dir = get<std::string>(e, "direction", "forward");
  expect(dir == "forward" || dir == "backward", "encoder.direction must be forward or backward");
  expect(get<int>(e, "s_e", 32) >= 1, "encoder.s_e must be >= 1");

  if (!problems.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw corpus::ConfigError(msg);
  }
}

}  // namespace plant::config
