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

#include "plant/gain.hpp"
#include "plant/rng.hpp"
#include "testutil.hpp"

using namespace plant;

namespace {

// Four-document fixture: token/label presence controlled per doc.
// Tokens: 1 = "perfect" (docs 0,1), 2 = "indep" (docs 0,2), 3 = "solo" (doc 0),
// 4 = "dup" (doc 3, twice). Labels: 0 = docs {0,1}, 1 = docs {0,1,2}.
corpus::Corpus tiny_fixture() {
  corpus::Corpus c;
  c.vocab.tokens = {"<unk>", "perfect", "indep", "solo", "dup"};
  c.vocab.labels = {"A", "B"};
  c.vocab.min_token_df = 1;
  auto doc = [](std::string id, std::vector<int> toks, std::vector<int> labs) {
    corpus::Document d;
    d.id = std::move(id);
    d.tokens = std::move(toks);
    d.labels = std::move(labs);
    return d;
  };
  c.docs.push_back(doc("0", {1, 2, 3}, {0, 1}));
  c.docs.push_back(doc("1", {1}, {0, 1}));
  c.docs.push_back(doc("2", {2}, {1}));
  c.docs.push_back(doc("3", {4, 4}, {}));  // repeated token counts once
  return c;
}

}  // namespace

TEST_CASE("worked 2x2 contingency values") {
  const auto c = tiny_fixture();
  const auto G = gain::compute_gain(c);

  // Perfect association: label A in docs {0,1}, token "perfect" in docs {0,1}.
  CHECK(G.g(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // Independence: label A in {0,1}, token "indep" in {0,2} -> exactly zero.
  CHECK(G.g(2, 0) == 0.0);

  // Label B in {0,1,2}, token "solo" in {0}. Brute-force oracle value in
  // natural log (0.1226 is the same quantity in bits).
  const double oracle = testutil::brute_force_mig(c, testutil::all_doc_ids(c), 3, 1);
  CHECK(oracle == doctest::Approx(0.0849495184).epsilon(1e-8));
  CHECK(G.g(3, 1) == doctest::Approx(oracle).epsilon(1e-12));

  // Presence is per document: the doubled token has document frequency 1.
  const auto counts = gain::count_presence(c, {});
  CHECK(counts.token_docs[4] == 1);
}

TEST_CASE("gain matches the brute-force oracle on a random synthetic corpus") {
  corpus::SynthSpec spec;
  spec.num_labels = 25;
  spec.num_docs = 400;
  spec.zipf_exponent = 1.1;
  spec.signal_tokens_per_label = 2;
  spec.signal_injection_prob = 0.9;
  spec.noise_vocab_size = 120;
  spec.doc_length_min = 10;
  spec.doc_length_max = 30;
  spec.seed = 11;
  const auto res = corpus::generate_synthetic(spec);
  const auto ids = testutil::all_doc_ids(res.corpus);
  const auto G = gain::compute_gain(res.corpus);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(G.num_tokens() - 1)));
    const int l = static_cast<int>(rng.below(static_cast<std::uint64_t>(G.num_labels())));
    const double expect = testutil::brute_force_mig(res.corpus, ids, t, l);
    CHECK(std::abs(G.g(t, l) - expect) < 1e-12);
  }
}

TEST_CASE("gain entries are nonnegative and symmetric in the event roles") {
  const auto c = tiny_fixture();
  const auto counts = gain::count_presence(c, {});
  const auto G = gain::gain_from_counts(counts);
  CHECK(G.g.minCoeff() >= 0.0);

  // Swapping the roles of the two binary events leaves MI unchanged: recompute
  // with the transposed contingency table by hand for every pair.
  for (int t = 1; t < G.num_tokens(); ++t) {
    for (int l = 0; l < G.num_labels(); ++l) {
      corpus::Corpus swapped;
      swapped.vocab.tokens = {"<unk>", "x"};
      swapped.vocab.labels = {"y"};
      for (const auto& d : c.docs) {
        corpus::Document nd;
        nd.id = d.id;
        const bool tok = std::find(d.tokens.begin(), d.tokens.end(), t) != d.tokens.end();
        const bool lab = std::find(d.labels.begin(), d.labels.end(), l) != d.labels.end();
        // Token presence becomes the label event and vice versa.
        nd.tokens = lab ? std::vector<int>{1} : std::vector<int>{corpus::kUnkId};
        if (tok) nd.labels = {0};
        swapped.docs.push_back(nd);
      }
      const auto Gs = gain::compute_gain(swapped);
      CHECK(Gs.g(1, 0) == doctest::Approx(G.g(t, l)).epsilon(1e-12));
    }
  }
}

TEST_CASE("unk row stays zero and empty corpus is rejected") {
  const auto c = tiny_fixture();
  const auto G = gain::compute_gain(c);
  for (int l = 0; l < G.num_labels(); ++l) CHECK(G.g(corpus::kUnkId, l) == 0.0);

  corpus::Corpus empty;
  empty.vocab = c.vocab;
  CHECK_THROWS_AS(gain::compute_gain(empty), corpus::ConfigError);
}

TEST_CASE("shard-merge equals whole-corpus counts exactly") {
  corpus::SynthSpec spec;
  spec.num_labels = 10;
  spec.num_docs = 200;
  spec.zipf_exponent = 1.0;
  spec.signal_tokens_per_label = 2;
  spec.signal_injection_prob = 0.8;
  spec.noise_vocab_size = 60;
  spec.doc_length_min = 5;
  spec.doc_length_max = 15;
  spec.seed = 3;
  const auto res = corpus::generate_synthetic(spec);

  const auto whole = gain::count_presence(res.corpus, {});
  auto merged = gain::PresenceCounts::zeros(res.corpus.vocab.num_tokens(),
                                            res.corpus.vocab.num_labels());
  const int n = static_cast<int>(res.corpus.docs.size());
  for (int shard = 0; shard < 4; ++shard) {
    auto part = gain::PresenceCounts::zeros(res.corpus.vocab.num_tokens(),
                                            res.corpus.vocab.num_labels());
    for (int i = shard; i < n; i += 4) part.add_document(res.corpus.docs[static_cast<std::size_t>(i)]);
    merged.merge(part);
  }
  CHECK(merged.num_docs == whole.num_docs);
  CHECK(merged.token_docs == whole.token_docs);
  CHECK(merged.label_docs == whole.label_docs);
  CHECK((merged.joint - whole.joint).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("signal tokens out-gain noise tokens on synthetic data") {
  corpus::SynthSpec spec;
  spec.num_labels = 15;
  spec.num_docs = 600;
  spec.zipf_exponent = 1.1;
  spec.signal_tokens_per_label = 3;
  spec.signal_injection_prob = 0.95;
  spec.noise_vocab_size = 100;
  spec.doc_length_min = 15;
  spec.doc_length_max = 30;
  spec.labels_per_doc = 2.0;
  spec.seed = 21;
  const auto res = corpus::generate_synthetic(spec);
  const auto G = gain::compute_gain(res.corpus);

  const int noise_base = 1 + spec.num_labels * spec.signal_tokens_per_label;
  for (const auto& [label, signals] : res.oracle) {
    double signal_mean = 0;
    for (int s : signals) signal_mean += G.g(s, label);
    signal_mean /= static_cast<double>(signals.size());
    double noise_mean = 0;
    int noise_count = 0;
    for (int t = noise_base; t < G.num_tokens(); ++t) {
      noise_mean += G.g(t, label);
      noise_count++;
    }
    noise_mean /= static_cast<double>(noise_count);
    CHECK(signal_mean > noise_mean);
  }
}

TEST_CASE("top_tokens ranks by gain with index tie-break") {
  gain::GainMatrix G;
  G.g.setZero(4, 1);
  G.g(1, 0) = 0.1;
  G.g(2, 0) = 0.5;
  G.g(3, 0) = 0.5;
  const auto top2 = gain::top_tokens(G, 0, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0] == std::pair<int, double>{2, 0.5});
  CHECK(top2[1] == std::pair<int, double>{3, 0.5});

  const auto all = gain::top_tokens(G, 0, 99);
  CHECK(all.size() == 4);

  gain::GainMatrix Z;
  Z.g.setZero(3, 1);
  const auto zeros = gain::top_tokens(Z, 0, 2);
  REQUIRE(zeros.size() == 2);
  CHECK(zeros[0].first == 0);
  CHECK(zeros[1].first == 1);

  CHECK_THROWS_AS(gain::top_tokens(G, 5, 1), corpus::ConfigError);
}

TEST_CASE("gain persists byte-exactly with sidecar") {
  namespace fs = std::filesystem;
  const auto c = tiny_fixture();
  const auto G = gain::compute_gain(c);
  const auto dir = fs::temp_directory_path() / "plant_gain_rt";
  fs::create_directories(dir);
  const auto vocab_path = (dir / "vocab.json").string();
  corpus::save_vocabulary(vocab_path, c.vocab);
  const auto path = (dir / "gain.bin").string();
  gain::save_gain(path, G, vocab_path);
  const auto loaded = gain::load_gain(path);
  CHECK(loaded.g == G.g);
  CHECK(loaded.built_from_docs == G.built_from_docs);
  fs::remove_all(dir);
}

TEST_CASE("laplace smoothing keeps entries finite and nonnegative") {
  const auto c = tiny_fixture();
  const auto counts = gain::count_presence(c, {});
  const auto G = gain::gain_from_counts(counts, 0.5);
  CHECK(G.g.allFinite());
  CHECK(G.g.minCoeff() >= 0.0);
}
