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

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <set>

#include "plant/corpus.hpp"
#include "plant/tensor_io.hpp"
#include "testutil.hpp"

using namespace plant;
using corpus::preprocess;

TEST_CASE("preprocess drops digit and punctuation tokens") {
  CHECK(preprocess("Acute CHF, EF 20%.") == std::vector<std::string>{"acute", "chf", "ef"});
  CHECK(preprocess("") == std::vector<std::string>{});
  CHECK(preprocess("X9 9X 99") == std::vector<std::string>{});
}

TEST_CASE("preprocess strips edge punctuation and lowercases") {
  CHECK(preprocess("(Hello) WORLD!!") == std::vector<std::string>{"hello", "world"});
  CHECK(preprocess("co-morbid") == std::vector<std::string>{});  // interior punctuation
  CHECK(preprocess("  spaced\ttabs\nnewlines ") ==
        std::vector<std::string>{"spaced", "tabs", "newlines"});
}

TEST_CASE("preprocess is idempotent") {
  const std::vector<std::string> inputs = {
      "Acute CHF, EF 20%.", "The; quick. BROWN fox!", "a b c", "x9 --- (ok)"};
  for (const auto& raw : inputs) {
    auto once = preprocess(raw);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(preprocess(joined) == once);
  }
}

namespace {

corpus::SynthSpec small_spec() {
  corpus::SynthSpec s;
  s.num_labels = 20;
  s.num_docs = 300;
  s.zipf_exponent = 1.2;
  s.signal_tokens_per_label = 3;
  s.signal_injection_prob = 1.0;
  s.noise_vocab_size = 150;
  s.doc_length_min = 20;
  s.doc_length_max = 40;
  s.labels_per_doc = 2.5;
  s.seed = 7;
  return s;
}

}  // namespace

TEST_CASE("synthetic generation is deterministic") {
  const auto a = corpus::generate_synthetic(small_spec());
  const auto b = corpus::generate_synthetic(small_spec());
  REQUIRE(a.corpus.docs.size() == b.corpus.docs.size());
  for (std::size_t i = 0; i < a.corpus.docs.size(); ++i) {
    CHECK(a.corpus.docs[i].tokens == b.corpus.docs[i].tokens);
    CHECK(a.corpus.docs[i].labels == b.corpus.docs[i].labels);
  }
  CHECK(a.oracle == b.oracle);
}

TEST_CASE("synthetic byte-identical on disk for the same seed") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "plant_synth_det";
  fs::create_directories(dir);
  const auto a = corpus::generate_synthetic(small_spec());
  const auto b = corpus::generate_synthetic(small_spec());
  corpus::write_jsonl((dir / "a.jsonl").string(), a.corpus);
  corpus::write_jsonl((dir / "b.jsonl").string(), b.corpus);
  CHECK(read_file((dir / "a.jsonl").string()) == read_file((dir / "b.jsonl").string()));
  fs::remove_all(dir);
}

TEST_CASE("synthetic with full injection contains every signal token") {
  auto spec = small_spec();
  spec.signal_injection_prob = 1.0;
  const auto res = corpus::generate_synthetic(spec);
  for (const auto& doc : res.corpus.docs) {
    const std::set<int> toks(doc.tokens.begin(), doc.tokens.end());
    for (int label : doc.labels) {
      for (int sig : res.oracle.at(label)) {
        CHECK(toks.count(sig) == 1);
      }
    }
  }
}

TEST_CASE("synthetic label frequencies follow the configured Zipf law") {
  auto spec = small_spec();
  spec.num_labels = 50;
  spec.num_docs = 12000;
  spec.zipf_exponent = 1.2;
  spec.labels_per_doc = 3.0;
  const auto res = corpus::generate_synthetic(spec);

  std::vector<std::int64_t> freq(static_cast<std::size_t>(spec.num_labels), 0);
  for (const auto& d : res.corpus.docs) {
    for (int l : d.labels) freq[static_cast<std::size_t>(l)]++;
  }
  // Kendall tau between the ideal rank order (id order) and the observed
  // frequency order; concordant pairs have lower id <=> higher frequency.
  long long concordant = 0, discordant = 0;
  for (int a = 0; a < spec.num_labels; ++a) {
    for (int b = a + 1; b < spec.num_labels; ++b) {
      if (freq[static_cast<std::size_t>(a)] == freq[static_cast<std::size_t>(b)]) continue;
      if (freq[static_cast<std::size_t>(a)] > freq[static_cast<std::size_t>(b)]) concordant++;
      else discordant++;
    }
  }
  const double tau = static_cast<double>(concordant - discordant) /
                     static_cast<double>(concordant + discordant);
  CHECK(tau >= 0.9);
}

TEST_CASE("synthetic rejects degenerate specs") {
  auto spec = small_spec();
  spec.num_labels = 0;
  CHECK_THROWS_AS(corpus::generate_synthetic(spec), corpus::ConfigError);
  spec = small_spec();
  spec.num_docs = 0;
  CHECK_THROWS_AS(corpus::generate_synthetic(spec), corpus::ConfigError);
}

TEST_CASE("split sizes, determinism and degenerate fractions") {
  auto res = corpus::generate_synthetic(small_spec());
  while (res.corpus.docs.size() > 100) res.corpus.docs.pop_back();

  corpus::SplitSpec spec;
  spec.train = 0.8;
  spec.val = 0.1;
  spec.test = 0.1;
  spec.seed = 1;
  const auto s1 = corpus::split(res.corpus, spec);
  CHECK(s1.train.size() == 80);
  CHECK(s1.val.size() == 10);
  CHECK(s1.test.size() == 10);

  const auto s2 = corpus::split(res.corpus, spec);
  CHECK(s1.train == s2.train);
  CHECK(s1.val == s2.val);
  CHECK(s1.test == s2.test);

  // Disjoint and covering.
  std::set<int> seen;
  for (const auto* part : {&s1.train, &s1.val, &s1.test}) {
    for (int id : *part) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == res.corpus.docs.size());

  corpus::SplitSpec all_train{1.0, 0.0, 0.0, 3};
  const auto s3 = corpus::split(res.corpus, all_train);
  CHECK(s3.train.size() == res.corpus.docs.size());
  CHECK(s3.val.empty());
  CHECK(s3.test.empty());

  corpus::SplitSpec bad{0.5, 0.2, 0.2, 0};
  CHECK_THROWS_AS(corpus::split(res.corpus, bad), corpus::ConfigError);
}

TEST_CASE("vocabulary round-trips ids and persists explicit ordering") {
  const auto res = corpus::generate_synthetic(small_spec());
  const auto& v = res.corpus.vocab;
  for (int i = 0; i < v.num_tokens(); ++i) {
    CHECK(v.token_or_unk(v.tokens[static_cast<std::size_t>(i)]) == i);
  }
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "plant_vocab_rt.json").string();
  corpus::save_vocabulary(path, v);
  const auto loaded = corpus::load_vocabulary(path);
  CHECK(loaded.tokens == v.tokens);
  CHECK(loaded.labels == v.labels);
  CHECK(loaded.token_df == v.token_df);
  fs::remove(path);
}

TEST_CASE("ingest applies the document-frequency cutoff and drops empty docs") {
  std::vector<corpus::RawRecord> records;
  records.push_back({"a", "alpha beta gamma", {"L1"}});
  records.push_back({"b", "alpha beta", {"L1", "L2"}});
  records.push_back({"c", "alpha 99 (<>)", {"L2"}});
  records.push_back({"d", "42 %%%", {"L2"}});  // empties out, dropped
  const auto c = corpus::ingest(records, 2);
  CHECK(c.docs.size() == 3);
  CHECK(c.dropped_empty_docs == 1);
  // alpha df=3, beta df=2 kept; gamma df=1 cut.
  CHECK(c.vocab.token_or_unk("alpha") != corpus::kUnkId);
  CHECK(c.vocab.token_or_unk("beta") != corpus::kUnkId);
  CHECK(c.vocab.token_or_unk("gamma") == corpus::kUnkId);
  // doc a keeps its position for gamma as <unk>
  CHECK(c.docs[0].tokens.size() == 3);
  CHECK(c.docs[0].tokens[2] == corpus::kUnkId);
}

TEST_CASE("ingest_with_vocab maps unseen tokens to unk and rejects unknown labels") {
  std::vector<corpus::RawRecord> records;
  records.push_back({"a", "alpha beta", {"L1"}});
  records.push_back({"b", "alpha beta", {"L1"}});
  const auto c = corpus::ingest(records, 1);
  std::vector<corpus::RawRecord> fresh;
  fresh.push_back({"x", "alpha zeta", {"L1"}});
  const auto docs = corpus::ingest_with_vocab(fresh, c.vocab);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].tokens[0] == c.vocab.token_or_unk("alpha"));
  CHECK(docs[0].tokens[1] == corpus::kUnkId);

  std::vector<corpus::RawRecord> bad;
  bad.push_back({"y", "alpha", {"NOPE"}});
  CHECK_THROWS_AS(corpus::ingest_with_vocab(bad, c.vocab), corpus::ConfigError);
}

TEST_CASE("jsonl round trip preserves synthetic corpora") {
  namespace fs = std::filesystem;
  const auto res = corpus::generate_synthetic(small_spec());
  const auto path = (fs::temp_directory_path() / "plant_corpus_rt.jsonl").string();
  corpus::write_jsonl(path, res.corpus);
  const auto records = corpus::read_jsonl(path);
  REQUIRE(records.size() == res.corpus.docs.size());
  const auto docs = corpus::ingest_with_vocab(records, res.corpus.vocab);
  REQUIRE(docs.size() == res.corpus.docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(docs[i].tokens == res.corpus.docs[i].tokens);
    CHECK(docs[i].labels == res.corpus.docs[i].labels);
  }
  fs::remove(path);
}
