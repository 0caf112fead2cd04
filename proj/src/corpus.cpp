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
#include "plant/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plant/rng.hpp"
#include "plant/tensor_io.hpp"

namespace plant::corpus {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }
bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Fixed-width base-26 name fragment, 'a'..'z'.
std::string letters(int n, int width) {
  std::string s(static_cast<std::size_t>(width), 'a');
  for (int i = width - 1; i >= 0 && n > 0; --i) {
    s[static_cast<std::size_t>(i)] = static_cast<char>('a' + n % 26);
    n /= 26;
  }
  return s;
}

void count_dfs(Corpus& corpus) {
  auto& v = corpus.vocab;
  v.token_df.assign(v.tokens.size(), 0);
  v.label_df.assign(v.labels.size(), 0);
  for (const auto& d : corpus.docs) {
    std::set<int> uniq(d.tokens.begin(), d.tokens.end());
    for (int t : uniq) v.token_df[static_cast<std::size_t>(t)]++;
    for (int l : d.labels) v.label_df[static_cast<std::size_t>(l)]++;
  }
}

void rebuild_maps(Vocabulary& v) {
  v.token_id.clear();
  v.label_id.clear();
  for (int i = 0; i < v.num_tokens(); ++i) v.token_id[v.tokens[static_cast<std::size_t>(i)]] = i;
  for (int i = 0; i < v.num_labels(); ++i) v.label_id[v.labels[static_cast<std::size_t>(i)]] = i;
}

}  // namespace

int Vocabulary::token_or_unk(const std::string& tok) const {
  auto it = token_id.find(tok);
  return it == token_id.end() ? kUnkId : it->second;
}

int Vocabulary::label_or_throw(const std::string& label) const {
  auto it = label_id.find(label);
  if (it == label_id.end()) throw ConfigError("unknown label: " + label);
  return it->second;
}

std::vector<std::string> preprocess(const std::string& raw_text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = raw_text.size();
  while (i < n) {
    while (i < n && is_ascii_space(static_cast<unsigned char>(raw_text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !is_ascii_space(static_cast<unsigned char>(raw_text[i]))) ++i;
    if (i == start) continue;
    std::size_t lo = start, hi = i;  // [lo, hi)
    while (lo < hi && is_ascii_punct(static_cast<unsigned char>(raw_text[lo]))) ++lo;
    while (hi > lo && is_ascii_punct(static_cast<unsigned char>(raw_text[hi - 1]))) --hi;
    if (lo >= hi) continue;
    bool clean = true;
    std::string tok;
    tok.reserve(hi - lo);
    for (std::size_t p = lo; p < hi; ++p) {
      const auto c = static_cast<unsigned char>(raw_text[p]);
      if (is_ascii_digit(c) || is_ascii_punct(c)) {
        clean = false;
        break;
      }
      tok.push_back(static_cast<char>(std::tolower(c)));
    }
    if (clean) out.push_back(std::move(tok));
  }
  return out;
}

SynthResult generate_synthetic(const SynthSpec& spec) {
  if (spec.num_labels <= 0 || spec.num_docs <= 0) {
    throw ConfigError("synthetic spec needs num_labels > 0 and num_docs > 0");
  }
  if (spec.noise_vocab_size <= 0) throw ConfigError("synthetic spec needs noise_vocab_size > 0");
  if (spec.doc_length_min < 1 || spec.doc_length_max < spec.doc_length_min) {
    throw ConfigError("synthetic spec doc_length range invalid");
  }
  if (spec.signal_injection_prob < 0.0 || spec.signal_injection_prob > 1.0) {
    throw ConfigError("signal_injection_prob must be a probability");
  }

  SynthResult res;
  auto& v = res.corpus.vocab;
  v.min_token_df = 1;
  v.tokens.push_back(kUnkToken);
  for (int l = 0; l < spec.num_labels; ++l) {
    v.labels.push_back("L" + letters(l, 3));
    std::vector<int>& sig = res.oracle[l];
    for (int s = 0; s < spec.signal_tokens_per_label; ++s) {
      sig.push_back(v.num_tokens());
      v.tokens.push_back("sig" + letters(l, 3) + letters(s, 2));
    }
  }
  const int noise_base = v.num_tokens();
  for (int t = 0; t < spec.noise_vocab_size; ++t) {
    v.tokens.push_back("nz" + letters(t, 4));
  }
  rebuild_maps(v);

  // Zipf weights over label ranks; rank order == label id order.
  std::vector<double> weight(static_cast<std::size_t>(spec.num_labels));
  std::vector<double> cdf(static_cast<std::size_t>(spec.num_labels));
  double total = 0.0;
  for (int r = 0; r < spec.num_labels; ++r) {
    weight[static_cast<std::size_t>(r)] = std::pow(static_cast<double>(r + 1), -spec.zipf_exponent);
    total += weight[static_cast<std::size_t>(r)];
    cdf[static_cast<std::size_t>(r)] = total;
  }

  Rng rng(spec.seed);
  for (int d = 0; d < spec.num_docs; ++d) {
    Document doc;
    doc.id = "synth-" + std::to_string(d);
    for (int l = 0; l < spec.num_labels; ++l) {
      const double p = std::min(0.95, spec.labels_per_doc * weight[static_cast<std::size_t>(l)] / total);
      if (rng.bernoulli(p)) doc.labels.push_back(l);
    }
    if (doc.labels.empty()) {
      doc.labels.push_back(static_cast<int>(rng.categorical_from_cdf(cdf)));
    }

    std::vector<int> toks;
    for (int l : doc.labels) {
      for (int sig : res.oracle[l]) {
        if (rng.bernoulli(spec.signal_injection_prob)) toks.push_back(sig);
      }
    }
    const int drawn_len = rng.range_int(spec.doc_length_min, spec.doc_length_max);
    const int len = std::max<int>(drawn_len, static_cast<int>(toks.size()));
    while (static_cast<int>(toks.size()) < len) {
      toks.push_back(noise_base + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.noise_vocab_size))));
    }
    rng.shuffle(toks);
    doc.tokens = std::move(toks);
    res.corpus.docs.push_back(std::move(doc));
  }
  count_dfs(res.corpus);
  return res;
}

Split split(const Corpus& corpus, const SplitSpec& spec) {
  if (spec.train < 0 || spec.val < 0 || spec.test < 0 ||
      std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be nonnegative and sum to 1");
  }
  const int n = static_cast<int>(corpus.docs.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  Rng rng(spec.seed);
  rng.shuffle(idx);
  const auto n_train = static_cast<int>(std::llround(spec.train * n));
  const auto n_trainval = static_cast<int>(std::llround((spec.train + spec.val) * n));
  Split out;
  out.train.assign(idx.begin(), idx.begin() + n_train);
  out.val.assign(idx.begin() + n_train, idx.begin() + n_trainval);
  out.test.assign(idx.begin() + n_trainval, idx.end());
  return out;
}

Corpus ingest(const std::vector<RawRecord>& records, int min_token_df) {
  // Pass 1: document frequencies over preprocessed surface forms.
  std::map<std::string, std::int64_t> df;
  std::set<std::string> label_names;
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(records.size());
  for (const auto& r : records) {
    auto toks = preprocess(r.text);
    std::set<std::string> uniq(toks.begin(), toks.end());
    for (const auto& t : uniq) df[t]++;
    for (const auto& l : r.labels) label_names.insert(l);
    tokenized.push_back(std::move(toks));
  }

  Corpus corpus;
  auto& v = corpus.vocab;
  v.min_token_df = min_token_df;
  v.tokens.push_back(kUnkToken);
  for (const auto& [tok, count] : df) {
    if (count >= min_token_df) v.tokens.push_back(tok);
  }
  v.labels.assign(label_names.begin(), label_names.end());
  rebuild_maps(v);

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (tokenized[i].empty()) {
      corpus.dropped_empty_docs++;
      std::cerr << "[corpus] dropping document '" << records[i].id
                << "': empty after preprocessing\n";
      continue;
    }
    Document doc;
    doc.id = records[i].id;
    doc.tokens.reserve(tokenized[i].size());
    for (const auto& t : tokenized[i]) doc.tokens.push_back(v.token_or_unk(t));
    std::set<int> labels;
    for (const auto& l : records[i].labels) labels.insert(v.label_or_throw(l));
    doc.labels.assign(labels.begin(), labels.end());
    corpus.docs.push_back(std::move(doc));
  }
  count_dfs(corpus);
  return corpus;
}

std::vector<Document> ingest_with_vocab(const std::vector<RawRecord>& records,
                                        const Vocabulary& vocab,
                                        std::int64_t* dropped_out) {
  std::vector<Document> docs;
  std::int64_t dropped = 0;
  for (const auto& r : records) {
    auto toks = preprocess(r.text);
    if (toks.empty()) {
      dropped++;
      std::cerr << "[corpus] dropping document '" << r.id << "': empty after preprocessing\n";
      continue;
    }
    Document doc;
    doc.id = r.id;
    for (const auto& t : toks) doc.tokens.push_back(vocab.token_or_unk(t));
    std::set<int> labels;
    for (const auto& l : r.labels) labels.insert(vocab.label_or_throw(l));
    doc.labels.assign(labels.begin(), labels.end());
    docs.push_back(std::move(doc));
  }
  if (dropped_out) *dropped_out = dropped;
  return docs;
}

std::vector<RawRecord> read_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open corpus: " + path);
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    RawRecord r;
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    for (const auto& l : j.at("labels")) r.labels.push_back(l.get<std::string>());
    out.push_back(std::move(r));
  }
  return out;
}

void write_jsonl(const std::string& path, const Corpus& corpus) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for write: " + path);
  for (const auto& d : corpus.docs) {
    nlohmann::json j;
    j["id"] = d.id;
    std::string text;
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      if (i) text.push_back(' ');
      text += corpus.vocab.tokens[static_cast<std::size_t>(d.tokens[i])];
    }
    j["text"] = text;
    auto labels = nlohmann::json::array();
    for (int l : d.labels) labels.push_back(corpus.vocab.labels[static_cast<std::size_t>(l)]);
    j["labels"] = labels;
    os << j.dump() << "\n";
  }
}

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
  nlohmann::json j;
  j["version"] = 1;
  j["min_token_df"] = vocab.min_token_df;
  j["tokens"] = vocab.tokens;
  j["labels"] = vocab.labels;
  j["token_df"] = vocab.token_df;
  j["label_df"] = vocab.label_df;
  write_file(path, j.dump(2) + "\n");
}

Vocabulary load_vocabulary(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  Vocabulary v;
  v.min_token_df = j.at("min_token_df").get<int>();
  v.tokens = j.at("tokens").get<std::vector<std::string>>();
  v.labels = j.at("labels").get<std::vector<std::string>>();
  v.token_df = j.at("token_df").get<std::vector<std::int64_t>>();
  v.label_df = j.at("label_df").get<std::vector<std::int64_t>>();
  if (v.tokens.empty() || v.tokens[0] != kUnkToken) {
    throw IoError("vocabulary missing reserved <unk> at id 0: " + path);
  }
  rebuild_maps(v);
  return v;
}

}  // namespace plant::corpus
