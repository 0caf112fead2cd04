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
#include "plant/gain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "plant/tensor_io.hpp"

namespace plant::gain {

namespace {

// One 2x2 cell's contribution p * ln(p / (px * py)); counts, not probabilities,
// so that empirical independence (joint * n == row * col exactly) yields an
// exact zero via ln(1.0).
double cell(double joint, double row, double col, double n) {
  if (joint <= 0.0) return 0.0;
  const double p = joint / n;
  return p * std::log((joint * n) / (row * col));
}

double pair_mi(double n11, double nt, double nl, double n, double alpha) {
  if (alpha > 0.0) {
    // Laplace on the four cells; marginals follow from the smoothed table.
    const double a11 = n11 + alpha;
    const double a10 = (nt - n11) + alpha;
    const double a01 = (nl - n11) + alpha;
    const double a00 = (n - nt - nl + n11) + alpha;
    n = a11 + a10 + a01 + a00;
    nt = a11 + a10;
    nl = a11 + a01;
    n11 = a11;
  }
  const double n10 = nt - n11;        // token present, label absent
  const double n01 = nl - n11;        // label present, token absent
  const double n00 = n - nt - nl + n11;
  const double mi = cell(n11, nt, nl, n) + cell(n10, nt, n - nl, n) +
                    cell(n01, n - nt, nl, n) + cell(n00, n - nt, n - nl, n);
  return std::max(0.0, mi);  // guard the tiny negative roundoff near independence
}

}  // namespace

PresenceCounts PresenceCounts::zeros(int num_tokens, int num_labels) {
  PresenceCounts c;
  c.token_docs.assign(static_cast<std::size_t>(num_tokens), 0);
  c.label_docs.assign(static_cast<std::size_t>(num_labels), 0);
  c.joint.setZero(num_tokens, num_labels);
  return c;
}

void PresenceCounts::add_document(const corpus::Document& doc) {
  num_docs++;
  std::set<int> uniq(doc.tokens.begin(), doc.tokens.end());
  uniq.erase(corpus::kUnkId);  // reserved id keeps a zero gain row
  for (int t : uniq) token_docs[static_cast<std::size_t>(t)]++;
  for (int l : doc.labels) label_docs[static_cast<std::size_t>(l)]++;
  for (int t : uniq) {
    for (int l : doc.labels) joint(t, l)++;
  }
}

void PresenceCounts::merge(const PresenceCounts& other) {
  num_docs += other.num_docs;
  for (std::size_t i = 0; i < token_docs.size(); ++i) token_docs[i] += other.token_docs[i];
  for (std::size_t i = 0; i < label_docs.size(); ++i) label_docs[i] += other.label_docs[i];
  joint += other.joint;
}

PresenceCounts count_presence(const corpus::Corpus& corpus, const std::vector<int>& doc_ids) {
  auto counts = PresenceCounts::zeros(corpus.vocab.num_tokens(), corpus.vocab.num_labels());
  if (doc_ids.empty()) {
    for (const auto& d : corpus.docs) counts.add_document(d);
  } else {
    for (int id : doc_ids) counts.add_document(corpus.docs[static_cast<std::size_t>(id)]);
  }
  return counts;
}

GainMatrix gain_from_counts(const PresenceCounts& counts, double laplace_alpha) {
  if (counts.num_docs == 0) throw corpus::ConfigError("gain computation needs a non-empty corpus");
  GainMatrix G;
  G.built_from_docs = counts.num_docs;
  G.laplace_alpha = laplace_alpha;
  const int T = static_cast<int>(counts.token_docs.size());
  const int L = static_cast<int>(counts.label_docs.size());
  G.g.setZero(T, L);
  const auto n = static_cast<double>(counts.num_docs);
  for (int t = 0; t < T; ++t) {
    if (t == corpus::kUnkId) continue;
    const auto nt = static_cast<double>(counts.token_docs[static_cast<std::size_t>(t)]);
    if (nt == 0.0 && laplace_alpha == 0.0) continue;
    for (int l = 0; l < L; ++l) {
      const auto nl = static_cast<double>(counts.label_docs[static_cast<std::size_t>(l)]);
      G.g(t, l) = pair_mi(static_cast<double>(counts.joint(t, l)), nt, nl, n, laplace_alpha);
    }
  }
  return G;
}

GainMatrix compute_gain(const corpus::Corpus& corpus, const std::vector<int>& doc_ids,
                        double laplace_alpha) {
  if (corpus.docs.empty()) throw corpus::ConfigError("gain computation needs a non-empty corpus");
  return gain_from_counts(count_presence(corpus, doc_ids), laplace_alpha);
}

std::vector<std::pair<int, double>> top_tokens(const GainMatrix& G, int label_id, int k) {
  if (label_id < 0 || label_id >= G.num_labels()) {
    throw corpus::ConfigError("top_tokens: unknown label id " + std::to_string(label_id));
  }
  if (k < 1) throw corpus::ConfigError("top_tokens: k must be >= 1");
  std::vector<int> idx(static_cast<std::size_t>(G.num_tokens()));
  for (int i = 0; i < G.num_tokens(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ga = G.g(a, label_id), gb = G.g(b, label_id);
    if (ga != gb) return ga > gb;
    return a < b;
  });
  const int take = std::min<int>(k, G.num_tokens());
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(take));
  for (int i = 0; i < take; ++i) {
    out.emplace_back(idx[static_cast<std::size_t>(i)], G.g(idx[static_cast<std::size_t>(i)], label_id));
  }
  return out;
}

void save_gain(const std::string& path, const GainMatrix& G, const std::string& vocab_path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for write: " + path);
  os.write("PLNTGAIN", 8);
  const std::uint32_t version = 1;
  os.write(reinterpret_cast<const char*>(&version), 4);
  const auto T = static_cast<std::uint64_t>(G.g.rows());
  const auto L = static_cast<std::uint64_t>(G.g.cols());
  os.write(reinterpret_cast<const char*>(&T), 8);
  os.write(reinterpret_cast<const char*>(&L), 8);
  for (Eigen::Index r = 0; r < G.g.rows(); ++r) {
    for (Eigen::Index c = 0; c < G.g.cols(); ++c) {
      const double v = G.g(r, c);
      os.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
  if (!os) throw IoError("write failed: " + path);

  nlohmann::json side;
  side["vocabulary"] = vocab_path;
  side["vocabulary_hash"] = file_hash_hex(vocab_path);
  side["built_from_docs"] = G.built_from_docs;
  side["laplace_alpha"] = G.laplace_alpha;
  write_file(path + ".json", side.dump(2) + "\n");
}

GainMatrix load_gain(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::string(magic, 8) != "PLNTGAIN") throw IoError("bad magic in " + path);
  std::uint32_t version = 0;
  if (!is.read(reinterpret_cast<char*>(&version), 4) || version != 1) {
    throw IoError("unsupported gain version in " + path);
  }
  std::uint64_t T = 0, L = 0;
  if (!is.read(reinterpret_cast<char*>(&T), 8) || !is.read(reinterpret_cast<char*>(&L), 8)) {
    throw IoError("truncated gain header in " + path);
  }
  GainMatrix G;
  G.g.setZero(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(L));
  for (Eigen::Index r = 0; r < G.g.rows(); ++r) {
    for (Eigen::Index c = 0; c < G.g.cols(); ++c) {
      double v;
      if (!is.read(reinterpret_cast<char*>(&v), 8)) throw IoError("truncated gain data in " + path);
      G.g(r, c) = v;
    }
  }
  try {
    nlohmann::json side = nlohmann::json::parse(read_file(path + ".json"));
    G.built_from_docs = side.value("built_from_docs", std::int64_t{0});
    G.laplace_alpha = side.value("laplace_alpha", 0.0);
  } catch (const IoError&) {
    // Sidecar optional on load.
  }
  return G;
}

}  // namespace plant::gain
