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
#ifndef PLANT_GAIN_HPP_
#define PLANT_GAIN_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "plant/corpus.hpp"

namespace plant::gain {

// Token-by-label mutual-information relevance, in nats. Entry (j, i) is the
// mutual information between the document-level presence events of token j
// and label i. Row plant::corpus::kUnkId is identically zero.
struct GainMatrix {
  Eigen::MatrixXd g;  // |T| x |L|, all entries >= 0
  std::int64_t built_from_docs = 0;
  double laplace_alpha = 0.0;

  int num_tokens() const { return static_cast<int>(g.rows()); }
  int num_labels() const { return static_cast<int>(g.cols()); }
};

// Document-level presence counts; shards merge by integer addition.
struct PresenceCounts {
  std::int64_t num_docs = 0;
  std::vector<std::int64_t> token_docs;           // per token
  std::vector<std::int64_t> label_docs;           // per label
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> joint;  // |T| x |L|

  static PresenceCounts zeros(int num_tokens, int num_labels);
  void add_document(const corpus::Document& doc);
  void merge(const PresenceCounts& other);
};

PresenceCounts count_presence(const corpus::Corpus& corpus, const std::vector<int>& doc_ids);

// 2x2-contingency mutual information per (token, label) pair with the
// 0*log 0 = 0 convention; natural log; optional Laplace alpha on the cells.
GainMatrix gain_from_counts(const PresenceCounts& counts, double laplace_alpha = 0.0);

// Convenience: counts + gain over the given documents (all docs if empty list).
GainMatrix compute_gain(const corpus::Corpus& corpus, const std::vector<int>& doc_ids = {},
                        double laplace_alpha = 0.0);

// Tokens of one label column sorted by gain descending, ties by ascending id.
std::vector<std::pair<int, double>> top_tokens(const GainMatrix& G, int label_id, int k);

// On-disk layout: magic "PLNTGAIN" | u32 version | u64 |T| | u64 |L| |
// row-major f64. A JSON sidecar at path + ".json" names the vocabulary file.
void save_gain(const std::string& path, const GainMatrix& G, const std::string& vocab_path);
GainMatrix load_gain(const std::string& path);

}  // namespace plant::gain

#endif  // PLANT_GAIN_HPP_
