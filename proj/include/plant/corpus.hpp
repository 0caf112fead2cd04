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
#ifndef PLANT_CORPUS_HPP_
#define PLANT_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace plant::corpus {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token id 0 is reserved for out-of-vocabulary tokens; it never corresponds
// to a surface form that survives preprocessing and its gain row stays zero.
constexpr int kUnkId = 0;
inline const char* kUnkToken = "<unk>";

struct Document {
  std::string id;
  std::vector<int> tokens;  // ids into Vocabulary::tokens, position-ordered
  std::vector<int> labels;  // sorted unique ids into Vocabulary::labels
};

struct Vocabulary {
  std::vector<std::string> tokens;  // index = id; tokens[0] == "<unk>"
  std::vector<std::string> labels;  // index = id
  std::vector<std::int64_t> token_df;  // documents containing the token
  std::vector<std::int64_t> label_df;
  std::map<std::string, int> token_id;
  std::map<std::string, int> label_id;
  int min_token_df = 3;

  int num_tokens() const { return static_cast<int>(tokens.size()); }
  int num_labels() const { return static_cast<int>(labels.size()); }
  // kUnkId for unknown surface forms.
  int token_or_unk(const std::string& tok) const;
  int label_or_throw(const std::string& label) const;
};

struct Corpus {
  std::vector<Document> docs;
  Vocabulary vocab;
  std::int64_t dropped_empty_docs = 0;  // emptied by preprocessing, not kept
};

struct SynthSpec {
  int num_labels = 0;
  int num_docs = 0;
  double zipf_exponent = 1.0;
  int signal_tokens_per_label = 3;
  double signal_injection_prob = 1.0;
  int noise_vocab_size = 0;
  int doc_length_min = 1;
  int doc_length_max = 1;
  double labels_per_doc = 3.0;  // mean of the per-document label count
  std::uint64_t seed = 0;
};

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<int> train, val, test;  // document indices into Corpus::docs
};

// label id -> its dedicated signal token ids; ground truth of the generator.
using SignalOracle = std::map<int, std::vector<int>>;

// Lowercases, splits on whitespace, strips edge punctuation, and drops any
// token still containing a digit or punctuation byte. Never truncates.
std::vector<std::string> preprocess(const std::string& raw_text);

// Builds the Zipf-skewed corpus with per-label signal tokens and returns the
// token-level oracle alongside. Vocabulary covers the full generator alphabet
// (min_token_df forced to 1: the generator owns its vocabulary).
struct SynthResult {
  Corpus corpus;
  SignalOracle oracle;
};
SynthResult generate_synthetic(const SynthSpec& spec);

Split split(const Corpus& corpus, const SplitSpec& spec);

// Preprocesses raw records and builds a vocabulary with the document-frequency
// cutoff. Documents emptied by preprocessing are dropped and counted.
struct RawRecord {
  std::string id;
  std::string text;
  std::vector<std::string> labels;
};
Corpus ingest(const std::vector<RawRecord>& records, int min_token_df);

// Re-tokenizes records against an existing vocabulary (inference-side path);
// unknown tokens map to kUnkId, unknown labels are an error.
std::vector<Document> ingest_with_vocab(const std::vector<RawRecord>& records,
                                        const Vocabulary& vocab,
                                        std::int64_t* dropped_out = nullptr);

// JSONL: {"id": ..., "text": ..., "labels": [...]} per line.
std::vector<RawRecord> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const Corpus& corpus);

void save_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace plant::corpus

#endif  // PLANT_CORPUS_HPP_
