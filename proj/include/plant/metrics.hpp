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
#ifndef PLANT_METRICS_HPP_
#define PLANT_METRICS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace plant::metrics {

// Per-document label scores, one row per document, |L| columns.
using ScoreMatrix = Eigen::MatrixXd;
// Gold sets as sorted label-id lists, aligned with the score rows.
using GoldSets = std::vector<std::vector<int>>;

struct PrfSuite {
  double micro_p = 0, micro_r = 0, micro_f1 = 0;
  double macro_p = 0, macro_r = 0, macro_f1 = 0;
};

struct AucSuite {
  double micro = 0, macro = 0;
  int skipped_labels = 0;  // no positive or no negative in the split
};

struct MetricsReport {
  PrfSuite prf;
  AucSuite auc;
  std::vector<int> k_values;      // {1, 3, 5, 8, 15} by default
  std::vector<double> p_at_k;     // aligned with k_values
  std::vector<double> ndcg_at_k;  // binary-relevance nDCG, aligned
  std::int64_t num_docs = 0;
  int num_labels = 0;
  double threshold = 0.5;
};

double precision_at_k(const Eigen::VectorXd& scores, const std::vector<int>& gold, int k);
// Binary-relevance nDCG@k of the score ordering for one document.
double ndcg_at_k_binary(const Eigen::VectorXd& scores, const std::vector<int>& gold, int k);

PrfSuite f1_suite(const ScoreMatrix& scores, const GoldSets& gold, double threshold);
AucSuite auc_suite(const ScoreMatrix& scores, const GoldSets& gold);

MetricsReport full_report(const ScoreMatrix& scores, const GoldSets& gold,
                          double threshold = 0.5,
                          const std::vector<int>& k_values = {1, 3, 5, 8, 15});

// Macro-F1 over the given label subset only (few-shot slicing).
double macro_f1_over_labels(const ScoreMatrix& scores, const GoldSets& gold,
                            const std::vector<int>& label_ids, double threshold = 0.5);

// Two-sided approximate-randomization p-value over per-document swaps.
// metric_fn maps (scores, gold) -> scalar.
using MetricFn = std::function<double(const ScoreMatrix&, const GoldSets&)>;
double approx_randomization_test(const MetricFn& metric_fn, const ScoreMatrix& preds_a,
                                 const ScoreMatrix& preds_b, const GoldSets& gold,
                                 int iterations, std::uint64_t seed);

std::string report_to_json(const MetricsReport& r);
// Flat CSV: header + one row; the ablation table concatenates these rows.
std::string report_csv_header(const MetricsReport& r);
std::string report_csv_row(const MetricsReport& r);

}  // namespace plant::metrics

#endif  // PLANT_METRICS_HPP_
