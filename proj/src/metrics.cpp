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
#include "plant/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "plant/rng.hpp"

namespace plant::metrics {

namespace {

// Label ids ordered by score descending, ties by ascending label id.
std::vector<int> ranked_labels(const Eigen::VectorXd& scores) {
  std::vector<int> idx(static_cast<std::size_t>(scores.size()));
  for (int i = 0; i < scores.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

void check_shapes(const ScoreMatrix& scores, const GoldSets& gold) {
  if (static_cast<std::size_t>(scores.rows()) != gold.size()) {
    throw std::invalid_argument("metrics: scores and gold sets disagree on document count");
  }
}

double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

// Mann-Whitney AUC with half credit for ties.
double rank_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0;
  for (double p : pos) {
    for (double n : neg) {
      if (p > n) wins += 1.0;
      else if (p == n) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

double precision_at_k(const Eigen::VectorXd& scores, const std::vector<int>& gold, int k) {
  if (k < 1) throw std::invalid_argument("precision_at_k: k must be >= 1");
  if (gold.empty()) return 0.0;
  const auto order = ranked_labels(scores);
  const std::set<int> gold_set(gold.begin(), gold.end());
  int hits = 0;
  const int top = std::min<int>(k, static_cast<int>(order.size()));
  for (int i = 0; i < top; ++i) {
    if (gold_set.count(order[static_cast<std::size_t>(i)])) hits++;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ndcg_at_k_binary(const Eigen::VectorXd& scores, const std::vector<int>& gold, int k) {
  if (gold.empty()) return 0.0;
  const auto order = ranked_labels(scores);
  const std::set<int> gold_set(gold.begin(), gold.end());
  double dcg = 0;
  const int top = std::min<int>(k, static_cast<int>(order.size()));
  for (int i = 0; i < top; ++i) {
    if (gold_set.count(order[static_cast<std::size_t>(i)])) dcg += 1.0 / std::log2(i + 2.0);
  }
  double ideal = 0;
  const int ideal_top = std::min<int>({k, static_cast<int>(gold.size()), static_cast<int>(order.size())});
  for (int i = 0; i < ideal_top; ++i) ideal += 1.0 / std::log2(i + 2.0);
  return ideal > 0 ? dcg / ideal : 1.0;
}

PrfSuite f1_suite(const ScoreMatrix& scores, const GoldSets& gold, double threshold) {
  check_shapes(scores, gold);
  const int L = static_cast<int>(scores.cols());
  std::vector<std::int64_t> tp(static_cast<std::size_t>(L), 0), fp(static_cast<std::size_t>(L), 0),
      fn(static_cast<std::size_t>(L), 0);
  for (Eigen::Index d = 0; d < scores.rows(); ++d) {
    const std::set<int> gset(gold[static_cast<std::size_t>(d)].begin(), gold[static_cast<std::size_t>(d)].end());
    for (int l = 0; l < L; ++l) {
      const bool pred = scores(d, l) >= threshold;
      const bool is_gold = gset.count(l) != 0;
      if (pred && is_gold) tp[static_cast<std::size_t>(l)]++;
      else if (pred) fp[static_cast<std::size_t>(l)]++;
      else if (is_gold) fn[static_cast<std::size_t>(l)]++;
    }
  }
  PrfSuite s;
  std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;
  double mp = 0, mr = 0, mf = 0;
  for (int l = 0; l < L; ++l) {
    const auto t = static_cast<double>(tp[static_cast<std::size_t>(l)]);
    const auto f_p = static_cast<double>(fp[static_cast<std::size_t>(l)]);
    const auto f_n = static_cast<double>(fn[static_cast<std::size_t>(l)]);
    const double p = safe_div(t, t + f_p);
    const double r = safe_div(t, t + f_n);
    mp += p;
    mr += r;
    mf += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
    tp_all += tp[static_cast<std::size_t>(l)];
    fp_all += fp[static_cast<std::size_t>(l)];
    fn_all += fn[static_cast<std::size_t>(l)];
  }
  s.macro_p = L ? mp / L : 0;
  s.macro_r = L ? mr / L : 0;
  s.macro_f1 = L ? mf / L : 0;
  s.micro_p = safe_div(static_cast<double>(tp_all), static_cast<double>(tp_all + fp_all));
  s.micro_r = safe_div(static_cast<double>(tp_all), static_cast<double>(tp_all + fn_all));
  s.micro_f1 = (s.micro_p + s.micro_r) > 0 ? 2 * s.micro_p * s.micro_r / (s.micro_p + s.micro_r) : 0.0;
  return s;
}

AucSuite auc_suite(const ScoreMatrix& scores, const GoldSets& gold) {
  check_shapes(scores, gold);
  const int L = static_cast<int>(scores.cols());
  AucSuite out;
  double macro_sum = 0;
  int evaluable = 0;
  std::vector<double> pooled_pos, pooled_neg;
  for (int l = 0; l < L; ++l) {
    std::vector<double> pos, neg;
    for (Eigen::Index d = 0; d < scores.rows(); ++d) {
      const auto& g = gold[static_cast<std::size_t>(d)];
      const bool is_gold = std::binary_search(g.begin(), g.end(), l);
      (is_gold ? pos : neg).push_back(scores(d, l));
      (is_gold ? pooled_pos : pooled_neg).push_back(scores(d, l));
    }
    if (pos.empty() || neg.empty()) {
      out.skipped_labels++;
      continue;
    }
    macro_sum += rank_auc(pos, neg);
    evaluable++;
  }
  if (evaluable == 0) throw std::invalid_argument("auc_suite: no label has both positives and negatives");
  out.macro = macro_sum / evaluable;
  out.micro = (pooled_pos.empty() || pooled_neg.empty()) ? 0.5 : rank_auc(pooled_pos, pooled_neg);
  return out;
}

MetricsReport full_report(const ScoreMatrix& scores, const GoldSets& gold, double threshold,
                          const std::vector<int>& k_values) {
  check_shapes(scores, gold);
  MetricsReport r;
  r.threshold = threshold;
  r.num_docs = scores.rows();
  r.num_labels = static_cast<int>(scores.cols());
  r.k_values = k_values;
  r.prf = f1_suite(scores, gold, threshold);
  r.auc = auc_suite(scores, gold);
  for (int k : k_values) {
    double p_sum = 0, n_sum = 0;
    for (Eigen::Index d = 0; d < scores.rows(); ++d) {
      p_sum += precision_at_k(scores.row(d), gold[static_cast<std::size_t>(d)], k);
      n_sum += ndcg_at_k_binary(scores.row(d), gold[static_cast<std::size_t>(d)], k);
    }
    r.p_at_k.push_back(scores.rows() ? p_sum / static_cast<double>(scores.rows()) : 0.0);
    r.ndcg_at_k.push_back(scores.rows() ? n_sum / static_cast<double>(scores.rows()) : 0.0);
  }
  return r;
}

double macro_f1_over_labels(const ScoreMatrix& scores, const GoldSets& gold,
                            const std::vector<int>& label_ids, double threshold) {
  check_shapes(scores, gold);
  if (label_ids.empty()) return 0.0;
  double sum = 0;
  for (int l : label_ids) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (Eigen::Index d = 0; d < scores.rows(); ++d) {
      const auto& g = gold[static_cast<std::size_t>(d)];
      const bool pred = scores(d, l) >= threshold;
      const bool is_gold = std::binary_search(g.begin(), g.end(), l);
      if (pred && is_gold) tp++;
      else if (pred) fp++;
      else if (is_gold) fn++;
    }
    const double p = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
    const double r = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
    sum += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(label_ids.size());
}

double approx_randomization_test(const MetricFn& metric_fn, const ScoreMatrix& preds_a,
                                 const ScoreMatrix& preds_b, const GoldSets& gold,
                                 int iterations, std::uint64_t seed) {
  if (preds_a.rows() != preds_b.rows() || preds_a.cols() != preds_b.cols()) {
    throw std::invalid_argument("approx_randomization_test: prediction shapes differ");
  }
  check_shapes(preds_a, gold);
  const double observed = std::abs(metric_fn(preds_a, gold) - metric_fn(preds_b, gold));
  Rng rng(seed);
  ScoreMatrix a = preds_a, b = preds_b;
  int at_least = 0;
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index d = 0; d < a.rows(); ++d) {
      if (rng.bernoulli(0.5)) {
        a.row(d) = preds_b.row(d);
        b.row(d) = preds_a.row(d);
      } else {
        a.row(d) = preds_a.row(d);
        b.row(d) = preds_b.row(d);
      }
    }
    const double delta = std::abs(metric_fn(a, gold) - metric_fn(b, gold));
    if (delta >= observed) at_least++;
  }
  return static_cast<double>(at_least + 1) / static_cast<double>(iterations + 1);
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["micro_f1"] = r.prf.micro_f1;
  j["macro_f1"] = r.prf.macro_f1;
  j["micro_precision"] = r.prf.micro_p;
  j["macro_precision"] = r.prf.macro_p;
  j["micro_recall"] = r.prf.micro_r;
  j["macro_recall"] = r.prf.macro_r;
  j["micro_auc"] = r.auc.micro;
  j["macro_auc"] = r.auc.macro;
  j["auc_skipped_labels"] = r.auc.skipped_labels;
  for (std::size_t i = 0; i < r.k_values.size(); ++i) {
    j["p_at_" + std::to_string(r.k_values[i])] = r.p_at_k[i];
    j["ndcg_at_" + std::to_string(r.k_values[i])] = r.ndcg_at_k[i];
  }
  j["num_docs"] = r.num_docs;
  j["num_labels"] = r.num_labels;
  j["threshold"] = r.threshold;
  return j.dump(2) + "\n";
}

std::string report_csv_header(const MetricsReport& r) {
  std::ostringstream os;
  os << "micro_f1,macro_f1,micro_precision,macro_precision,micro_recall,macro_recall,"
     << "micro_auc,macro_auc,auc_skipped_labels";
  for (int k : r.k_values) os << ",p_at_" << k;
  for (int k : r.k_values) os << ",ndcg_at_" << k;
  os << ",num_docs,num_labels,threshold";
  return os.str();
}

std::string report_csv_row(const MetricsReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.prf.micro_f1 << ',' << r.prf.macro_f1 << ',' << r.prf.micro_p << ',' << r.prf.macro_p
     << ',' << r.prf.micro_r << ',' << r.prf.macro_r << ',' << r.auc.micro << ',' << r.auc.macro
     << ',' << r.auc.skipped_labels;
  for (double v : r.p_at_k) os << ',' << v;
  for (double v : r.ndcg_at_k) os << ',' << v;
  os << ',' << r.num_docs << ',' << r.num_labels << ',' << r.threshold;
  return os.str();
}

}  // namespace plant::metrics
