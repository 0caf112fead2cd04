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
#ifndef PLANT_TESTS_TESTUTIL_HPP_
#define PLANT_TESTS_TESTUTIL_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "plant/corpus.hpp"
#include "plant/params.hpp"

namespace testutil {

// Independent mutual-information oracle: walks the documents and builds the
// 2x2 presence table directly. Deliberately shares no code with the gain
// module.
inline double brute_force_mig(const plant::corpus::Corpus& corpus,
                              const std::vector<int>& doc_ids, int token_id, int label_id) {
  long long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (int id : doc_ids) {
    const auto& d = corpus.docs[static_cast<std::size_t>(id)];
    const bool tok =
        std::find(d.tokens.begin(), d.tokens.end(), token_id) != d.tokens.end();
    const bool lab =
        std::find(d.labels.begin(), d.labels.end(), label_id) != d.labels.end();
    if (tok && lab) n11++;
    else if (tok) n10++;
    else if (lab) n01++;
    else n00++;
  }
  const double n = static_cast<double>(n11 + n10 + n01 + n00);
  const double pt = static_cast<double>(n11 + n10) / n;
  const double pl = static_cast<double>(n11 + n01) / n;
  auto term = [&](long long c, double px, double py) {
    if (c == 0) return 0.0;
    const double p = static_cast<double>(c) / n;
    return p * std::log(p / (px * py));
  };
  const double mi = term(n11, pt, pl) + term(n10, pt, 1 - pl) + term(n01, 1 - pt, pl) +
                    term(n00, 1 - pt, 1 - pl);
  return mi < 0 && mi > -1e-15 ? 0.0 : mi;
}

// Central finite difference of a scalar function w.r.t. every entry of every
// registered parameter; returns the worst per-tensor relative error against
// the analytic gradients.
struct FdReport {
  double worst_rel_err = 0.0;
  std::string worst_name;
};

inline FdReport finite_difference_check(const std::vector<plant::ParamRef>& params,
                                        const plant::GradMap& analytic,
                                        const std::function<double()>& loss_fn,
                                        double eps = 1e-6) {
  FdReport report;
  for (const auto& ref : params) {
    Eigen::MatrixXd fd = Eigen::MatrixXd::Zero(ref.tensor->rows(), ref.tensor->cols());
    for (Eigen::Index r = 0; r < ref.tensor->rows(); ++r) {
      for (Eigen::Index c = 0; c < ref.tensor->cols(); ++c) {
        const double saved = (*ref.tensor)(r, c);
        (*ref.tensor)(r, c) = saved + eps;
        const double up = loss_fn();
        (*ref.tensor)(r, c) = saved - eps;
        const double down = loss_fn();
        (*ref.tensor)(r, c) = saved;
        fd(r, c) = (up - down) / (2.0 * eps);
      }
    }
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(fd.rows(), fd.cols());
    if (analytic.has(ref.name)) a = analytic.all().at(ref.name);
    const double denom = std::max({a.norm(), fd.norm(), 1e-8});
    const double rel = (a - fd).norm() / denom;
    if (rel > report.worst_rel_err) {
      report.worst_rel_err = rel;
      report.worst_name = ref.name;
    }
  }
  return report;
}

inline std::vector<int> all_doc_ids(const plant::corpus::Corpus& c) {
  std::vector<int> ids(c.docs.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

}  // namespace testutil

#endif  // PLANT_TESTS_TESTUTIL_HPP_
