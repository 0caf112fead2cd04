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
#ifndef PLANT_PARAMS_HPP_
#define PLANT_PARAMS_HPP_

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace plant {

// Discriminative fine-tuning operates on these three groups.
enum class ParamGroup { kEncoder, kL2R, kDecoderOther };

// Named view of one trainable tensor; vectors are stored n x 1 so the
// optimizer, checkpoints and gradient checks can treat everything uniformly.
struct ParamRef {
  std::string name;
  Eigen::MatrixXd* tensor;
  ParamGroup group;
  bool decay;  // weight decay applies (off for bias vectors)
};

// Gradients keyed by parameter name; absent key == zero gradient.
class GradMap {
 public:
  Eigen::MatrixXd& accum(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    auto it = grads_.find(name);
    if (it == grads_.end()) {
      it = grads_.emplace(name, Eigen::MatrixXd::Zero(rows, cols)).first;
    }
    return it->second;
  }
  const std::map<std::string, Eigen::MatrixXd>& all() const { return grads_; }
  std::map<std::string, Eigen::MatrixXd>& all() { return grads_; }
  bool has(const std::string& name) const { return grads_.count(name) != 0; }
  void clear() { grads_.clear(); }

  void scale(double s) {
    for (auto& [k, g] : grads_) g *= s;
  }
  void add(const GradMap& other) {
    for (const auto& [k, g] : other.grads_) accum(k, g.rows(), g.cols()) += g;
  }
  double squared_norm() const {
    double s = 0;
    for (const auto& [k, g] : grads_) s += g.squaredNorm();
    return s;
  }

 private:
  std::map<std::string, Eigen::MatrixXd> grads_;
};

}  // namespace plant

#endif  // PLANT_PARAMS_HPP_
