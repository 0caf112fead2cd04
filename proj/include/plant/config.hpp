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
#ifndef PLANT_CONFIG_HPP_
#define PLANT_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plant/corpus.hpp"
#include "plant/ranker.hpp"
#include "plant/trainer.hpp"

namespace plant::config {

// Merged run configuration: JSON file, then --set overrides, then the
// --run-dir/--seed flags. Validated before any computation; echoed verbatim
// into the run directory.
class RunConfig {
 public:
  static RunConfig from_file(const std::string& path, const std::vector<std::string>& overrides,
                             const std::optional<std::string>& run_dir,
                             const std::optional<std::uint64_t>& seed);
  static RunConfig from_json(nlohmann::json tree, const std::vector<std::string>& overrides = {},
                             const std::optional<std::string>& run_dir = std::nullopt,
                             const std::optional<std::uint64_t>& seed = std::nullopt);

  const nlohmann::json& tree() const { return tree_; }
  std::string run_dir() const;
  std::uint64_t seed() const;

  corpus::SynthSpec synth_spec() const;
  corpus::SplitSpec split_spec() const;
  int min_token_df() const;
  double laplace_alpha() const;
  ranker::L2RTrainConfig l2r_config() const;
  trainer::TrainConfig train_config() const;
  trainer::SystemSpec system_spec() const;
  double metrics_threshold() const;
  std::vector<std::uint64_t> ablation_seeds() const;

  // Throws corpus::ConfigError listing every violation found.
  void validate() const;
  std::string echo() const { return tree_.dump(2) + "\n"; }

 private:
  nlohmann::json tree_;
};

// Dotted-path override "a.b.c=value"; value parsed as JSON when possible,
// kept as a string otherwise.
void apply_override(nlohmann::json& tree, const std::string& key_value);

}  // namespace plant::config

#endif  // PLANT_CONFIG_HPP_
