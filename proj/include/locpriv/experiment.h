// Copyright 2026 The locpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCPRIV_EXPERIMENT_H_
#define LOCPRIV_EXPERIMENT_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "locpriv/adversarial.h"
#include "locpriv/data_pipeline.h"
#include "locpriv/evaluation.h"

namespace locpriv {

inline constexpr char kVersion[] = "0.1.0";

// Exit statuses of the command-line runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitConfigError = 3;
inline constexpr int kExitDataError = 4;

enum class DatasetKind { kSynthetic, kGowalla, kGowallaFixture };

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  DatasetKind dataset_kind = DatasetKind::kSynthetic;
  SyntheticSpec synthetic;
  GowallaSpec gowalla;
  std::filesystem::path gowalla_path;
  GowallaFixtureSpec fixture;

  GameConfig game;
  double laplace_epsilon = 0.006931471805599453;

  EvalOptions eval{{13, 65, 130, 260}, {10, 100, 200, 500}, 1};
  // Per-iteration test Bayes error of the evaluated generator (0 = off).
  int track_grid = 0;
  int track_obf = 10;
  int checkpoint_every = 0;

  std::vector<std::pair<std::string, double>> expected;

  // Applies the cross-field checks; warnings go to `warn` when given.
  void Validate(std::ostream* warn = nullptr) const;
};

// Strict JSON schema: unknown keys are configuration errors.
ExperimentConfig ConfigFromJson(const nlohmann::json& j,
                                const std::filesystem::path& base_dir = {});
nlohmann::ordered_json ConfigToJson(const ExperimentConfig& cfg);
ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides = {});
// Sets a dotted key ("game.budget_m") from a command-line string; the value
// is read as JSON when it parses, otherwise as a string.
void ApplyOverride(nlohmann::json& j, const std::string& dotted_key, const std::string& value);
// Accepts a number or the form "ln2/<meters>".
double ParseEpsilon(const nlohmann::json& v);

std::uint64_t ConfigHash(const ExperimentConfig& cfg);
std::string ProvenanceLine(const ExperimentConfig& cfg);

DatasetSplits LoadExperimentData(const ExperimentConfig& cfg);

struct ExperimentReport {
  GameResult game;
  // Keyed "<mech>_<split>" with mech in {original, laplace, ours}.
  std::vector<std::pair<std::string, BayesMatrix>> bayes;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<int, double>> iteration_bayes;
  int exit_code = kExitOk;

  const BayesMatrix& Bayes(const std::string& key) const;
  double Metric(const std::string& key) const;
};

// Runs the game, evaluates original / Laplace / ours and writes every output
// file into cfg.output_dir. Progress lines go to `log` when given.
ExperimentReport RunExperiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace locpriv

#endif  // LOCPRIV_EXPERIMENT_H_
