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

// Command-line front end: experiments, samplers, evaluation and the oracle.

#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "locpriv/adversarial.h"
#include "locpriv/data_pipeline.h"
#include "locpriv/error.h"
#include "locpriv/evaluation.h"
#include "locpriv/experiment.h"
#include "locpriv/info_theory.h"
#include "locpriv/mechanisms.h"
#include "locpriv/optimal_oracle.h"

namespace {

using namespace locpriv;

// Splits trailing `--key value` pairs into config overrides.
std::vector<std::pair<std::string, std::string>> ParseOverrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() <= 2)
      throw ConfigError("unexpected argument '" + a + "' (overrides are --key value)");
    std::string key = a.substr(2), value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("override --" + key + " needs a value");
      value = extras[++i];
    }
    out.emplace_back(key, value);
  }
  return out;
}

int CmdRun(const std::string& config_path, const std::vector<std::string>& extras,
           bool quiet) {
  const ExperimentConfig cfg = LoadConfig(config_path, ParseOverrides(extras));
  const ExperimentReport r = RunExperiment(cfg, quiet ? nullptr : &std::cerr);
  std::cout << "wrote " << cfg.output_dir.string() << "/summary.csv\n";
  if (r.exit_code == kExitNotConverged)
    std::cerr << "game did not converge within " << cfg.game.max_iterations
              << " iterations; outputs hold the best generator found\n";
  return r.exit_code;
}

int CmdLaplace(double epsilon, long n, std::uint64_t seed, const std::string& out_path) {
  Require(n > 0, "laplace-sample: --n must be positive");
  const PlanarLaplace lap(epsilon);
  Rng rng(DeriveSeed(seed, "laplace"));
  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << "x_m,y_m\n";
  }
  double total = 0.0;
  for (long i = 0; i < n; ++i) {
    const Location z = lap.Sample({0.0, 0.0}, rng);
    total += std::hypot(z.x_m, z.y_m);
    if (out) out << FormatDouble(z.x_m) << ',' << FormatDouble(z.y_m) << '\n';
  }
  std::cout << std::setprecision(6) << "epsilon " << epsilon << " samples " << n
            << "\nmean displacement " << total / static_cast<double>(n) << " m\nexpected 2/epsilon "
            << lap.ExpectedDistortion() << " m\n";
  return kExitOk;
}

int CmdEvaluate(const std::string& data_path, const std::string& mech_name, double epsilon,
                const std::string& model, std::vector<int> grids, std::vector<int> counts,
                std::uint64_t seed, const std::string& out_path) {
  const Dataset data = ReadDatasetCsv(data_path);
  std::unique_ptr<Mechanism> mech;
  if (mech_name == "identity") {
    mech = std::make_unique<IdentityMechanism>();
  } else if (mech_name == "laplace") {
    mech = std::make_unique<PlanarLaplace>(epsilon);
  } else if (mech_name == "generator") {
    if (model.empty()) throw ConfigError("--model is required for the generator mechanism");
    mech = std::make_unique<Generator>(Mlp::Load(model), data.region.side_m);
  } else {
    throw ConfigError("--mechanism must be identity, laplace or generator");
  }
  Rng rng(DeriveSeed(seed, "evaluate"));
  const BayesMatrix m = EvaluateMechanism(*mech, data, {grids, counts, 0}, rng);
  std::cout << "obf_count";
  for (int g : m.grids) std::cout << "  grid_" << g;
  std::cout << '\n' << std::fixed << std::setprecision(4);
  for (std::size_t r = 0; r < m.obf_counts.size(); ++r) {
    std::cout << std::setw(9) << m.obf_counts[r];
    for (double v : m.values[r]) std::cout << "  " << std::setw(8) << v;
    std::cout << '\n';
  }
  std::cout << "empirical distortion " << m.distortion_m << " m, clamped hits "
            << m.clamped_hits << '\n';
  if (!out_path.empty()) WriteBayesCsv(m, out_path, "locpriv evaluate " + data_path);
  return kExitOk;
}

TinyInstance ParseInstance(const std::string& name, const std::string& points, double budget) {
  if (name == "two-point") return TinyInstance::OnePerClass({{0, 0}, {100, 0}}, budget);
  if (name == "square4")
    return TinyInstance::OnePerClass({{150, 150}, {-150, 150}, {-150, -150}, {150, -150}},
                                     budget);
  if (name == "points") {
    std::vector<Location> locs;
    std::stringstream ss(points);
    std::string item;
    while (std::getline(ss, item, ';')) {
      double x = 0, y = 0;
      char comma = 0;
      std::stringstream is(item);
      if (!(is >> x >> comma >> y) || comma != ',')
        throw ConfigError("--points must look like 'x,y;x,y;...'");
      locs.push_back({x, y});
    }
    return TinyInstance::OnePerClass(std::move(locs), budget);
  }
  throw ConfigError("--instance must be two-point, square4 or points");
}

int CmdOracle(const std::string& name, const std::string& points, double budget,
              double step) {
  const TinyInstance inst = ParseInstance(name, points, budget);
  OracleOptions opts;
  opts.step = step;
  const OracleResult r = OptimalBayesMechanism(inst, opts);
  std::cout << std::setprecision(6) << "search " << (r.exhaustive ? "exhaustive lattice" : "projected ascent")
            << "\nbayes_error " << r.bayes_error << "\ndistortion_m " << r.distortion_m
            << " (L = " << budget << ")\nI(X;Z) " << NatsToBits(r.mutual_info)
            << " bits\nceiling " << 1.0 - inst.MaxPrior() << "\nmechanism (rows w, cols z):\n";
  const auto& mat = r.mechanism.matrix();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) std::cout << std::setw(10) << mat(i, j);
    std::cout << '\n';
  }
  return kExitOk;
}

// Quick end-to-end sanity pass over the cheap module operations.
int CmdSelftest() {
  int failures = 0;
  const auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    failures += !ok;
  };
  {
    const PlanarLaplace lap(std::numbers::ln2 / 100.0);
    Rng rng(1);
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) total += Distance({0, 0}, lap.Sample({0, 0}, rng));
    const double mean = total / n;
    check("laplace-distortion", std::abs(mean / lap.ExpectedDistortion() - 1.0) < 0.02,
          std::to_string(mean) + " m vs " + std::to_string(lap.ExpectedDistortion()) + " m");
  }
  {
    const OracleResult r =
        OptimalBayesMechanism(TinyInstance::OnePerClass({{0, 0}, {100, 0}}, 40.0));
    check("two-point-oracle",
          std::abs(r.bayes_error - 0.4) <= 1e-3 && std::abs(r.mechanism(0, 1) - 0.4) <= 1e-3,
          "B = " + std::to_string(r.bayes_error));
  }
  {
    const PayoffTables t = PayoffTablesDemo();
    check("payoff-tables",
          t.success(0, 0) == 1.0 && t.success(3, 0) == 0.0 && t.mutual_info(3, 0) == 1.0 &&
              t.one_minus_bayes(1, 2) == 0.5,
          "identity/swap corners");
  }
  {
    Eigen::MatrixXd q(4, 2);
    q << 0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.3, 0.7;
    const std::vector<int> lab{0, 1, 0, 1};
    const BatchMats b = BatchMats::FromLabels(lab, q);
    const BatchEstimate e = EstimateBatch(b);
    check("batch-mi", std::abs(BatchMutualInfo(b) - MutualInfo(e.p_xy)) < 1e-10,
          "batch estimator vs closed form");
  }
  std::cout << (failures ? "selftest FAILED\n" : "selftest ok\n");
  return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"locpriv: adversarial location-privacy mechanisms"};
  app.require_subcommand(0, 1);
  std::string demo;
  app.add_option("--demo", demo, "Print a built-in demo (payoff-tables)");

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config;
  bool quiet = false;
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_flag("-q,--quiet", quiet, "No progress lines");
  run->allow_extras();

  auto* lap = app.add_subcommand("laplace-sample", "Sample planar Laplace noise");
  double epsilon = std::numbers::ln2 / 100.0;
  long n = 100000;
  std::uint64_t seed = 0;
  std::string out;
  lap->add_option("--epsilon", epsilon, "Privacy parameter (1/m)");
  lap->add_option("--n", n, "Number of samples");
  lap->add_option("--seed", seed, "Seed");
  lap->add_option("--out", out, "Optional CSV of displacements");

  auto* ev = app.add_subcommand("evaluate", "Grid Bayes error of a mechanism on a dataset CSV");
  std::string data_path, mech = "laplace", model;
  std::vector<int> grids{13, 65, 130, 260}, counts{10, 100, 200, 500};
  ev->add_option("--data", data_path, "Dataset CSV (class_id,x_m,y_m)")->required();
  ev->add_option("--mechanism", mech, "identity | laplace | generator");
  ev->add_option("--epsilon", epsilon, "Laplace epsilon (1/m)");
  ev->add_option("--model", model, "Generator checkpoint (JSON)");
  ev->add_option("--grids", grids, "Cells per side");
  ev->add_option("--obf-counts", counts, "Obfuscations per location");
  ev->add_option("--seed", seed, "Seed");
  ev->add_option("--out", out, "Optional Bayes CSV");

  auto* orc = app.add_subcommand("oracle", "Optimal mechanism on a tiny instance");
  std::string instance = "two-point", points;
  double budget = 40.0, step = 1e-3;
  orc->add_option("--instance", instance, "two-point | square4 | points");
  orc->add_option("--points", points, "For --instance points: 'x,y;x,y;...'");
  orc->add_option("--budget", budget, "Distortion budget L (m)");
  orc->add_option("--step", step, "Lattice step");

  auto* self = app.add_subcommand("selftest", "Fast sanity checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (!demo.empty()) {
      if (demo != "payoff-tables") throw ConfigError("unknown demo '" + demo + "'");
      const PayoffTables t = PayoffTablesDemo();
      std::cout << FormatPayoffTablesText(t) << FormatPayoffTablesCsv(t);
      return kExitOk;
    }
    if (*run) return CmdRun(config, run->remaining(), quiet);
    if (*lap) return CmdLaplace(epsilon, n, seed, out);
    if (*ev) return CmdEvaluate(data_path, mech, epsilon, model, grids, counts, seed, out);
    if (*orc) return CmdOracle(instance, points, budget, step);
    if (*self) return CmdSelftest();
    std::cout << app.help();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const ContractError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
