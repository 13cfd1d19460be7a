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

#include "locpriv/experiment.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "locpriv/error.h"
#include "locpriv/info_theory.h"
#include "locpriv/rng.h"

namespace locpriv {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <typename T>
  void Get(const char* key, T* out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      *out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }
  void GetEpsilon(const char* key, double* out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it != j_.end()) *out = ParseEpsilon(*it);
  }
  const json* Child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string Sub(const char* key) const { return path_ + "." + key; }
  void Finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown config key " + path_ + "." + k);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadRegion(const json& j, const std::string& path, Region* r) {
  ObjectReader rd(j, path);
  rd.Get("center_lat", &r->center_lat);
  rd.Get("center_lon", &r->center_lon);
  rd.Get("side_m", &r->side_m);
  rd.Finish();
}

ordered_json RegionJson(const Region& r) {
  return {{"center_lat", r.center_lat}, {"center_lon", r.center_lon}, {"side_m", r.side_m}};
}

void ReadTrain(const json& j, const std::string& path, TrainConfig* t) {
  ObjectReader rd(j, path);
  rd.Get("batch_size", &t->batch_size);
  rd.Get("epochs", &t->epochs);
  rd.Get("learning_rate", &t->learning_rate);
  rd.Finish();
}

ordered_json TrainJson(const TrainConfig& t) {
  return {{"batch_size", t.batch_size}, {"epochs", t.epochs}, {"learning_rate", t.learning_rate}};
}

void ReadGame(const json& j, const std::string& path, GameConfig* g) {
  ObjectReader rd(j, path);
  rd.Get("budget_m", &g->budget_m);
  rd.Get("alpha", &g->alpha);
  rd.Get("beta", &g->beta);
  if (const json* c = rd.Child("gen")) ReadTrain(*c, rd.Sub("gen"), &g->gen_cfg);
  if (const json* c = rd.Child("clf")) ReadTrain(*c, rd.Sub("clf"), &g->clf_cfg);
  rd.Get("max_iterations", &g->max_iterations);
  rd.Get("stop_delta", &g->stop_delta);
  rd.Get("stop_patience", &g->stop_patience);
  rd.Get("seeds_per_location", &g->seeds_per_location);
  std::string mode(LossModeName(g->generator_loss_mode));
  rd.Get("generator_loss_mode", &mode);
  try {
    g->generator_loss_mode = ParseLossMode(mode);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  rd.Get("gen_hidden", &g->gen_hidden);
  rd.Get("clf_hidden", &g->clf_hidden);
  rd.GetEpsilon("init_epsilon", &g->init_epsilon);
  rd.Get("pretrain_steps", &g->pretrain_steps);
  rd.Finish();
}

std::string KindName(DatasetKind k) {
  switch (k) {
    case DatasetKind::kSynthetic: return "synthetic";
    case DatasetKind::kGowalla: return "gowalla";
    case DatasetKind::kGowallaFixture: return "gowalla_fixture";
  }
  return "?";
}

DatasetKind ParseKind(const std::string& s) {
  if (s == "synthetic") return DatasetKind::kSynthetic;
  if (s == "gowalla") return DatasetKind::kGowalla;
  if (s == "gowalla_fixture") return DatasetKind::kGowallaFixture;
  throw ConfigError("dataset.kind must be synthetic, gowalla or gowalla_fixture, got '" + s + "'");
}

void ReadDataset(const json& j, const std::filesystem::path& base, ExperimentConfig* c) {
  ObjectReader rd(j, "dataset");
  std::string kind = KindName(c->dataset_kind);
  rd.Get("kind", &kind);
  c->dataset_kind = ParseKind(kind);
  if (const json* s = rd.Child("synthetic")) {
    ObjectReader sr(*s, "dataset.synthetic");
    if (const json* r = sr.Child("region")) ReadRegion(*r, "dataset.synthetic.region", &c->synthetic.region);
    sr.Get("square_side_m", &c->synthetic.square_side_m);
    sr.Get("max_radius_m", &c->synthetic.max_radius_m);
    sr.Get("samples_per_class", &c->synthetic.samples_per_class);
    sr.Get("num_classes", &c->synthetic.num_classes);
    sr.Get("test_per_class", &c->synthetic.test_per_class);
    sr.Get("val_fraction", &c->synthetic.val_fraction);
    sr.Finish();
  }
  if (const json* g = rd.Child("gowalla")) {
    ObjectReader gr(*g, "dataset.gowalla");
    if (const json* r = gr.Child("region")) ReadRegion(*r, "dataset.gowalla.region", &c->gowalla.region);
    gr.Get("num_users", &c->gowalla.num_users);
    gr.Get("per_user_trainval", &c->gowalla.per_user_trainval);
    gr.Get("per_user_test", &c->gowalla.per_user_test);
    gr.Get("val_fraction", &c->gowalla.val_fraction);
    gr.Get("user_col", &c->gowalla.user_col);
    gr.Get("lat_col", &c->gowalla.lat_col);
    gr.Get("lon_col", &c->gowalla.lon_col);
    gr.Get("overlap_radius_m", &c->gowalla.overlap_radius_m);
    gr.Finish();
  }
  std::string path;
  rd.Get("path", &path);
  if (!path.empty()) {
    c->gowalla_path = path;
    if (c->gowalla_path.is_relative() && !base.empty()) c->gowalla_path = base / c->gowalla_path;
  }
  if (const json* f = rd.Child("fixture")) {
    ObjectReader fr(*f, "dataset.fixture");
    fr.Get("main_users", &c->fixture.main_users);
    fr.Get("main_checkins", &c->fixture.main_checkins);
    fr.Get("sparse_users", &c->fixture.sparse_users);
    fr.Get("sparse_checkins", &c->fixture.sparse_checkins);
    fr.Get("ring_radius_m", &c->fixture.ring_radius_m);
    fr.Get("home_sigma_m", &c->fixture.home_sigma_m);
    fr.Get("shared_fraction", &c->fixture.shared_fraction);
    fr.Get("outside_fraction", &c->fixture.outside_fraction);
    fr.Finish();
  }
  rd.Finish();
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Obfuscated copies of a split as normalized classifier inputs.
void ObfuscateInputs(const Mechanism& mech, const Dataset& data, int reps, Rng& rng,
                     Eigen::MatrixXd* inputs, std::vector<int>* labels) {
  const std::size_t n = data.samples.size();
  std::vector<Location> w(n), z(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = data.samples[i].location;
  inputs->resize(static_cast<Eigen::Index>(n * reps), 2);
  labels->clear();
  for (int r = 0; r < reps; ++r) {
    mech.SampleBatch(w, rng, z);
    for (std::size_t i = 0; i < n; ++i) {
      inputs->row(static_cast<Eigen::Index>(r * n + i)) =
          z[i].Normalized(data.region.side_m).transpose();
      labels->push_back(data.samples[i].class_id);
    }
  }
}

}  // namespace

double ParseEpsilon(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.rfind("ln2/", 0) == 0) {
      try {
        std::size_t used = 0;
        const double d = std::stod(s.substr(4), &used);
        if (used == s.size() - 4 && d > 0.0) return std::numbers::ln2 / d;
      } catch (const std::exception&) {
      }
    }
    throw ConfigError("epsilon must be a number or 'ln2/<meters>', got '" + s + "'");
  }
  throw ConfigError("epsilon must be a number or 'ln2/<meters>'");
}

void ExperimentConfig::Validate(std::ostream* warn) const {
  try {
    if (dataset_kind == DatasetKind::kSynthetic) {
      synthetic.Validate();
      game.Validate(synthetic.num_classes);
    } else {
      gowalla.Validate();
      game.Validate(gowalla.num_users);
    }
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  if (dataset_kind == DatasetKind::kGowalla && !std::filesystem::exists(gowalla_path))
    throw ConfigError("dataset.path does not exist: " + gowalla_path.string());
  if (!(laplace_epsilon > 0.0)) throw ConfigError("laplace_epsilon must be positive");
  if (eval.grids.empty() || eval.obf_counts.empty())
    throw ConfigError("evaluation.grids and evaluation.obf_counts must be non-empty");
  for (int g : eval.grids)
    if (g <= 0) throw ConfigError("evaluation.grids entries must be positive");
  for (int c : eval.obf_counts)
    if (c <= 0) throw ConfigError("evaluation.obf_counts entries must be positive");
  if (track_grid < 0 || track_obf <= 0 || checkpoint_every < 0 || eval.keep_point_reps < 0)
    throw ConfigError("evaluation tracking fields must be non-negative");
  const double lap = 2.0 / laplace_epsilon;
  if (warn && std::abs(lap - game.budget_m) / game.budget_m > 0.1)
    *warn << "warning: Laplace expected distortion " << lap << " m differs from L = "
          << game.budget_m << " m by more than 10%\n";
}

ExperimentConfig ConfigFromJson(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  ObjectReader rd(j, "config");
  rd.Get("name", &c.name);
  rd.Get("seed", &c.seed);
  std::string out = c.output_dir.string();
  rd.Get("output_dir", &out);
  c.output_dir = out;
  if (const json* d = rd.Child("dataset")) ReadDataset(*d, base_dir, &c);
  if (const json* g = rd.Child("game")) ReadGame(*g, "game", &c.game);
  rd.GetEpsilon("laplace_epsilon", &c.laplace_epsilon);
  if (const json* e = rd.Child("evaluation")) {
    ObjectReader er(*e, "evaluation");
    er.Get("grids", &c.eval.grids);
    er.Get("obf_counts", &c.eval.obf_counts);
    er.Get("point_reps", &c.eval.keep_point_reps);
    er.Get("track_grid", &c.track_grid);
    er.Get("track_obf", &c.track_obf);
    er.Get("checkpoint_every", &c.checkpoint_every);
    er.Finish();
  }
  if (const json* e = rd.Child("expected")) {
    if (!e->is_object()) throw ConfigError("expected must be an object");
    for (const auto& [k, v] : e->items()) {
      if (!v.is_number()) throw ConfigError("expected." + k + " must be a number");
      c.expected.emplace_back(k, v.get<double>());
    }
  }
  rd.Finish();
  c.game.seed = DeriveSeed(c.seed, "game");
  c.synthetic.seed = DeriveSeed(c.seed, "data");
  c.gowalla.seed = DeriveSeed(c.seed, "data");
  c.fixture.seed = DeriveSeed(c.seed, "fixture");
  c.fixture.region = c.gowalla.region;
  return c;
}

ordered_json ConfigToJson(const ExperimentConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  ordered_json d;
  d["kind"] = KindName(c.dataset_kind);
  if (c.dataset_kind == DatasetKind::kSynthetic) {
    const auto& s = c.synthetic;
    d["synthetic"] = {{"region", RegionJson(s.region)},
                      {"square_side_m", s.square_side_m},
                      {"max_radius_m", s.max_radius_m},
                      {"samples_per_class", s.samples_per_class},
                      {"num_classes", s.num_classes},
                      {"test_per_class", s.test_per_class},
                      {"val_fraction", s.val_fraction}};
  } else {
    const auto& g = c.gowalla;
    d["gowalla"] = {{"region", RegionJson(g.region)},
                    {"num_users", g.num_users},
                    {"per_user_trainval", g.per_user_trainval},
                    {"per_user_test", g.per_user_test},
                    {"val_fraction", g.val_fraction},
                    {"user_col", g.user_col},
                    {"lat_col", g.lat_col},
                    {"lon_col", g.lon_col},
                    {"overlap_radius_m", g.overlap_radius_m}};
    if (c.dataset_kind == DatasetKind::kGowalla) {
      d["path"] = c.gowalla_path.string();
    } else {
      const auto& f = c.fixture;
      d["fixture"] = {{"main_users", f.main_users},
                      {"main_checkins", f.main_checkins},
                      {"sparse_users", f.sparse_users},
                      {"sparse_checkins", f.sparse_checkins},
                      {"ring_radius_m", f.ring_radius_m},
                      {"home_sigma_m", f.home_sigma_m},
                      {"shared_fraction", f.shared_fraction},
                      {"outside_fraction", f.outside_fraction}};
    }
  }
  j["dataset"] = d;
  const auto& g = c.game;
  j["game"] = {{"budget_m", g.budget_m},
               {"alpha", g.alpha},
               {"beta", g.beta},
               {"gen", TrainJson(g.gen_cfg)},
               {"clf", TrainJson(g.clf_cfg)},
               {"max_iterations", g.max_iterations},
               {"stop_delta", g.stop_delta},
               {"stop_patience", g.stop_patience},
               {"seeds_per_location", g.seeds_per_location},
               {"generator_loss_mode", std::string(LossModeName(g.generator_loss_mode))},
               {"gen_hidden", g.gen_hidden},
               {"clf_hidden", g.clf_hidden},
               {"init_epsilon", g.init_epsilon},
               {"pretrain_steps", g.pretrain_steps}};
  j["laplace_epsilon"] = c.laplace_epsilon;
  j["evaluation"] = {{"grids", c.eval.grids},
                     {"obf_counts", c.eval.obf_counts},
                     {"point_reps", c.eval.keep_point_reps},
                     {"track_grid", c.track_grid},
                     {"track_obf", c.track_obf},
                     {"checkpoint_every", c.checkpoint_every}};
  ordered_json e = ordered_json::object();
  for (const auto& [k, v] : c.expected) e[k] = v;
  j["expected"] = e;
  return j;
}

void ApplyOverride(json& j, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + dotted_key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    json& child = (*node)[part];
    if (child.is_null()) child = json::object();
    if (!child.is_object())
      throw ConfigError("override key '" + dotted_key + "' descends into a non-object");
    node = &child;
    start = dot + 1;
  }
}

ExperimentConfig LoadConfig(const std::filesystem::path& path,
                            const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  for (const auto& [k, v] : overrides) ApplyOverride(j, k, v);
  return ConfigFromJson(j, path.parent_path());
}

// The output location does not change results, so it stays out of the hash.
std::uint64_t ConfigHash(const ExperimentConfig& cfg) {
  ordered_json j = ConfigToJson(cfg);
  j.erase("output_dir");
  return Fnv1a64(j.dump());
}

std::string ProvenanceLine(const ExperimentConfig& cfg) {
  return std::string("locpriv ") + kVersion + " config=" + cfg.name +
         " config_hash=" + Hex(ConfigHash(cfg)) + " seed=" + std::to_string(cfg.seed);
}

DatasetSplits LoadExperimentData(const ExperimentConfig& cfg) {
  switch (cfg.dataset_kind) {
    case DatasetKind::kSynthetic:
      return GenSynthetic(cfg.synthetic);
    case DatasetKind::kGowalla:
      return IngestGowalla(cfg.gowalla_path, cfg.gowalla).splits;
    case DatasetKind::kGowallaFixture: {
      std::filesystem::create_directories(cfg.output_dir);
      const auto raw = cfg.output_dir / "gowalla_fixture.txt";
      WriteGowallaFixture(cfg.fixture, raw);
      GowallaIngest ingest = IngestGowalla(raw, cfg.gowalla);
      WriteIngestProvenance(ingest, cfg.gowalla, raw, cfg.output_dir / "ingest_provenance.json");
      return std::move(ingest.splits);
    }
  }
  throw ConfigError("unknown dataset kind");
}

const BayesMatrix& ExperimentReport::Bayes(const std::string& key) const {
  for (const auto& [k, m] : bayes)
    if (k == key) return m;
  throw ContractError("no Bayes matrix '" + key + "'");
}

double ExperimentReport::Metric(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  throw ContractError("no metric '" + key + "'");
}

ExperimentReport RunExperiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.Validate(log);
  std::filesystem::create_directories(cfg.output_dir);
  const std::string prov = ProvenanceLine(cfg);
  const auto& out = cfg.output_dir;

  const DatasetSplits data = LoadExperimentData(cfg);
  WriteDatasetCsv(data.train, out / "data_train.csv", prov);
  WriteDatasetCsv(data.val, out / "data_val.csv", prov);
  WriteDatasetCsv(data.test, out / "data_test.csv", prov);
  {
    std::ofstream f(out / "config_effective.json", std::ios::binary);
    f << ConfigToJson(cfg).dump(2) << '\n';
  }

  std::vector<std::pair<int, double>> tracked;
  const IterationHook hook = [&](const IterationLog& l, const Generator& g) {
    std::ostringstream line;
    line << "iter " << l.iteration << " acc_val " << l.acc_val << " acc_test " << l.acc_test
         << " dist " << l.val_distortion_m << " m";
    if (cfg.track_grid > 0) {
      Rng rng(DeriveSeed(cfg.seed, "track", l.iteration));
      const EvalOptions opts{{cfg.track_grid}, {cfg.track_obf}, 0};
      tracked.emplace_back(l.iteration, EvaluateMechanism(g, data.test, opts, rng)
                                            .at(cfg.track_obf, cfg.track_grid));
      line << " bayes_test " << tracked.back().second;
    }
    if (log) *log << line.str() << " (" << l.seconds << " s)" << std::endl;
    if (cfg.checkpoint_every > 0 && l.iteration % cfg.checkpoint_every == 0)
      g.net().Save(out / ("generator_iter_" + std::to_string(l.iteration) + ".json"));
  };
  ExperimentReport report{RunGame(data, cfg.game, hook), {}, {}, {}, kExitOk};
  report.iteration_bayes = tracked;
  if (cfg.track_grid > 0) {
    std::ofstream f(out / "iterations_bayes.csv", std::ios::binary);
    f << "# " << prov << '\n' << "iter,bayes_test\n";
    for (const auto& [it, b] : tracked) f << it << ',' << FormatDouble(b) << '\n';
  }
  WriteIterationsCsv(report.game.logs, out / "iterations.csv", prov);
  report.game.generator.net().Save(out / "generator.json");

  const IdentityMechanism identity;
  const PlanarLaplace laplace(cfg.laplace_epsilon);
  const std::vector<std::pair<std::string, const Mechanism*>> mechs{
      {"original", &identity}, {"laplace", &laplace}, {"ours", &report.game.generator}};
  const std::vector<std::pair<std::string, const Dataset*>> splits{{"train", &data.train},
                                                                   {"test", &data.test}};
  auto& m = report.metrics;
  m.emplace_back("converged", report.game.converged ? 1.0 : 0.0);
  m.emplace_back("iterations", static_cast<double>(report.game.logs.size()));
  m.emplace_back("selected_iteration", report.game.selected_iteration);
  for (const auto& l : report.game.logs)
    if (l.iteration == report.game.selected_iteration) {
      m.emplace_back("selected_acc_val", l.acc_val);
      m.emplace_back("selected_acc_test", l.acc_test);
      m.emplace_back("selected_val_distortion_m", l.val_distortion_m);
    }
  m.emplace_back("laplace_expected_distortion_m", laplace.ExpectedDistortion());
  const int big_grid = *std::max_element(cfg.eval.grids.begin(), cfg.eval.grids.end());
  const int big_obf = *std::max_element(cfg.eval.obf_counts.begin(), cfg.eval.obf_counts.end());
  const std::string headline = std::to_string(big_grid) + "_" + std::to_string(big_obf);

  for (const auto& [mname, mech] : mechs) {
    for (const auto& [sname, split] : splits) {
      Rng rng(DeriveSeed(cfg.seed, "evaluation:" + mname + ":" + sname));
      std::vector<LabeledSample> points;
      BayesMatrix bm = EvaluateMechanism(*mech, *split, cfg.eval, rng, &points);
      const std::string key = mname + "_" + sname;
      WriteBayesCsv(bm, out / ("bayes_" + key + ".csv"), prov);
      if (cfg.eval.keep_point_reps > 0) WritePointsCsv(points, out / ("points_" + key + ".csv"), prov);
      m.emplace_back(key + "_bayes_" + headline, bm.at(big_obf, big_grid));
      m.emplace_back(key + "_distortion_m", bm.distortion_m);
      m.emplace_back(key + "_clamped_hits", static_cast<double>(bm.clamped_hits));
      report.bayes.emplace_back(key, std::move(bm));
    }
    // Accuracy and macro F1 of a fresh classifier trained on this mechanism.
    Rng obf_rng(DeriveSeed(cfg.seed, "accuracy-obfuscation:" + mname));
    Eigen::MatrixXd tr_in, te_in;
    std::vector<int> tr_lab, te_lab;
    ObfuscateInputs(*mech, data.train, cfg.game.seeds_per_location, obf_rng, &tr_in, &tr_lab);
    ObfuscateInputs(*mech, data.test, cfg.game.seeds_per_location, obf_rng, &te_in, &te_lab);
    std::vector<int> sizes{2};
    sizes.insert(sizes.end(), cfg.game.clf_hidden.begin(), cfg.game.clf_hidden.end());
    sizes.push_back(data.train.num_classes);
    Rng clf_rng(DeriveSeed(cfg.seed, "accuracy-train:" + mname));
    const Mlp clf = TrainClassifier(
        Mlp::Glorot(sizes, Head::kSoftmax, DeriveSeed(cfg.seed, "accuracy-init:" + mname)),
        tr_in, tr_lab, cfg.game.clf_cfg, clf_rng);
    const AccuracyF1Result af = AccuracyF1(PredictLabels(clf, te_in), te_lab);
    m.emplace_back(mname + "_test_accuracy", af.accuracy);
    m.emplace_back(mname + "_test_macro_f1", af.macro_f1);
    if (log) *log << mname << ": test Bayes(" << headline << ") "
                  << report.Bayes(mname + "_test").at(big_obf, big_grid) << ", distortion "
                  << report.Bayes(mname + "_test").distortion_m << " m, accuracy "
                  << af.accuracy << "\n";
  }

  {
    std::ofstream f(out / "summary.csv", std::ios::binary);
    if (!f) throw DataError("cannot write summary.csv");
    f << "# " << prov << '\n' << "metric,value,expected\n";
    for (const auto& [k, v] : m) {
      f << k << ',' << FormatDouble(v) << ',';
      for (const auto& [ek, ev] : cfg.expected)
        if (ek == k) f << FormatDouble(ev);
      f << '\n';
    }
  }
  const bool mi_mode = cfg.game.generator_loss_mode == GeneratorLossMode::kMutualInfo;
  report.exit_code = mi_mode && !report.game.converged ? kExitNotConverged : kExitOk;
  return report;
}

}  // namespace locpriv
