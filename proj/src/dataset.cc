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

#include "locpriv/dataset.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "locpriv/error.h"

namespace locpriv {
namespace {

std::filesystem::path SidecarPath(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p += ".meta.json";
  return p;
}

double ParseDouble(std::string_view s, const std::string& context) {
  double v = 0.0;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("cannot parse number '" + std::string(s) + "' in " + context);
  return v;
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split tag '" + std::string(name) + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void Dataset::Validate() const {
  region.Validate();
  Require(num_classes > 0, "Dataset: num_classes must be positive");
  std::vector<bool> seen(num_classes, false);
  for (const auto& s : samples) {
    Require(s.class_id >= 0 && s.class_id < num_classes,
            "Dataset: class_id out of range");
    Require(s.location.IsFinite(), "Dataset: non-finite location");
    seen[s.class_id] = true;
  }
  if (split == Split::kTrain) {
    Require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }),
            "Dataset: some class missing from the train split");
  }
}

std::vector<std::size_t> Dataset::ClassCounts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& s : samples) ++counts.at(s.class_id);
  return counts;
}

EmpiricalModel BuildEmpiricalModel(const Dataset& data) {
  Require(!data.samples.empty(), "BuildEmpiricalModel: empty dataset");
  std::map<std::pair<double, double>, std::size_t> index;
  EmpiricalModel model;
  std::vector<std::size_t> w_of(data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const auto& loc = data.samples[i].location;
    auto [it, inserted] =
        index.try_emplace({loc.x_m, loc.y_m}, model.support.size());
    if (inserted) model.support.push_back(loc);
    w_of[i] = it->second;
  }
  model.joint_xw = Eigen::MatrixXd::Zero(data.num_classes, model.support.size());
  const double weight = 1.0 / static_cast<double>(data.samples.size());
  for (std::size_t i = 0; i < data.samples.size(); ++i)
    model.joint_xw(data.samples[i].class_id, w_of[i]) += weight;
  return model;
}

void WritePointsCsv(std::span<const LabeledSample> points,
                    const std::filesystem::path& path,
                    std::string_view provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "class_id,x_m,y_m\n";
  for (const auto& s : points)
    out << s.class_id << ',' << FormatDouble(s.location.x_m) << ','
        << FormatDouble(s.location.y_m) << '\n';
}

void WriteDatasetCsv(const Dataset& data, const std::filesystem::path& path,
                     std::string_view provenance) {
  WritePointsCsv(data.samples, path, provenance);
  nlohmann::ordered_json meta;
  meta["num_classes"] = data.num_classes;
  meta["region"] = {{"center_lat", data.region.center_lat},
                    {"center_lon", data.region.center_lon},
                    {"side_m", data.region.side_m}};
  meta["split"] = std::string(SplitName(data.split));
  meta["seed"] = data.seed;
  std::ofstream side(SidecarPath(path), std::ios::binary);
  if (!side) throw DataError("cannot write sidecar for " + path.string());
  side << meta.dump(2) << '\n';
}

Dataset ReadDatasetCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Dataset data;
  std::ifstream side(SidecarPath(path));
  if (!side) throw DataError("missing sidecar " + SidecarPath(path).string());
  try {
    const auto meta = nlohmann::json::parse(side);
    data.num_classes = meta.at("num_classes").get<int>();
    data.region.center_lat = meta.at("region").at("center_lat").get<double>();
    data.region.center_lon = meta.at("region").at("center_lon").get<double>();
    data.region.side_m = meta.at("region").at("side_m").get<double>();
    data.split = ParseSplit(meta.at("split").get<std::string>());
    data.seed = meta.value("seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad sidecar for " + path.string() + ": " + e.what());
  }
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("class_id,x_m,y_m", 0) != 0)
        throw DataError("unexpected header in " + path.string());
      header_seen = true;
      continue;
    }
    std::string_view view(line);
    const auto c1 = view.find(',');
    const auto c2 = view.find(',', c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 columns");
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    LabeledSample s;
    s.class_id = static_cast<int>(ParseDouble(view.substr(0, c1), ctx));
    s.location.x_m = ParseDouble(view.substr(c1 + 1, c2 - c1 - 1), ctx);
    s.location.y_m = ParseDouble(view.substr(c2 + 1), ctx);
    data.samples.push_back(s);
  }
  try {
    data.Validate();
  } catch (const ContractError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return data;
}

}  // namespace locpriv
