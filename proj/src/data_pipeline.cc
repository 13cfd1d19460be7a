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

#include "locpriv/data_pipeline.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "locpriv/error.h"
#include "locpriv/rng.h"

namespace locpriv {
namespace {

constexpr double kEarthRadiusM = 6371008.8;  // mean radius
constexpr double kDegToRad = std::numbers::pi / 180.0;

int ValCount(int pool, double fraction) {
  return static_cast<int>(std::lround(fraction * pool));
}

Dataset EmptySplit(const Region& region, int num_classes, Split split,
                   std::uint64_t seed) {
  Dataset d;
  d.num_classes = num_classes;
  d.region = region;
  d.split = split;
  d.seed = seed;
  return d;
}

std::vector<std::string> Tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '\t' || c == ',' || c == ' ' || c == '\r') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool ParseDouble(const std::string& s, double* v) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, *v);
  return ec == std::errc() && ptr == end && std::isfinite(*v);
}

// Numeric ids compare as numbers, anything else lexicographically.
bool UserIdLess(const std::string& a, const std::string& b) {
  long long x = 0, y = 0;
  const auto pa = std::from_chars(a.data(), a.data() + a.size(), x);
  const auto pb = std::from_chars(b.data(), b.data() + b.size(), y);
  const bool na = pa.ec == std::errc() && pa.ptr == a.data() + a.size();
  const bool nb = pb.ec == std::errc() && pb.ptr == b.data() + b.size();
  if (na && nb) return x < y;
  if (na != nb) return na;
  return a < b;
}

struct UserPoints {
  std::string id;
  std::vector<Location> points;
};

// Removes points lying within `radius` of a point of another user.
void FilterOverlap(std::vector<UserPoints>& users, double radius) {
  std::map<std::pair<long long, long long>, std::vector<std::pair<std::size_t, Location>>>
      cells;
  const auto key = [&](const Location& p) {
    return std::make_pair(static_cast<long long>(std::floor(p.x_m / radius)),
                          static_cast<long long>(std::floor(p.y_m / radius)));
  };
  for (std::size_t u = 0; u < users.size(); ++u)
    for (const auto& p : users[u].points) cells[key(p)].push_back({u, p});
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::vector<Location> kept;
    for (const auto& p : users[u].points) {
      const auto [cx, cy] = key(p);
      bool overlap = false;
      for (long long dx = -1; dx <= 1 && !overlap; ++dx)
        for (long long dy = -1; dy <= 1 && !overlap; ++dy) {
          const auto it = cells.find({cx + dx, cy + dy});
          if (it == cells.end()) continue;
          for (const auto& [v, q] : it->second)
            if (v != u && Distance(p, q) <= radius) {
              overlap = true;
              break;
            }
        }
      if (!overlap) kept.push_back(p);
    }
    users[u].points = std::move(kept);
  }
}

}  // namespace

void SyntheticSpec::Validate() const {
  region.Validate();
  Require(num_classes >= 2, "SyntheticSpec: need at least two classes");
  Require(square_side_m > 0.0 && max_radius_m > 0.0, "SyntheticSpec: bad geometry");
  Require(samples_per_class > test_per_class && test_per_class > 0,
          "SyntheticSpec: test split must be a proper part of each class");
  Require(val_fraction > 0.0 && val_fraction < 1.0, "SyntheticSpec: bad val fraction");
  const auto v = Vertices();
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) min_gap = std::min(min_gap, Distance(v[i], v[j]));
  Require(max_radius_m < 0.5 * min_gap,
          "SyntheticSpec: cluster radius must be below half the vertex spacing");
  for (const auto& p : v)
    Require(region.Contains({p.x_m + max_radius_m, p.y_m + max_radius_m}) &&
                region.Contains({p.x_m - max_radius_m, p.y_m - max_radius_m}),
            "SyntheticSpec: clusters must lie inside the region");
}

std::vector<Location> SyntheticSpec::Vertices() const {
  const double h = 0.5 * square_side_m;
  if (num_classes == 4) return {{h, h}, {-h, h}, {-h, -h}, {h, -h}};
  std::vector<Location> v;
  const double r = h * std::numbers::sqrt2;
  for (int k = 0; k < num_classes; ++k) {
    const double a = std::numbers::pi / 4 + 2.0 * std::numbers::pi * k / num_classes;
    v.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return v;
}

DatasetSplits GenSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  const auto vertices = spec.Vertices();
  Rng point_rng(DeriveSeed(spec.seed, "synthetic-points"));
  Rng split_rng(DeriveSeed(spec.seed, "synthetic-split"));
  DatasetSplits out{EmptySplit(spec.region, spec.num_classes, Split::kTrain, spec.seed),
                    EmptySplit(spec.region, spec.num_classes, Split::kVal, spec.seed),
                    EmptySplit(spec.region, spec.num_classes, Split::kTest, spec.seed)};
  const int trainval = spec.samples_per_class - spec.test_per_class;
  const int val = ValCount(trainval, spec.val_fraction);
  for (int c = 0; c < spec.num_classes; ++c) {
    std::vector<Location> pts(spec.samples_per_class);
    for (auto& p : pts) {
      const double theta = 2.0 * std::numbers::pi * point_rng.Uniform();
      const double r = spec.max_radius_m * std::sqrt(point_rng.Uniform());
      p = {vertices[c].x_m + r * std::cos(theta), vertices[c].y_m + r * std::sin(theta)};
    }
    split_rng.Shuffle(pts.begin(), pts.end());
    for (int i = 0; i < spec.samples_per_class; ++i) {
      Dataset& dst = i < val ? out.val : i < trainval ? out.train : out.test;
      dst.samples.push_back({c, pts[i]});
    }
  }
  return out;
}

Location ProjectToMeters(const Region& region, double lat, double lon) {
  const double k = kEarthRadiusM * kDegToRad;
  return {k * std::cos(region.center_lat * kDegToRad) * (lon - region.center_lon),
          k * (lat - region.center_lat)};
}

void MetersToLatLon(const Region& region, const Location& p, double* lat, double* lon) {
  const double k = kEarthRadiusM * kDegToRad;
  *lat = region.center_lat + p.y_m / k;
  *lon = region.center_lon + p.x_m / (k * std::cos(region.center_lat * kDegToRad));
}

void GowallaSpec::Validate() const {
  region.Validate();
  Require(num_users >= 2, "GowallaSpec: need at least two users");
  Require(per_user_trainval > 1 && per_user_test > 0, "GowallaSpec: bad per-user counts");
  Require(val_fraction > 0.0 && val_fraction < 1.0, "GowallaSpec: bad val fraction");
  Require(user_col >= 0 && lat_col >= 0 && lon_col >= 0 && user_col != lat_col &&
              user_col != lon_col && lat_col != lon_col,
          "GowallaSpec: column indices must be distinct and non-negative");
  Require(overlap_radius_m >= 0.0, "GowallaSpec: negative overlap radius");
}

GowallaIngest IngestGowalla(const std::filesystem::path& path, const GowallaSpec& spec) {
  spec.Validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open check-in file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();

  GowallaIngest result;
  result.source_hash = Fnv1a64(bytes);
  const int need_cols = std::max({spec.user_col, spec.lat_col, spec.lon_col}) + 1;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<UserPoints> users;
  std::istringstream lines(bytes);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto tok = Tokenize(line);
    if (tok.empty()) continue;
    double lat = 0.0, lon = 0.0;
    const bool ok = static_cast<int>(tok.size()) >= need_cols &&
                    ParseDouble(tok[spec.lat_col], &lat) && ParseDouble(tok[spec.lon_col], &lon);
    if (!ok) {
      if (line_no == 1) continue;  // header
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected user, latitude and longitude columns");
    }
    if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": latitude/longitude out of range");
    ++result.records;
    const Location p = ProjectToMeters(spec.region, lat, lon);
    if (!spec.region.Contains(p)) continue;
    const std::string& id = tok[spec.user_col];
    auto [it, inserted] = index.try_emplace(id, users.size());
    if (inserted) users.push_back({id, {}});
    users[it->second].points.push_back(p);
  }
  // Canonical order so the result does not depend on the file's line order.
  for (auto& u : users) {
    std::sort(u.points.begin(), u.points.end(), [](const Location& a, const Location& b) {
      return a.x_m != b.x_m ? a.x_m < b.x_m : a.y_m < b.y_m;
    });
  }
  if (spec.overlap_radius_m > 0.0) FilterOverlap(users, spec.overlap_radius_m);

  const std::size_t need = static_cast<std::size_t>(spec.per_user_trainval + spec.per_user_test);
  std::sort(users.begin(), users.end(), [](const UserPoints& a, const UserPoints& b) {
    if (a.points.size() != b.points.size()) return a.points.size() > b.points.size();
    return UserIdLess(a.id, b.id);
  });
  std::size_t qualifying = 0;
  while (qualifying < users.size() && users[qualifying].points.size() >= need) ++qualifying;
  if (qualifying == 0) {
    throw DataError("no qualifying users: " + std::to_string(users.size()) +
                    " users check in inside the region, none with at least " +
                    std::to_string(need) + " check-ins");
  }
  if (qualifying < static_cast<std::size_t>(spec.num_users)) {
    std::string msg = "only " + std::to_string(qualifying) + " users have at least " +
                      std::to_string(need) + " in-region check-ins; need " +
                      std::to_string(spec.num_users) + " (shortfall " +
                      std::to_string(spec.num_users - qualifying) + ")";
    if (qualifying < users.size())
      msg += "; next user '" + users[qualifying].id + "' has " +
             std::to_string(users[qualifying].points.size());
    throw DataError(msg);
  }

  const int n = spec.num_users;
  result.splits = {EmptySplit(spec.region, n, Split::kTrain, spec.seed),
                   EmptySplit(spec.region, n, Split::kVal, spec.seed),
                   EmptySplit(spec.region, n, Split::kTest, spec.seed)};
  const int val = ValCount(spec.per_user_trainval, spec.val_fraction);
  for (int c = 0; c < n; ++c) {
    UserPoints& u = users[c];
    result.user_ids.push_back(u.id);
    result.in_region_counts.push_back(u.points.size());
    Rng rng(DeriveSeed(spec.seed, "gowalla-subsample:" + u.id));
    rng.Shuffle(u.points.begin(), u.points.end());
    for (std::size_t i = 0; i < need; ++i) {
      Dataset& dst = static_cast<int>(i) < val                     ? result.splits.val
                     : static_cast<int>(i) < spec.per_user_trainval ? result.splits.train
                                                                   : result.splits.test;
      dst.samples.push_back({c, u.points[i]});
    }
  }
  return result;
}

void WriteIngestProvenance(const GowallaIngest& ingest, const GowallaSpec& spec,
                           const std::filesystem::path& source,
                           const std::filesystem::path& out) {
  nlohmann::ordered_json j;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(ingest.source_hash));
  j["source"] = source.string();
  j["source_fnv1a64"] = hash;
  j["records"] = ingest.records;
  j["seed"] = spec.seed;
  j["region"] = {{"center_lat", spec.region.center_lat},
                 {"center_lon", spec.region.center_lon},
                 {"side_m", spec.region.side_m}};
  j["num_users"] = spec.num_users;
  j["per_user_trainval"] = spec.per_user_trainval;
  j["per_user_test"] = spec.per_user_test;
  j["val_fraction"] = spec.val_fraction;
  j["overlap_radius_m"] = spec.overlap_radius_m;
  j["users"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < ingest.user_ids.size(); ++c)
    j["users"].push_back({{"class_id", c},
                          {"user_id", ingest.user_ids[c]},
                          {"in_region_checkins", ingest.in_region_counts[c]}});
  std::ofstream f(out, std::ios::binary);
  if (!f) throw DataError("cannot write " + out.string());
  f << j.dump(2) << '\n';
}

void WriteGowallaFixture(const GowallaFixtureSpec& spec, const std::filesystem::path& path) {
  Require(spec.main_users >= 1 && spec.main_checkins > 0 && spec.sparse_users >= 0,
          "GowallaFixtureSpec: bad user counts");
  Rng rng(DeriveSeed(spec.seed, "gowalla-fixture"));
  const Location downtown{-180.0, 140.0};
  const double half = 0.5 * spec.region.side_m;
  struct Record {
    std::string user;
    Location p;
  };
  std::vector<Record> records;
  const auto gaussian = [&](const Location& c, double sigma) {
    return Location{c.x_m + sigma * rng.Normal(), c.y_m + sigma * rng.Normal()};
  };
  const auto outside = [&]() {
    const double a = 2.0 * std::numbers::pi * rng.Uniform();
    const double r = half * (1.6 + 2.0 * rng.Uniform());
    return Location{r * std::cos(a), r * std::sin(a)};
  };
  for (int u = 0; u < spec.main_users; ++u) {
    const double a = 0.3 + 2.0 * std::numbers::pi * u / spec.main_users;
    const Location home{spec.ring_radius_m * std::cos(a), spec.ring_radius_m * std::sin(a)};
    const std::string id = std::to_string(1000 + 37 * u);
    for (int i = 0; i < spec.main_checkins; ++i) {
      const double t = rng.Uniform();
      Location p = t < spec.outside_fraction ? outside()
                   : t < spec.outside_fraction + spec.shared_fraction
                       ? gaussian(downtown, 40.0)
                       : gaussian(home, spec.home_sigma_m);
      records.push_back({id, p});
    }
  }
  for (int u = 0; u < spec.sparse_users; ++u) {
    const Location home{half * (rng.Uniform() - 0.5), half * (rng.Uniform() - 0.5)};
    const std::string id = std::to_string(9000 + u);
    for (int i = 0; i < spec.sparse_checkins; ++i)
      records.push_back({id, gaussian(home, 120.0)});
  }
  rng.Shuffle(records.begin(), records.end());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  char line[160];
  for (const auto& r : records) {
    double lat = 0.0, lon = 0.0;
    MetersToLatLon(spec.region, r.p, &lat, &lon);
    const int day = 1 + static_cast<int>(rng.Index(28));
    const int sec = static_cast<int>(rng.Index(86400));
    std::snprintf(line, sizeof line, "%s\t2010-10-%02dT%02d:%02d:%02dZ\t%.7f\t%.7f\t%d\n",
                  r.user.c_str(), day, sec / 3600, sec / 60 % 60, sec % 60, lat, lon,
                  100000 + static_cast<int>(rng.Index(900000)));
    out << line;
  }
}

}  // namespace locpriv
