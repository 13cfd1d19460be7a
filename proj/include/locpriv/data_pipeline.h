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

#ifndef LOCPRIV_DATA_PIPELINE_H_
#define LOCPRIV_DATA_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "locpriv/core_model.h"
#include "locpriv/dataset.h"

namespace locpriv {

// Fraction of the train+val pool held out for validation.
inline constexpr double kDefaultValFraction = 0.2;

struct SyntheticSpec {
  Region region;
  double square_side_m = 300.0;
  double max_radius_m = 45.0;
  int samples_per_class = 600;
  int num_classes = 4;
  int test_per_class = 120;
  double val_fraction = kDefaultValFraction;
  std::uint64_t seed = 0;

  void Validate() const;
  // Class vertices: a regular polygon centered on the region center; for four
  // classes the corners of the square at (+-side/2, +-side/2).
  std::vector<Location> Vertices() const;
};

// Disk-uniform clouds around each vertex, split per class into
// train / val / test.
DatasetSplits GenSynthetic(const SyntheticSpec& spec);

// Equirectangular projection about the region center.
Location ProjectToMeters(const Region& region, double lat, double lon);
void MetersToLatLon(const Region& region, const Location& p, double* lat, double* lon);

struct GowallaSpec {
  Region region{48.8635, 2.3486, 4500.0};
  int num_users = 6;
  int per_user_trainval = 82;
  int per_user_test = 20;
  double val_fraction = kDefaultValFraction;
  // Zero-based column indices after splitting on tabs, commas or spaces.
  int user_col = 0;
  int lat_col = 2;
  int lon_col = 3;
  // Drop points within this distance of another user's point (0 = off).
  double overlap_radius_m = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct GowallaIngest {
  DatasetSplits splits;
  std::vector<std::string> user_ids;             // class id -> user id
  std::vector<std::size_t> in_region_counts;     // per selected user
  std::uint64_t source_hash = 0;                 // FNV-1a of the file bytes
  std::size_t records = 0;
};

// Keeps the num_users users with the most in-region check-ins among those
// with enough samples (ties by user id) and subsamples each one.
GowallaIngest IngestGowalla(const std::filesystem::path& path, const GowallaSpec& spec);

// JSON sidecar with source hash, spec, seed and selected users.
void WriteIngestProvenance(const GowallaIngest& ingest, const GowallaSpec& spec,
                           const std::filesystem::path& source,
                           const std::filesystem::path& out);

// Raw check-in file shaped like the public Gowalla dump
// (user, timestamp, lat, lon, venue), standing in for it in tests and the
// bundled configs.
struct GowallaFixtureSpec {
  Region region{48.8635, 2.3486, 4500.0};
  int main_users = 6;
  int main_checkins = 160;
  int sparse_users = 2;     // users below the per-user sample threshold
  int sparse_checkins = 60;
  double ring_radius_m = 650.0;  // distance of each user's home from center
  double home_sigma_m = 70.0;
  double shared_fraction = 0.05;  // check-ins at a shared downtown spot
  double outside_fraction = 0.1;  // check-ins outside the region
  std::uint64_t seed = 0;
};
void WriteGowallaFixture(const GowallaFixtureSpec& spec, const std::filesystem::path& path);

}  // namespace locpriv

#endif  // LOCPRIV_DATA_PIPELINE_H_
