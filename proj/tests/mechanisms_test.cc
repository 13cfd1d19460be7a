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

#include "locpriv/mechanisms.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "locpriv/error.h"
#include "test_util.h"

namespace locpriv {
namespace {

// Upper-tail chi-square critical values at alpha = 0.01.
double ChiSquareCritical01(int dof) {
  // Wilson-Hilferty approximation; accurate to well under 1% for dof >= 10.
  const double z = 2.326347874040841;
  const double k = dof;
  return k * std::pow(1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k)), 3);
}

TEST(LambertWTest, InvertsDefiningEquation) {
  for (double x : {-1.0 / std::numbers::e + 1e-12, -0.3, -0.2, -0.05, -1e-3, -1e-8}) {
    const double w = LambertWm1(x);
    EXPECT_LE(w, -1.0);
    EXPECT_NEAR(w * std::exp(w), x, 1e-12 * std::max(1.0, std::abs(x)) + 1e-15) << x;
  }
  EXPECT_NEAR(LambertWm1(-1.0 / std::numbers::e), -1.0, 1e-6);
}

TEST(PlanarLaplaceTest, DensityClosedForms) {
  const double eps = std::numbers::ln2 / 100.0;
  const PlanarLaplace lap(eps);
  const double peak = eps * eps / (2.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(lap.Density({3, 4}, {3, 4}), peak);
  EXPECT_NEAR(lap.Density({0, 0}, {100.0, 0}), 0.5 * peak, 1e-18);
  EXPECT_NEAR(lap.Density({0, 0}, {60, 80}), lap.Density({0, 0}, {-100, 0}), 1e-18);
  EXPECT_GT(lap.Density({0, 0}, {10, 0}), lap.Density({0, 0}, {11, 0}));
  EXPECT_THROW(PlanarLaplace(0.0), ContractError);
}

TEST(PlanarLaplaceTest, DensityIntegratesToOne) {
  // Polar midpoint rule out to 40 / eps (tail mass e^-40 (1 + 40)).
  const double eps = std::numbers::ln2 / 60.0;
  const PlanarLaplace lap(eps);
  const int nr = 20000;
  const double rmax = 40.0 / eps, dr = rmax / nr;
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) * dr;
    total += lap.Density({0, 0}, {r, 0}) * 2.0 * std::numbers::pi * r * dr;
  }
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(PlanarLaplaceTest, ExpectedDistortionValues) {
  EXPECT_NEAR(PlanarLaplace(std::numbers::ln2 / 100).ExpectedDistortion(), 288.54, 0.01);
  EXPECT_NEAR(PlanarLaplace(std::numbers::ln2 / 60).ExpectedDistortion(), 173.12, 0.01);
  EXPECT_NEAR(PlanarLaplace(std::numbers::ln2 / 400).ExpectedDistortion(), 1154.16, 0.01);
  EXPECT_NEAR(PlanarLaplace(std::numbers::ln2 / 180).ExpectedDistortion(), 519.37, 0.01);
}

TEST(PlanarLaplaceTest, InverseRadialCdfMatchesCdf) {
  const double eps = 0.01;
  const PlanarLaplace lap(eps);
  EXPECT_EQ(lap.InverseRadialCdf(0.0), 0.0);
  for (double p : {1e-6, 0.1, 0.5, 0.9, 0.999999}) {
    const double r = lap.InverseRadialCdf(p);
    // C(r) = 1 - (1 + eps r) e^{-eps r}
    EXPECT_NEAR(1.0 - (1.0 + eps * r) * std::exp(-eps * r), p, 1e-10) << p;
  }
}

TEST(PlanarLaplaceTest, MonteCarloMeanMatchesTwoOverEpsilon) {
  for (double div : {100.0, 180.0}) {
    const PlanarLaplace lap(std::numbers::ln2 / div);
    Rng rng(DeriveSeed(0, "mc", static_cast<std::uint64_t>(div)));
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) total += Distance({5, 5}, lap.Sample({5, 5}, rng));
    EXPECT_NEAR(total / n / lap.ExpectedDistortion(), 1.0, 0.02);
  }
}

TEST(PlanarLaplaceTest, AnglesAreUniform) {
  const PlanarLaplace lap(0.01);
  Rng rng(77);
  const int n = 100000, bins = 36;
  std::vector<int> hist(bins, 0);
  for (int i = 0; i < n; ++i) {
    const Location z = lap.Sample({0, 0}, rng);
    double a = std::atan2(z.y_m, z.x_m);
    if (a < 0) a += 2.0 * std::numbers::pi;
    hist[std::min(bins - 1, static_cast<int>(a / (2.0 * std::numbers::pi) * bins))]++;
  }
  double chi2 = 0.0;
  const double expected = static_cast<double>(n) / bins;
  for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
  EXPECT_LT(chi2, ChiSquareCritical01(bins - 1));
}

TEST(PlanarLaplaceTest, HistogramMatchesDensity) {
  // 2-D histogram of 1e6 samples against cell masses of the density.
  const double eps = 0.02;
  const PlanarLaplace lap(eps);
  Rng rng(91);
  const int n = 1000000, cells = 40;
  const double half = 300.0, cs = 2.0 * half / cells;
  std::vector<double> counts(cells * cells, 0.0);
  int outside = 0;
  for (int i = 0; i < n; ++i) {
    const Location z = lap.Sample({0, 0}, rng);
    const int cx = static_cast<int>(std::floor((z.x_m + half) / cs));
    const int cy = static_cast<int>(std::floor((z.y_m + half) / cs));
    if (cx < 0 || cy < 0 || cx >= cells || cy >= cells) {
      ++outside;
      continue;
    }
    counts[cy * cells + cx] += 1.0;
  }
  double tv = 0.0, inside_mass = 0.0;
  const int sub = 6;
  for (int cy = 0; cy < cells; ++cy)
    for (int cx = 0; cx < cells; ++cx) {
      double mass = 0.0;
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b) {
          const Location p{-half + (cx + (a + 0.5) / sub) * cs, -half + (cy + (b + 0.5) / sub) * cs};
          mass += lap.Density({0, 0}, p) * cs * cs / (sub * sub);
        }
      inside_mass += mass;
      tv += std::abs(mass - counts[cy * cells + cx] / n);
    }
  tv += std::abs((1.0 - inside_mass) - static_cast<double>(outside) / n);
  EXPECT_LT(0.5 * tv, 0.02);
}

TEST(PlanarLaplaceTest, FixedSeedIsReproducible) {
  const PlanarLaplace lap(0.01);
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(lap.Sample({1, 2}, a), lap.Sample({1, 2}, b));
}

TEST(TabularMechanismTest, SamplingFrequencies) {
  Eigen::MatrixXd m(3, 4);
  m << 0, 0, 1, 0,  //
      0.6, 0.4, 0, 0,  //
      0.25, 0.25, 0.25, 0.25;
  const TabularMechanism t({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, CondTable(m));
  Rng rng(12);
  const int n = 100000;
  for (std::size_t w = 0; w < 3; ++w) {
    std::vector<int> hist(4, 0);
    for (int i = 0; i < n; ++i) hist[t.SampleIndex(w, rng)]++;
    for (int z = 0; z < 4; ++z) EXPECT_NEAR(static_cast<double>(hist[z]) / n, m(w, z), 0.01);
    if (w == 0) EXPECT_EQ(hist[2], n);
  }
  EXPECT_THROW(t.SampleIndex(3, rng), ContractError);
}

TEST(TabularMechanismTest, ChiSquareOnUniformRow) {
  const TabularMechanism t({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, CondTable::UniformRows(1, 4));
  Rng rng(13);
  const int n = 100000;
  std::vector<int> hist(4, 0);
  for (int i = 0; i < n; ++i) hist[t.SampleIndex(0, rng)]++;
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - n / 4.0) * (h - n / 4.0) / (n / 4.0);
  EXPECT_LT(chi2, 11.345);  // chi2(3) at alpha = 0.01
}

TEST(TabularMechanismTest, SaveLoadRoundTrip) {
  const auto dir = testing::TempDir("tabular");
  Eigen::MatrixXd m(2, 2);
  m << 0.6, 0.4, 0.4, 0.6;
  const TabularMechanism t({{0, 0}, {100, 0}}, CondTable(m));
  t.Save(dir / "t.txt");
  const TabularMechanism r = TabularMechanism::Load(dir / "t.txt");
  EXPECT_EQ(r.support()[1], (Location{100, 0}));
  EXPECT_EQ(r.table().matrix(), m);
}

}  // namespace
}  // namespace locpriv
