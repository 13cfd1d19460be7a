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

#ifndef LOCPRIV_MECHANISMS_H_
#define LOCPRIV_MECHANISMS_H_

#include <filesystem>
#include <span>
#include <vector>

#include "locpriv/core_model.h"
#include "locpriv/rng.h"

namespace locpriv {

// A stochastic map from a true location to a reported one.
class Mechanism {
 public:
  virtual ~Mechanism() = default;
  virtual Location Sample(const Location& w, Rng& rng) const = 0;
  // Fills `out[i]` with one draw for `in[i]`. The default loops over Sample.
  virtual void SampleBatch(std::span<const Location> in, Rng& rng,
                           std::span<Location> out) const;
};

class IdentityMechanism final : public Mechanism {
 public:
  Location Sample(const Location& w, Rng&) const override { return w; }
};

// Principal branch W_{-1} of the Lambert W function on [-1/e, 0), by Halley
// iteration to ~1e-12 relative tolerance.
double LambertWm1(double x);

// Planar Laplace: density eps^2 / (2 pi) exp(-eps d(w, z)).
class PlanarLaplace final : public Mechanism {
 public:
  explicit PlanarLaplace(double epsilon_per_m);

  double epsilon() const { return epsilon_; }
  double Density(const Location& w, const Location& z) const;
  // Always 2 / epsilon, independent of the prior.
  double ExpectedDistortion() const { return 2.0 / epsilon_; }
  // Radius with CDF value p, i.e. -(W_{-1}((p - 1) / e) + 1) / eps.
  double InverseRadialCdf(double p) const;
  Location Sample(const Location& w, Rng& rng) const override;

 private:
  double epsilon_;
};

// Explicit channel over a finite output support.
class TabularMechanism {
 public:
  TabularMechanism(std::vector<Location> support, CondTable table);

  const std::vector<Location>& support() const { return support_; }
  const CondTable& table() const { return table_; }
  std::size_t SampleIndex(std::size_t w_index, Rng& rng) const;
  Location Sample(std::size_t w_index, Rng& rng) const {
    return support_[SampleIndex(w_index, rng)];
  }

  // Text format: magic line, `rows R cols C`, `support x0 y0 x1 y1 ...`,
  // then R lines of C row-major probabilities.
  void Save(const std::filesystem::path& path) const;
  static TabularMechanism Load(const std::filesystem::path& path);

 private:
  std::vector<Location> support_;
  CondTable table_;
};

}  // namespace locpriv

#endif  // LOCPRIV_MECHANISMS_H_
