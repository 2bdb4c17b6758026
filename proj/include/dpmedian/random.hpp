//
// Copyright 2026 the dpmedian authors
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
//

#ifndef DPMEDIAN_RANDOM_HPP_
#define DPMEDIAN_RANDOM_HPP_

#include <cstdint>
#include <random>

namespace dpmedian {

// Seeded noise stream. Identical (seed, stream_id) replays the identical
// sequence; distinct stream ids give statistically independent sequences.
// A stream is single-owner: share configuration, not instances. Parallel
// workers each take their own Child().
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  // Derives an independent stream. Children of distinct ids (or of distinct
  // parents) never collide in practice: the id path is hashed into the
  // engine seed.
  RngStream Child(uint64_t child_id) const;

  uint64_t NextU64();

  // Uniform on [0, 1) with 53-bit resolution.
  double NextUniform();

  // Uniform on the open interval (0, 1); never returns an exact 0 or 1.
  double NextOpenUniform();

  // Uniform on [a, b]; a == b returns a exactly.
  double Uniform(double a, double b);

  // N(mu, sigma^2) via Box-Muller; sigma == 0 returns mu exactly.
  double Gaussian(double mu, double sigma);

  // Standard Gumbel(0, 1) via inverse CDF -ln(-ln(U)), U in (0,1).
  double Gumbel();

 private:
  uint64_t seed_;
  uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace dpmedian

#endif  // DPMEDIAN_RANDOM_HPP_
