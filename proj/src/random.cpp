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

#include "dpmedian/random.hpp"

#include <cmath>
#include <numbers>

#include "dpmedian/errors.hpp"

namespace dpmedian {
namespace {

// SplitMix64 finalizer; used to spread (seed, stream_id) over engine seeds.
uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Combine(uint64_t a, uint64_t b) { return Mix64(a ^ Mix64(b)); }

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(Combine(seed, stream_id)) {}

RngStream RngStream::Child(uint64_t child_id) const {
  return RngStream(Combine(seed_, stream_id_), Mix64(child_id) ^ child_id);
}

uint64_t RngStream::NextU64() { return engine_(); }

double RngStream::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::NextOpenUniform() {
  return (static_cast<double>(NextU64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::Uniform(double a, double b) {
  if (a > b) throw ConfigError("Uniform(a, b) needs a <= b");
  if (a == b) return a;
  return a + NextUniform() * (b - a);
}

double RngStream::Gaussian(double mu, double sigma) {
  if (sigma < 0) throw ConfigError("Gaussian sigma must be nonnegative");
  if (sigma == 0) return mu;
  const double u1 = NextOpenUniform();
  const double u2 = NextOpenUniform();
  const double z =
      std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mu + sigma * z;
}

double RngStream::Gumbel() { return -std::log(-std::log(NextOpenUniform())); }

}  // namespace dpmedian
