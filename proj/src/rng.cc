// Copyright 2026 The causal-eval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "causal_eval/rng.h"

#include <cmath>
#include <numbers>
#include <utility>

namespace causal_eval {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(product >> 32);
  lo = static_cast<uint32_t>(product);
}

inline double ToUnitOpen(uint32_t hi, uint32_t lo) {
  const uint64_t bits = (static_cast<uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter Philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, c[0], hi0, lo0);
    MulHiLo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

CounterRng::CounterRng(uint64_t seed, Stream stream, uint32_t substream)
    : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
      stream_(static_cast<uint32_t>(stream)),
      substream_(substream) {}

PhiloxCounter CounterRng::Block(uint64_t index) const {
  return Philox4x32({static_cast<uint32_t>(index),
                     static_cast<uint32_t>(index >> 32), stream_, substream_},
                    key_);
}

double CounterRng::Uniform(uint64_t index) const {
  const PhiloxCounter block = Block(index);
  return ToUnitOpen(block[0], block[1]);
}

double CounterRng::Normal(uint64_t index) const {
  const PhiloxCounter block = Block(index);
  const double u1 = ToUnitOpen(block[0], block[1]);
  const double u2 = ToUnitOpen(block[2], block[3]);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t CounterRng::Below(uint64_t index, uint64_t n) const {
  const PhiloxCounter block = Block(index);
  const uint64_t bits = (static_cast<uint64_t>(block[0]) << 32) | block[1];
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(bits) * n) >> 64);
}

uint64_t DeriveSeed(uint64_t seed, uint32_t tag, uint32_t index) {
  const PhiloxCounter block =
      Philox4x32({tag, index, static_cast<uint32_t>(Stream::kSeedDerivation), 0},
                 {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)});
  return (static_cast<uint64_t>(block[0]) << 32) | block[1];
}

void Shuffle(std::span<std::size_t> values, const CounterRng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = rng.Below(i - 1, i);
    std::swap(values[i - 1], values[j]);
  }
}

void BootstrapCounts(uint64_t seed, uint32_t replicate, std::size_t n,
                     std::vector<double>& counts) {
  counts.assign(n, 0.0);
  const CounterRng rng(seed, Stream::kBootstrap, replicate);
  for (std::size_t k = 0; k < n; ++k) counts[rng.Below(k, n)] += 1.0;
}

}  // namespace causal_eval
