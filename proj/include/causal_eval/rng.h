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

// Counter-based random numbers.
//
// Every random draw in the library is a pure function of
// (seed, stream, substream, index), computed with Philox4x32-10. The 64-bit
// seed is the Philox key; the 128-bit counter is laid out as
//
//   word 0..1 : draw index (row index, bootstrap draw, shuffle position)
//   word 2    : stream id (one per independent random quantity)
//   word 3    : substream (replicate number, fold, class, ...)
//
// so that sub-streams never overlap and results do not depend on the order
// in which draws are requested (or on the number of threads requesting them).

#ifndef CAUSAL_EVAL_RNG_H_
#define CAUSAL_EVAL_RNG_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace causal_eval {

// Stream ids. Values are part of the reproducibility contract; append only.
enum class Stream : uint32_t {
  kLatent = 1,      // U in the causal-direction processes.
  kGroup = 2,       // Fresh subgroup coin.
  kCovariate = 3,   // Gaussian noise of X.
  kLabel = 4,       // Y given its parents.
  kSelection = 5,   // S given its parents.
  kGroupMixing = 6, // Whether A copies U (fractional gamma).
  kFolds = 7,       // Cross-validation fold shuffles.
  kBootstrap = 8,   // Bootstrap resampling.
  kSeedDerivation = 9,
};

using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter Philox4x32(PhiloxCounter counter, PhiloxKey key);

class CounterRng {
 public:
  CounterRng(uint64_t seed, Stream stream, uint32_t substream = 0);

  PhiloxCounter Block(uint64_t index) const;

  // Uniform on the open interval (0, 1) with 53 bits of resolution.
  double Uniform(uint64_t index) const;
  // Standard normal (Box-Muller, cosine branch).
  double Normal(uint64_t index) const;
  bool Bernoulli(uint64_t index, double p) const { return Uniform(index) < p; }
  // Uniform integer in [0, n). Requires n > 0.
  uint64_t Below(uint64_t index, uint64_t n) const;

 private:
  PhiloxKey key_;
  uint32_t stream_;
  uint32_t substream_;
};

// Independent child seed for a labelled sub-computation.
uint64_t DeriveSeed(uint64_t seed, uint32_t tag, uint32_t index = 0);

// Deterministic Fisher-Yates shuffle.
void Shuffle(std::span<std::size_t> values, const CounterRng& rng);

// Multiplicity of every row in one bootstrap resample of n rows (n draws with
// replacement). Depends only on (seed, replicate, n).
void BootstrapCounts(uint64_t seed, uint32_t replicate, std::size_t n,
                     std::vector<double>& counts);

}  // namespace causal_eval

#endif  // CAUSAL_EVAL_RNG_H_
