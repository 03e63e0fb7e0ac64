// Copyright 2026 The laprate Authors
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

#ifndef LAPRATE_RANDOM_H_
#define LAPRATE_RANDOM_H_

#include <cstdint>
#include <random>

namespace laprate {

// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic uniform source. Uniforms are built from the top 53 bits of
// the engine output so values are bitwise identical on every platform
// (std::uniform_real_distribution is implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(mix64(seed)) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform_open();
  }

 private:
  std::mt19937_64 engine_;
};

// Per-block stream: a hash of (global seed, frame id, block id), so every
// block's randomness is independent of processing order.
inline RandomStream derive_block_stream(uint64_t global_seed, uint32_t frame_id,
                                        uint32_t block_id) {
  const uint64_t h1 = mix64(global_seed);
  const uint64_t h2 = mix64(h1 ^ (static_cast<uint64_t>(frame_id) << 32 |
                                  static_cast<uint64_t>(block_id)));
  return RandomStream(h2);
}

}  // namespace laprate

#endif  // LAPRATE_RANDOM_H_
