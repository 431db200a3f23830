// Copyright 2026 The kljnsim Authors
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

#ifndef KLJN_RANDOM_H_
#define KLJN_RANDOM_H_

#include <cstdint>
#include <random>

namespace kljn {

// Who owns a random stream.
enum class Party : uint8_t { kAlice = 1, kBob = 2, kEve = 3, kHarness = 4 };

// What a stream is used for. Values are part of the seed derivation and
// must never be renumbered.
enum class StreamRole : uint8_t {
  kResistorChoice = 1,
  kGenerator = 2,
  kMeasurementNoise = 3,
  kTieBreak = 4,
  kInjectionSchedule = 5,
  kProbeSchedule = 6,
  kProbeNoise = 7,
  kSketch = 8,
  kCalibration = 9,
};

// SplitMix64 finalizer.
constexpr uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based split of the master seed. The derived seed is
//
//   Mix64(Mix64(Mix64(Mix64(master) ^ index) ^ party) ^ (role << 32 | sub))
//
// so every (index, party, role, sub) tuple owns an independent stream that
// does not depend on evaluation order or on how work is spread over threads.
constexpr uint64_t DeriveSeed(uint64_t master, uint64_t index, Party party,
                              StreamRole role, uint32_t sub = 0) {
  uint64_t h = Mix64(master);
  h = Mix64(h ^ index);
  h = Mix64(h ^ static_cast<uint64_t>(party));
  h = Mix64(h ^ ((static_cast<uint64_t>(role) << 32) |
                 static_cast<uint64_t>(sub)));
  return h;
}

using Engine = std::mt19937_64;

inline Engine MakeEngine(uint64_t master, uint64_t index, Party party,
                         StreamRole role, uint32_t sub = 0) {
  return Engine(DeriveSeed(master, index, party, role, sub));
}

// Uniform double in [0, 1) built from the top 53 bits, so the value does not
// depend on the standard library's distribution implementation.
inline double UniformUnit(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace kljn

#endif  // KLJN_RANDOM_H_
