// Copyright 2026 The Meshpipe Authors.
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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshpipe {

using Vec3 = Eigen::Vector3d;
using Vec3i = Eigen::Vector3i;
using Mat3 = Eigen::Matrix3d;

/// Base error for all library failures; the CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file or config (CLI exit code 2).
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// A pipeline stage failed on valid input (CLI exit code 3).
struct StageError : Error {
  explicit StageError(const std::string& msg) : Error(msg) {}
};

/// External adjudicator broke the request/reply protocol (CLI exit code 4).
struct AdjudicatorError : Error {
  explicit AdjudicatorError(const std::string& msg) : Error(msg) {}
};

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return !(min.x() <= max.x()); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  double volume() const {
    if (empty()) return 0.0;
    Vec3 e = extent();
    return e.x() * e.y() * e.z();
  }
  double diagonal() const { return empty() ? 0.0 : extent().norm(); }

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool overlaps(const Aabb& b) const {
    return (min.array() <= b.max.array()).all() &&
           (max.array() >= b.min.array()).all();
  }
  double squared_distance(const Vec3& p) const {
    Vec3 d = (min - p).cwiseMax(p - max).cwiseMax(0.0);
    return d.squaredNorm();
  }
};

/// Interleaved-bit spatial code over 21 bits per axis.
std::uint64_t morton3(std::uint32_t x, std::uint32_t y, std::uint32_t z);

/// Morton code of a point in [-0.5, 0.5]^3, quantized to 2^21 bins per axis.
std::uint64_t morton3_point(const Vec3& p);

/// Deterministic generator; uniform() avoids the libstdc++-specific
/// distribution adaptors so sequences are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next();
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  std::uint64_t below(std::uint64_t n);   // [0, n)
  Vec3 unit_vector();

 private:
  std::uint64_t state_;
};

/// FNV-1a over bytes; used for manifest content hashes (not cryptographic).
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t h);

int hardware_threads();
/// 0 restores the default (hardware concurrency).
void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) over disjoint chunks of [0, n), possibly from
/// multiple threads. Bodies must write only to their own output slots.
void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& body,
                  std::int64_t grain = 1024);

}  // namespace meshpipe
