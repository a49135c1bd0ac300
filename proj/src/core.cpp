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

#include "meshpipe/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

namespace meshpipe {

namespace {

std::uint64_t split_by_3(std::uint32_t v) {
  std::uint64_t x = v & 0x1fffff;  // 21 bits
  x = (x | x << 32) & 0x1f00000000ffffULL;
  x = (x | x << 16) & 0x1f0000ff0000ffULL;
  x = (x | x << 8) & 0x100f00f00f00f00fULL;
  x = (x | x << 4) & 0x10c30c30c30c30c3ULL;
  x = (x | x << 2) & 0x1249249249249249ULL;
  return x;
}

}  // namespace

std::uint64_t morton3(std::uint32_t x, std::uint32_t y, std::uint32_t z) {
  return split_by_3(x) | (split_by_3(y) << 1) | (split_by_3(z) << 2);
}

std::uint64_t morton3_point(const Vec3& p) {
  const double scale = double(1u << 21);
  auto quantize = [&](double v) {
    double t = (v + 0.5) * scale;
    t = std::clamp(t, 0.0, scale - 1.0);
    return std::uint32_t(t);
  };
  return morton3(quantize(p.x()), quantize(p.y()), quantize(p.z()));
}

std::uint64_t Rng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return double(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) { return n ? next() % n : 0; }

Vec3 Rng::unit_vector() {
  // Rejection sampling inside the unit ball keeps the direction uniform.
  for (;;) {
    Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
    double n2 = v.squaredNorm();
    if (n2 > 1e-12 && n2 <= 1.0) return v / std::sqrt(n2);
  }
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, std::size_t(in.gcount()), h);
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {
std::atomic<int> g_threads{0};
}

int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n ? int(n) : 1;
}

void set_thread_count(int n) { g_threads.store(n < 0 ? 0 : n); }

int thread_count() {
  int n = g_threads.load();
  return n > 0 ? n : hardware_threads();
}

void parallel_for(std::int64_t n,
                  const std::function<void(std::int64_t, std::int64_t)>& body,
                  std::int64_t grain) {
  if (n <= 0) return;
  int workers = thread_count();
  if (workers <= 1 || n <= grain) {
    body(0, n);
    return;
  }
  std::int64_t chunks = std::min<std::int64_t>(workers, (n + grain - 1) / grain);
  std::atomic<std::int64_t> next_chunk{0};
  std::int64_t chunk_size = (n + chunks - 1) / chunks;
  auto worker = [&]() {
    for (;;) {
      std::int64_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      std::int64_t begin = c * chunk_size;
      std::int64_t end = std::min(n, begin + chunk_size);
      if (begin < end) body(begin, end);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(chunks - 1));
  for (std::int64_t i = 1; i < chunks; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace meshpipe
