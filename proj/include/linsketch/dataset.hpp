/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#ifndef LINSKETCH_DATASET_HPP_
#define LINSKETCH_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "byte_io.hpp"
#include "kll_sketch.hpp"
#include "random.hpp"

namespace linsketch {

/// Malformed dataset file; offset() is the byte position where parsing stopped.
class format_error : public std::runtime_error {
public:
  format_error(const std::string& what, uint64_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  uint64_t offset() const noexcept { return offset_; }

private:
  uint64_t offset_;
};

// SOSD layout: u64 count, then count u64 keys, all little-endian.

inline std::vector<item> parse_sosd(std::span<const std::byte> bytes) {
  byte_reader in(bytes);
  if (bytes.size() < 8) throw format_error("missing 8-byte count header", bytes.size());
  const uint64_t count = in.u64();
  const uint64_t body = bytes.size() - 8;
  if (body % 8 != 0) throw format_error("trailing partial key", 8 + body - body % 8);
  if (body / 8 != count) {
    throw format_error("header declares " + std::to_string(count) + " keys but file holds " + std::to_string(body / 8),
                       body / 8 < count ? bytes.size() : 8 + count * 8);
  }
  std::vector<item> out(count);
  for (auto& v : out) v = in.u64();
  return out;
}

inline std::vector<item> read_sosd(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open dataset file: " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return parse_sosd(std::as_bytes(std::span<const char>(raw)));
  } catch (const format_error& e) {
    throw format_error(path.string() + ": " + e.what(), e.offset());
  }
}

inline void write_sosd(const std::filesystem::path& path, std::span<const item> keys) {
  byte_writer w;
  w.u64(keys.size());
  for (item v : keys) w.u64(v);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create dataset file: " + path.string());
  f.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
}

/// Keeps `limit` keys at evenly spaced positions; the CDF shape survives, a
/// prefix would not.
inline std::vector<item> stride_subsample(std::span<const item> data, uint64_t limit) {
  if (limit == 0 || data.size() <= limit) return {data.begin(), data.end()};
  std::vector<item> out(limit);
  for (uint64_t i = 0; i < limit; ++i) {
    out[i] = data[static_cast<size_t>((static_cast<unsigned __int128>(i) * data.size()) / limit)];
  }
  return out;
}

enum class synthetic_kind { uniform, lognormal, mixture, zipf };

inline std::optional<synthetic_kind> parse_synthetic_kind(std::string_view id) {
  if (id == "uniform") return synthetic_kind::uniform;
  if (id == "lognormal") return synthetic_kind::lognormal;
  if (id == "mixture") return synthetic_kind::mixture;
  if (id == "zipf") return synthetic_kind::zipf;
  return std::nullopt;
}

inline std::string_view to_string(synthetic_kind k) {
  switch (k) {
    case synthetic_kind::uniform: return "uniform";
    case synthetic_kind::lognormal: return "lognormal";
    case synthetic_kind::mixture: return "mixture";
    case synthetic_kind::zipf: return "zipf";
  }
  return "?";
}

namespace detail {

inline double standard_normal(splitmix64& rng) {
  // Box-Muller; one draw per call keeps the stream position simple
  const double u1 = 1.0 - rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline item quantize(double v) {
  constexpr double hi = 1.8e19;
  return static_cast<item>(std::clamp(std::round(v), 0.0, hi));
}

} // namespace detail

/// Synthetic keys with distinct CDF shapes:
///  uniform   - linear CDF over [0, 2^48)
///  lognormal - smooth concave CDF, long right tail
///  mixture   - eight Gaussian bumps of random location and width
///  zipf      - step CDF: 10^4 unevenly spaced keys drawn with Zipf(1.1) frequencies
inline std::vector<item> generate_synthetic(synthetic_kind kind, uint64_t n, uint64_t seed) {
  if (n == 0) throw std::invalid_argument("dataset size must be >= 1");
  splitmix64 rng(seed ^ 0x5eed5eed5eed5eedULL);
  std::vector<item> out(n);
  switch (kind) {
    case synthetic_kind::uniform:
      for (auto& v : out) v = rng.below(uint64_t{1} << 48);
      break;
    case synthetic_kind::lognormal:
      for (auto& v : out) v = detail::quantize(1e9 * std::exp(1.2 * detail::standard_normal(rng)));
      break;
    case synthetic_kind::mixture: {
      constexpr int components = 8;
      double mean[components], sd[components];
      for (int i = 0; i < components; ++i) {
        mean[i] = 1e10 + 1e12 * rng.unit();
        sd[i] = 1e9 + 5e10 * rng.unit();
      }
      for (auto& v : out) {
        const auto c = static_cast<int>(rng.below(components));
        v = detail::quantize(mean[c] + sd[c] * detail::standard_normal(rng));
      }
      break;
    }
    case synthetic_kind::zipf: {
      constexpr size_t distinct = 10000;
      std::vector<item> keys(distinct);
      item key = 0;
      for (auto& k : keys) k = (key += 1 + rng.below(uint64_t{1} << 24));
      std::vector<double> cdf(distinct);
      double acc = 0.0;
      for (size_t j = 0; j < distinct; ++j) cdf[j] = (acc += 1.0 / std::pow(static_cast<double>(j + 1), 1.1));
      // rank r of the frequency table is assigned to a random key position
      std::vector<size_t> slot(distinct);
      for (size_t j = 0; j < distinct; ++j) slot[j] = j;
      for (size_t j = distinct - 1; j > 0; --j) std::swap(slot[j], slot[rng.below(j + 1)]);
      for (auto& v : out) {
        const double u = rng.unit() * acc;
        const auto r = static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        v = keys[slot[std::min(r, distinct - 1)]];
      }
      break;
    }
  }
  return out;
}

/// Where keys come from: a SOSD file path, or "synth:<kind>".
struct dataset_spec {
  std::string source;
  uint64_t n = 1'000'000; // synthetic size
  uint64_t seed = 1;      // synthetic seed
  uint64_t limit = 0;     // stride-subsample file datasets to this many keys (0 = all)

  bool synthetic() const { return source.rfind("synth:", 0) == 0; }

  /// Stable identifier for reports.
  std::string id() const {
    if (synthetic()) return source.substr(6) + "-" + std::to_string(n) + "-s" + std::to_string(seed);
    auto stem = std::filesystem::path(source).filename().string();
    return limit == 0 ? stem : stem + "-l" + std::to_string(limit);
  }
};

inline std::vector<item> load_dataset(const dataset_spec& spec) {
  if (spec.synthetic()) {
    auto kind = parse_synthetic_kind(spec.source.substr(6));
    if (!kind) throw std::invalid_argument("unknown synthetic generator: " + spec.source);
    return generate_synthetic(*kind, spec.n, spec.seed);
  }
  auto keys = read_sosd(spec.source);
  if (keys.empty()) throw format_error(spec.source + ": dataset holds no keys", 8);
  return stride_subsample(keys, spec.limit);
}

} // namespace linsketch

#endif // LINSKETCH_DATASET_HPP_
