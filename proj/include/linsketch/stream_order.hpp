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

#ifndef LINSKETCH_STREAM_ORDER_HPP_
#define LINSKETCH_STREAM_ORDER_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kll_sketch.hpp"
#include "random.hpp"

namespace linsketch {

enum class stream_order {
  random,   // seeded Fisher-Yates shuffle
  sorted,   // ascending
  half,     // first ceil(n/2) sorted values ascending, the rest descending
  flipflop, // smallest, largest, second smallest, second largest, ...
};

inline std::optional<stream_order> parse_stream_order(std::string_view s) {
  if (s == "random") return stream_order::random;
  if (s == "sorted") return stream_order::sorted;
  if (s == "half") return stream_order::half;
  if (s == "flipflop" || s == "flip-flop") return stream_order::flipflop;
  return std::nullopt;
}

inline std::string_view to_string(stream_order o) {
  switch (o) {
    case stream_order::random: return "random";
    case stream_order::sorted: return "sorted";
    case stream_order::half: return "half";
    case stream_order::flipflop: return "flipflop";
  }
  return "?";
}

/// Returns `data` permuted into `order`; `seed` only matters for random.
inline std::vector<item> apply_order(std::span<const item> data, stream_order order, uint64_t seed = 0) {
  std::vector<item> out(data.begin(), data.end());
  if (order == stream_order::random) {
    splitmix64 rng(seed);
    for (size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
    return out;
  }
  std::sort(out.begin(), out.end());
  const size_t n = out.size();
  switch (order) {
    case stream_order::half:
      std::reverse(out.begin() + static_cast<std::ptrdiff_t>((n + 1) / 2), out.end());
      break;
    case stream_order::flipflop: {
      std::vector<item> ff;
      ff.reserve(n);
      size_t lo = 0, hi = n;
      while (lo < hi) {
        ff.push_back(out[lo++]);
        if (lo < hi) ff.push_back(out[--hi]);
      }
      out = std::move(ff);
      break;
    }
    default:
      break;
  }
  return out;
}

} // namespace linsketch

#endif // LINSKETCH_STREAM_ORDER_HPP_
