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

#ifndef LINSKETCH_RANDOM_HPP_
#define LINSKETCH_RANDOM_HPP_

#include <cstdint>
#include <limits>

namespace linsketch {

/// SplitMix64. The whole generator state is one 64-bit word, so sketch
/// checkpoints carry it verbatim and replay identically on any platform.
class splitmix64 {
public:
  using result_type = uint64_t;

  explicit splitmix64(uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<uint64_t>::max(); }

  result_type operator()() noexcept {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  bool coin() noexcept { return ((*this)() >> 63) != 0; }

  // uniform in [0, bound), bound > 0 (multiply-shift, no division)
  uint64_t below(uint64_t bound) noexcept {
    return static_cast<uint64_t>((static_cast<unsigned __int128>((*this)()) * bound) >> 64);
  }

  // uniform in [0, 1) with 53 bits of precision
  double unit() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // independent child stream
  splitmix64 split() noexcept { return splitmix64((*this)() ^ 0x6a09e667f3bcc909ULL); }

  uint64_t state() const noexcept { return state_; }
  void set_state(uint64_t s) noexcept { state_ = s; }

  friend bool operator==(const splitmix64&, const splitmix64&) = default;

private:
  uint64_t state_;
};

} // namespace linsketch

#endif // LINSKETCH_RANDOM_HPP_
