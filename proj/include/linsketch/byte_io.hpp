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

#ifndef LINSKETCH_BYTE_IO_HPP_
#define LINSKETCH_BYTE_IO_HPP_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace linsketch {

class serialization_error : public std::runtime_error {
public:
  serialization_error(const std::string& what, size_t offset)
      : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  size_t offset() const noexcept { return offset_; }

private:
  size_t offset_;
};

/// Appends fixed-width little-endian fields to a byte vector.
class byte_writer {
public:
  void u8(uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }
  void u16(uint16_t v) { put(v); }
  void u32(uint32_t v) { put(v); }
  void u64(uint64_t v) { put(v); }
  void f64(double v) { put(std::bit_cast<uint64_t>(v)); }
  void raw(std::span<const std::byte> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }

  std::vector<std::byte>& bytes() noexcept { return bytes_; }
  std::vector<std::byte> release() noexcept { return std::move(bytes_); }

private:
  template<typename U>
  void put(U v) {
    for (size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
    }
  }

  std::vector<std::byte> bytes_;
};

class byte_reader {
public:
  explicit byte_reader(std::span<const std::byte> bytes) noexcept : bytes_(bytes) {}

  uint8_t u8() { return get<uint8_t>(); }
  uint16_t u16() { return get<uint16_t>(); }
  uint32_t u32() { return get<uint32_t>(); }
  uint64_t u64() { return get<uint64_t>(); }
  double f64() { return std::bit_cast<double>(get<uint64_t>()); }

  std::span<const std::byte> raw(size_t n) {
    require(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  size_t position() const noexcept { return pos_; }
  size_t remaining() const noexcept { return bytes_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const { throw serialization_error(what, pos_); }

private:
  void require(size_t n) const {
    if (remaining() < n) fail("truncated input: need " + std::to_string(n) + " more bytes");
  }

  template<typename U>
  U get() {
    require(sizeof(U));
    U v = 0;
    for (size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(std::to_integer<uint8_t>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::byte> bytes_;
  size_t pos_ = 0;
};

} // namespace linsketch

#endif // LINSKETCH_BYTE_IO_HPP_
