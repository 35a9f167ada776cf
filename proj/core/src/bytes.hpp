// Copyright 2026 The optpir Authors
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

#ifndef OPTPIR_SRC_BYTES_HPP_
#define OPTPIR_SRC_BYTES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "optpir/error.hpp"

namespace optpir::internal {

inline void PutU32LE(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void PutU64LE(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

// Sequential little-endian reader; throws kFormatError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  std::span<const uint8_t> Bytes(size_t n) {
    Need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::kFormatError, "truncated input");
    }
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace optpir::internal

#endif  // OPTPIR_SRC_BYTES_HPP_
