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

#include "optpir/mds.hpp"

#include <numeric>
#include <string>
#include <utility>

namespace optpir {

SystematicMdsCode::SystematicMdsCode(size_t length, size_t dimension,
                                     FieldMatrix generator)
    : length_(length),
      dimension_(dimension),
      generator_(std::move(generator)),
      parity_(generator_.Block(0, dimension, dimension, length - dimension)) {}

SystematicMdsCode SystematicMdsCode::Make(size_t length, size_t dimension,
                                          const PrimeField& field) {
  if (dimension < 1 || dimension > length) {
    throw Error(ErrorCode::kShapeError,
                "MDS code needs 1 <= dimension <= length, got [" +
                    std::to_string(length) + "," + std::to_string(dimension) +
                    "]");
  }
  if (length > field.modulus()) {
    throw Error(ErrorCode::kFieldTooSmall,
                "RS code of length " + std::to_string(length) +
                    " needs q >= length, q = " +
                    std::to_string(field.modulus()));
  }
  FieldMatrix vandermonde(field, dimension, length);
  for (size_t c = 0; c < length; ++c) {
    uint64_t power = 1;
    for (size_t r = 0; r < dimension; ++r) {
      vandermonde(r, c) = power;
      power = field.Mul(power, c);
    }
  }
  FieldMatrix lead = vandermonde.Block(0, 0, dimension, dimension);
  FieldMatrix systematic = MatMul(Invert(lead), vandermonde);
  return SystematicMdsCode(length, dimension, std::move(systematic));
}

std::vector<uint64_t> SystematicMdsCode::Encode(
    std::span<const uint64_t> info) const {
  if (info.size() != dimension_) {
    throw Error(ErrorCode::kShapeError, "Encode: info length mismatch");
  }
  return VecMul(info, generator_);
}

std::vector<uint64_t> SystematicMdsCode::Parity(
    std::span<const uint64_t> info) const {
  if (info.size() != dimension_) {
    throw Error(ErrorCode::kShapeError, "Parity: info length mismatch");
  }
  return VecMul(info, parity_);
}

std::vector<uint64_t> SystematicMdsCode::ErasureDecode(
    std::span<const size_t> positions, std::span<const uint64_t> values) const {
  if (positions.size() != dimension_ || values.size() != dimension_) {
    throw Error(ErrorCode::kShapeError,
                "ErasureDecode: need exactly `dimension` positions");
  }
  std::vector<bool> seen(length_, false);
  for (size_t p : positions) {
    if (p >= length_ || seen[p]) {
      throw Error(ErrorCode::kShapeError,
                  "ErasureDecode: positions must be distinct and in range");
    }
    seen[p] = true;
  }
  FieldMatrix sub = generator_.SelectColumns(positions);
  std::vector<uint64_t> info;
  try {
    info = SolveLeft(sub, values);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingularMatrix) {
      throw Error(ErrorCode::kInternalError,
                  "MDS invariant violated: singular column subset");
    }
    throw;
  }
  return Encode(info);
}

}  // namespace optpir
