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

#ifndef OPTPIR_MDS_HPP_
#define OPTPIR_MDS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "optpir/field.hpp"

namespace optpir {

// Systematic Reed-Solomon code [length, dimension] over a prime field.
//
// The generator is built from the Vandermonde matrix on the evaluation points
// 0, 1, ..., length-1 and brought into the form [I | P] by left-multiplying
// with the inverse of its leading square block. Evaluation points are fixed so
// that every party derives bit-identical generators from (length, dimension,
// q) alone.
class SystematicMdsCode {
 public:
  // Throws kFieldTooSmall if length > q, kShapeError unless
  // 1 <= dimension <= length.
  static SystematicMdsCode Make(size_t length, size_t dimension,
                                const PrimeField& field);

  size_t length() const { return length_; }
  size_t dimension() const { return dimension_; }
  const PrimeField& field() const { return generator_.field(); }

  // dimension x length, first `dimension` columns are the identity.
  const FieldMatrix& generator() const { return generator_; }
  // dimension x (length - dimension) parity block P.
  const FieldMatrix& parity() const { return parity_; }

  std::vector<uint64_t> Encode(std::span<const uint64_t> info) const;
  // Parity coordinates only: info · P.
  std::vector<uint64_t> Parity(std::span<const uint64_t> info) const;

  // Recovers the full codeword from exactly `dimension` distinct positions.
  std::vector<uint64_t> ErasureDecode(std::span<const size_t> positions,
                                      std::span<const uint64_t> values) const;

 private:
  SystematicMdsCode(size_t length, size_t dimension, FieldMatrix generator);

  size_t length_;
  size_t dimension_;
  FieldMatrix generator_;
  FieldMatrix parity_;
};

}  // namespace optpir

#endif  // OPTPIR_MDS_HPP_
