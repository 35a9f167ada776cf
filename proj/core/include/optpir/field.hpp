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

// Prime-field arithmetic and dense matrices over GF(q).
//
// Residues are stored as plain uint64_t values in [0, q). Matrices are
// row-major and carry their field so that mixing operands from different
// fields is caught at the call site rather than producing garbage.

#ifndef OPTPIR_FIELD_HPP_
#define OPTPIR_FIELD_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "optpir/error.hpp"

namespace optpir {

// Deterministic Miller-Rabin, exact for every 64-bit input.
bool IsPrime(uint64_t value);

// Smallest prime >= value (value <= 2 yields 2).
uint64_t NextPrime(uint64_t value);

// Seedable source used by every randomized operation. Wraps mt19937_64 and
// performs its own rejection reduction so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  // Derives an independent stream from several words (e.g. master seed,
  // theta, trial index).
  Rng(std::initializer_list<uint64_t> words);

  uint64_t Next() { return engine_(); }
  // Uniform value in [0, bound). bound must be nonzero.
  uint64_t Uniform(uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

class PrimeField {
 public:
  // Throws kInvalidConfig unless modulus is prime and < 2^63.
  explicit PrimeField(uint64_t modulus);

  uint64_t modulus() const { return q_; }

  uint64_t Reduce(uint64_t a) const { return a % q_; }
  uint64_t Add(uint64_t a, uint64_t b) const {
    uint64_t s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  uint64_t Sub(uint64_t a, uint64_t b) const {
    return a >= b ? a - b : a + q_ - b;
  }
  uint64_t Neg(uint64_t a) const { return a == 0 ? 0 : q_ - a; }
  uint64_t Mul(uint64_t a, uint64_t b) const {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % q_);
  }
  uint64_t Pow(uint64_t base, uint64_t exponent) const;
  // Throws kDivisionByZero for a == 0.
  uint64_t Inv(uint64_t a) const;

  bool Contains(uint64_t a) const { return a < q_; }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  uint64_t q_;
};

// A single residue bound to its field.
class FieldElement {
 public:
  FieldElement(const PrimeField& field, uint64_t value);

  uint64_t value() const { return value_; }
  const PrimeField& field() const { return field_; }

  FieldElement Inverse() const;

  friend FieldElement operator+(const FieldElement& a, const FieldElement& b);
  friend FieldElement operator-(const FieldElement& a, const FieldElement& b);
  friend FieldElement operator*(const FieldElement& a, const FieldElement& b);
  friend FieldElement operator-(const FieldElement& a);
  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.field_ == b.field_ && a.value_ == b.value_;
  }

 private:
  PrimeField field_;
  uint64_t value_;
};

class FieldMatrix {
 public:
  // Zero matrix.
  FieldMatrix(const PrimeField& field, size_t rows, size_t cols);
  // Entries are row-major and must already be reduced.
  FieldMatrix(const PrimeField& field, size_t rows, size_t cols,
              std::vector<uint64_t> entries);
  FieldMatrix(const PrimeField& field,
              std::initializer_list<std::initializer_list<uint64_t>> rows);

  static FieldMatrix Identity(const PrimeField& field, size_t size);
  static FieldMatrix Random(const PrimeField& field, size_t rows, size_t cols,
                            Rng& rng);

  const PrimeField& field() const { return field_; }
  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  uint64_t operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  uint64_t& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  // Checked write; rejects unreduced values.
  void Set(size_t r, size_t c, uint64_t value);

  std::span<const uint64_t> Row(size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<uint64_t> Column(size_t c) const;
  const std::vector<uint64_t>& entries() const { return data_; }

  FieldMatrix Transpose() const;
  FieldMatrix SelectColumns(std::span<const size_t> columns) const;
  FieldMatrix SelectRows(std::span<const size_t> rows) const;
  FieldMatrix Block(size_t row0, size_t col0, size_t rows, size_t cols) const;
  bool IsZero() const;

  std::string ToString() const;

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  PrimeField field_;
  size_t rows_;
  size_t cols_;
  std::vector<uint64_t> data_;
};

// Throws kShapeError on inner-dimension or field mismatch.
FieldMatrix MatMul(const FieldMatrix& a, const FieldMatrix& b);
FieldMatrix MatAdd(const FieldMatrix& a, const FieldMatrix& b);
// Row vector times matrix.
std::vector<uint64_t> VecMul(std::span<const uint64_t> v, const FieldMatrix& a);

// Horizontal / vertical concatenation; all parts share a field.
FieldMatrix HStack(std::span<const FieldMatrix> parts);
FieldMatrix VStack(std::span<const FieldMatrix> parts);

size_t Rank(const FieldMatrix& a);
// Throws kShapeError for non-square input, kSingularMatrix if rank < rows.
FieldMatrix Invert(const FieldMatrix& a);
// Solves x·A = b for square invertible A (row-vector convention).
std::vector<uint64_t> SolveLeft(const FieldMatrix& a,
                                std::span<const uint64_t> b);

// Uniform over rank-`cols` matrices of shape rows x cols: draws uniform
// matrices until one has full column rank. Acceptance probability is at least
// prod_{i>=1}(1 - q^-i) > 0.28.
FieldMatrix SampleFullRank(const PrimeField& field, size_t rows, size_t cols,
                           Rng& rng);

}  // namespace optpir

#endif  // OPTPIR_FIELD_HPP_
