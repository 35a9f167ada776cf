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

#include "optpir/field.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <utility>

namespace optpir {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDivisionByZero:
      return "DivisionByZero";
    case ErrorCode::kShapeError:
      return "ShapeError";
    case ErrorCode::kSingularMatrix:
      return "SingularMatrix";
    case ErrorCode::kFieldTooSmall:
      return "FieldTooSmall";
    case ErrorCode::kInvalidConfig:
      return "InvalidConfig";
    case ErrorCode::kIndexError:
      return "IndexError";
    case ErrorCode::kInternalError:
      return "InternalError";
    case ErrorCode::kTooLargeForExhaustive:
      return "TooLargeForExhaustive";
    case ErrorCode::kFormatError:
      return "FormatError";
    case ErrorCode::kProtocolError:
      return "ProtocolError";
    case ErrorCode::kRetrievalFailed:
      return "RetrievalFailed";
    case ErrorCode::kIoError:
      return "IoError";
  }
  return "Unknown";
}

namespace {

uint64_t MulMod(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t PowMod(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = MulMod(result, base, m);
    base = MulMod(base, base, m);
    exp >>= 1;
  }
  return result;
}

void RequireSameField(const FieldMatrix& a, const FieldMatrix& b,
                      const char* op) {
  if (!(a.field() == b.field())) {
    throw Error(ErrorCode::kShapeError,
                std::string(op) + ": operands live in different fields");
  }
}

// Reduces `m` in place to row echelon form and returns the rank.
size_t EliminateInPlace(FieldMatrix& m) {
  const PrimeField& f = m.field();
  size_t rank = 0;
  for (size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    size_t pivot = rank;
    while (pivot < m.rows() && m(pivot, col) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != rank) {
      for (size_t c = col; c < m.cols(); ++c) std::swap(m(pivot, c), m(rank, c));
    }
    const uint64_t inv = f.Inv(m(rank, col));
    for (size_t c = col; c < m.cols(); ++c) m(rank, c) = f.Mul(m(rank, c), inv);
    for (size_t r = rank + 1; r < m.rows(); ++r) {
      const uint64_t factor = m(r, col);
      if (factor == 0) continue;
      for (size_t c = col; c < m.cols(); ++c) {
        m(r, c) = f.Sub(m(r, c), f.Mul(factor, m(rank, c)));
      }
    }
    ++rank;
  }
  return rank;
}

}  // namespace

bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                     29ULL, 31ULL, 37ULL}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These witnesses are sufficient for all n < 2^64.
  for (uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL,
                     29ULL, 31ULL, 37ULL}) {
    uint64_t x = PowMod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = MulMod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

uint64_t NextPrime(uint64_t value) {
  if (value <= 2) return 2;
  uint64_t candidate = value;
  while (!IsPrime(candidate)) {
    if (candidate == std::numeric_limits<uint64_t>::max()) {
      throw Error(ErrorCode::kInvalidConfig, "no 64-bit prime above bound");
    }
    ++candidate;
  }
  return candidate;
}

Rng::Rng(std::initializer_list<uint64_t> words) {
  std::vector<uint32_t> halves;
  halves.reserve(words.size() * 2);
  for (uint64_t w : words) {
    halves.push_back(static_cast<uint32_t>(w));
    halves.push_back(static_cast<uint32_t>(w >> 32));
  }
  std::seed_seq seq(halves.begin(), halves.end());
  engine_.seed(seq);
}

uint64_t Rng::Uniform(uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidConfig, "Uniform(0)");
  const uint64_t limit =
      std::numeric_limits<uint64_t>::max() -
      std::numeric_limits<uint64_t>::max() % bound;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

PrimeField::PrimeField(uint64_t modulus) : q_(modulus) {
  if (modulus >= (1ULL << 63) || !IsPrime(modulus)) {
    throw Error(ErrorCode::kInvalidConfig,
                "field modulus " + std::to_string(modulus) +
                    " is not a prime below 2^63");
  }
}

uint64_t PrimeField::Pow(uint64_t base, uint64_t exponent) const {
  return PowMod(base, exponent, q_);
}

uint64_t PrimeField::Inv(uint64_t a) const {
  if (a % q_ == 0) {
    throw Error(ErrorCode::kDivisionByZero, "inverse of zero in GF(" +
                                                std::to_string(q_) + ")");
  }
  return PowMod(a, q_ - 2, q_);
}

FieldElement::FieldElement(const PrimeField& field, uint64_t value)
    : field_(field), value_(field.Reduce(value)) {}

FieldElement FieldElement::Inverse() const {
  return FieldElement(field_, field_.Inv(value_));
}

namespace {
void RequireSameField(const FieldElement& a, const FieldElement& b) {
  if (!(a.field() == b.field())) {
    throw Error(ErrorCode::kShapeError, "elements from different fields");
  }
}
}  // namespace

FieldElement operator+(const FieldElement& a, const FieldElement& b) {
  RequireSameField(a, b);
  return FieldElement(a.field_, a.field_.Add(a.value_, b.value_));
}

FieldElement operator-(const FieldElement& a, const FieldElement& b) {
  RequireSameField(a, b);
  return FieldElement(a.field_, a.field_.Sub(a.value_, b.value_));
}

FieldElement operator*(const FieldElement& a, const FieldElement& b) {
  RequireSameField(a, b);
  return FieldElement(a.field_, a.field_.Mul(a.value_, b.value_));
}

FieldElement operator-(const FieldElement& a) {
  return FieldElement(a.field_, a.field_.Neg(a.value_));
}

FieldMatrix::FieldMatrix(const PrimeField& field, size_t rows, size_t cols)
    : field_(field), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

FieldMatrix::FieldMatrix(const PrimeField& field, size_t rows, size_t cols,
                         std::vector<uint64_t> entries)
    : field_(field), rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kShapeError, "entry count does not match shape");
  }
  for (uint64_t v : data_) {
    if (!field_.Contains(v)) {
      throw Error(ErrorCode::kShapeError, "entry outside [0, q)");
    }
  }
}

FieldMatrix::FieldMatrix(
    const PrimeField& field,
    std::initializer_list<std::initializer_list<uint64_t>> rows)
    : field_(field), rows_(rows.size()), cols_(0) {
  if (rows_ > 0) cols_ = rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw Error(ErrorCode::kShapeError, "ragged matrix literal");
    }
    for (uint64_t v : row) data_.push_back(field_.Reduce(v));
  }
}

FieldMatrix FieldMatrix::Identity(const PrimeField& field, size_t size) {
  FieldMatrix m(field, size, size);
  for (size_t i = 0; i < size; ++i) m(i, i) = 1;
  return m;
}

FieldMatrix FieldMatrix::Random(const PrimeField& field, size_t rows,
                                size_t cols, Rng& rng) {
  FieldMatrix m(field, rows, cols);
  for (uint64_t& v : m.data_) v = rng.Uniform(field.modulus());
  return m;
}

void FieldMatrix::Set(size_t r, size_t c, uint64_t value) {
  if (r >= rows_ || c >= cols_) {
    throw Error(ErrorCode::kShapeError, "index out of range");
  }
  if (!field_.Contains(value)) {
    throw Error(ErrorCode::kShapeError, "value outside [0, q)");
  }
  (*this)(r, c) = value;
}

std::vector<uint64_t> FieldMatrix::Column(size_t c) const {
  std::vector<uint64_t> out(rows_);
  for (size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

FieldMatrix FieldMatrix::Transpose() const {
  FieldMatrix t(field_, cols_, rows_);
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

FieldMatrix FieldMatrix::SelectColumns(std::span<const size_t> columns) const {
  FieldMatrix out(field_, rows_, columns.size());
  for (size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= cols_) {
      throw Error(ErrorCode::kShapeError, "column index out of range");
    }
    for (size_t r = 0; r < rows_; ++r) out(r, j) = (*this)(r, columns[j]);
  }
  return out;
}

FieldMatrix FieldMatrix::SelectRows(std::span<const size_t> rows) const {
  FieldMatrix out(field_, rows.size(), cols_);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) {
      throw Error(ErrorCode::kShapeError, "row index out of range");
    }
    std::copy_n(data_.begin() + rows[i] * cols_, cols_,
                out.data_.begin() + i * cols_);
  }
  return out;
}

FieldMatrix FieldMatrix::Block(size_t row0, size_t col0, size_t rows,
                               size_t cols) const {
  if (row0 + rows > rows_ || col0 + cols > cols_) {
    throw Error(ErrorCode::kShapeError, "block out of range");
  }
  FieldMatrix out(field_, rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) out(r, c) = (*this)(row0 + r, col0 + c);
  }
  return out;
}

bool FieldMatrix::IsZero() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](uint64_t v) { return v == 0; });
}

std::string FieldMatrix::ToString() const {
  std::ostringstream os;
  for (size_t r = 0; r < rows_; ++r) {
    os << '[';
    for (size_t c = 0; c < cols_; ++c) {
      if (c) os << ' ';
      os << (*this)(r, c);
    }
    os << "]\n";
  }
  return os.str();
}

FieldMatrix MatMul(const FieldMatrix& a, const FieldMatrix& b) {
  RequireSameField(a, b, "MatMul");
  if (a.cols() != b.rows()) {
    throw Error(ErrorCode::kShapeError,
                "MatMul: " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " times " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  const PrimeField& f = a.field();
  FieldMatrix out(f, a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t k = 0; k < a.cols(); ++k) {
      const uint64_t aik = a(i, k);
      if (aik == 0) continue;
      for (size_t j = 0; j < b.cols(); ++j) {
        out(i, j) = f.Add(out(i, j), f.Mul(aik, b(k, j)));
      }
    }
  }
  return out;
}

FieldMatrix MatAdd(const FieldMatrix& a, const FieldMatrix& b) {
  RequireSameField(a, b, "MatAdd");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeError, "MatAdd: shape mismatch");
  }
  FieldMatrix out = a;
  for (size_t r = 0; r < a.rows(); ++r) {
    for (size_t c = 0; c < a.cols(); ++c) {
      out(r, c) = a.field().Add(a(r, c), b(r, c));
    }
  }
  return out;
}

std::vector<uint64_t> VecMul(std::span<const uint64_t> v, const FieldMatrix& a) {
  if (v.size() != a.rows()) {
    throw Error(ErrorCode::kShapeError, "VecMul: length mismatch");
  }
  const PrimeField& f = a.field();
  std::vector<uint64_t> out(a.cols(), 0);
  for (size_t k = 0; k < v.size(); ++k) {
    if (v[k] == 0) continue;
    for (size_t j = 0; j < a.cols(); ++j) {
      out[j] = f.Add(out[j], f.Mul(v[k], a(k, j)));
    }
  }
  return out;
}

FieldMatrix HStack(std::span<const FieldMatrix> parts) {
  if (parts.empty()) {
    throw Error(ErrorCode::kShapeError, "HStack of nothing");
  }
  size_t cols = 0;
  for (const auto& p : parts) {
    RequireSameField(parts[0], p, "HStack");
    if (p.rows() != parts[0].rows()) {
      throw Error(ErrorCode::kShapeError, "HStack: row counts differ");
    }
    cols += p.cols();
  }
  FieldMatrix out(parts[0].field(), parts[0].rows(), cols);
  size_t offset = 0;
  for (const auto& p : parts) {
    for (size_t r = 0; r < p.rows(); ++r) {
      for (size_t c = 0; c < p.cols(); ++c) out(r, offset + c) = p(r, c);
    }
    offset += p.cols();
  }
  return out;
}

FieldMatrix VStack(std::span<const FieldMatrix> parts) {
  if (parts.empty()) {
    throw Error(ErrorCode::kShapeError, "VStack of nothing");
  }
  size_t rows = 0;
  for (const auto& p : parts) {
    RequireSameField(parts[0], p, "VStack");
    if (p.cols() != parts[0].cols()) {
      throw Error(ErrorCode::kShapeError, "VStack: column counts differ");
    }
    rows += p.rows();
  }
  std::vector<uint64_t> entries;
  entries.reserve(rows * parts[0].cols());
  for (const auto& p : parts) {
    entries.insert(entries.end(), p.entries().begin(), p.entries().end());
  }
  return FieldMatrix(parts[0].field(), rows, parts[0].cols(),
                     std::move(entries));
}

size_t Rank(const FieldMatrix& a) {
  FieldMatrix work = a;
  return EliminateInPlace(work);
}

FieldMatrix Invert(const FieldMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kShapeError, "Invert: matrix is not square");
  }
  const PrimeField& f = a.field();
  const size_t n = a.rows();
  FieldMatrix work = a;
  FieldMatrix inv = FieldMatrix::Identity(f, n);
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    while (pivot < n && work(pivot, col) == 0) ++pivot;
    if (pivot == n) {
      throw Error(ErrorCode::kSingularMatrix, "Invert: matrix is singular");
    }
    if (pivot != col) {
      for (size_t c = 0; c < n; ++c) {
        std::swap(work(pivot, c), work(col, c));
        std::swap(inv(pivot, c), inv(col, c));
      }
    }
    const uint64_t p = f.Inv(work(col, col));
    for (size_t c = 0; c < n; ++c) {
      work(col, c) = f.Mul(work(col, c), p);
      inv(col, c) = f.Mul(inv(col, c), p);
    }
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const uint64_t factor = work(r, col);
      if (factor == 0) continue;
      for (size_t c = 0; c < n; ++c) {
        work(r, c) = f.Sub(work(r, c), f.Mul(factor, work(col, c)));
        inv(r, c) = f.Sub(inv(r, c), f.Mul(factor, inv(col, c)));
      }
    }
  }
  return inv;
}

std::vector<uint64_t> SolveLeft(const FieldMatrix& a,
                                std::span<const uint64_t> b) {
  // x·A = b  <=>  A^T x^T = b^T; invert once, then x = b·A^-1.
  return VecMul(b, Invert(a));
}

FieldMatrix SampleFullRank(const PrimeField& field, size_t rows, size_t cols,
                           Rng& rng) {
  if (cols > rows) {
    throw Error(ErrorCode::kShapeError,
                "SampleFullRank: cols exceeds rows, no full-rank matrix");
  }
  while (true) {
    FieldMatrix candidate = FieldMatrix::Random(field, rows, cols, rng);
    if (Rank(candidate) == cols) return candidate;
  }
}

}  // namespace optpir
