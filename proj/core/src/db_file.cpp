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

#include "optpir/db_file.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "bytes.hpp"

namespace optpir {

using internal::ByteReader;
using internal::PutU32LE;
using internal::PutU64LE;

namespace {
constexpr char kMagic[4] = {'P', 'I', 'R', 'D'};
}  // namespace

std::vector<uint8_t> SerializeDb(const Database& db) {
  std::vector<uint8_t> out;
  out.reserve(kDbHeaderBytes +
              8 * db.num_records() * db.L() * db.stripes());
  out.insert(out.end(), kMagic, kMagic + 4);
  PutU32LE(out, kDbFileVersion);
  PutU64LE(out, db.field().modulus());
  PutU32LE(out, static_cast<uint32_t>(db.num_records()));
  PutU32LE(out, static_cast<uint32_t>(db.L()));
  PutU32LE(out, static_cast<uint32_t>(db.stripes()));
  for (size_t i = 0; i < db.num_records(); ++i) {
    for (uint64_t v : db.record(i).entries()) PutU64LE(out, v);
  }
  return out;
}

Database ParseDb(std::span<const uint8_t> bytes) {
  ByteReader in(bytes);
  const auto magic = in.Bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormatError, "bad magic, expected PIRD");
  }
  const uint32_t version = in.U32();
  if (version != kDbFileVersion) {
    throw Error(ErrorCode::kFormatError,
                "unsupported version " + std::to_string(version));
  }
  const uint64_t q = in.U64();
  const uint64_t M = in.U32();
  const uint64_t L = in.U32();
  const uint64_t b = in.U32();
  if (M < 2 || L == 0 || b == 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "database needs M >= 2 and nonempty records");
  }
  if (!IsPrime(q) || q >= (1ULL << 63)) {
    throw Error(ErrorCode::kFormatError, "q = " + std::to_string(q) +
                                             " is not a supported prime");
  }
  const unsigned __int128 payload = static_cast<unsigned __int128>(M) * L * b * 8;
  if (payload != in.remaining()) {
    throw Error(ErrorCode::kFormatError,
                "file length does not match header dimensions");
  }
  const PrimeField field(q);
  std::vector<FieldMatrix> records;
  records.reserve(M);
  for (uint64_t i = 0; i < M; ++i) {
    std::vector<uint64_t> entries(L * b);
    for (auto& v : entries) {
      v = in.U64();
      if (v >= q) {
        throw Error(ErrorCode::kFormatError,
                    "element " + std::to_string(v) + " is not below q");
      }
    }
    records.emplace_back(field, L, b, std::move(entries));
  }
  return Database(field, std::move(records));
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

void WriteDb(const std::filesystem::path& path, const Database& db) {
  WriteFileBytes(path, SerializeDb(db));
}

Database ReadDb(const std::filesystem::path& path) {
  return ParseDb(ReadFileBytes(path));
}

std::vector<uint8_t> SerializeRecord(const FieldMatrix& record) {
  std::vector<uint8_t> out;
  out.reserve(8 * record.entries().size());
  for (uint64_t v : record.entries()) PutU64LE(out, v);
  return out;
}

}  // namespace optpir
