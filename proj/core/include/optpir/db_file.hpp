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

// On-disk database format.
//
//   offset  size  field
//   0       4     magic "PIRD"
//   4       4     version (u32 LE, = 1)
//   8       8     q (u64 LE, prime)
//   16      4     M (u32 LE)
//   20      4     L (u32 LE)
//   24      4     b (u32 LE, stripes)
//   28      8*M*L*b  elements (u64 LE), record-major, then row, then stripe
//
// Every element must be < q and the file length must be exactly
// 28 + 8*M*L*b bytes.

#ifndef OPTPIR_DB_FILE_HPP_
#define OPTPIR_DB_FILE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "optpir/scheme.hpp"

namespace optpir {

inline constexpr uint32_t kDbFileVersion = 1;
inline constexpr size_t kDbHeaderBytes = 28;

std::vector<uint8_t> SerializeDb(const Database& db);
// Throws kFormatError for bad magic, version, length, non-prime q or
// out-of-range elements; kInvalidConfig when M < 2 or M*L*b == 0.
Database ParseDb(std::span<const uint8_t> bytes);

void WriteDb(const std::filesystem::path& path, const Database& db);
Database ReadDb(const std::filesystem::path& path);

// One L x b record in the payload layout above (row-major, stripe fastest);
// identical to that record's slice of the database file.
std::vector<uint8_t> SerializeRecord(const FieldMatrix& record);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes);

}  // namespace optpir

#endif  // OPTPIR_DB_FILE_HPP_
