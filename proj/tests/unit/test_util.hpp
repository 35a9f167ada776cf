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

#ifndef OPTPIR_TESTS_TEST_UTIL_HPP_
#define OPTPIR_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "optpir/error.hpp"
#include "optpir/field.hpp"

namespace optpir {

template <typename Fn>
void ExpectError(ErrorCode code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << ErrorCodeName(code) << ", nothing thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Determinant mod q by cofactor expansion. Independent of the library's
// elimination; only for small matrices.
inline uint64_t CofactorDet(const FieldMatrix& m) {
  const size_t n = m.rows();
  const uint64_t q = m.field().modulus();
  if (n == 1) return m(0, 0);
  uint64_t total = 0;
  for (size_t c = 0; c < n; ++c) {
    std::vector<uint64_t> minor;
    for (size_t r = 1; r < n; ++r) {
      for (size_t k = 0; k < n; ++k) {
        if (k != c) minor.push_back(m(r, k));
      }
    }
    const uint64_t sub = CofactorDet(FieldMatrix(m.field(), n - 1, n - 1, minor));
    const uint64_t term = static_cast<uint64_t>(
        static_cast<unsigned __int128>(m(0, c)) * sub % q);
    total = (total + (c % 2 == 0 ? term : (q - term) % q)) % q;
  }
  return total;
}

}  // namespace optpir

#endif  // OPTPIR_TESTS_TEST_UTIL_HPP_
