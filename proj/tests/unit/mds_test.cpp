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

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "optpir/verify.hpp"
#include "test_util.hpp"

namespace optpir {
namespace {

// Plain (non-systematic) Vandermonde generator on points 0..length-1.
FieldMatrix Vandermonde(const PrimeField& f, size_t length, size_t dim) {
  FieldMatrix v(f, dim, length);
  for (size_t c = 0; c < length; ++c) {
    for (size_t r = 0; r < dim; ++r) v.Set(r, c, f.Pow(c, r));
  }
  return v;
}

void ExpectAllSubsetsInvertibleByDeterminant(const SystematicMdsCode& code) {
  const FieldMatrix& g = code.generator();
  for (const auto& cols : Combinations(code.length(), code.dimension())) {
    EXPECT_NE(CofactorDet(g.SelectColumns(cols)), 0u);
  }
}

TEST(MakeCode, RateOneIsIdentity) {
  const PrimeField f(7);
  const auto code = SystematicMdsCode::Make(3, 3, f);
  EXPECT_EQ(code.generator(), FieldMatrix::Identity(f, 3));
  EXPECT_EQ(code.parity().cols(), 0u);
}

TEST(MakeCode, ThreeTwoOverGf7) {
  const PrimeField f(7);
  const auto code = SystematicMdsCode::Make(3, 2, f);
  ExpectAllSubsetsInvertibleByDeterminant(code);
  EXPECT_EQ(code.generator().Block(0, 0, 2, 2), FieldMatrix::Identity(f, 2));
}

TEST(MakeCode, SixFourOverGf7) {
  const PrimeField f(7);
  const auto code = SystematicMdsCode::Make(6, 4, f);
  EXPECT_EQ(Combinations(6, 4).size(), 15u);
  ExpectAllSubsetsInvertibleByDeterminant(code);
}

TEST(MakeCode, SpansTheReedSolomonCode) {
  for (uint64_t q : {5, 7, 11, 13}) {
    const PrimeField f(q);
    for (size_t len = 1; len <= q && len <= 8; ++len) {
      for (size_t dim = 1; dim <= len; ++dim) {
        const auto code = SystematicMdsCode::Make(len, dim, f);
        const std::vector<FieldMatrix> both = {code.generator(),
                                               Vandermonde(f, len, dim)};
        EXPECT_EQ(Rank(VStack(both)), dim) << len << "," << dim << " q=" << q;
        EXPECT_EQ(code.generator().Block(0, 0, dim, dim),
                  FieldMatrix::Identity(f, dim));
      }
    }
  }
}

TEST(MakeCode, Errors) {
  const PrimeField f(5);
  ExpectError(ErrorCode::kFieldTooSmall, [&] { SystematicMdsCode::Make(6, 2, f); });
  ExpectError(ErrorCode::kShapeError, [&] { SystematicMdsCode::Make(3, 4, f); });
  ExpectError(ErrorCode::kShapeError, [&] { SystematicMdsCode::Make(3, 0, f); });
}

TEST(MakeCode, Deterministic) {
  const PrimeField f(13);
  EXPECT_EQ(SystematicMdsCode::Make(10, 6, f).generator(),
            SystematicMdsCode::Make(10, 6, f).generator());
}

TEST(Encode, SystematicAndLinear) {
  const PrimeField f(7);
  const auto code = SystematicMdsCode::Make(3, 2, f);
  const std::vector<uint64_t> zero = {0, 0};
  EXPECT_EQ(code.Encode(zero), (std::vector<uint64_t>{0, 0, 0}));
  const std::vector<uint64_t> e1 = {1, 0};
  EXPECT_EQ(code.Encode(e1), (std::vector<uint64_t>{1, 0, code.parity()(0, 0)}));

  const auto big = SystematicMdsCode::Make(9, 5, PrimeField(11));
  const PrimeField& g = big.field();
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<uint64_t> u(5), v(5), w(5);
    const uint64_t a = rng.Uniform(11);
    for (size_t i = 0; i < 5; ++i) {
      u[i] = rng.Uniform(11);
      v[i] = rng.Uniform(11);
      w[i] = g.Add(g.Mul(a, u[i]), v[i]);
    }
    const auto cu = big.Encode(u), cv = big.Encode(v), cw = big.Encode(w);
    for (size_t i = 0; i < 9; ++i) EXPECT_EQ(cw[i], g.Add(g.Mul(a, cu[i]), cv[i]));
    const auto parity = big.Parity(u);
    EXPECT_TRUE(std::equal(parity.begin(), parity.end(), cu.begin() + 5));
  }
  const std::vector<uint64_t> wrong = {1, 2, 3};
  ExpectError(ErrorCode::kShapeError, [&] { code.Encode(wrong); });
}

TEST(ErasureDecode, Examples) {
  const PrimeField f(7);
  const auto code = SystematicMdsCode::Make(3, 2, f);
  const std::vector<uint64_t> info = {4, 5};
  const auto word = code.Encode(info);
  const std::vector<size_t> first = {0, 1};
  EXPECT_EQ(code.ErasureDecode(first, info), word);
  const std::vector<size_t> outer = {0, 2};
  const std::vector<uint64_t> vals = {word[0], word[2]};
  EXPECT_EQ(code.ErasureDecode(outer, vals), word);
}

TEST(ErasureDecode, EverySubsetRoundTrips) {
  Rng rng(8);
  for (uint64_t q : {7, 11}) {
    const PrimeField f(q);
    for (size_t len = 2; len <= 8 && len <= q; ++len) {
      for (size_t dim = 1; dim <= len; ++dim) {
        const auto code = SystematicMdsCode::Make(len, dim, f);
        std::vector<uint64_t> info(dim);
        for (auto& v : info) v = rng.Uniform(q);
        const auto word = code.Encode(info);
        for (const auto& pos : Combinations(len, dim)) {
          std::vector<uint64_t> vals;
          for (size_t p : pos) vals.push_back(word[p]);
          ASSERT_EQ(code.ErasureDecode(pos, vals), word);
        }
      }
    }
  }
}

TEST(ErasureDecode, RejectsBadPositions) {
  const auto code = SystematicMdsCode::Make(4, 2, PrimeField(5));
  const std::vector<uint64_t> vals = {1, 2};
  const std::vector<size_t> dup = {1, 1};
  const std::vector<size_t> far = {0, 4};
  const std::vector<size_t> few = {0};
  ExpectError(ErrorCode::kShapeError, [&] { code.ErasureDecode(dup, vals); });
  ExpectError(ErrorCode::kShapeError, [&] { code.ErasureDecode(far, vals); });
  ExpectError(ErrorCode::kShapeError, [&] { code.ErasureDecode(few, vals); });
}

TEST(AuditMdsCode, PassesOnGridCodes) {
  Rng rng(1);
  for (const auto& config : DefaultGrid()) {
    const Scheme scheme(config);
    for (size_t k = 1; k < config.num_records; ++k) {
      const MdsAudit audit = AuditMdsCode(scheme.Code(k), rng);
      EXPECT_TRUE(audit.pass) << config.ToString() << " k=" << k;
      EXPECT_EQ(audit.subsets_checked,
                Binomial(scheme.Code(k).length(), scheme.Code(k).dimension()));
    }
  }
}

}  // namespace
}  // namespace optpir
