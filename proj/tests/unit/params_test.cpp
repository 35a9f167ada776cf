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

#include "optpir/params.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <optional>
#include <vector>

#include "optpir/field.hpp"
#include "test_util.hpp"

namespace optpir {
namespace {

using i64 = int64_t;
using Vec = std::vector<uint64_t>;

i64 IPow(i64 b, i64 e) {
  i64 r = 1;
  for (i64 i = 0; i < e; ++i) r *= b;
  return r;
}

uint64_t Choose(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  uint64_t r = 1;
  for (uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Smallest-L nonnegative integer solution of
//   T a_{k+1} = (N-T) b_k,  a_k + a_{k+1} = b_k + b_{k+1}
// found by searching over the seeds (a_1, b_1). Independent of the
// library's seeding rule.
struct Solution {
  std::vector<i64> a, b;
  i64 L = 0;
  int minimizers = 0;
};

std::optional<Solution> SearchMinimal(i64 N, i64 T, i64 M, i64 limit) {
  std::optional<Solution> best;
  for (i64 a1 = 0; a1 <= limit; ++a1) {
    for (i64 b1 = 0; b1 <= limit; ++b1) {
      if (a1 == 0 && b1 == 0) continue;
      std::vector<i64> a{a1}, b{b1};
      bool ok = true;
      for (i64 k = 1; k < M && ok; ++k) {
        const i64 num = (N - T) * b.back();
        if (num % T != 0) {
          ok = false;
          break;
        }
        const i64 an = num / T;
        const i64 bn = a.back() + an - b.back();
        if (an < 0 || bn < 0) ok = false;
        a.push_back(an);
        b.push_back(bn);
      }
      if (!ok) continue;
      i64 L = 0;
      for (i64 k = 1; k <= M; ++k) {
        L += static_cast<i64>(Choose(M - 1, k - 1)) * (T * a[k - 1] + (N - T) * b[k - 1]);
      }
      if (!best || L < best->L) {
        best = Solution{a, b, L, 1};
      } else if (L == best->L) {
        ++best->minimizers;
      }
    }
  }
  return best;
}

TEST(DeriveParams, ThreeTwoTwo) {
  const auto p = DeriveParams({3, 2, 2});
  EXPECT_EQ(p.alpha, (Vec{1, 0}));
  EXPECT_EQ(p.beta, (Vec{0, 1}));
  EXPECT_EQ(p.L, 3u);
  EXPECT_EQ(p.D, 5u);
  EXPECT_EQ(p.ell, 2u);
  EXPECT_EQ(p.gamma_a, 2u);
  EXPECT_EQ(p.gamma_b, 1u);
}

TEST(DeriveParams, ThreeTwoThree) {
  const auto p = DeriveParams({3, 2, 3});
  EXPECT_EQ(p.alpha, (Vec{1, 1, 0}));
  EXPECT_EQ(p.beta, (Vec{2, 0, 1}));
  EXPECT_EQ(p.L, 9u);
  EXPECT_EQ(p.D, 19u);
  EXPECT_EQ(p.ell, 6u);
  EXPECT_EQ(p.q_min, 7u);
}

TEST(DeriveParams, TwoServersOneColluder) {
  const auto p = DeriveParams({2, 1, 2});
  EXPECT_EQ(p.alpha, (Vec{1, 0}));
  EXPECT_EQ(p.beta, (Vec{0, 1}));
  EXPECT_EQ(p.L, 2u);
  EXPECT_EQ(p.D, 3u);
  EXPECT_EQ(p.ell, 1u);
  EXPECT_EQ(p.q_min, 2u);
}

TEST(DeriveParams, RejectsInvalidConfigs) {
  ExpectError(ErrorCode::kInvalidConfig, [] { DeriveParams({2, 2, 2}); });
  ExpectError(ErrorCode::kInvalidConfig, [] { DeriveParams({3, 0, 2}); });
  ExpectError(ErrorCode::kInvalidConfig, [] { DeriveParams({3, 2, 1}); });
  ExpectError(ErrorCode::kInvalidConfig, [] { DeriveParams({2, 3, 2}); });
}

TEST(DeriveParams, MatchesMinimalIntegerSolution) {
  for (i64 N = 2; N <= 6; ++N) {
    for (i64 T = 1; T < N; ++T) {
      for (i64 M = 2; M <= 4; ++M) {
        const auto p = DeriveParams({static_cast<uint32_t>(N),
                                     static_cast<uint32_t>(T),
                                     static_cast<uint32_t>(M)});
        const auto s = SearchMinimal(N, T, M, 40);
        ASSERT_TRUE(s.has_value());
        EXPECT_EQ(static_cast<i64>(p.L), s->L) << N << "," << T << "," << M;
        if (s->minimizers == 1) {
          for (i64 k = 0; k < M; ++k) {
            EXPECT_EQ(static_cast<i64>(p.alpha[k]), s->a[k]);
            EXPECT_EQ(static_cast<i64>(p.beta[k]), s->b[k]);
          }
        }
      }
    }
  }
}

// Property sweep over N <= 12, M <= 6.
TEST(DeriveParams, IdentitiesHoldAcrossRange) {
  for (uint32_t N = 2; N <= 12; ++N) {
    for (uint32_t T = 1; T < N; ++T) {
      for (uint32_t M = 2; M <= 6; ++M) {
        const SchemeConfig c{N, T, M};
        const auto p = DeriveParams(c);
        const i64 d = std::gcd(N, T), n = N / d, t = T / d;
        ASSERT_EQ(p.d, static_cast<uint64_t>(d));
        for (i64 k = 1; k <= M; ++k) {
          const i64 a = static_cast<i64>(p.alpha[k - 1]);
          const i64 b = static_cast<i64>(p.beta[k - 1]);
          EXPECT_EQ(T * a + (N - T) * b, d * IPow(n - t, k - 1) * IPow(t, M - k));
          if (k < static_cast<i64>(M)) {
            const i64 an = static_cast<i64>(p.alpha[k]);
            const i64 bn = static_cast<i64>(p.beta[k]);
            EXPECT_EQ(T * an, (N - T) * b);
            EXPECT_EQ(a + an, b + bn);
          }
          // Closed forms, wherever the exponents are nonnegative.
          if (N >= 2 * T) {
            if (k >= 2) {
              EXPECT_EQ(a * n, (IPow(n - t, k - 2) - IPow(-t, k - 2)) * (n - t) *
                                   IPow(t, M - k));
            }
            EXPECT_EQ(b * n, (IPow(n - t, k - 1) - IPow(-t, k - 1)) * IPow(t, M - k));
          } else {
            EXPECT_EQ(a * n, (IPow(t, M - k) - IPow(t - n, M - k)) * IPow(n - t, k - 1));
            if (k <= static_cast<i64>(M) - 1) {
              EXPECT_EQ(b * n, (IPow(t, M - k - 1) - IPow(t - n, M - k - 1)) * t *
                                   IPow(n - t, k - 1));
            }
          }
        }
        EXPECT_EQ(p.L, static_cast<uint64_t>(d * IPow(n, M - 1)));
        EXPECT_EQ(p.L, OptimalSubpacketization(c));
        EXPECT_EQ(p.L, UndesiredSymbolCount(p));
        EXPECT_EQ(p.D * static_cast<uint64_t>(n - t),
                  static_cast<uint64_t>(d * (IPow(n, M) - IPow(t, M))));
        EXPECT_EQ(p.ell, static_cast<uint64_t>(T * IPow(n, M - 2)));
        EXPECT_EQ(T * p.gamma_a + (N - T) * p.gamma_b, p.D);
        EXPECT_EQ(Rational(p.L, p.D), Capacity(c));
        const uint64_t bound = static_cast<uint64_t>(
            std::max(N * IPow(t, M - 2), N * IPow(n - t, M - 2)));
        EXPECT_EQ(p.q_bound, bound);
        EXPECT_GE(p.q_min, std::max<uint64_t>(bound, 2));
        EXPECT_TRUE(IsPrime(p.q_min));
        for (uint64_t v = std::max<uint64_t>(bound, 2); v < p.q_min; ++v) {
          EXPECT_FALSE(IsPrime(v));
        }
      }
    }
  }
}

// Capacity oracle: 1 / sum (T/N)^i as a reduced fraction N^{M-1} / S.
Rational CapacityOracle(uint64_t N, uint64_t T, uint64_t M) {
  uint64_t num = 1, den = 0;
  for (uint64_t i = 0; i < M; ++i) {
    uint64_t term = 1;
    for (uint64_t j = 0; j < i; ++j) term *= T;
    for (uint64_t j = i; j + 1 < M; ++j) term *= N;
    den += term;
  }
  for (uint64_t j = 0; j + 1 < M; ++j) num *= N;
  const uint64_t g = std::gcd(num, den);
  return Rational(num / g, den / g);
}

TEST(Capacity, Examples) {
  EXPECT_EQ(Capacity({3, 2, 2}), Rational(3, 5));
  EXPECT_EQ(Capacity({3, 2, 3}), Rational(9, 19));
  EXPECT_EQ(Capacity({5, 2, 1}), Rational(1, 1));
  EXPECT_EQ(Capacity({2, 1, 2}), Rational(2, 3));
  EXPECT_EQ(Capacity({3, 2, 3}).ToString(), "9/19");
}

TEST(Capacity, MatchesGeometricSum) {
  for (uint64_t N = 1; N <= 9; ++N) {
    for (uint64_t T = 1; T <= N; ++T) {
      for (uint64_t M = 1; M <= 6; ++M) {
        EXPECT_EQ(Capacity({static_cast<uint32_t>(N), static_cast<uint32_t>(T),
                            static_cast<uint32_t>(M)}),
                  CapacityOracle(N, T, M));
      }
    }
  }
}

TEST(OptimalSubpacketization, Examples) {
  EXPECT_EQ(OptimalSubpacketization({3, 2, 2}), 3u);
  EXPECT_EQ(OptimalSubpacketization({3, 2, 3}), 9u);
  EXPECT_EQ(OptimalSubpacketization({4, 2, 3}), 8u);
}

// gcd(n^{M-1}, sum_i n^{M-1-i} t^i) = 1 whenever gcd(n, t) = 1.
TEST(Coprimality, PowerAndGeometricSum) {
  Rng rng(17);
  int checked = 0;
  while (checked < 500) {
    const uint64_t n = 2 + rng.Uniform(30);
    const uint64_t t = 1 + rng.Uniform(n - 1);
    if (std::gcd(n, t) != 1) continue;
    const uint64_t M = 2 + rng.Uniform(5);
    unsigned __int128 power = 1, sum = 0;
    for (uint64_t i = 0; i + 1 < M; ++i) power *= n;
    for (uint64_t i = 0; i < M; ++i) {
      unsigned __int128 term = 1;
      for (uint64_t j = 0; j + 1 + i < M; ++j) term *= n;
      for (uint64_t j = 0; j < i; ++j) term *= t;
      sum += term;
    }
    auto a = power, b = sum;
    while (b != 0) {
      const auto r = a % b;
      a = b;
      b = r;
    }
    EXPECT_EQ(static_cast<uint64_t>(a), 1u) << n << "," << t << "," << M;
    ++checked;
  }
}

TEST(Comparison, FieldAndSubpacketizationRatios) {
  const std::vector<SchemeConfig> configs = {{3, 2, 3}, {2, 1, 2}};
  const auto rows = ComparisonTable(configs);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].L, 9u);
  EXPECT_EQ(rows[0].baseline_L, 27u);
  EXPECT_EQ(rows[0].L_ratio, Rational(1, 3));
  EXPECT_EQ(rows[0].q_min, 7u);
  EXPECT_EQ(rows[0].q_bound, 6u);
  EXPECT_EQ(rows[0].baseline_q_bound, 18u);
  EXPECT_EQ(rows[0].q_bound_ratio, Rational(1, 3));
  EXPECT_EQ(rows[1].q_min, 2u);
  EXPECT_EQ(rows[1].baseline_q_bound, 4u);
}

TEST(Comparison, RatiosFollowClosedForms) {
  for (const auto& c : DefaultGrid()) {
    const auto row = ComparisonTable(std::vector<SchemeConfig>{c}).front();
    const uint64_t d = std::gcd(c.num_servers, c.collusion);
    const uint64_t n = c.num_servers / d;
    uint64_t dm1 = 1, dm2 = 1;
    for (uint32_t i = 0; i + 1 < c.num_records; ++i) dm1 *= d;
    for (uint32_t i = 0; i + 2 < c.num_records; ++i) dm2 *= d;
    EXPECT_EQ(row.L_ratio, Rational(1, n * dm1)) << c.ToString();
    EXPECT_EQ(row.q_bound_ratio, Rational(1, c.num_servers * dm2)) << c.ToString();
  }
}

TEST(Comparison, Formats) {
  const auto rows = ComparisonTable(DefaultGrid());
  const std::string machine = FormatComparisonMachine(rows);
  EXPECT_EQ(machine.rfind("# N,T,M,L,D,rate,q_min", 0), 0u);
  EXPECT_NE(machine.find("\n3,2,3,9,19,9/19,7,6,27,18,1/3,1/3\n"), std::string::npos)
      << machine;
  EXPECT_NE(FormatComparisonText(rows).find("9/19"), std::string::npos);
}

TEST(ValidateFieldSize, Bounds) {
  const auto p = DeriveParams({3, 2, 3});
  EXPECT_NO_THROW(ValidateFieldSize(p, 7));
  EXPECT_NO_THROW(ValidateFieldSize(p, 11));
  ExpectError(ErrorCode::kFieldTooSmall, [&] { ValidateFieldSize(p, 5); });
  ExpectError(ErrorCode::kInvalidConfig, [&] { ValidateFieldSize(p, 9); });
}

TEST(Rational, Arithmetic) {
  EXPECT_EQ(Rational(6, 4), Rational(3, 2));
  EXPECT_TRUE(Rational(1, 3) < Rational(1, 2));
  EXPECT_EQ(Rational(2, 3) * Rational(3, 4), Rational(1, 2));
  EXPECT_DOUBLE_EQ(Rational(9, 19).ToDouble(), 9.0 / 19.0);
  EXPECT_EQ(Rational(9, 19).ToString(), "9/19");
  EXPECT_EQ(Rational(0, 5).ToString(), "0");
  EXPECT_EQ(Rational(4, 2).ToString(), "2");
}

}  // namespace
}  // namespace optpir
