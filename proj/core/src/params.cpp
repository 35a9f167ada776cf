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

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "optpir/error.hpp"
#include "optpir/field.hpp"

namespace optpir {
namespace {

using i128 = __int128;

constexpr i128 kLimit = static_cast<i128>(std::numeric_limits<int64_t>::max());

i128 Checked(i128 v) {
  if (v > kLimit || v < -kLimit) {
    throw Error(ErrorCode::kInvalidConfig,
                "scheme parameters exceed 64-bit range");
  }
  return v;
}

i128 Pow(i128 base, int64_t exp) {
  i128 result = 1;
  for (int64_t i = 0; i < exp; ++i) result = Checked(result * base);
  return result;
}

uint64_t ToU64(i128 v) {
  if (v < 0) {
    throw Error(ErrorCode::kInternalError, "negative parameter");
  }
  return static_cast<uint64_t>(Checked(v));
}

i128 ExactDiv(i128 num, i128 den, const char* what) {
  if (den == 0 || num % den != 0) {
    throw Error(ErrorCode::kInternalError,
                std::string("non-integral intermediate in ") + what);
  }
  return num / den;
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInternalError, "identity failed: " + what);
}

}  // namespace

Rational::Rational(uint64_t num, uint64_t den) {
  if (den == 0) throw Error(ErrorCode::kDivisionByZero, "Rational with den 0");
  const uint64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

std::string Rational::ToString() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<unsigned __int128>(a.num_) * b.den_ <
         static_cast<unsigned __int128>(b.num_) * a.den_;
}

Rational operator*(const Rational& a, const Rational& b) {
  const uint64_t g1 = std::gcd(a.num_, b.den_);
  const uint64_t g2 = std::gcd(b.num_, a.den_);
  return Rational(ToU64(static_cast<i128>(a.num_ / g1) * (b.num_ / g2)),
                  ToU64(static_cast<i128>(a.den_ / g2) * (b.den_ / g1)));
}

void SchemeConfig::Validate() const {
  if (num_records < 2) {
    throw Error(ErrorCode::kInvalidConfig,
                "need M >= 2 records, got M = " + std::to_string(num_records));
  }
  if (collusion < 1 || collusion >= num_servers) {
    throw Error(ErrorCode::kInvalidConfig,
                "need 1 <= T < N, got N = " + std::to_string(num_servers) +
                    ", T = " + std::to_string(collusion));
  }
  if (num_records > 20) {
    throw Error(ErrorCode::kInvalidConfig, "M > 20 is not supported");
  }
}

std::string SchemeConfig::ToString() const {
  return "(N=" + std::to_string(num_servers) + ",T=" +
         std::to_string(collusion) + ",M=" + std::to_string(num_records) + ")";
}

uint64_t SchemeParams::TypeCount(size_t k) const {
  return T() * alpha.at(k - 1) + (N() - T()) * beta.at(k - 1);
}

uint64_t SchemeParams::PerServerCount(size_t server, size_t k) const {
  return server < T() ? alpha.at(k - 1) : beta.at(k - 1);
}

uint64_t SchemeParams::Gamma(size_t server) const {
  return server < T() ? gamma_a : gamma_b;
}

uint64_t Binomial(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  i128 result = 1;
  for (uint64_t i = 1; i <= k; ++i) {
    result = Checked(result * (n - k + i)) / i;
  }
  return ToU64(result);
}

SchemeParams DeriveParams(const SchemeConfig& config) {
  config.Validate();
  const i128 N = config.num_servers;
  const i128 T = config.collusion;
  const int64_t M = config.num_records;

  SchemeParams p;
  p.config = config;
  const i128 d = std::gcd(config.num_servers, config.collusion);
  const i128 n = N / d;
  const i128 t = T / d;
  p.d = ToU64(d);
  p.n = ToU64(n);
  p.t = ToU64(t);

  // Index 1..M; slot 0 unused.
  std::vector<i128> a(M + 1, 0), b(M + 1, 0);
  if (N >= 2 * T) {
    a[1] = Pow(t, M - 2);
    b[1] = 0;
    for (int64_t k = 1; k < M; ++k) {
      a[k + 1] = ExactDiv(Checked((N - T) * b[k]), T, "forward recursion");
      b[k + 1] = Checked(a[k] + a[k + 1] - b[k]);
    }
  } else {
    a[M] = 0;
    b[M] = Pow(n - t, M - 2);
    for (int64_t k = M - 1; k >= 1; --k) {
      b[k] = ExactDiv(Checked(T * a[k + 1]), N - T, "backward recursion");
      a[k] = Checked(b[k] + b[k + 1] - a[k + 1]);
    }
  }

  for (int64_t k = 1; k <= M; ++k) {
    if (a[k] < 0 || b[k] < 0) {
      throw Error(ErrorCode::kInternalError, "negative alpha/beta");
    }
  }
  for (int64_t k = 1; k < M; ++k) {
    Require(T * a[k + 1] == (N - T) * b[k], "T a_{k+1} = (N-T) b_k");
    Require(a[k] + a[k + 1] == b[k] + b[k + 1], "a_k + a_{k+1} = b_k + b_{k+1}");
  }
  for (int64_t k = 1; k <= M; ++k) {
    Require(T * a[k] + (N - T) * b[k] ==
                Checked(d * Pow(n - t, k - 1) * Pow(t, M - k)),
            "T a_k + (N-T) b_k = d (n-t)^{k-1} t^{M-k}");
  }

  // Closed forms, only where every exponent is non-negative.
  if (N >= 2 * T) {
    for (int64_t k = 1; k <= M; ++k) {
      if (k >= 2) {
        const i128 num = Pow(n - t, k - 2) - Pow(-t, k - 2);
        Require(ExactDiv(num, n, "closed form alpha") * (n - t) *
                        Pow(t, M - k) ==
                    a[k],
                "closed form alpha_k (N >= 2T)");
      }
      const i128 num = Pow(n - t, k - 1) - Pow(-t, k - 1);
      Require(ExactDiv(num, n, "closed form beta") * Pow(t, M - k) == b[k],
              "closed form beta_k (N >= 2T)");
    }
  } else {
    for (int64_t k = 1; k <= M; ++k) {
      const i128 num = Pow(t, M - k) - Pow(t - n, M - k);
      Require(ExactDiv(num, n, "closed form alpha") * Pow(n - t, k - 1) == a[k],
              "closed form alpha_k (T < N < 2T)");
      if (k <= M - 1) {
        const i128 numb = Pow(t, M - k - 1) - Pow(t - n, M - k - 1);
        Require(ExactDiv(numb, n, "closed form beta") * t * Pow(n - t, k - 1) ==
                    b[k],
                "closed form beta_k (T < N < 2T)");
      }
    }
  }

  p.alpha.resize(M);
  p.beta.resize(M);
  for (int64_t k = 1; k <= M; ++k) {
    p.alpha[k - 1] = ToU64(a[k]);
    p.beta[k - 1] = ToU64(b[k]);
  }

  i128 L = 0, D = 0, ell = 0, ga = 0, gb = 0;
  for (int64_t k = 1; k <= M; ++k) {
    const i128 count = T * a[k] + (N - T) * b[k];
    L = Checked(L + Checked(static_cast<i128>(Binomial(M - 1, k - 1)) * count));
    D = Checked(D + Checked(static_cast<i128>(Binomial(M, k)) * count));
    if (k <= M - 1) {
      ell = Checked(ell + Checked(static_cast<i128>(Binomial(M - 2, k - 1)) *
                                  count));
    }
    ga = Checked(ga + static_cast<i128>(Binomial(M, k)) * a[k]);
    gb = Checked(gb + static_cast<i128>(Binomial(M, k)) * b[k]);
  }
  Require(L == d * Pow(n, M - 1), "L = d n^{M-1}");
  Require(D == ExactDiv(d * (Pow(n, M) - Pow(t, M)), n - t, "D closed form"),
          "D = d (n^M - t^M)/(n - t)");
  Require(ell == T * Pow(n, M - 2), "ell = T n^{M-2}");
  Require(T * ga + (N - T) * gb == D, "T gamma_a + (N-T) gamma_b = D");
  p.L = ToU64(L);
  p.D = ToU64(D);
  p.ell = ToU64(ell);
  p.gamma_a = ToU64(ga);
  p.gamma_b = ToU64(gb);
  Require(UndesiredSymbolCount(p) == p.L, "undesired-side count of L");

  p.q_bound = ToU64(std::max(N * Pow(t, M - 2), N * Pow(n - t, M - 2)));
  p.q_min = NextPrime(std::max<uint64_t>(p.q_bound, 2));
  return p;
}

Rational Capacity(const SchemeConfig& config) {
  const i128 N = config.num_servers;
  const i128 T = config.collusion;
  const int64_t M = config.num_records;
  if (M < 1 || T < 1 || T > N) {
    throw Error(ErrorCode::kInvalidConfig,
                "capacity needs M >= 1 and 1 <= T <= N");
  }
  // 1 / sum_i (T/N)^i = N^{M-1} / sum_i N^{M-1-i} T^i
  i128 denominator = 0;
  for (int64_t i = 0; i < M; ++i) {
    denominator = Checked(denominator + Checked(Pow(N, M - 1 - i) * Pow(T, i)));
  }
  return Rational(ToU64(Pow(N, M - 1)), ToU64(denominator));
}

uint64_t OptimalSubpacketization(const SchemeConfig& config) {
  config.Validate();
  const uint64_t d = std::gcd(config.num_servers, config.collusion);
  return ToU64(d * Pow(config.num_servers / d, config.num_records - 1));
}

uint64_t UndesiredSymbolCount(const SchemeParams& p) {
  const i128 N = p.N();
  const i128 T = p.T();
  i128 total = 0;
  for (size_t k = 1; k < p.M(); ++k) {
    const i128 per_type = T * (p.alpha[k - 1] + p.alpha[k]) +
                          (N - T) * (p.beta[k - 1] + p.beta[k]);
    total = Checked(total + Checked(static_cast<i128>(Binomial(p.M() - 2, k - 1)) *
                                    per_type));
  }
  return ToU64(total);
}

uint64_t BaselineSubpacketization(const SchemeConfig& config) {
  return ToU64(Pow(config.num_servers, config.num_records));
}

uint64_t BaselineFieldSizeBound(const SchemeConfig& config) {
  const i128 N = config.num_servers;
  const i128 T = config.collusion;
  const int64_t M = config.num_records;
  return ToU64(std::max(N * N * Pow(T, M - 2), N * N * Pow(N - T, M - 2)));
}

void ValidateFieldSize(const SchemeParams& params, uint64_t q) {
  if (!IsPrime(q)) {
    throw Error(ErrorCode::kInvalidConfig,
                "q = " + std::to_string(q) + " is not prime");
  }
  if (q < params.q_bound) {
    throw Error(ErrorCode::kFieldTooSmall,
                "q = " + std::to_string(q) + " is below the required bound " +
                    std::to_string(params.q_bound) + " (q_min = " +
                    std::to_string(params.q_min) + ") for " +
                    params.config.ToString());
  }
}

std::vector<ComparisonRow> ComparisonTable(
    std::span<const SchemeConfig> configs) {
  std::vector<ComparisonRow> rows;
  rows.reserve(configs.size());
  for (const SchemeConfig& config : configs) {
    const SchemeParams p = DeriveParams(config);
    ComparisonRow row;
    row.config = config;
    row.L = p.L;
    row.D = p.D;
    row.rate = Rational(p.L, p.D);
    row.q_bound = p.q_bound;
    row.q_min = p.q_min;
    row.baseline_L = BaselineSubpacketization(config);
    row.baseline_q_bound = BaselineFieldSizeBound(config);
    row.L_ratio = Rational(row.L, row.baseline_L);
    row.q_bound_ratio = Rational(row.q_bound, row.baseline_q_bound);
    rows.push_back(row);
  }
  return rows;
}

std::string FormatComparisonText(std::span<const ComparisonRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(4) << "N" << std::setw(4) << "T" << std::setw(4)
     << "M" << std::setw(10) << "L" << std::setw(10) << "D" << std::setw(12)
     << "rate" << std::setw(10) << "q_min" << std::setw(10) << "q_bound"
     << std::setw(12) << "L_base" << std::setw(12) << "q_base" << std::setw(10)
     << "L/L_base" << "q/q_base" << '\n';
  for (const ComparisonRow& r : rows) {
    os << std::setw(4) << r.config.num_servers << std::setw(4)
       << r.config.collusion << std::setw(4) << r.config.num_records
       << std::setw(10) << r.L << std::setw(10) << r.D << std::setw(12)
       << r.rate.ToString() << std::setw(10) << r.q_min << std::setw(10)
       << r.q_bound << std::setw(12) << r.baseline_L << std::setw(12)
       << r.baseline_q_bound << std::setw(10) << r.L_ratio.ToString()
       << r.q_bound_ratio.ToString() << '\n';
  }
  return os.str();
}

std::string FormatComparisonMachine(std::span<const ComparisonRow> rows) {
  std::ostringstream os;
  os << "# N,T,M,L,D,rate,q_min,q_bound,L_baseline,q_baseline_bound,L_ratio,"
        "q_bound_ratio\n";
  for (const ComparisonRow& r : rows) {
    os << r.config.num_servers << ',' << r.config.collusion << ','
       << r.config.num_records << ',' << r.L << ',' << r.D << ','
       << r.rate.ToString() << ',' << r.q_min << ',' << r.q_bound << ','
       << r.baseline_L << ',' << r.baseline_q_bound << ','
       << r.L_ratio.ToString() << ',' << r.q_bound_ratio.ToString() << '\n';
  }
  return os.str();
}

std::vector<SchemeConfig> DefaultGrid() {
  return {{2, 1, 2}, {3, 2, 2}, {3, 2, 3}, {4, 2, 3},
          {5, 3, 3}, {4, 3, 2}, {2, 1, 4}};
}

}  // namespace optpir
