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

// Integer parameters of the scheme for N servers, collusion threshold T and
// M records.

#ifndef OPTPIR_PARAMS_HPP_
#define OPTPIR_PARAMS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace optpir {

// Exact non-negative fraction kept in lowest terms.
class Rational {
 public:
  Rational(uint64_t num = 0, uint64_t den = 1);

  uint64_t num() const { return num_; }
  uint64_t den() const { return den_; }
  double ToDouble() const { return static_cast<double>(num_) / den_; }
  std::string ToString() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) {
    return !(b < a);
  }
  friend Rational operator*(const Rational& a, const Rational& b);

 private:
  uint64_t num_;
  uint64_t den_;
};

struct SchemeConfig {
  uint32_t num_servers = 0;  // N
  uint32_t collusion = 0;    // T
  uint32_t num_records = 0;  // M

  // Throws kInvalidConfig unless M >= 2 and 1 <= T < N.
  void Validate() const;
  std::string ToString() const;

  friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

struct SchemeParams {
  SchemeConfig config;
  uint64_t d = 0;  // gcd(N, T)
  uint64_t n = 0;  // N / d
  uint64_t t = 0;  // T / d
  // alpha[k-1], beta[k-1] for sum order k = 1..M: sums of each k-subset type
  // per server in group [1..T] and in group [T+1..N] respectively.
  std::vector<uint64_t> alpha;
  std::vector<uint64_t> beta;
  uint64_t L = 0;        // sub-packetization
  uint64_t D = 0;        // downloaded symbols per stripe
  uint64_t ell = 0;      // retained width of each undesired record
  uint64_t gamma_a = 0;  // answers per server in [1..T]
  uint64_t gamma_b = 0;  // answers per server in [T+1..N]
  uint64_t q_bound = 0;  // max{N t^{M-2}, N (n-t)^{M-2}}
  uint64_t q_min = 0;    // smallest prime >= max(q_bound, 2)

  uint32_t N() const { return config.num_servers; }
  uint32_t T() const { return config.collusion; }
  uint32_t M() const { return config.num_records; }

  // T alpha_k + (N-T) beta_k: number of k-sums of one type over all servers,
  // also the dimension of the code attached to that type. k is 1-based.
  uint64_t TypeCount(size_t k) const;
  // alpha_k or beta_k depending on the group of 0-based `server`.
  uint64_t PerServerCount(size_t server, size_t k) const;
  // gamma_a or gamma_b for 0-based `server`.
  uint64_t Gamma(size_t server) const;
};

uint64_t Binomial(uint64_t n, uint64_t k);

// Throws kInvalidConfig for invalid configs; kInternalError if any identity
// of the construction fails (which would indicate a bug).
SchemeParams DeriveParams(const SchemeConfig& config);

// 1 / sum_{i<M} (T/N)^i. Accepts M >= 1 and 1 <= T <= N.
Rational Capacity(const SchemeConfig& config);

// d n^{M-1}.
uint64_t OptimalSubpacketization(const SchemeConfig& config);

// L recounted from the undesired side:
// sum_{k<M} C(M-2,k-1) (T(a_k+a_{k+1}) + (N-T)(b_k+b_{k+1})).
uint64_t UndesiredSymbolCount(const SchemeParams& params);

// N^M and max{N^2 T^{M-2}, N^2 (N-T)^{M-2}} for the earlier construction
// with symmetric server treatment.
uint64_t BaselineSubpacketization(const SchemeConfig& config);
uint64_t BaselineFieldSizeBound(const SchemeConfig& config);

// Throws kInvalidConfig if q is not prime, kFieldTooSmall if q < q_bound.
void ValidateFieldSize(const SchemeParams& params, uint64_t q);

struct ComparisonRow {
  SchemeConfig config;
  uint64_t L = 0;
  uint64_t D = 0;
  Rational rate;
  uint64_t q_bound = 0;
  uint64_t q_min = 0;
  uint64_t baseline_L = 0;
  uint64_t baseline_q_bound = 0;
  Rational L_ratio;        // L / baseline_L
  Rational q_bound_ratio;  // q_bound / baseline_q_bound
};

std::vector<ComparisonRow> ComparisonTable(
    std::span<const SchemeConfig> configs);
std::string FormatComparisonText(std::span<const ComparisonRow> rows);
// One line per config after a '#' header naming the comma-separated fields.
std::string FormatComparisonMachine(std::span<const ComparisonRow> rows);

// (2,1,2),(3,2,2),(3,2,3),(4,2,3),(5,3,3),(4,3,2),(2,1,4).
std::vector<SchemeConfig> DefaultGrid();

}  // namespace optpir

#endif  // OPTPIR_PARAMS_HPP_
