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

// Verification harness: rank audits of generated queries, privacy checks
// (exhaustive and sampled), rate measurement and MDS audits.

#ifndef OPTPIR_VERIFY_HPP_
#define OPTPIR_VERIFY_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "optpir/mds.hpp"
#include "optpir/params.hpp"
#include "optpir/scheme.hpp"

namespace optpir {

// All size-`size` subsets of {0, ..., n-1} in lexicographic order.
std::vector<std::vector<size_t>> Combinations(size_t n, size_t size);

// Row block of `record` (or of every record other than it) restricted to the
// columns sent to `servers`.
FieldMatrix DesiredBlock(const Scheme& scheme, const QuerySet& qs,
                         std::span<const size_t> servers);
FieldMatrix UndesiredBlock(const Scheme& scheme, const QuerySet& qs,
                           std::span<const size_t> servers);

struct CoalitionRanks {
  std::vector<size_t> servers;
  size_t desired = 0;    // rank of the theta rows over the coalition
  size_t undesired = 0;  // rank of the non-theta rows over the coalition
};

struct RankAudit {
  size_t theta = 0;
  size_t expected_full = 0;       // L
  size_t expected_desired = 0;    // T L / N
  size_t expected_undesired = 0;  // D - L
  size_t measured_full = 0;
  std::vector<CoalitionRanks> coalitions;  // every |Gamma| = T
  bool pass = false;

  std::string ToText() const;
  std::string ToMachine() const;
};

RankAudit AuditRanks(const Scheme& scheme, const QuerySet& qs);

// Query construction under test. kUnmixed replaces every private mixer by
// the leading columns of the identity, which sends coordinate-basis queries;
// it exists only as a negative control.
enum class QueryVariant { kPrivate, kUnmixed };

MixState UnmixedState(const Scheme& scheme, size_t theta);

enum class PrivacyMode { kExhaustive, kStatistical };

struct PrivacyReport {
  SchemeConfig config;
  uint64_t q = 0;
  std::vector<size_t> coalition;
  PrivacyMode mode = PrivacyMode::kExhaustive;
  QueryVariant variant = QueryVariant::kPrivate;
  uint64_t samples_per_theta = 0;  // randomness states or trials
  uint64_t seed = 0;               // statistical mode only
  std::vector<size_t> support_per_theta;
  size_t support = 0;  // union over theta
  Rational exact_distance;  // exhaustive mode only
  double distance = 0;      // max over theta pairs of total variation
  double threshold = 0;
  bool pass = false;

  std::string ToText() const;
  std::string ToMachine() const;
};

// Bit-exact coalition view: the coalition's query matrices in server order,
// entries row-major, 8-byte little-endian.
std::string CanonicalView(const QuerySet& qs, std::span<const size_t> coalition);

// Low-support summary of a coalition view used by the sampled test: per
// record row block, its rank over the coalition's columns and the number of
// weight-one columns. Raw views almost never repeat, so comparing them
// directly would need far more samples than the threshold allows.
std::string ViewSummary(const Scheme& scheme, const QuerySet& qs,
                        std::span<const size_t> coalition);

// Upper bound on exhaustive enumeration: |GL(L,q)| * (#full-rank L x ell)^(M-1).
inline constexpr uint64_t kMaxExhaustiveStates = 10'000'000;

// Enumerates the full randomness space for every theta. Throws
// kTooLargeForExhaustive above kMaxExhaustiveStates.
PrivacyReport PrivacyExhaustive(const SchemeConfig& config, uint64_t q,
                                std::span<const size_t> coalition,
                                QueryVariant variant = QueryVariant::kPrivate);

// Samples `trials` query sets per theta; trial t of theta uses the stream
// Rng({seed, theta, t}). Pass iff TV <= 4 sqrt(S / trials), S the observed
// support size. Requires trials >= 1000.
PrivacyReport PrivacyStatistical(const SchemeConfig& config, uint64_t q,
                                 std::span<const size_t> coalition,
                                 uint64_t trials, uint64_t seed,
                                 QueryVariant variant = QueryVariant::kPrivate,
                                 size_t threads = 0);

// L / (number of scheduled slots).
Rational MeasureRate(const SchemeParams& params, const Schedule& schedule);

struct MdsAudit {
  size_t length = 0;
  size_t dimension = 0;
  uint64_t subsets_checked = 0;
  uint64_t singular_subsets = 0;
  uint64_t failed_roundtrips = 0;
  bool pass = false;
};

// Exhaustive over all dimension-sized column subsets: rank check plus an
// erasure round trip of a random codeword from each subset.
MdsAudit AuditMdsCode(const SystematicMdsCode& code, Rng& rng);

// For every theta, undesired record i, record set containing i but not theta
// and coalition of size <= T: the number of the codeword's coordinates seen
// by the coalition is at most the code dimension. Returns the number of
// violations.
uint64_t CountExposureViolations(const Scheme& scheme);

}  // namespace optpir

#endif  // OPTPIR_VERIFY_HPP_
