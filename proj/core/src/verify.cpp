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

#include "optpir/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace optpir {
namespace {

std::string JoinOneBased(std::span<const size_t> items,
                         const char* sep = ",", bool braces = true) {
  std::string out = braces ? "{" : "";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(items[i] + 1);
  }
  return braces ? out + "}" : out;
}

// Coalitions inside comma-separated machine lines.
std::string MachineSet(std::span<const size_t> items) {
  return JoinOneBased(items, " ", false);
}

std::vector<size_t> ColumnsOf(const Scheme& scheme,
                              std::span<const size_t> servers) {
  // Global column index into the horizontal stack of all server matrices.
  std::vector<size_t> offsets(scheme.params().N() + 1, 0);
  for (size_t j = 0; j < scheme.params().N(); ++j) {
    offsets[j + 1] = offsets[j] + scheme.params().Gamma(j);
  }
  std::vector<size_t> cols;
  for (size_t j : servers) {
    for (size_t c = offsets[j]; c < offsets[j + 1]; ++c) cols.push_back(c);
  }
  return cols;
}

FieldMatrix RowsForRecords(const Scheme& scheme, const QuerySet& qs,
                           std::span<const size_t> servers, bool desired) {
  const size_t L = scheme.params().L;
  std::vector<size_t> rows;
  for (size_t i = 0; i < scheme.params().M(); ++i) {
    if ((i == qs.theta) != desired) continue;
    for (size_t r = 0; r < L; ++r) rows.push_back(i * L + r);
  }
  const FieldMatrix all = HStack(qs.server_queries);
  return all.SelectRows(rows).SelectColumns(ColumnsOf(scheme, servers));
}

uint64_t SaturatingMul(uint64_t a, uint64_t b, uint64_t cap) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  return p > cap ? cap + 1 : static_cast<uint64_t>(p);
}

// Number of rank-`cols` matrices of shape rows x cols, prod_{i<cols}
// (q^rows - q^i), saturating to cap + 1.
uint64_t CountFullRank(uint64_t q, size_t rows, size_t cols, uint64_t cap) {
  using u128 = unsigned __int128;
  const u128 huge = u128{1} << 100;
  u128 q_rows = 1;
  for (size_t i = 0; i < rows; ++i) {
    q_rows *= q;
    if (q_rows > huge) return cap + 1;
  }
  u128 count = 1;
  u128 q_i = 1;
  for (size_t i = 0; i < cols; ++i) {
    count *= q_rows - q_i;
    if (count > cap) return cap + 1;
    q_i *= q;
  }
  return static_cast<uint64_t>(count);
}

std::vector<FieldMatrix> EnumerateFullRank(const PrimeField& field, size_t rows,
                                           size_t cols) {
  const uint64_t q = field.modulus();
  const size_t cells = rows * cols;
  std::vector<uint64_t> digits(cells, 0);
  std::vector<FieldMatrix> out;
  while (true) {
    FieldMatrix m(field, rows, cols, digits);
    if (Rank(m) == cols) out.push_back(std::move(m));
    size_t pos = 0;
    while (pos < cells && ++digits[pos] == q) digits[pos++] = 0;
    if (pos == cells) break;
  }
  return out;
}

double TotalVariation(const std::map<std::string, uint64_t>& a, uint64_t na,
                      const std::map<std::string, uint64_t>& b, uint64_t nb) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  double sum = 0;
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    const double pa = ia == a.end() ? 0.0 : static_cast<double>(ia->second) / na;
    const double pb = ib == b.end() ? 0.0 : static_cast<double>(ib->second) / nb;
    sum += std::abs(pa - pb);
  }
  return sum / 2;
}

// Exact TV for equal totals: sum |a - b| / (2 total).
Rational ExactTotalVariation(const std::map<std::string, uint64_t>& a,
                             const std::map<std::string, uint64_t>& b,
                             uint64_t total) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  uint64_t diff = 0;
  for (const auto& k : keys) {
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    const uint64_t ca = ia == a.end() ? 0 : ia->second;
    const uint64_t cb = ib == b.end() ? 0 : ib->second;
    diff += ca > cb ? ca - cb : cb - ca;
  }
  return Rational(diff, 2 * total);
}

void CheckCoalition(const SchemeConfig& config,
                    std::span<const size_t> coalition) {
  std::set<size_t> seen;
  for (size_t j : coalition) {
    if (j >= config.num_servers || !seen.insert(j).second) {
      throw Error(ErrorCode::kIndexError,
                  "coalition members must be distinct server indices");
    }
  }
}

const char* ModeName(PrivacyMode mode) {
  return mode == PrivacyMode::kExhaustive ? "exhaustive" : "statistical";
}

const char* VariantName(QueryVariant v) {
  return v == QueryVariant::kPrivate ? "private" : "unmixed";
}

}  // namespace

std::vector<std::vector<size_t>> Combinations(size_t n, size_t size) {
  std::vector<std::vector<size_t>> out;
  if (size > n) return out;
  std::vector<size_t> current(size);
  for (size_t i = 0; i < size; ++i) current[i] = i;
  while (true) {
    out.push_back(current);
    size_t i = size;
    while (i > 0 && current[i - 1] == n - size + i - 1) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (size_t j = i; j < size; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

FieldMatrix DesiredBlock(const Scheme& scheme, const QuerySet& qs,
                         std::span<const size_t> servers) {
  return RowsForRecords(scheme, qs, servers, true);
}

FieldMatrix UndesiredBlock(const Scheme& scheme, const QuerySet& qs,
                           std::span<const size_t> servers) {
  return RowsForRecords(scheme, qs, servers, false);
}

RankAudit AuditRanks(const Scheme& scheme, const QuerySet& qs) {
  const SchemeParams& p = scheme.params();
  RankAudit audit;
  audit.theta = qs.theta;
  audit.expected_full = p.L;
  audit.expected_desired = p.T() * p.L / p.N();
  audit.expected_undesired = p.D - p.L;

  std::vector<size_t> everyone(p.N());
  for (size_t j = 0; j < p.N(); ++j) everyone[j] = j;
  audit.measured_full = Rank(DesiredBlock(scheme, qs, everyone));

  bool ok = audit.measured_full == audit.expected_full;
  for (auto& gamma : Combinations(p.N(), p.T())) {
    CoalitionRanks cr;
    cr.desired = Rank(DesiredBlock(scheme, qs, gamma));
    cr.undesired = Rank(UndesiredBlock(scheme, qs, gamma));
    cr.servers = std::move(gamma);
    ok = ok && cr.desired == audit.expected_desired &&
         cr.undesired == audit.expected_undesired;
    audit.coalitions.push_back(std::move(cr));
  }
  audit.pass = ok;
  return audit;
}

std::string RankAudit::ToText() const {
  std::ostringstream os;
  os << "theta=" << theta + 1 << " full rank " << measured_full << "/"
     << expected_full << '\n';
  for (const auto& c : coalitions) {
    os << "  Gamma=" << JoinOneBased(c.servers) << " desired " << c.desired
       << "/" << expected_desired << " undesired " << c.undesired << "/"
       << expected_undesired << '\n';
  }
  os << (pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string RankAudit::ToMachine() const {
  std::ostringstream os;
  for (const auto& c : coalitions) {
    os << "ranks," << theta + 1 << ',' << MachineSet(c.servers) << ','
       << measured_full << ',' << expected_full << ',' << c.desired << ','
       << expected_desired << ',' << c.undesired << ',' << expected_undesired
       << ',' << (pass ? "pass" : "fail") << '\n';
  }
  return os.str();
}

MixState UnmixedState(const Scheme& scheme, size_t theta) {
  const SchemeParams& p = scheme.params();
  MixState mix{theta, FieldMatrix::Identity(scheme.field(), p.L), {}};
  for (size_t i = 0; i < p.M(); ++i) {
    if (i == theta) {
      mix.undesired.emplace_back(scheme.field(), 0, 0);
      continue;
    }
    FieldMatrix leading(scheme.field(), p.L, p.ell);
    for (size_t c = 0; c < p.ell; ++c) leading(c, c) = 1;
    mix.undesired.push_back(std::move(leading));
  }
  return mix;
}

std::string CanonicalView(const QuerySet& qs,
                          std::span<const size_t> coalition) {
  std::vector<size_t> servers(coalition.begin(), coalition.end());
  std::sort(servers.begin(), servers.end());
  std::string out;
  for (size_t j : servers) {
    const FieldMatrix& m = qs.server_queries.at(j);
    for (uint64_t v : m.entries()) {
      for (int byte = 0; byte < 8; ++byte) {
        out.push_back(static_cast<char>((v >> (8 * byte)) & 0xFF));
      }
    }
  }
  return out;
}

std::string ViewSummary(const Scheme& scheme, const QuerySet& qs,
                        std::span<const size_t> coalition) {
  if (coalition.empty()) return {};
  const SchemeParams& p = scheme.params();
  const size_t L = p.L;
  std::vector<size_t> servers(coalition.begin(), coalition.end());
  std::sort(servers.begin(), servers.end());
  std::vector<FieldMatrix> parts;
  for (size_t j : servers) parts.push_back(qs.server_queries.at(j));
  const FieldMatrix view = HStack(parts);

  std::ostringstream os;
  for (size_t i = 0; i < p.M(); ++i) {
    const FieldMatrix block = view.Block(i * L, 0, L, view.cols());
    size_t unit_columns = 0;
    for (size_t c = 0; c < block.cols(); ++c) {
      size_t weight = 0;
      for (size_t r = 0; r < L; ++r) weight += block(r, c) != 0;
      if (weight == 1) ++unit_columns;
    }
    os << Rank(block) << ':' << unit_columns << ';';
  }
  return os.str();
}

PrivacyReport PrivacyExhaustive(const SchemeConfig& config, uint64_t q,
                                std::span<const size_t> coalition,
                                QueryVariant variant) {
  CheckCoalition(config, coalition);
  const Scheme scheme(config, q);
  const SchemeParams& p = scheme.params();
  const size_t M = p.M();

  const uint64_t cap = kMaxExhaustiveStates;
  const uint64_t desired_count = CountFullRank(q, p.L, p.L, cap);
  const uint64_t undesired_count = CountFullRank(q, p.L, p.ell, cap);
  uint64_t states = desired_count;
  for (size_t i = 1; i < M; ++i) states = SaturatingMul(states, undesired_count, cap);
  if (variant == QueryVariant::kUnmixed) states = 1;
  if (states > cap) {
    throw Error(ErrorCode::kTooLargeForExhaustive,
                "randomness space exceeds " + std::to_string(cap) +
                    " states; use statistical mode");
  }

  std::vector<FieldMatrix> invertible;
  std::vector<FieldMatrix> full_rank;
  if (variant == QueryVariant::kPrivate) {
    invertible = EnumerateFullRank(scheme.field(), p.L, p.L);
    full_rank = EnumerateFullRank(scheme.field(), p.L, p.ell);
    if (invertible.size() != desired_count || full_rank.size() != undesired_count) {
      throw Error(ErrorCode::kInternalError, "full-rank enumeration miscounted");
    }
  }

  PrivacyReport report;
  report.config = config;
  report.q = q;
  report.coalition.assign(coalition.begin(), coalition.end());
  report.mode = PrivacyMode::kExhaustive;
  report.variant = variant;
  report.samples_per_theta = states;

  std::vector<std::map<std::string, uint64_t>> dist(M);
  for (size_t theta = 0; theta < M; ++theta) {
    if (variant == QueryVariant::kUnmixed) {
      ++dist[theta][CanonicalView(scheme.BuildQueries(UnmixedState(scheme, theta)),
                                  coalition)];
      continue;
    }
    // Mixed-radix counter: digit 0 picks S_theta, digits 1.. pick the
    // undesired mixers in record order.
    std::vector<size_t> digit(M, 0);
    while (true) {
      MixState mix{theta, invertible[digit[0]], {}};
      size_t next = 1;
      for (size_t i = 0; i < M; ++i) {
        if (i == theta) {
          mix.undesired.emplace_back(scheme.field(), 0, 0);
        } else {
          mix.undesired.push_back(full_rank[digit[next++]]);
        }
      }
      ++dist[theta][CanonicalView(scheme.BuildQueries(mix), coalition)];
      size_t pos = 0;
      while (pos < M) {
        const size_t radix = pos == 0 ? invertible.size() : full_rank.size();
        if (++digit[pos] < radix) break;
        digit[pos++] = 0;
      }
      if (pos == M) break;
    }
  }

  std::set<std::string> support;
  for (const auto& d : dist) {
    report.support_per_theta.push_back(d.size());
    for (const auto& [k, v] : d) support.insert(k);
  }
  report.support = support.size();
  Rational worst(0, 1);
  for (size_t a = 0; a < M; ++a) {
    for (size_t b = a + 1; b < M; ++b) {
      const Rational tv = ExactTotalVariation(dist[a], dist[b], states);
      if (worst < tv) worst = tv;
    }
  }
  report.exact_distance = worst;
  report.distance = worst.ToDouble();
  report.threshold = 0;
  report.pass = worst.num() == 0;
  return report;
}

PrivacyReport PrivacyStatistical(const SchemeConfig& config, uint64_t q,
                                 std::span<const size_t> coalition,
                                 uint64_t trials, uint64_t seed,
                                 QueryVariant variant, size_t threads) {
  if (trials < 1000) {
    throw Error(ErrorCode::kInvalidConfig, "statistical mode needs >= 1000 trials");
  }
  CheckCoalition(config, coalition);
  const Scheme scheme(config, q);
  const size_t M = scheme.params().M();
  if (threads == 0) threads = std::max<size_t>(1, std::thread::hardware_concurrency());

  std::vector<std::map<std::string, uint64_t>> dist(M);
  std::mutex merge;
  auto worker = [&](size_t w) {
    std::vector<std::map<std::string, uint64_t>> local(M);
    for (size_t theta = 0; theta < M; ++theta) {
      for (uint64_t t = w; t < trials; t += threads) {
        Rng rng({seed, theta, t});
        const QuerySet qs =
            variant == QueryVariant::kUnmixed
                ? scheme.BuildQueries(UnmixedState(scheme, theta))
                : scheme.GenerateQueries(theta, rng);
        ++local[theta][ViewSummary(scheme, qs, coalition)];
      }
    }
    std::lock_guard<std::mutex> lock(merge);
    for (size_t theta = 0; theta < M; ++theta) {
      for (const auto& [k, v] : local[theta]) dist[theta][k] += v;
    }
  };
  std::vector<std::thread> pool;
  for (size_t w = 1; w < threads; ++w) pool.emplace_back(worker, w);
  worker(0);
  for (auto& th : pool) th.join();

  PrivacyReport report;
  report.config = config;
  report.q = q;
  report.coalition.assign(coalition.begin(), coalition.end());
  report.mode = PrivacyMode::kStatistical;
  report.variant = variant;
  report.samples_per_theta = trials;
  report.seed = seed;
  std::set<std::string> support;
  for (const auto& d : dist) {
    report.support_per_theta.push_back(d.size());
    for (const auto& [k, v] : d) support.insert(k);
  }
  report.support = support.size();
  double worst = 0;
  for (size_t a = 0; a < M; ++a) {
    for (size_t b = a + 1; b < M; ++b) {
      worst = std::max(worst, TotalVariation(dist[a], trials, dist[b], trials));
    }
  }
  report.distance = worst;
  report.threshold =
      4.0 * std::sqrt(static_cast<double>(report.support) / trials);
  report.pass = worst <= report.threshold;
  return report;
}

std::string PrivacyReport::ToText() const {
  std::ostringstream os;
  os << "privacy " << ModeName(mode) << " " << config.ToString() << " q=" << q
     << " coalition=" << JoinOneBased(coalition) << " variant="
     << VariantName(variant) << '\n';
  os << "  samples/theta=" << samples_per_theta;
  if (mode == PrivacyMode::kStatistical) os << " seed=" << seed;
  os << " support=" << support << " per-theta=[";
  for (size_t i = 0; i < support_per_theta.size(); ++i) {
    os << (i ? "," : "") << support_per_theta[i];
  }
  os << "]\n  TV=";
  if (mode == PrivacyMode::kExhaustive) {
    os << exact_distance.ToString();
  } else {
    os << distance << " threshold=" << threshold;
  }
  os << "\n" << (pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::string PrivacyReport::ToMachine() const {
  std::ostringstream os;
  os << "privacy," << ModeName(mode) << ',' << config.num_servers << ','
     << config.collusion << ',' << config.num_records << ',' << q << ','
     << MachineSet(coalition) << ',' << VariantName(variant) << ','
     << samples_per_theta << ',' << seed << ',' << support << ',';
  if (mode == PrivacyMode::kExhaustive) {
    os << exact_distance.ToString();
  } else {
    os << distance;
  }
  os << ',' << threshold << ',' << (pass ? "pass" : "fail") << '\n';
  return os.str();
}

Rational MeasureRate(const SchemeParams& params, const Schedule& schedule) {
  return Rational(params.L, schedule.slots().size());
}

MdsAudit AuditMdsCode(const SystematicMdsCode& code, Rng& rng) {
  MdsAudit audit;
  audit.length = code.length();
  audit.dimension = code.dimension();
  const PrimeField& f = code.field();
  std::vector<uint64_t> info(code.dimension());
  for (const auto& subset : Combinations(code.length(), code.dimension())) {
    ++audit.subsets_checked;
    if (Rank(code.generator().SelectColumns(subset)) != code.dimension()) {
      ++audit.singular_subsets;
      continue;
    }
    for (auto& v : info) v = rng.Uniform(f.modulus());
    const std::vector<uint64_t> codeword = code.Encode(info);
    std::vector<uint64_t> values;
    for (size_t pos : subset) values.push_back(codeword[pos]);
    try {
      if (code.ErasureDecode(subset, values) != codeword) ++audit.failed_roundtrips;
    } catch (const Error&) {
      ++audit.failed_roundtrips;
    }
  }
  audit.pass = audit.singular_subsets == 0 && audit.failed_roundtrips == 0;
  return audit;
}

uint64_t CountExposureViolations(const Scheme& scheme) {
  const SchemeParams& p = scheme.params();
  const Schedule& schedule = scheme.schedule();
  uint64_t violations = 0;
  std::vector<std::vector<size_t>> coalitions;
  for (size_t size = 1; size <= p.T(); ++size) {
    for (auto& c : Combinations(p.N(), size)) coalitions.push_back(std::move(c));
  }
  for (size_t theta = 0; theta < p.M(); ++theta) {
    for (size_t i = 0; i < p.M(); ++i) {
      if (i == theta) continue;
      for (const MixBlock& block : scheme.MixingPartition(i, theta)) {
        std::vector<size_t> servers;
        for (size_t id : schedule.TypeSlots(block.type)) {
          servers.push_back(schedule.slots()[id].server);
        }
        for (size_t id :
             schedule.TypeSlots(block.type | (RecordSet{1} << theta))) {
          servers.push_back(schedule.slots()[id].server);
        }
        for (const auto& gamma : coalitions) {
          size_t seen = 0;
          for (size_t s : servers) {
            seen += std::find(gamma.begin(), gamma.end(), s) != gamma.end();
          }
          if (seen > block.width) ++violations;
        }
      }
    }
  }
  return violations;
}

}  // namespace optpir
