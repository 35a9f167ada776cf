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

// The retrieval scheme itself.
//
// Terminology used throughout:
//   * a record set (type) is a subset of [M], stored as a bitmask;
//   * a slot is one downloaded symbol: a sum over a record set with one
//     coordinate taken from each member record's transformed vector U_nu;
//   * the schedule lists all D slots in a fixed order that never depends on
//     which record is being retrieved;
//   * the user privately mixes the desired record with a uniform invertible
//     L x L matrix, and reduces every other record to `ell` uniform linear
//     combinations that are re-expanded to L coordinates through the public
//     systematic MDS codes, one codeword per record set not containing theta.
//
// Library indices (servers, records, coordinates, repetitions) are 0-based.

#ifndef OPTPIR_SCHEME_HPP_
#define OPTPIR_SCHEME_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "optpir/field.hpp"
#include "optpir/mds.hpp"
#include "optpir/params.hpp"

namespace optpir {

using RecordSet = uint32_t;

inline bool Contains(RecordSet set, size_t record) {
  return (set >> record) & 1U;
}
std::vector<size_t> Members(RecordSet set);
// All nonempty subsets of [M] ordered by size, then lexicographically by
// their sorted index tuples.
std::vector<RecordSet> CanonicalSubsets(size_t num_records);

struct Slot {
  size_t server = 0;
  size_t order = 0;  // |records|
  RecordSet records = 0;
  size_t repetition = 0;
  // (record, coordinate of U_record) for every member, ascending by record.
  std::vector<std::pair<size_t, size_t>> symbols;

  size_t SymbolFor(size_t record) const;
};

class Schedule {
 public:
  const SchemeParams& params() const { return params_; }
  const std::vector<Slot>& slots() const { return slots_; }
  // Slot ids sent to `server`, in column order of its query matrix.
  const std::vector<size_t>& ServerSlots(size_t server) const {
    return per_server_.at(server);
  }
  // Column of slot `id` inside its server's query matrix.
  size_t ColumnOf(size_t id) const { return column_.at(id); }
  // Nonempty record sets in canonical order.
  const std::vector<RecordSet>& types() const { return types_; }
  // Slot ids of one record set ordered by (server, repetition).
  const std::vector<size_t>& TypeSlots(RecordSet set) const {
    return by_type_.at(set);
  }

 private:
  friend Schedule BuildSchedule(const SchemeParams& params);

  SchemeParams params_;
  std::vector<Slot> slots_;
  std::vector<std::vector<size_t>> per_server_;
  std::vector<size_t> column_;
  std::vector<RecordSet> types_;
  std::vector<std::vector<size_t>> by_type_;  // indexed by bitmask
};

// Slots ordered by k ascending, then record set in canonical order, then
// server, then repetition. Coordinates of each U_nu are consumed in that
// order.
Schedule BuildSchedule(const SchemeParams& params);

// Columns [offset, offset + width) of an undesired record's mixer feed the
// codeword attached to record set `type`.
struct MixBlock {
  RecordSet type = 0;
  size_t offset = 0;
  size_t width = 0;
};

// The user's private randomness for one retrieval.
struct MixState {
  size_t theta = 0;
  FieldMatrix desired;                 // L x L invertible
  std::vector<FieldMatrix> undesired;  // L x ell full rank; 0 x 0 at theta
};

struct QuerySet {
  size_t theta = 0;
  std::vector<FieldMatrix> server_queries;  // (M L) x gamma_j each
  MixState mix;
};

// M records over one field, each an L x b matrix whose columns are stripes.
class Database {
 public:
  Database(const PrimeField& field, std::vector<FieldMatrix> records);

  static Database Random(const PrimeField& field, size_t num_records,
                         size_t L, size_t stripes, Rng& rng);
  // Each record is a flat symbol vector whose length is a positive multiple
  // of L; stripe s holds symbols [s L, (s+1) L).
  static Database FromSymbols(const PrimeField& field, size_t L,
                              std::span<const std::vector<uint64_t>> records);

  const PrimeField& field() const { return field_; }
  size_t num_records() const { return records_.size(); }
  size_t L() const { return records_.front().rows(); }
  size_t stripes() const { return records_.front().cols(); }
  const FieldMatrix& record(size_t i) const { return records_.at(i); }
  // Inverse of FromSymbols for one record.
  std::vector<uint64_t> RecordSymbols(size_t i) const;

  friend bool operator==(const Database&, const Database&) = default;

 private:
  PrimeField field_;
  std::vector<FieldMatrix> records_;
};

// One server's response: for every stripe, the concatenated record vector
// times the query matrix. Output is gamma_j x b. Depends only on its inputs.
FieldMatrix Answer(const Database& db, const FieldMatrix& server_query);

class Scheme {
 public:
  // Throws kInvalidConfig / kFieldTooSmall if q is unusable for `config`.
  Scheme(const SchemeConfig& config, uint64_t q);
  // Uses the smallest admissible prime.
  explicit Scheme(const SchemeConfig& config);

  const SchemeParams& params() const { return params_; }
  const PrimeField& field() const { return field_; }
  const Schedule& schedule() const { return schedule_; }
  // Systematic [T_k + T_{k+1}, T_k] code used by record sets of size k,
  // where T_k = TypeCount(k). Valid for 1 <= k < M.
  const SystematicMdsCode& Code(size_t k) const { return codes_.at(k - 1); }

  std::vector<MixBlock> MixingPartition(size_t record, size_t theta) const;

  MixState SampleMixState(size_t theta, Rng& rng) const;
  QuerySet BuildQueries(const MixState& mix) const;
  QuerySet GenerateQueries(size_t theta, Rng& rng) const;

  // L x L matrix E with U_record = W_record E, placed slot by slot.
  FieldMatrix RecordTransform(const MixState& mix, size_t record) const;

  // ell x L matrix G with U_record = (W_record R_record) G for an undesired
  // record, in the schedule's coordinate order.
  FieldMatrix ExpandedGenerator(size_t record, size_t theta) const;
  // The same generator before reordering: block diagonal with one copy of
  // the size-k code generator per record set of size k (k ascending), each
  // codeword laid out as (information part, parity part).
  FieldMatrix BlockDiagonalGenerator() const;
  // perm[c] = coordinate of U_record carried by column c of the block
  // diagonal generator, so ExpandedGenerator()[:, perm[c]] equals
  // BlockDiagonalGenerator()[:, c].
  std::vector<size_t> GeneratorPermutation(size_t record, size_t theta) const;

  // answers[j] is server j's gamma_j x b response. Returns the L x b record.
  FieldMatrix Decode(const MixState& mix,
                     std::span<const FieldMatrix> answers) const;

 private:
  void CheckTheta(size_t theta) const;

  SchemeParams params_;
  PrimeField field_;
  Schedule schedule_;
  std::vector<SystematicMdsCode> codes_;
};

std::vector<FieldMatrix> AnswerAll(const Database& db, const QuerySet& queries);

}  // namespace optpir

#endif  // OPTPIR_SCHEME_HPP_
