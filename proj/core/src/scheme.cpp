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

#include "optpir/scheme.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <utility>

namespace optpir {

std::vector<size_t> Members(RecordSet set) {
  std::vector<size_t> out;
  for (size_t i = 0; set != 0; ++i, set >>= 1) {
    if (set & 1U) out.push_back(i);
  }
  return out;
}

std::vector<RecordSet> CanonicalSubsets(size_t num_records) {
  std::vector<RecordSet> all;
  const RecordSet limit = RecordSet{1} << num_records;
  for (RecordSet s = 1; s < limit; ++s) all.push_back(s);
  std::sort(all.begin(), all.end(), [](RecordSet a, RecordSet b) {
    const int pa = std::popcount(a);
    const int pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return Members(a) < Members(b);
  });
  return all;
}

size_t Slot::SymbolFor(size_t record) const {
  for (const auto& [r, coordinate] : symbols) {
    if (r == record) return coordinate;
  }
  throw Error(ErrorCode::kIndexError,
              "record " + std::to_string(record) + " not in slot");
}

Schedule BuildSchedule(const SchemeParams& params) {
  const size_t N = params.N();
  const size_t M = params.M();
  Schedule s;
  s.params_ = params;
  s.types_ = CanonicalSubsets(M);
  s.per_server_.assign(N, {});
  s.by_type_.assign(size_t{1} << M, {});
  std::vector<size_t> next_coordinate(M, 0);

  for (RecordSet type : s.types_) {
    const size_t k = std::popcount(type);
    const std::vector<size_t> members = Members(type);
    for (size_t server = 0; server < N; ++server) {
      const uint64_t count = params.PerServerCount(server, k);
      for (size_t h = 0; h < count; ++h) {
        Slot slot;
        slot.server = server;
        slot.order = k;
        slot.records = type;
        slot.repetition = h;
        for (size_t nu : members) {
          slot.symbols.emplace_back(nu, next_coordinate[nu]++);
        }
        const size_t id = s.slots_.size();
        s.slots_.push_back(std::move(slot));
        s.by_type_[type].push_back(id);
        s.column_.push_back(s.per_server_[server].size());
        s.per_server_[server].push_back(id);
      }
    }
  }

  if (s.slots_.size() != params.D) {
    throw Error(ErrorCode::kInternalError, "schedule slot count != D");
  }
  for (size_t nu = 0; nu < M; ++nu) {
    if (next_coordinate[nu] != params.L) {
      throw Error(ErrorCode::kInternalError,
                  "record " + std::to_string(nu) + " uses " +
                      std::to_string(next_coordinate[nu]) +
                      " coordinates, expected L");
    }
  }
  for (size_t server = 0; server < N; ++server) {
    if (s.per_server_[server].size() != params.Gamma(server)) {
      throw Error(ErrorCode::kInternalError, "per-server slot count != gamma");
    }
  }
  return s;
}

Database::Database(const PrimeField& field, std::vector<FieldMatrix> records)
    : field_(field), records_(std::move(records)) {
  if (records_.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "database has no records");
  }
  const size_t rows = records_.front().rows();
  const size_t cols = records_.front().cols();
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kInvalidConfig, "empty records");
  }
  for (const FieldMatrix& r : records_) {
    if (!(r.field() == field_) || r.rows() != rows || r.cols() != cols) {
      throw Error(ErrorCode::kShapeError,
                  "records must share field, L and stripe count");
    }
  }
}

Database Database::Random(const PrimeField& field, size_t num_records,
                          size_t L, size_t stripes, Rng& rng) {
  std::vector<FieldMatrix> records;
  records.reserve(num_records);
  for (size_t i = 0; i < num_records; ++i) {
    records.push_back(FieldMatrix::Random(field, L, stripes, rng));
  }
  return Database(field, std::move(records));
}

Database Database::FromSymbols(const PrimeField& field, size_t L,
                               std::span<const std::vector<uint64_t>> records) {
  if (L == 0) throw Error(ErrorCode::kInvalidConfig, "L must be positive");
  std::vector<FieldMatrix> out;
  for (const auto& symbols : records) {
    if (symbols.empty() || symbols.size() % L != 0) {
      throw Error(ErrorCode::kShapeError,
                  "record length " + std::to_string(symbols.size()) +
                      " is not a positive multiple of L = " +
                      std::to_string(L));
    }
    const size_t stripes = symbols.size() / L;
    FieldMatrix m(field, L, stripes);
    for (size_t s = 0; s < stripes; ++s) {
      for (size_t r = 0; r < L; ++r) m.Set(r, s, symbols[s * L + r]);
    }
    out.push_back(std::move(m));
  }
  return Database(field, std::move(out));
}

std::vector<uint64_t> Database::RecordSymbols(size_t i) const {
  const FieldMatrix& m = records_.at(i);
  std::vector<uint64_t> out(m.rows() * m.cols());
  for (size_t s = 0; s < m.cols(); ++s) {
    for (size_t r = 0; r < m.rows(); ++r) out[s * m.rows() + r] = m(r, s);
  }
  return out;
}

FieldMatrix Answer(const Database& db, const FieldMatrix& server_query) {
  const size_t L = db.L();
  const size_t b = db.stripes();
  if (server_query.rows() != db.num_records() * L) {
    throw Error(ErrorCode::kShapeError,
                "query has " + std::to_string(server_query.rows()) +
                    " rows, database needs M*L = " +
                    std::to_string(db.num_records() * L));
  }
  if (!(server_query.field() == db.field())) {
    throw Error(ErrorCode::kShapeError, "query and database fields differ");
  }
  const PrimeField& f = db.field();
  FieldMatrix out(f, server_query.cols(), b);
  for (size_t i = 0; i < db.num_records(); ++i) {
    const FieldMatrix& w = db.record(i);
    for (size_t r = 0; r < L; ++r) {
      const auto q_row = server_query.Row(i * L + r);
      const auto w_row = w.Row(r);
      for (size_t c = 0; c < q_row.size(); ++c) {
        if (q_row[c] == 0) continue;
        for (size_t s = 0; s < b; ++s) {
          out(c, s) = f.Add(out(c, s), f.Mul(q_row[c], w_row[s]));
        }
      }
    }
  }
  return out;
}

std::vector<FieldMatrix> AnswerAll(const Database& db, const QuerySet& queries) {
  std::vector<FieldMatrix> answers;
  answers.reserve(queries.server_queries.size());
  for (const FieldMatrix& q : queries.server_queries) {
    answers.push_back(Answer(db, q));
  }
  return answers;
}

Scheme::Scheme(const SchemeConfig& config, uint64_t q)
    : params_(DeriveParams(config)),
      field_((ValidateFieldSize(params_, q), q)),
      schedule_(BuildSchedule(params_)) {
  for (size_t k = 1; k < params_.M(); ++k) {
    const size_t dimension = params_.TypeCount(k);
    const size_t length = dimension + params_.TypeCount(k + 1);
    codes_.push_back(SystematicMdsCode::Make(length, dimension, field_));
  }
}

Scheme::Scheme(const SchemeConfig& config)
    : Scheme(config, DeriveParams(config).q_min) {}

void Scheme::CheckTheta(size_t theta) const {
  if (theta >= params_.M()) {
    throw Error(ErrorCode::kIndexError,
                "record index " + std::to_string(theta) + " out of range for M = " +
                    std::to_string(params_.M()));
  }
}

std::vector<MixBlock> Scheme::MixingPartition(size_t record,
                                              size_t theta) const {
  CheckTheta(theta);
  CheckTheta(record);
  if (record == theta) {
    throw Error(ErrorCode::kIndexError, "desired record has no partition");
  }
  std::vector<MixBlock> blocks;
  size_t offset = 0;
  for (RecordSet type : schedule_.types()) {
    if (Contains(type, theta) || !Contains(type, record)) continue;
    const size_t width = params_.TypeCount(std::popcount(type));
    blocks.push_back({type, offset, width});
    offset += width;
  }
  if (offset != params_.ell) {
    throw Error(ErrorCode::kInternalError, "mixing partition width != ell");
  }
  return blocks;
}

MixState Scheme::SampleMixState(size_t theta, Rng& rng) const {
  CheckTheta(theta);
  MixState mix{theta, SampleFullRank(field_, params_.L, params_.L, rng), {}};
  mix.undesired.reserve(params_.M());
  for (size_t i = 0; i < params_.M(); ++i) {
    if (i == theta) {
      mix.undesired.emplace_back(field_, 0, 0);
    } else {
      mix.undesired.push_back(
          SampleFullRank(field_, params_.L, params_.ell, rng));
    }
  }
  return mix;
}

FieldMatrix Scheme::RecordTransform(const MixState& mix, size_t record) const {
  CheckTheta(mix.theta);
  CheckTheta(record);
  const size_t L = params_.L;
  if (record == mix.theta) return mix.desired;

  const FieldMatrix& mixer = mix.undesired.at(record);
  if (mixer.rows() != L || mixer.cols() != params_.ell) {
    throw Error(ErrorCode::kShapeError, "undesired mixer must be L x ell");
  }
  FieldMatrix transform(field_, L, L);
  auto place = [&](size_t coordinate, const FieldMatrix& source, size_t col) {
    for (size_t r = 0; r < L; ++r) transform(r, coordinate) = source(r, col);
  };
  for (const MixBlock& block : MixingPartition(record, mix.theta)) {
    const FieldMatrix info = mixer.Block(0, block.offset, L, block.width);
    const auto& info_slots = schedule_.TypeSlots(block.type);
    for (size_t m = 0; m < info_slots.size(); ++m) {
      place(schedule_.slots()[info_slots[m]].SymbolFor(record), info, m);
    }
    const size_t k = std::popcount(block.type);
    const FieldMatrix parity = MatMul(info, Code(k).parity());
    const RecordSet with_theta = block.type | (RecordSet{1} << mix.theta);
    const auto& parity_slots = schedule_.TypeSlots(with_theta);
    for (size_t m = 0; m < parity_slots.size(); ++m) {
      place(schedule_.slots()[parity_slots[m]].SymbolFor(record), parity, m);
    }
  }
  return transform;
}

QuerySet Scheme::BuildQueries(const MixState& mix) const {
  CheckTheta(mix.theta);
  const size_t L = params_.L;
  const size_t M = params_.M();
  std::vector<FieldMatrix> transforms;
  transforms.reserve(M);
  for (size_t nu = 0; nu < M; ++nu) transforms.push_back(RecordTransform(mix, nu));

  QuerySet qs{mix.theta, {}, mix};
  qs.server_queries.reserve(params_.N());
  for (size_t server = 0; server < params_.N(); ++server) {
    const auto& ids = schedule_.ServerSlots(server);
    FieldMatrix q(field_, M * L, ids.size());
    for (size_t c = 0; c < ids.size(); ++c) {
      for (const auto& [nu, coordinate] : schedule_.slots()[ids[c]].symbols) {
        for (size_t r = 0; r < L; ++r) {
          q(nu * L + r, c) = transforms[nu](r, coordinate);
        }
      }
    }
    qs.server_queries.push_back(std::move(q));
  }
  return qs;
}

QuerySet Scheme::GenerateQueries(size_t theta, Rng& rng) const {
  return BuildQueries(SampleMixState(theta, rng));
}

FieldMatrix Scheme::ExpandedGenerator(size_t record, size_t theta) const {
  FieldMatrix g(field_, params_.ell, params_.L);
  for (const MixBlock& block : MixingPartition(record, theta)) {
    const auto& info_slots = schedule_.TypeSlots(block.type);
    for (size_t m = 0; m < info_slots.size(); ++m) {
      g(block.offset + m, schedule_.slots()[info_slots[m]].SymbolFor(record)) = 1;
    }
    const FieldMatrix& parity = Code(std::popcount(block.type)).parity();
    const RecordSet with_theta = block.type | (RecordSet{1} << theta);
    const auto& parity_slots = schedule_.TypeSlots(with_theta);
    for (size_t m = 0; m < parity_slots.size(); ++m) {
      const size_t coordinate =
          schedule_.slots()[parity_slots[m]].SymbolFor(record);
      for (size_t r = 0; r < block.width; ++r) {
        g(block.offset + r, coordinate) = parity(r, m);
      }
    }
  }
  return g;
}

FieldMatrix Scheme::BlockDiagonalGenerator() const {
  FieldMatrix g(field_, params_.ell, params_.L);
  size_t row = 0;
  size_t col = 0;
  const size_t M = params_.M();
  for (size_t k = 1; k < M; ++k) {
    const FieldMatrix& gk = Code(k).generator();
    for (uint64_t copy = 0; copy < Binomial(M - 2, k - 1); ++copy) {
      for (size_t r = 0; r < gk.rows(); ++r) {
        for (size_t c = 0; c < gk.cols(); ++c) g(row + r, col + c) = gk(r, c);
      }
      row += gk.rows();
      col += gk.cols();
    }
  }
  if (row != params_.ell || col != params_.L) {
    throw Error(ErrorCode::kInternalError, "block diagonal generator shape");
  }
  return g;
}

std::vector<size_t> Scheme::GeneratorPermutation(size_t record,
                                                 size_t theta) const {
  std::vector<size_t> perm;
  perm.reserve(params_.L);
  for (const MixBlock& block : MixingPartition(record, theta)) {
    for (size_t id : schedule_.TypeSlots(block.type)) {
      perm.push_back(schedule_.slots()[id].SymbolFor(record));
    }
    const RecordSet with_theta = block.type | (RecordSet{1} << theta);
    for (size_t id : schedule_.TypeSlots(with_theta)) {
      perm.push_back(schedule_.slots()[id].SymbolFor(record));
    }
  }
  return perm;
}

FieldMatrix Scheme::Decode(const MixState& mix,
                           std::span<const FieldMatrix> answers) const {
  CheckTheta(mix.theta);
  const size_t theta = mix.theta;
  const size_t L = params_.L;
  if (answers.size() != params_.N()) {
    throw Error(ErrorCode::kShapeError, "need one answer per server");
  }
  const size_t b = answers.front().cols();
  for (size_t j = 0; j < answers.size(); ++j) {
    if (answers[j].rows() != params_.Gamma(j) || answers[j].cols() != b ||
        !(answers[j].field() == field_)) {
      throw Error(ErrorCode::kShapeError,
                  "answer of server " + std::to_string(j) +
                      " has inconsistent shape");
    }
  }
  if (mix.desired.rows() != L || mix.desired.cols() != L) {
    throw Error(ErrorCode::kShapeError, "desired mixer must be L x L");
  }

  const auto& slots = schedule_.slots();
  auto received = [&](size_t id, size_t stripe) {
    return answers[slots[id].server](schedule_.ColumnOf(id), stripe);
  };

  // Rows of `mixed` are coordinates of U_theta, columns are stripes.
  FieldMatrix mixed(field_, L, b);
  std::vector<bool> filled(L, false);
  auto store = [&](size_t coordinate, size_t stripe, uint64_t value) {
    mixed(coordinate, stripe) = value;
    filled[coordinate] = true;
  };

  const RecordSet theta_bit = RecordSet{1} << theta;
  for (size_t s = 0; s < b; ++s) {
    for (size_t id : schedule_.TypeSlots(theta_bit)) {
      store(slots[id].SymbolFor(theta), s, received(id, s));
    }
    for (RecordSet type : schedule_.types()) {
      if (Contains(type, theta)) continue;
      const auto& info_slots = schedule_.TypeSlots(type);
      std::vector<uint64_t> info(info_slots.size());
      for (size_t m = 0; m < info_slots.size(); ++m) {
        info[m] = received(info_slots[m], s);
      }
      const std::vector<uint64_t> predicted =
          Code(std::popcount(type)).Parity(info);
      const auto& mixed_slots = schedule_.TypeSlots(type | theta_bit);
      for (size_t m = 0; m < mixed_slots.size(); ++m) {
        store(slots[mixed_slots[m]].SymbolFor(theta), s,
              field_.Sub(received(mixed_slots[m], s), predicted[m]));
      }
    }
  }
  if (!std::all_of(filled.begin(), filled.end(), [](bool f) { return f; })) {
    throw Error(ErrorCode::kInternalError, "desired coordinates left unfilled");
  }
  // U = S^T W per stripe, so W = (S^-1)^T U.
  return MatMul(Invert(mix.desired).Transpose(), mixed);
}

}  // namespace optpir
