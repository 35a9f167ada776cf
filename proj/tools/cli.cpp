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

#include "cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optpir/db_file.hpp"
#include "optpir/error.hpp"
#include "optpir/net.hpp"
#include "optpir/params.hpp"
#include "optpir/scheme.hpp"
#include "optpir/verify.hpp"

namespace optpir::cli {
namespace {

// Flags shared by most subcommands. Indices are 1-based on the command line.
struct Options {
  std::optional<uint32_t> N, T, M;
  std::optional<uint64_t> q;
  std::optional<uint64_t> seed;
  std::string grid;
  bool machine = false;
  uint32_t stripes = 1;
  std::string db;
  std::string out;
  std::string listen;
  std::vector<std::string> connect;
  std::optional<uint32_t> theta;
  std::optional<uint32_t> index;
  std::optional<uint64_t> trials;
  std::string mode = "statistical";
  std::vector<uint32_t> coalition;
  bool control = false;
  uint64_t timeout_ms = 10000;
};

Error Invalid(const std::string& what) {
  return Error(ErrorCode::kInvalidConfig, what);
}

void AddConfigFlags(CLI::App* cmd, Options& o, bool allow_grid) {
  cmd->add_option("--N", o.N, "number of servers");
  cmd->add_option("--T", o.T, "collusion threshold");
  cmd->add_option("--M", o.M, "number of records");
  if (allow_grid) {
    cmd->add_option("--grid", o.grid, "named config grid (only 'default')");
  }
}

void AddOutputFlag(CLI::App* cmd, Options& o) {
  cmd->add_flag("--machine", o.machine, "line-oriented output");
}

std::optional<SchemeConfig> SingleConfig(const Options& o) {
  const int given = o.N.has_value() + o.T.has_value() + o.M.has_value();
  if (given == 0) return std::nullopt;
  if (given != 3) throw Invalid("--N, --T and --M must be given together");
  SchemeConfig c{*o.N, *o.T, *o.M};
  c.Validate();
  return c;
}

SchemeConfig RequireConfig(const Options& o) {
  auto c = SingleConfig(o);
  if (!c) throw Invalid("--N, --T and --M are required");
  return *c;
}

// An explicit config, or the grid when --grid default is given or nothing is.
std::vector<SchemeConfig> Configs(const Options& o) {
  if (!o.grid.empty()) {
    if (o.grid != "default") throw Invalid("unknown grid '" + o.grid + "'");
    if (SingleConfig(o)) throw Invalid("--grid conflicts with --N/--T/--M");
    return DefaultGrid();
  }
  if (auto c = SingleConfig(o)) return {*c};
  return DefaultGrid();
}

uint64_t FieldFor(const Options& o, const SchemeParams& p) {
  if (!o.q) return p.q_min;
  ValidateFieldSize(p, *o.q);
  return *o.q;
}

uint64_t SeedOr(const Options& o, uint64_t fallback) {
  return o.seed.value_or(fallback);
}

uint64_t FreshSeed() {
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

size_t ZeroBased(uint32_t one_based, uint64_t count, const char* what) {
  if (one_based < 1 || one_based > count) {
    throw Error(ErrorCode::kIndexError, std::string(what) + " " +
                                            std::to_string(one_based) +
                                            " outside 1.." +
                                            std::to_string(count));
  }
  return one_based - 1;
}

std::string Join(const std::vector<uint64_t>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

int CmdParams(const Options& o, std::ostream& out) {
  const auto configs = Configs(o);
  const auto rows = ComparisonTable(configs);
  if (o.machine) {
    out << FormatComparisonMachine(rows);
  } else {
    out << FormatComparisonText(rows);
  }
  if (configs.size() != 1) return kExitOk;

  const SchemeParams p = DeriveParams(configs.front());
  if (o.machine) {
    out << "alpha," << Join(p.alpha) << "\nbeta," << Join(p.beta)
        << "\nell," << p.ell << "\ngamma," << p.gamma_a << ',' << p.gamma_b
        << "\ncapacity," << Capacity(p.config).ToString() << '\n';
    return kExitOk;
  }
  out << "\nd=" << p.d << " n=" << p.n << " t=" << p.t << " ell=" << p.ell
      << '\n'
      << "alpha (servers 1.." << p.T() << "):  " << Join(p.alpha) << '\n'
      << "beta  (servers " << p.T() + 1 << ".." << p.N() << "):  "
      << Join(p.beta) << '\n'
      << "answers per server: " << p.gamma_a << " / " << p.gamma_b << '\n'
      << "capacity: " << Capacity(p.config).ToString() << '\n';
  return kExitOk;
}

int CmdGendb(const Options& o, std::ostream& out, std::ostream& err) {
  const SchemeParams p = DeriveParams(RequireConfig(o));
  const uint64_t q = FieldFor(o, p);
  if (o.stripes == 0) throw Invalid("--stripes must be positive");
  uint64_t seed = 0;
  if (o.seed) {
    seed = *o.seed;
  } else {
    seed = FreshSeed();
    err << "seed " << seed << '\n';
  }
  Rng rng(seed);
  const PrimeField field(q);
  const Database db = Database::Random(field, p.M(), p.L, o.stripes, rng);
  WriteDb(o.out, db);
  const uint64_t bytes = kDbHeaderBytes + 8 * p.M() * p.L * o.stripes;
  if (o.machine) {
    out << "gendb," << o.out << ',' << q << ',' << p.M() << ',' << p.L << ','
        << o.stripes << ',' << bytes << '\n';
  } else {
    out << "wrote " << o.out << ": q=" << q << " M=" << p.M() << " L=" << p.L
        << " b=" << o.stripes << " (" << bytes << " bytes)\n";
  }
  return kExitOk;
}

int CmdServe(const Options& o, std::ostream& out) {
  const SchemeParams p = DeriveParams(RequireConfig(o));
  Database db = ReadDb(o.db);
  ValidateFieldSize(p, db.field().modulus());
  if (o.q && *o.q != db.field().modulus()) {
    throw Invalid("--q " + std::to_string(*o.q) + " does not match the database");
  }
  const size_t index = ZeroBased(*o.index, p.N(), "--index");
  const Endpoint at = ParseEndpoint(o.listen);

  Server server(std::move(db), p, index);
  server.Listen(at.host, at.port);

  // Worker threads inherit the mask, so only sigwait below sees the signals.
  sigset_t stop_signals, previous;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, &previous);
  server.Start();
  out << "server " << index + 1 << " listening on " << at.host << ':'
      << server.port() << std::endl;
  int received = 0;
  sigwait(&stop_signals, &received);
  server.Stop();
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  out << "server " << index + 1 << " stopped" << std::endl;
  return kExitOk;
}

int CmdRetrieve(const Options& o, std::ostream& out) {
  const SchemeConfig config = RequireConfig(o);
  const SchemeParams p = DeriveParams(config);
  const Scheme scheme(config, FieldFor(o, p));
  const size_t theta = ZeroBased(*o.theta, p.M(), "--theta");
  if (o.stripes == 0) throw Invalid("--stripes must be positive");
  std::vector<Endpoint> endpoints;
  for (const auto& text : o.connect) endpoints.push_back(ParseEndpoint(text));

  Rng rng(o.seed ? *o.seed : FreshSeed());
  const Retrieval r =
      ClientRetrieve(scheme, endpoints, o.stripes, theta, rng,
                     std::chrono::milliseconds(o.timeout_ms));
  WriteFileBytes(o.out, SerializeRecord(r.record));
  const Rational rate(p.L * o.stripes, r.downloaded_symbols);
  if (o.machine) {
    out << "retrieve," << theta + 1 << ',' << r.downloaded_symbols << ','
        << rate.ToString() << '\n';
  } else {
    out << "record " << theta + 1 << " -> " << o.out << '\n'
        << "downloaded " << r.downloaded_symbols << " symbols\n"
        << "rate " << rate.ToString() << '\n';
  }
  return kExitOk;
}

int CmdSimulate(const Options& o, std::ostream& out) {
  const uint64_t seed = SeedOr(o, 1);
  const uint64_t trials = o.trials.value_or(10);
  if (o.stripes == 0) throw Invalid("--stripes must be positive");
  bool all_ok = true;
  if (!o.machine) {
    out << std::left << std::setw(16) << "config" << std::setw(8) << "q"
        << std::setw(12) << "retrievals" << std::setw(10) << "failures"
        << std::setw(12) << "downloaded" << "rate\n";
  }
  for (const SchemeConfig& config : Configs(o)) {
    const SchemeParams p = DeriveParams(config);
    const Scheme scheme(config, FieldFor(o, p));
    Rng db_rng({seed, 0xDB});
    const Database db =
        Database::Random(scheme.field(), p.M(), p.L, o.stripes, db_rng);
    uint64_t runs = 0, failures = 0, downloaded = 0;
    for (size_t theta = 0; theta < p.M(); ++theta) {
      for (uint64_t t = 0; t < trials; ++t) {
        Rng rng({seed, theta, t});
        const Retrieval r = RetrieveInProcess(scheme, db, theta, rng);
        ++runs;
        if (!(r.record == db.record(theta))) ++failures;
        downloaded = r.downloaded_symbols;
      }
    }
    all_ok = all_ok && failures == 0;
    const Rational rate(p.L * o.stripes, downloaded);
    if (o.machine) {
      out << "simulate," << config.num_servers << ',' << config.collusion << ','
          << config.num_records << ',' << scheme.field().modulus() << ','
          << runs << ',' << failures << ',' << downloaded << ','
          << rate.ToString() << '\n';
    } else {
      out << std::setw(16) << config.ToString() << std::setw(8)
          << scheme.field().modulus() << std::setw(12) << runs << std::setw(10)
          << failures << std::setw(12) << downloaded << rate.ToString() << '\n';
    }
  }
  return all_ok ? kExitOk : kExitVerification;
}

int VerifyRanks(const Options& o, std::ostream& out) {
  const uint64_t seed = SeedOr(o, 1);
  const uint64_t trials = o.trials.value_or(50);
  bool all_ok = true;
  if (!o.machine) {
    out << std::left << std::setw(16) << "config" << std::setw(8) << "sets"
        << std::setw(10) << "failures" << std::setw(8) << "L"
        << std::setw(10) << "TL/N" << std::setw(8) << "D-L" << "result\n";
  }
  for (const SchemeConfig& config : Configs(o)) {
    const SchemeParams p = DeriveParams(config);
    const Scheme scheme(config, FieldFor(o, p));
    uint64_t sets = 0, failures = 0;
    std::string first_failure;
    RankAudit sample;
    for (size_t theta = 0; theta < p.M(); ++theta) {
      for (uint64_t t = 0; t < trials; ++t) {
        Rng rng({seed, theta, t});
        RankAudit audit = AuditRanks(scheme, scheme.GenerateQueries(theta, rng));
        ++sets;
        if (!audit.pass) {
          if (failures++ == 0) first_failure = audit.ToText();
        }
        sample = std::move(audit);
      }
    }
    all_ok = all_ok && failures == 0;
    const char* verdict = failures == 0 ? "pass" : "fail";
    if (o.machine) {
      out << "ranks," << config.num_servers << ',' << config.collusion << ','
          << config.num_records << ',' << sets << ',' << failures << ','
          << sample.expected_full << ',' << sample.expected_desired << ','
          << sample.expected_undesired << ',' << verdict << '\n';
    } else {
      out << std::setw(16) << config.ToString() << std::setw(8) << sets
          << std::setw(10) << failures << std::setw(8) << sample.expected_full
          << std::setw(10) << sample.expected_desired << std::setw(8)
          << sample.expected_undesired << (failures == 0 ? "PASS" : "FAIL")
          << '\n';
      if (!first_failure.empty()) out << first_failure;
    }
  }
  return all_ok ? kExitOk : kExitVerification;
}

std::vector<std::vector<size_t>> CoalitionsFor(const Options& o,
                                               const SchemeParams& p) {
  if (!o.coalition.empty()) {
    std::vector<size_t> c;
    for (uint32_t j : o.coalition) c.push_back(ZeroBased(j, p.N(), "server"));
    return {c};
  }
  std::vector<std::vector<size_t>> all;
  for (size_t size = 1; size <= p.T(); ++size) {
    for (auto& c : Combinations(p.N(), size)) all.push_back(std::move(c));
  }
  return all;
}

int VerifyPrivacy(const Options& o, std::ostream& out) {
  PrivacyMode mode;
  if (o.mode == "exhaustive") {
    mode = PrivacyMode::kExhaustive;
  } else if (o.mode == "statistical") {
    mode = PrivacyMode::kStatistical;
  } else {
    throw Invalid("--mode must be exhaustive or statistical");
  }
  const uint64_t seed = SeedOr(o, 1);
  const uint64_t trials = o.trials.value_or(10000);

  bool all_ok = true;
  for (const SchemeConfig& config : Configs(o)) {
    const SchemeParams p = DeriveParams(config);
    const uint64_t q = FieldFor(o, p);
    auto run = [&](const std::vector<size_t>& coalition, QueryVariant variant) {
      PrivacyReport r =
          mode == PrivacyMode::kExhaustive
              ? PrivacyExhaustive(config, q, coalition, variant)
              : PrivacyStatistical(config, q, coalition, trials, seed, variant);
      out << (o.machine ? r.ToMachine() : r.ToText());
      return r;
    };
    for (const auto& coalition : CoalitionsFor(o, p)) {
      all_ok = run(coalition, QueryVariant::kPrivate).pass && all_ok;
    }
    if (!o.control) continue;

    // The test must be able to see a leak: unmixed queries have to fail for
    // some coalition, and all N servers together must see theta.
    bool unmixed_caught = false;
    for (const auto& coalition : CoalitionsFor(o, p)) {
      unmixed_caught = !run(coalition, QueryVariant::kUnmixed).pass || unmixed_caught;
    }
    std::vector<size_t> everyone(p.N());
    for (size_t j = 0; j < p.N(); ++j) everyone[j] = j;
    const bool full_caught = !run(everyone, QueryVariant::kPrivate).pass;
    const bool detected = unmixed_caught && full_caught;
    out << (o.machine ? "control," : "negative control: ")
        << (detected ? "detected" : "missed") << '\n';
    all_ok = all_ok && detected;
  }
  return all_ok ? kExitOk : kExitVerification;
}

int VerifyRate(const Options& o, std::ostream& out) {
  bool all_ok = true;
  if (!o.machine) {
    out << std::left << std::setw(16) << "config" << std::setw(8) << "L"
        << std::setw(12) << "d n^(M-1)" << std::setw(8) << "D"
        << std::setw(12) << "rate" << std::setw(12) << "capacity"
        << "result\n";
  }
  for (const SchemeConfig& config : Configs(o)) {
    const SchemeParams p = DeriveParams(config);
    const Rational rate = MeasureRate(p, BuildSchedule(p));
    const Rational capacity = Capacity(config);
    const uint64_t optimal = OptimalSubpacketization(config);
    const bool ok = rate == capacity && p.L == optimal;
    all_ok = all_ok && ok;
    if (o.machine) {
      out << "rate," << config.num_servers << ',' << config.collusion << ','
          << config.num_records << ',' << p.L << ',' << optimal << ',' << p.D
          << ',' << rate.ToString() << ',' << capacity.ToString() << ','
          << (ok ? "pass" : "fail") << '\n';
    } else {
      out << std::setw(16) << config.ToString() << std::setw(8) << p.L
          << std::setw(12) << optimal << std::setw(8) << p.D << std::setw(12)
          << rate.ToString() << std::setw(12) << capacity.ToString()
          << (ok ? "PASS" : "FAIL") << '\n';
    }
  }
  return all_ok ? kExitOk : kExitVerification;
}

int VerifyMds(const Options& o, std::ostream& out) {
  const uint64_t seed = SeedOr(o, 1);
  bool all_ok = true;
  if (!o.machine) {
    out << std::left << std::setw(16) << "config" << std::setw(6) << "q"
        << std::setw(4) << "k" << std::setw(8) << "[n,k]" << std::setw(10)
        << "subsets" << std::setw(10) << "singular" << std::setw(10)
        << "roundtrip" << "result\n";
  }
  for (const SchemeConfig& config : Configs(o)) {
    const SchemeParams p = DeriveParams(config);
    const Scheme scheme(config, FieldFor(o, p));
    for (size_t k = 1; k < p.M(); ++k) {
      Rng rng({seed, k});
      const MdsAudit a = AuditMdsCode(scheme.Code(k), rng);
      all_ok = all_ok && a.pass;
      const std::string shape = "[" + std::to_string(a.length) + "," +
                                std::to_string(a.dimension) + "]";
      if (o.machine) {
        out << "mds," << config.num_servers << ',' << config.collusion << ','
            << config.num_records << ',' << scheme.field().modulus() << ','
            << k << ',' << a.length << ',' << a.dimension << ','
            << a.subsets_checked << ',' << a.singular_subsets << ','
            << a.failed_roundtrips << ',' << (a.pass ? "pass" : "fail") << '\n';
      } else {
        out << std::setw(16) << config.ToString() << std::setw(6)
            << scheme.field().modulus() << std::setw(4) << k << std::setw(8)
            << shape << std::setw(10) << a.subsets_checked << std::setw(10)
            << a.singular_subsets << std::setw(10) << a.failed_roundtrips
            << (a.pass ? "PASS" : "FAIL") << '\n';
      }
    }
  }
  return all_ok ? kExitOk : kExitVerification;
}

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kFieldTooSmall:
    case ErrorCode::kIndexError:
    case ErrorCode::kFormatError:
    case ErrorCode::kTooLargeForExhaustive:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Capacity-achieving T-private information retrieval", "optpir"};
  app.require_subcommand(1);
  Options o;

  auto* params = app.add_subcommand("params", "scheme parameters and comparison table");
  AddConfigFlags(params, o, true);
  AddOutputFlag(params, o);

  auto* gendb = app.add_subcommand("gendb", "write a random database file");
  AddConfigFlags(gendb, o, false);
  gendb->add_option("--q", o.q, "field size (default: smallest admissible prime)");
  gendb->add_option("--stripes", o.stripes, "stripes per record")->capture_default_str();
  gendb->add_option("--seed", o.seed, "RNG seed (default: fresh, echoed to stderr)");
  gendb->add_option("--out", o.out, "output path")->required();
  AddOutputFlag(gendb, o);

  auto* serve = app.add_subcommand("serve", "serve one replica until SIGINT/SIGTERM");
  AddConfigFlags(serve, o, false);
  serve->add_option("--q", o.q, "expected field size");
  serve->add_option("--db", o.db, "database file")->required();
  serve->add_option("--listen", o.listen, "host:port (port 0 picks one)")->required();
  serve->add_option("--index", o.index, "server number, 1..N")->required();

  auto* retrieve = app.add_subcommand("retrieve", "privately fetch one record");
  AddConfigFlags(retrieve, o, false);
  retrieve->add_option("--q", o.q, "field size (default: smallest admissible prime)");
  retrieve->add_option("--stripes", o.stripes, "stripes per record")->capture_default_str();
  retrieve->add_option("--connect", o.connect, "server endpoints in server order")
      ->required()
      ->delimiter(',');
  retrieve->add_option("--theta", o.theta, "record number, 1..M")->required();
  retrieve->add_option("--seed", o.seed, "RNG seed (default: fresh)");
  retrieve->add_option("--out", o.out, "output path for the record")->required();
  retrieve->add_option("--timeout-ms", o.timeout_ms, "per-socket timeout")
      ->capture_default_str();
  AddOutputFlag(retrieve, o);

  auto* simulate = app.add_subcommand("simulate", "in-process retrievals");
  AddConfigFlags(simulate, o, true);
  simulate->add_option("--q", o.q, "field size (default: smallest admissible prime)");
  simulate->add_option("--stripes", o.stripes, "stripes per record")->capture_default_str();
  simulate->add_option("--trials", o.trials, "retrievals per record (default 10)");
  simulate->add_option("--seed", o.seed, "RNG seed (default 1)");
  AddOutputFlag(simulate, o);

  auto* verify = app.add_subcommand("verify", "verification suites");
  verify->require_subcommand(1);
  auto* ranks = verify->add_subcommand("ranks", "rank invariants of generated queries");
  auto* privacy = verify->add_subcommand("privacy", "coalition view distributions");
  auto* rate = verify->add_subcommand("rate", "rate and sub-packetization");
  auto* mds = verify->add_subcommand("mds", "MDS property of every code");
  for (auto* cmd : {ranks, privacy, rate, mds}) {
    AddConfigFlags(cmd, o, true);
    AddOutputFlag(cmd, o);
  }
  for (auto* cmd : {ranks, privacy, mds}) {
    cmd->add_option("--q", o.q, "field size (default: smallest admissible prime)");
    cmd->add_option("--seed", o.seed, "RNG seed (default 1)");
  }
  ranks->add_option("--trials", o.trials, "query sets per record (default 50)");
  privacy->add_option("--trials", o.trials, "samples per record (default 10000)");
  privacy->add_option("--mode", o.mode, "exhaustive or statistical")
      ->capture_default_str();
  privacy->add_option("--coalition", o.coalition, "server numbers (default: all of size <= T)")
      ->delimiter(',');
  privacy->add_flag("--control", o.control,
                    "also require unmixed queries and the full server set to fail");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*params) return CmdParams(o, out);
    if (*gendb) return CmdGendb(o, out, err);
    if (*serve) return CmdServe(o, out);
    if (*retrieve) return CmdRetrieve(o, out);
    if (*simulate) return CmdSimulate(o, out);
    if (*ranks) return VerifyRanks(o, out);
    if (*privacy) return VerifyPrivacy(o, out);
    if (*rate) return VerifyRate(o, out);
    if (*mds) return VerifyMds(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace optpir::cli
