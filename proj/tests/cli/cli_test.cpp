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

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "optpir/db_file.hpp"

extern char** environ;

namespace optpir::cli {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    char tmpl[] = "/tmp/optpir-cli-XXXXXX";
    path_ = mkdtemp(tmpl);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

TEST(Params, SingleConfigRows) {
  CliRun r = Cli({"params", "--N", "3", "--T", "2", "--M", "3", "--machine"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\n3,2,3,9,19,9/19,7,"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("alpha,1 1 0\nbeta,2 0 1\n"), std::string::npos) << r.out;

  r = Cli({"params", "--N", "3", "--T", "2", "--M", "2", "--machine"});
  EXPECT_NE(r.out.find("\n3,2,2,3,5,3/5,"), std::string::npos) << r.out;

  r = Cli({"params", "--N", "3", "--T", "2", "--M", "3"});
  EXPECT_NE(r.out.find("9/19"), std::string::npos);
  EXPECT_NE(r.out.find("capacity: 9/19"), std::string::npos);
}

TEST(Params, GridIsDefault) {
  const CliRun a = Cli({"params", "--machine"});
  const CliRun b = Cli({"params", "--grid", "default", "--machine"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 8);
}

TEST(Params, ValidationErrors) {
  EXPECT_EQ(Cli({"params", "--N", "2", "--T", "2", "--M", "2"}).code, kExitValidation);
  EXPECT_EQ(Cli({"params", "--N", "3", "--T", "2"}).code, kExitValidation);
  EXPECT_EQ(Cli({"params", "--grid", "huge"}).code, kExitValidation);
  EXPECT_EQ(Cli({"params", "--bogus"}).code, kExitValidation);
  EXPECT_EQ(Cli({}).code, kExitValidation);
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST(Gendb, DeterministicAndSized) {
  TempDir dir;
  const std::vector<std::string> base = {"gendb", "--N", "3", "--T", "2", "--M",
                                         "3", "--stripes", "2", "--seed", "11"};
  auto with_out = [&](const std::string& path) {
    auto args = base;
    args.insert(args.end(), {"--out", path});
    return args;
  };
  ASSERT_EQ(Cli(with_out(dir / "a.db")).code, kExitOk);
  ASSERT_EQ(Cli(with_out(dir / "b.db")).code, kExitOk);
  EXPECT_EQ(ReadFileBytes(dir / "a.db"), ReadFileBytes(dir / "b.db"));
  EXPECT_EQ(fs::file_size(dir / "a.db"), kDbHeaderBytes + 8u * 3 * 9 * 2);
  const Database db = ReadDb(dir / "a.db");
  EXPECT_EQ(db.field().modulus(), 7u);
}

TEST(Gendb, RejectsSmallOrCompositeField) {
  TempDir dir;
  EXPECT_EQ(Cli({"gendb", "--N", "3", "--T", "2", "--M", "3", "--q", "5",
                 "--seed", "1", "--out", dir / "x.db"})
                .code,
            kExitValidation);
  EXPECT_EQ(Cli({"gendb", "--N", "3", "--T", "2", "--M", "3", "--q", "9",
                 "--seed", "1", "--out", dir / "x.db"})
                .code,
            kExitValidation);
  EXPECT_FALSE(fs::exists(dir / "x.db"));
  EXPECT_EQ(Cli({"gendb", "--N", "3", "--T", "2", "--M", "3", "--q", "11",
                 "--seed", "1", "--out", dir / "y.db"})
                .code,
            kExitOk);
}

TEST(Verify, RateOverGrid) {
  const CliRun r = Cli({"verify", "rate", "--grid", "default", "--machine"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("rate,3,2,2,3,3,5,3/5,3/5,pass"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("fail"), std::string::npos);
}

TEST(Verify, ExhaustivePrivacy) {
  const CliRun r = Cli({"verify", "privacy", "--N", "2", "--T", "1", "--M", "2",
                     "--q", "2", "--mode", "exhaustive", "--machine", "--control"});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
  EXPECT_NE(r.out.find("privacy,exhaustive,2,1,2,2,1,private,18,0,9,0,0,pass"),
            std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("control,detected"), std::string::npos);
}

TEST(Verify, PrivacyFailureExitsThree) {
  const CliRun r = Cli({"verify", "privacy", "--N", "2", "--T", "1", "--M", "2",
                     "--q", "2", "--mode", "exhaustive", "--coalition", "1,2"});
  EXPECT_EQ(r.code, kExitVerification) << r.out;
}

TEST(Verify, PrivacyInputErrors) {
  EXPECT_EQ(Cli({"verify", "privacy", "--N", "3", "--T", "2", "--M", "3",
                 "--mode", "exhaustive"})
                .code,
            kExitValidation);
  EXPECT_EQ(Cli({"verify", "privacy", "--N", "2", "--T", "1", "--M", "2",
                 "--mode", "guess"})
                .code,
            kExitValidation);
  EXPECT_EQ(Cli({"verify", "privacy", "--N", "2", "--T", "1", "--M", "2",
                 "--coalition", "3"})
                .code,
            kExitValidation);
}

TEST(Verify, Ranks) {
  const CliRun r = Cli({"verify", "ranks", "--N", "3", "--T", "2", "--M", "3",
                     "--trials", "50", "--machine"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "ranks,3,2,3,150,0,9,6,10,pass\n");
}

TEST(Verify, MdsAndSimulate) {
  EXPECT_EQ(Cli({"verify", "mds"}).code, kExitOk);
  const CliRun s = Cli({"simulate", "--trials", "3", "--stripes", "2", "--machine"});
  EXPECT_EQ(s.code, kExitOk) << s.out;
  EXPECT_NE(s.out.find("simulate,3,2,3,7,9,0,38,9/19"), std::string::npos) << s.out;
}

TEST(Verify, DeterministicGivenSeed) {
  const std::vector<std::string> args = {"verify", "privacy", "--N", "3", "--T",
                                         "2", "--M", "2", "--trials", "1000",
                                         "--seed", "4", "--machine"};
  EXPECT_EQ(Cli(args).out, Cli(args).out);
}

// A server process started from the real binary.
class ServeProcess {
 public:
  ServeProcess(const std::string& db, int index) {
    int fds[2];
    EXPECT_EQ(pipe2(fds, O_CLOEXEC), 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    const std::string j = std::to_string(index);
    std::vector<std::string> args = {OPTPIR_CLI_PATH, "serve", "--N", "3", "--T",
                                     "2", "--M", "2", "--db", db, "--index", j,
                                     "--listen", "127.0.0.1:0"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    EXPECT_EQ(posix_spawn(&pid_, OPTPIR_CLI_PATH, &actions, nullptr, argv.data(),
                          environ),
              0);
    posix_spawn_file_actions_destroy(&actions);
    close(fds[1]);
    out_ = fdopen(fds[0], "r");
    char line[256] = {};
    if (fgets(line, sizeof line, out_) != nullptr) {
      const std::string text(line);
      endpoint_ = text.substr(text.rfind(' ') + 1);
      endpoint_.erase(endpoint_.find_last_not_of("\n") + 1);
    }
  }
  ~ServeProcess() { Stop(); }

  const std::string& endpoint() const { return endpoint_; }

  int Stop() {
    if (pid_ <= 0) return status_;
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    fclose(out_);
    status_ = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return status_;
  }

 private:
  pid_t pid_ = -1;
  FILE* out_ = nullptr;
  std::string endpoint_;
  int status_ = -1;
};

TEST(ServeRetrieve, ThreeProcessesEndToEnd) {
  TempDir dir;
  ASSERT_EQ(Cli({"gendb", "--N", "3", "--T", "2", "--M", "2", "--stripes", "4",
                 "--seed", "5", "--out", dir / "db"})
                .code,
            kExitOk);
  const Database db = ReadDb(dir / "db");
  ServeProcess s1(dir / "db", 1), s2(dir / "db", 2), s3(dir / "db", 3);
  ASSERT_FALSE(s3.endpoint().empty());
  const std::string endpoints =
      s1.endpoint() + "," + s2.endpoint() + "," + s3.endpoint();

  for (int theta : {1, 2}) {
    const std::string out = dir / ("rec" + std::to_string(theta));
    const CliRun r = Cli({"retrieve", "--N", "3", "--T", "2", "--M", "2",
                       "--stripes", "4", "--connect", endpoints, "--theta",
                       std::to_string(theta), "--seed", "8", "--out", out});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("downloaded 20 symbols"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("rate 3/5"), std::string::npos) << r.out;
    EXPECT_EQ(ReadFileBytes(out), SerializeRecord(db.record(theta - 1)));
  }

  // Wrong stripe count: every server rejects the handshake.
  EXPECT_EQ(Cli({"retrieve", "--N", "3", "--T", "2", "--M", "2", "--connect",
                 endpoints, "--theta", "1", "--out", dir / "bad"})
                .code,
            kExitRuntime);

  EXPECT_EQ(s3.Stop(), 0);
  const CliRun down = Cli({"retrieve", "--N", "3", "--T", "2", "--M", "2",
                        "--stripes", "4", "--connect", endpoints, "--theta", "1",
                        "--out", dir / "rec3"});
  EXPECT_EQ(down.code, kExitRuntime);
  EXPECT_NE(down.err.find("server 3"), std::string::npos) << down.err;
  EXPECT_EQ(s1.Stop(), 0);
  EXPECT_EQ(s2.Stop(), 0);
}

TEST(ServeRetrieve, InputErrors) {
  TempDir dir;
  ASSERT_EQ(Cli({"gendb", "--N", "3", "--T", "2", "--M", "2", "--seed", "5",
                 "--out", dir / "db"})
                .code,
            kExitOk);
  EXPECT_EQ(Cli({"serve", "--N", "3", "--T", "2", "--M", "2", "--db", dir / "db",
                 "--index", "4", "--listen", "127.0.0.1:0"})
                .code,
            kExitValidation);
  EXPECT_EQ(Cli({"serve", "--N", "3", "--T", "2", "--M", "3", "--db", dir / "db",
                 "--index", "1", "--listen", "127.0.0.1:0"})
                .code,
            kExitValidation);
  EXPECT_EQ(Cli({"serve", "--N", "3", "--T", "2", "--M", "2", "--db",
                 dir / "missing", "--index", "1", "--listen", "127.0.0.1:0"})
                .code,
            kExitRuntime);
  EXPECT_EQ(Cli({"retrieve", "--N", "3", "--T", "2", "--M", "2", "--connect",
                 "127.0.0.1:1,127.0.0.1:2", "--theta", "1", "--out", dir / "r"})
                .code,
            kExitValidation);
  EXPECT_EQ(Cli({"retrieve", "--N", "3", "--T", "2", "--M", "2", "--connect",
                 "a:1,b:2,c:3", "--theta", "3", "--out", dir / "r"})
                .code,
            kExitValidation);
}

}  // namespace
}  // namespace optpir::cli
