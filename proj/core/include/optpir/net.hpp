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

// PIR server daemon and retrieval client over the wire protocol.

#ifndef OPTPIR_NET_HPP_
#define OPTPIR_NET_HPP_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "optpir/params.hpp"
#include "optpir/scheme.hpp"
#include "optpir/wire.hpp"

namespace optpir {

struct Endpoint {
  std::string host;
  uint16_t port = 0;
};

// "host:port"; throws kInvalidConfig on malformed input.
Endpoint ParseEndpoint(const std::string& text);

// Serves one replica. Every connection runs on its own thread against the
// shared read-only database. The answer path sees only the query matrix.
class Server {
 public:
  // `server_index` is 0-based. Throws kInvalidConfig if the database does
  // not match `params`.
  Server(Database db, const SchemeParams& params, size_t server_index);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens. Port 0 picks an ephemeral port.
  void Listen(const std::string& host, uint16_t port);
  uint16_t port() const { return port_; }

  // Blocks until Stop().
  void Serve();
  // Serve() on a background thread.
  void Start();
  void Stop();

 private:
  void HandleConnection(int fd);
  void ForgetConnection(int fd);

  Database db_;
  SchemeParams params_;
  size_t index_;
  Hello hello_;

  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;

  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> open_fds_;
};

struct Retrieval {
  FieldMatrix record;               // L x b
  uint64_t downloaded_symbols = 0;  // answer elements received
};

// Connects to all N servers (endpoints[j] must be server j), sends one query
// set and decodes. Any unreachable or inconsistent server gives
// kRetrievalFailed.
Retrieval ClientRetrieve(const Scheme& scheme, std::span<const Endpoint> endpoints,
                         size_t stripes, size_t theta, Rng& rng,
                         std::chrono::milliseconds timeout =
                             std::chrono::milliseconds(10000));

// Same pipeline with no sockets. Consumes `rng` identically.
Retrieval RetrieveInProcess(const Scheme& scheme, const Database& db,
                            size_t theta, Rng& rng);

}  // namespace optpir

#endif  // OPTPIR_NET_HPP_
