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

#include "optpir/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <future>

namespace optpir {

namespace {

Frame ErrorFrame(const std::string& message) {
  return Frame{MessageType::kError,
               std::vector<uint8_t>(message.begin(), message.end())};
}

std::string FrameText(const Frame& frame) {
  return std::string(frame.body.begin(), frame.body.end());
}

}  // namespace

Endpoint ParseEndpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "expected host:port, got '" + text + "'");
  }
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || ptr != last || port > 65535) {
    throw Error(ErrorCode::kInvalidConfig, "bad port in '" + text + "'");
  }
  std::string host = text.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') {
    host = host.substr(1, host.size() - 2);
  }
  return Endpoint{host, static_cast<uint16_t>(port)};
}

Server::Server(Database db, const SchemeParams& params, size_t server_index)
    : db_(std::move(db)), params_(params), index_(server_index) {
  if (server_index >= params.N()) {
    throw Error(ErrorCode::kInvalidConfig, "server index out of range");
  }
  if (db_.num_records() != params.M() || db_.L() != params.L) {
    throw Error(ErrorCode::kInvalidConfig,
                "database shape does not match " + params.config.ToString());
  }
  ValidateFieldSize(params, db_.field().modulus());
  hello_ = MakeHello(params, db_.stripes(), db_.field().modulus());
}

Server::~Server() { Stop(); }

void Server::Listen(const std::string& host, uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(),
                             service.c_str(), &hints, &res);
      rc != 0) {
    throw Error(ErrorCode::kIoError,
                "resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last = "no addresses for " + host;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      sockaddr_storage addr{};
      socklen_t len = sizeof(addr);
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
      port_ = addr.ss_family == AF_INET6
                  ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port)
                  : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
      listen_fd_ = fd;
      ::freeaddrinfo(res);
      return;
    }
    last = "bind " + host + ":" + service + ": " + std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw Error(ErrorCode::kIoError, last);
}

void Server::Serve() {
  if (listen_fd_ < 0) throw Error(ErrorCode::kIoError, "server not listening");
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { HandleConnection(fd); });
  }
}

void Server::Start() {
  accept_thread_ = std::thread([this] { Serve(); });
}

void Server::Stop() {
  stopping_ = true;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
}

void Server::ForgetConnection(int fd) {
  std::lock_guard lock(mu_);
  std::erase(open_fds_, fd);
}

void Server::HandleConnection(int fd) {
  Socket sock(fd);
  const size_t rows = params_.M() * params_.L;
  const size_t gamma = params_.Gamma(index_);
  try {
    auto hello = sock.ReceiveFrame();
    if (!hello) {
      ForgetConnection(fd);
      return;
    }
    if (hello->type != MessageType::kHello) {
      throw Error(ErrorCode::kProtocolError, "expected HELLO");
    }
    if (DecodeHello(hello->body) != hello_) {
      throw Error(ErrorCode::kProtocolError, "parameter mismatch");
    }
    sock.SendFrame(Frame{MessageType::kHelloAck,
                         EncodeHelloAck(hello_, static_cast<uint32_t>(index_ + 1))});
    while (auto frame = sock.ReceiveFrame()) {
      if (frame->type != MessageType::kQuery) {
        throw Error(ErrorCode::kProtocolError, "expected QUERY");
      }
      const FieldMatrix query = DecodeQuery(frame->body, db_.field(), rows);
      if (query.cols() != gamma) {
        throw Error(ErrorCode::kProtocolError,
                    "query has " + std::to_string(query.cols()) +
                        " columns, expected " + std::to_string(gamma));
      }
      sock.SendFrame(Frame{MessageType::kAnswer, EncodeAnswer(Answer(db_, query))});
    }
  } catch (const Error& e) {
    try {
      sock.SendFrame(ErrorFrame(e.what()));
    } catch (const Error&) {
      // peer already gone
    }
  }
  ForgetConnection(fd);
}

namespace {

struct Session {
  Socket sock;
  size_t gamma = 0;
};

Session Handshake(const Endpoint& ep, const Hello& hello, size_t index,
                  size_t gamma, std::chrono::milliseconds timeout) {
  Session s{Socket::Connect(ep.host, ep.port, timeout), gamma};
  s.sock.SendFrame(Frame{MessageType::kHello, EncodeHello(hello)});
  auto reply = s.sock.ReceiveFrame();
  if (!reply) throw Error(ErrorCode::kProtocolError, "closed during handshake");
  if (reply->type == MessageType::kError) {
    throw Error(ErrorCode::kProtocolError, "server error: " + FrameText(*reply));
  }
  if (reply->type != MessageType::kHelloAck) {
    throw Error(ErrorCode::kProtocolError, "expected HELLO_ACK");
  }
  const auto [echo, j] = DecodeHelloAck(reply->body);
  if (echo != hello) {
    throw Error(ErrorCode::kProtocolError, "HELLO_ACK parameters differ");
  }
  if (j != index + 1) {
    throw Error(ErrorCode::kProtocolError,
                "endpoint is server " + std::to_string(j) + ", expected " +
                    std::to_string(index + 1));
  }
  return s;
}

FieldMatrix Exchange(Session& s, const FieldMatrix& query,
                     const PrimeField& field, size_t stripes) {
  s.sock.SendFrame(Frame{MessageType::kQuery, EncodeQuery(query)});
  auto reply = s.sock.ReceiveFrame();
  if (!reply) throw Error(ErrorCode::kProtocolError, "closed before ANSWER");
  if (reply->type == MessageType::kError) {
    throw Error(ErrorCode::kProtocolError, "server error: " + FrameText(*reply));
  }
  if (reply->type != MessageType::kAnswer) {
    throw Error(ErrorCode::kProtocolError, "expected ANSWER");
  }
  return DecodeAnswer(reply->body, field, s.gamma, stripes);
}

uint64_t CountSymbols(std::span<const FieldMatrix> answers) {
  uint64_t total = 0;
  for (const auto& a : answers) total += a.rows() * a.cols();
  return total;
}

}  // namespace

Retrieval ClientRetrieve(const Scheme& scheme, std::span<const Endpoint> endpoints,
                         size_t stripes, size_t theta, Rng& rng,
                         std::chrono::milliseconds timeout) {
  const SchemeParams& params = scheme.params();
  if (endpoints.size() != params.N()) {
    throw Error(ErrorCode::kInvalidConfig,
                "need " + std::to_string(params.N()) + " endpoints, got " +
                    std::to_string(endpoints.size()));
  }
  if (theta >= params.M()) {
    throw Error(ErrorCode::kIndexError, "record index out of range");
  }
  if (stripes == 0) throw Error(ErrorCode::kInvalidConfig, "stripes must be positive");
  const Hello hello = MakeHello(params, stripes, scheme.field().modulus());

  std::vector<Session> sessions;
  try {
    for (size_t j = 0; j < endpoints.size(); ++j) {
      sessions.push_back(
          Handshake(endpoints[j], hello, j, params.Gamma(j), timeout));
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::kRetrievalFailed,
                "server " + std::to_string(sessions.size() + 1) + ": " + e.what());
  }

  const QuerySet qs = scheme.GenerateQueries(theta, rng);
  std::vector<std::future<FieldMatrix>> pending;
  for (size_t j = 0; j < sessions.size(); ++j) {
    pending.push_back(std::async(std::launch::async, [&, j] {
      return Exchange(sessions[j], qs.server_queries[j], scheme.field(), stripes);
    }));
  }
  std::vector<FieldMatrix> answers;
  std::string failure;
  for (size_t j = 0; j < pending.size(); ++j) {
    try {
      answers.push_back(pending[j].get());
    } catch (const Error& e) {
      if (failure.empty()) {
        failure = "server " + std::to_string(j + 1) + ": " + e.what();
      }
    }
  }
  if (!failure.empty()) throw Error(ErrorCode::kRetrievalFailed, failure);

  Retrieval out{scheme.Decode(qs.mix, answers), CountSymbols(answers)};
  return out;
}

Retrieval RetrieveInProcess(const Scheme& scheme, const Database& db,
                            size_t theta, Rng& rng) {
  const QuerySet qs = scheme.GenerateQueries(theta, rng);
  const std::vector<FieldMatrix> answers = AnswerAll(db, qs);
  return Retrieval{scheme.Decode(qs.mix, answers), CountSymbols(answers)};
}

}  // namespace optpir
