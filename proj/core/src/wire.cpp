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

#include "optpir/wire.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

#include "bytes.hpp"

namespace optpir {

using internal::ByteReader;
using internal::PutU32LE;
using internal::PutU64LE;

namespace {

void PutHello(std::vector<uint8_t>& out, const Hello& h) {
  PutU32LE(out, h.version);
  PutU32LE(out, h.num_servers);
  PutU32LE(out, h.collusion);
  PutU32LE(out, h.num_records);
  PutU32LE(out, h.L);
  PutU32LE(out, h.stripes);
  PutU64LE(out, h.q);
}

Hello ReadHello(ByteReader& in) {
  Hello h;
  h.version = in.U32();
  h.num_servers = in.U32();
  h.collusion = in.U32();
  h.num_records = in.U32();
  h.L = in.U32();
  h.stripes = in.U32();
  h.q = in.U64();
  return h;
}

void ExpectConsumed(const ByteReader& in) {
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kFormatError, "trailing bytes in message body");
  }
}

uint64_t ReadElement(ByteReader& in, const PrimeField& field) {
  const uint64_t v = in.U64();
  if (v >= field.modulus()) {
    throw Error(ErrorCode::kFormatError,
                "element " + std::to_string(v) + " is not below q");
  }
  return v;
}

std::string ErrnoText(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

Hello MakeHello(const SchemeParams& params, size_t stripes, uint64_t q) {
  Hello h;
  h.num_servers = static_cast<uint32_t>(params.N());
  h.collusion = static_cast<uint32_t>(params.T());
  h.num_records = static_cast<uint32_t>(params.M());
  h.L = static_cast<uint32_t>(params.L);
  h.stripes = static_cast<uint32_t>(stripes);
  h.q = q;
  return h;
}

std::vector<uint8_t> EncodeFrame(const Frame& frame) {
  if (frame.body.size() > kMaxFrameBody) {
    throw Error(ErrorCode::kProtocolError, "frame body too large");
  }
  const auto n = static_cast<uint32_t>(frame.body.size());
  std::vector<uint8_t> out;
  out.reserve(5 + frame.body.size());
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<uint8_t>(n >> (8 * i)));
  out.push_back(static_cast<uint8_t>(frame.type));
  out.insert(out.end(), frame.body.begin(), frame.body.end());
  return out;
}

std::vector<uint8_t> EncodeHello(const Hello& hello) {
  std::vector<uint8_t> out;
  PutHello(out, hello);
  return out;
}

Hello DecodeHello(std::span<const uint8_t> body) {
  ByteReader in(body);
  Hello h = ReadHello(in);
  ExpectConsumed(in);
  return h;
}

std::vector<uint8_t> EncodeHelloAck(const Hello& hello, uint32_t server_index) {
  std::vector<uint8_t> out;
  PutHello(out, hello);
  PutU32LE(out, server_index);
  return out;
}

std::pair<Hello, uint32_t> DecodeHelloAck(std::span<const uint8_t> body) {
  ByteReader in(body);
  Hello h = ReadHello(in);
  const uint32_t j = in.U32();
  ExpectConsumed(in);
  return {h, j};
}

std::vector<uint8_t> EncodeQuery(const FieldMatrix& query) {
  std::vector<uint8_t> out;
  out.reserve(4 + 8 * query.rows() * query.cols());
  PutU32LE(out, static_cast<uint32_t>(query.cols()));
  for (size_t c = 0; c < query.cols(); ++c) {
    for (size_t r = 0; r < query.rows(); ++r) PutU64LE(out, query(r, c));
  }
  return out;
}

FieldMatrix DecodeQuery(std::span<const uint8_t> body, const PrimeField& field,
                        size_t rows) {
  ByteReader in(body);
  const uint64_t gamma = in.U32();
  if (in.remaining() != 8 * rows * gamma) {
    throw Error(ErrorCode::kFormatError, "query body length mismatch");
  }
  FieldMatrix q(field, rows, gamma);
  for (size_t c = 0; c < gamma; ++c) {
    for (size_t r = 0; r < rows; ++r) q.Set(r, c, ReadElement(in, field));
  }
  return q;
}

std::vector<uint8_t> EncodeAnswer(const FieldMatrix& answer) {
  std::vector<uint8_t> out;
  out.reserve(8 * answer.entries().size());
  for (uint64_t v : answer.entries()) PutU64LE(out, v);
  return out;
}

FieldMatrix DecodeAnswer(std::span<const uint8_t> body, const PrimeField& field,
                         size_t gamma, size_t stripes) {
  ByteReader in(body);
  if (in.remaining() != 8 * gamma * stripes) {
    throw Error(ErrorCode::kFormatError, "answer body length mismatch");
  }
  std::vector<uint64_t> entries(gamma * stripes);
  for (auto& v : entries) v = ReadElement(in, field);
  return FieldMatrix(field, gamma, stripes, std::move(entries));
}

Socket::Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() { Close(); }

void Socket::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::ShutdownBoth() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void Socket::SetTimeout(std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

Socket Socket::Connect(const std::string& host, uint16_t port,
                       std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
      rc != 0) {
    throw Error(ErrorCode::kIoError,
                "resolve " + host + ": " + ::gai_strerror(rc));
  }
  std::string last = "no addresses for " + host;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!s.valid()) {
      last = ErrnoText("socket");
      continue;
    }
    s.SetTimeout(timeout);
    if (::connect(s.fd(), ai->ai_addr, ai->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return s;
    }
    last = ErrnoText(("connect " + host + ":" + service).c_str());
  }
  ::freeaddrinfo(res);
  throw Error(ErrorCode::kIoError, last);
}

void Socket::SendAll(std::span<const uint8_t> bytes) {
  size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent,
                             MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, ErrnoText("send"));
    }
    sent += static_cast<size_t>(n);
  }
}

void Socket::SendFrame(const Frame& frame) { SendAll(EncodeFrame(frame)); }

bool Socket::ReceiveExact(std::span<uint8_t> out) {
  size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, ErrnoText("recv"));
    }
    if (n == 0) {
      if (got == 0) return false;
      throw Error(ErrorCode::kProtocolError, "connection closed mid-frame");
    }
    got += static_cast<size_t>(n);
  }
  return true;
}

std::optional<Frame> Socket::ReceiveFrame() {
  uint8_t header[5];
  if (!ReceiveExact(header)) return std::nullopt;
  uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n = (n << 8) | header[i];
  if (n > kMaxFrameBody) {
    throw Error(ErrorCode::kProtocolError,
                "frame body of " + std::to_string(n) + " bytes exceeds limit");
  }
  Frame frame;
  frame.type = static_cast<MessageType>(header[4]);
  frame.body.resize(n);
  if (n > 0 && !ReceiveExact(frame.body)) {
    throw Error(ErrorCode::kProtocolError, "connection closed mid-frame");
  }
  return frame;
}

}  // namespace optpir
