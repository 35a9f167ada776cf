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

// Wire protocol. A frame is a 4-byte big-endian body length, a 1-byte type
// tag and the body. The length excludes the tag. Integers inside bodies are
// little-endian; field elements are 8 bytes each.
//
//   HELLO      version, N, T, M, L, b (u32 each), q (u64)
//   HELLO_ACK  HELLO fields, then server index j (u32, 1-based)
//   QUERY      gamma (u32), then (M L) * gamma elements, column-major
//   ANSWER     gamma * b elements, slot-major then stripe
//   ERROR      UTF-8 message

#ifndef OPTPIR_WIRE_HPP_
#define OPTPIR_WIRE_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optpir/field.hpp"
#include "optpir/params.hpp"

namespace optpir {

inline constexpr uint32_t kProtocolVersion = 1;
inline constexpr uint32_t kMaxFrameBody = 1u << 28;

enum class MessageType : uint8_t {
  kHello = 0x01,
  kHelloAck = 0x02,
  kQuery = 0x03,
  kAnswer = 0x04,
  kError = 0x7F,
};

struct Frame {
  MessageType type = MessageType::kError;
  std::vector<uint8_t> body;
};

struct Hello {
  uint32_t version = kProtocolVersion;
  uint32_t num_servers = 0;
  uint32_t collusion = 0;
  uint32_t num_records = 0;
  uint32_t L = 0;
  uint32_t stripes = 0;
  uint64_t q = 0;

  friend bool operator==(const Hello&, const Hello&) = default;
};

Hello MakeHello(const SchemeParams& params, size_t stripes, uint64_t q);

std::vector<uint8_t> EncodeFrame(const Frame& frame);

std::vector<uint8_t> EncodeHello(const Hello& hello);
Hello DecodeHello(std::span<const uint8_t> body);
std::vector<uint8_t> EncodeHelloAck(const Hello& hello, uint32_t server_index);
// Returns the echoed hello and the 1-based server index.
std::pair<Hello, uint32_t> DecodeHelloAck(std::span<const uint8_t> body);

std::vector<uint8_t> EncodeQuery(const FieldMatrix& query);
// `rows` is M L. Rejects elements >= q with kFormatError.
FieldMatrix DecodeQuery(std::span<const uint8_t> body, const PrimeField& field,
                        size_t rows);

std::vector<uint8_t> EncodeAnswer(const FieldMatrix& answer);
FieldMatrix DecodeAnswer(std::span<const uint8_t> body, const PrimeField& field,
                         size_t gamma, size_t stripes);

// Connected TCP stream. Move-only; closes on destruction.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept;
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  // Throws kIoError if the host cannot be resolved or refuses.
  static Socket Connect(const std::string& host, uint16_t port,
                        std::chrono::milliseconds timeout);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void Close();
  void ShutdownBoth();
  void SetTimeout(std::chrono::milliseconds timeout);

  void SendAll(std::span<const uint8_t> bytes);
  void SendFrame(const Frame& frame);
  // std::nullopt on clean EOF before the first header byte. Throws
  // kProtocolError on oversized or truncated frames, kIoError on failures.
  std::optional<Frame> ReceiveFrame();

 private:
  // False on EOF at offset 0.
  bool ReceiveExact(std::span<uint8_t> out);

  int fd_ = -1;
};

}  // namespace optpir

#endif  // OPTPIR_WIRE_HPP_
