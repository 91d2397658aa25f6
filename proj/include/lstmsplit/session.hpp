/*
 * Copyright 2026 The lstmsplit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LSTMSPLIT_SESSION_HPP_
#define LSTMSPLIT_SESSION_HPP_

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "lstmsplit/wire.hpp"

namespace lstmsplit {

enum class WirePrecision {
  kF32,             // every frame goes through encode/decode
  kF64Passthrough,  // in-process only: messages are handed over unquantized
};

enum class Direction : std::uint8_t { kSent, kReceived };

struct TraceEntry {
  Direction dir;
  wire::MsgType type;
  std::size_t bytes;
  bool operator==(const TraceEntry &) const = default;
};

/// Byte and time accounting for one endpoint of a session.
struct LinkCounters {
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_received = 0;
  double transit_seconds = 0.0;    // inside send/recv, excluding (de)serialisation
  double serialize_seconds = 0.0;  // encode + decode

  LinkCounters &operator+=(const LinkCounters &o);
};

/// Reliable, in-order, exactly-once message channel between one client and
/// the server. Owned by one thread at a time.
class Session {
 public:
  virtual ~Session() = default;

  virtual void send(const wire::Message &m) = 0;
  /// Blocks until a full frame arrives. Throws SessionError on close.
  virtual wire::Message recv() = 0;
  virtual void close() = 0;
  virtual WirePrecision precision() const = 0;

  const LinkCounters &counters() const { return counters_; }
  const std::vector<TraceEntry> &trace() const { return trace_; }

 protected:
  void record(Direction dir, const wire::Message &m, std::size_t bytes);

  LinkCounters counters_;
  std::vector<TraceEntry> trace_;
};

/// Server-side protocol logic, driven one inbound message at a time.
class FrameHandler {
 public:
  virtual ~FrameHandler() = default;
  virtual std::vector<wire::Message> on_message(const wire::Message &m) = 0;
  /// True once the current connection must be closed (after DONE or ERROR).
  virtual bool connection_finished() const = 0;
  /// Resets per-connection state before a new peer is served.
  virtual void begin_connection() = 0;
};

/// Single-threaded in-process transport: send() hands the frame straight to
/// the server handler, whose replies queue up for recv().
class LoopbackSession final : public Session {
 public:
  LoopbackSession(FrameHandler &server, WirePrecision precision);

  void send(const wire::Message &m) override;
  wire::Message recv() override;
  void close() override;
  WirePrecision precision() const override { return precision_; }

  /// The server's view of the same traffic.
  const LinkCounters &server_counters() const { return server_counters_; }

 private:
  wire::Message transfer(const wire::Message &m, std::size_t &bytes);

  FrameHandler &server_;
  WirePrecision precision_;
  std::deque<std::pair<wire::Message, std::size_t>> inbox_;
  LinkCounters server_counters_;
  bool closed_ = false;
};

/// Stream-socket session over TCP.
class TcpSession final : public Session {
 public:
  explicit TcpSession(int fd);
  ~TcpSession() override;
  TcpSession(const TcpSession &) = delete;
  TcpSession &operator=(const TcpSession &) = delete;

  static std::unique_ptr<TcpSession> connect(const std::string &host, std::uint16_t port,
                                             double timeout_seconds = 10.0);

  void send(const wire::Message &m) override;
  wire::Message recv() override;
  void close() override;
  WirePrecision precision() const override { return WirePrecision::kF32; }

 private:
  int fd_;
  wire::FrameReader reader_;
};

/// Listening socket. Backlog of one: a second client waits in the kernel
/// queue while the current session runs.
class TcpListener {
 public:
  TcpListener(const std::string &host, std::uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener &) = delete;
  TcpListener &operator=(const TcpListener &) = delete;

  std::uint16_t port() const { return port_; }
  std::unique_ptr<TcpSession> accept();

 private:
  int fd_;
  std::uint16_t port_;
};

/// Runs the handler over one connection until it finishes or the peer closes.
void serve_connection(Session &session, FrameHandler &handler);

/// Splits "host:port". Throws ConfigError.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string &spec);

}  // namespace lstmsplit

#endif  // LSTMSPLIT_SESSION_HPP_
