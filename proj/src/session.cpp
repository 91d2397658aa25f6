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

#include "lstmsplit/session.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <charconv>
#include <cstring>
#include <thread>

#include "lstmsplit/errors.hpp"

namespace lstmsplit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

LinkCounters &LinkCounters::operator+=(const LinkCounters &o) {
  bytes_sent += o.bytes_sent;
  bytes_received += o.bytes_received;
  frames_sent += o.frames_sent;
  frames_received += o.frames_received;
  transit_seconds += o.transit_seconds;
  serialize_seconds += o.serialize_seconds;
  return *this;
}

void Session::record(Direction dir, const wire::Message &m, std::size_t bytes) {
  if (dir == Direction::kSent) {
    counters_.bytes_sent += bytes;
    ++counters_.frames_sent;
  } else {
    counters_.bytes_received += bytes;
    ++counters_.frames_received;
  }
  trace_.push_back({dir, m.type(), bytes});
}

// ---------------------------------------------------------------------------
// Loopback

LoopbackSession::LoopbackSession(FrameHandler &server, WirePrecision precision)
    : server_(server), precision_(precision) {
  server_.begin_connection();
}

wire::Message LoopbackSession::transfer(const wire::Message &m, std::size_t &bytes) {
  const auto t0 = Clock::now();
  wire::Message out;
  if (precision_ == WirePrecision::kF32) {
    auto frame = wire::encode_message(m);
    bytes = frame.size();
    auto res = wire::decode_message(frame);
    out = std::move(res.message);
  } else {
    bytes = wire::encoded_size(m);
    out = m;
  }
  counters_.serialize_seconds += seconds_since(t0);
  return out;
}

void LoopbackSession::send(const wire::Message &m) {
  if (closed_) throw SessionError("send on closed session");
  std::size_t bytes = 0;
  wire::Message delivered = transfer(m, bytes);
  record(Direction::kSent, m, bytes);
  server_counters_.bytes_received += bytes;
  ++server_counters_.frames_received;

  for (auto &reply : server_.on_message(delivered)) {
    std::size_t reply_bytes = 0;
    wire::Message r = transfer(reply, reply_bytes);
    server_counters_.bytes_sent += reply_bytes;
    ++server_counters_.frames_sent;
    inbox_.emplace_back(std::move(r), reply_bytes);
  }
  if (server_.connection_finished()) closed_ = true;
}

wire::Message LoopbackSession::recv() {
  const auto t0 = Clock::now();
  if (inbox_.empty()) {
    throw SessionError(closed_ ? "peer closed the session"
                               : "recv with no pending frame (request/response order violated)");
  }
  auto [m, bytes] = std::move(inbox_.front());
  inbox_.pop_front();
  record(Direction::kReceived, m, bytes);
  counters_.transit_seconds += seconds_since(t0);
  return m;
}

void LoopbackSession::close() { closed_ = true; }

// ---------------------------------------------------------------------------
// TCP

TcpSession::TcpSession(int fd) : fd_(fd) {
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpSession::~TcpSession() { close(); }

std::unique_ptr<TcpSession> TcpSession::connect(const std::string &host, std::uint16_t port,
                                                double timeout_seconds) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo *res = nullptr;
  const std::string port_str = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res); rc != 0) {
    throw SessionError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_seconds);
  std::string last_error;
  while (true) {
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
      ::freeaddrinfo(res);
      throw SessionError("socket: " + errno_text());
    }
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpSession>(fd);
    }
    last_error = errno_text();
    ::close(fd);
    if (Clock::now() >= deadline) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::freeaddrinfo(res);
  throw SessionError("cannot connect to " + host + ":" + port_str + ": " + last_error);
}

void TcpSession::send(const wire::Message &m) {
  if (fd_ < 0) throw SessionError("send on closed session");
  auto t0 = Clock::now();
  const auto frame = wire::encode_message(m);
  counters_.serialize_seconds += seconds_since(t0);

  t0 = Clock::now();
  std::size_t off = 0;
  while (off < frame.size()) {
    const ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SessionError("send: " + errno_text());
    }
    off += static_cast<std::size_t>(n);
  }
  counters_.transit_seconds += seconds_since(t0);
  record(Direction::kSent, m, frame.size());
}

wire::Message TcpSession::recv() {
  if (fd_ < 0) throw SessionError("recv on closed session");
  std::uint8_t buf[64 * 1024];
  double decode_time = 0.0;
  const auto t0 = Clock::now();
  while (true) {
    const auto td = Clock::now();
    auto m = reader_.next();
    decode_time += seconds_since(td);
    if (m) {
      counters_.serialize_seconds += decode_time;
      counters_.transit_seconds += seconds_since(t0) - decode_time;
      record(Direction::kReceived, *m, reader_.last_frame_size());
      return std::move(*m);
    }
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SessionError("recv: " + errno_text());
    }
    if (n == 0) {
      throw SessionError(reader_.buffered() > 0 ? "peer closed mid-frame" : "peer closed the session");
    }
    reader_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
  }
}

void TcpSession::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener::TcpListener(const std::string &host, std::uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw SessionError("socket: " + errno_text());
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  const std::string h = host.empty() || host == "*" ? "0.0.0.0" : host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    throw ConfigError("bind address must be an IPv4 literal, got '" + host + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 1) != 0) {
    const std::string err = errno_text();
    ::close(fd_);
    throw SessionError("cannot listen on " + host + ":" + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpSession> TcpListener::accept() {
  while (true) {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd >= 0) return std::make_unique<TcpSession>(fd);
    if (errno != EINTR) throw SessionError("accept: " + errno_text());
  }
}

void serve_connection(Session &session, FrameHandler &handler) {
  handler.begin_connection();
  while (!handler.connection_finished()) {
    const wire::Message m = session.recv();
    for (const auto &reply : handler.on_message(m)) session.send(reply);
  }
  session.close();
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string &spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon + 1 == spec.size()) {
    throw ConfigError("endpoint must be HOST:PORT, got '" + spec + "'");
  }
  unsigned port = 0;
  const char *first = spec.data() + colon + 1;
  const char *last = spec.data() + spec.size();
  auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || ptr != last || port > 65535) {
    throw ConfigError("invalid port in '" + spec + "'");
  }
  return {spec.substr(0, colon), static_cast<std::uint16_t>(port)};
}

}  // namespace lstmsplit
