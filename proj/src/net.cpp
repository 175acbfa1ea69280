#include "awts/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <iostream>
#include <thread>

#include "awts/bytes.hpp"

namespace awts {

namespace {

bool send_all(int fd, const std::uint8_t* data, std::size_t size) {
  std::size_t sent = 0;
  while (sent < size) {
    const ssize_t n = ::send(fd, data + sent, size - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

bool recv_all(int fd, std::uint8_t* data, std::size_t size) {
  std::size_t got = 0;
  while (got < size) {
    const ssize_t n = ::recv(fd, data + got, size - got, 0);
    if (n <= 0) return false;
    got += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

TrialServer::TrialServer(ExperimentLog log, Pace pace, std::uint16_t port)
    : log_(std::move(log)), pace_(pace) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  require(listen_fd_ >= 0, Errc::io_error, "cannot create server socket");

  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listen_fd_, 1) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    fail(Errc::io_error, "cannot bind/listen on port " + std::to_string(port));
  }

  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TrialServer::~TrialServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::size_t TrialServer::serve_one() {
  require(listen_fd_ >= 0, Errc::io_error, "server socket is closed");
  const int client = ::accept(listen_fd_, nullptr, nullptr);
  require(client >= 0, Errc::io_error, "accept failed");

  const std::vector<Frame> frames = log_to_frames(log_);
  const auto start = std::chrono::steady_clock::now();
  std::size_t cycles_sent = 0;
  std::size_t delivered = 0;
  for (const Frame& frame : frames) {
    if (pace_ == Pace::Realtime && frame.type == FrameType::RangingCycle) {
      const auto due = start + std::chrono::milliseconds(
                                   static_cast<long>(kTriggerPeriodMs) *
                                   static_cast<long>(cycles_sent));
      std::this_thread::sleep_until(due);
      ++cycles_sent;
    }
    const std::vector<std::uint8_t> bytes = encode_frame(frame);
    if (!send_all(client, bytes.data(), bytes.size())) {
      std::cerr << "awts: client disconnected after " << delivered << " frames; trial stopped\n";
      break;
    }
    ++delivered;
  }
  ::close(client);
  return delivered;
}

ExperimentLog receive_trial(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  require(fd >= 0, Errc::io_error, "cannot create client socket");

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  require(::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1, Errc::io_error,
          "invalid host address '" + host + "'");
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    fail(Errc::io_error, "cannot connect to " + host + ":" + std::to_string(port));
  }

  std::vector<Frame> frames;
  try {
    for (;;) {
      std::vector<std::uint8_t> bytes(kFrameHeaderSize);
      require(recv_all(fd, bytes.data(), bytes.size()), Errc::truncated_frame,
              "connection closed mid-header");
      ByteReader peek(bytes.data() + 7, 4);
      const std::uint32_t payload_len = peek.u32();
      bytes.resize(kFrameHeaderSize + payload_len + 4);
      require(recv_all(fd, bytes.data() + kFrameHeaderSize, payload_len + 4),
              Errc::truncated_frame, "connection closed mid-frame");
      Frame frame = decode_frame(bytes);
      const bool done = frame.type == FrameType::EndOfTrial;
      frames.push_back(std::move(frame));
      if (done) break;
    }
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  return frames_to_log(frames);
}

}  // namespace awts
