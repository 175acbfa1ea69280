#pragma once

#include <cstdint>
#include <string>

#include "awts/telemetry.hpp"

namespace awts {

enum class Pace : std::uint8_t {
  Unpaced = 0,   // frames back to back
  Realtime = 1,  // cycle frames on the 20 Hz trigger grid
};

/// One-shot TCP trial server (the sensor node). Binds and listens on
/// construction; serve_one() accepts a single client, streams the trial and
/// closes. A client that disconnects mid-stream stops the trial cleanly.
class TrialServer {
 public:
  TrialServer(ExperimentLog log, Pace pace, std::uint16_t port = 0);
  ~TrialServer();

  TrialServer(const TrialServer&) = delete;
  TrialServer& operator=(const TrialServer&) = delete;

  std::uint16_t port() const { return port_; }

  /// Blocks until one full trial was streamed (or the client went away).
  /// Returns the number of frames delivered.
  std::size_t serve_one();

 private:
  ExperimentLog log_;
  Pace pace_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
};

/// Client side (the host): connect, receive frames until EndOfTrial,
/// reassemble the log.
ExperimentLog receive_trial(const std::string& host, std::uint16_t port);

}  // namespace awts
