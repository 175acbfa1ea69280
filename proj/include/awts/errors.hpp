#pragma once

#include <stdexcept>
#include <string>

namespace awts {

enum class Errc {
  invalid_geometry,
  invalid_speed,
  invalid_frequency,
  invalid_scene,
  no_send_pulse,
  degenerate_normalization,
  shape_mismatch,
  dead_zone,
  delta_theta_out_of_range,
  insufficient_peaks,
  degenerate_data,
  bad_magic,
  version_mismatch,
  crc_mismatch,
  truncated_frame,
  bad_config,
  io_error,
};

const char* errc_name(Errc code);

/// Library-wide exception type; carries a stable error code so callers can
/// branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace awts
