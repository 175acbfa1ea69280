#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "awts/core.hpp"

namespace awts {

inline constexpr char kFrameMagic[4] = {'A', 'W', 'T', 'S'};
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 11;  // magic + version + type + payload_len

enum class FrameType : std::uint8_t {
  Hello = 0,
  RangingCycle = 1,
  Flag = 2,
  EndOfTrial = 3,
};

/// One wire frame. Encoding: magic "AWTS", version u16, frame type u8,
/// payload length u32, payload bytes, CRC32 (IEEE) over header + payload.
/// All integers little-endian.
struct Frame {
  std::uint16_t version = kProtocolVersion;
  FrameType type = FrameType::Hello;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Throws bad_magic / version_mismatch / truncated_frame / crc_mismatch.
Frame decode_frame(const std::uint8_t* data, std::size_t size);
Frame decode_frame(const std::vector<std::uint8_t>& bytes);

/// RangingCycle payload: t_ex f64 ms, wheel angle f64 rad, sample count u32,
/// samples u16 each. The sample rate is fixed by the protocol; trigger delay
/// is simulator-side ground truth and is not transmitted.
std::vector<std::uint8_t> cycle_payload(const RangingCycle& cycle);
RangingCycle parse_cycle_payload(const std::vector<std::uint8_t>& payload);

/// Flag payload: t_ex f64 ms, kind u8.
std::vector<std::uint8_t> flag_payload(const FlagEvent& flag);
FlagEvent parse_flag_payload(const std::vector<std::uint8_t>& payload);

/// Hello payload: UTF-8 JSON with geometry, scene reference, seed and
/// acquisition parameters. An empty payload is a bare handshake.
std::string hello_json(const ExperimentLog& log);
void apply_hello_json(const std::string& text, ExperimentLog& log);

/// Hello, one frame per cycle with Flag frames interleaved by t_ex,
/// EndOfTrial last.
std::vector<Frame> log_to_frames(const ExperimentLog& log);
ExperimentLog frames_to_log(const std::vector<Frame>& frames);

/// Binary trial file: the frames of log_to_frames written back to back.
void write_trial_binary(const ExperimentLog& log, const std::string& path);
ExperimentLog read_trial_binary(const std::string& path);

/// JSON-lines trial file: a hello line, one line per cycle or flag, an end
/// line. Converts losslessly to and from the binary form.
void write_trial_jsonl(const ExperimentLog& log, const std::string& path);
ExperimentLog read_trial_jsonl(const std::string& path);

}  // namespace awts
