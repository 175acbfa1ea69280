#include "awts/telemetry.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "awts/bytes.hpp"
#include "json.hpp"

namespace awts {

namespace {

using nlohmann::json;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t n = 0; n < 256; ++n) {
    std::uint32_t c = n;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[n] = c;
  }
  return table;
}

json geometry_to_json(const SensorGeometry& g) {
  return json{{"wheel_diameter_m", g.wheel_diameter_m},
              {"wheel_radius_m", g.wheel_radius_m},
              {"inner_length_m", g.inner_length_m},
              {"outer_length_m", g.outer_length_m},
              {"speed_of_sound_mps", g.speed_of_sound_mps},
              {"pulse_frequency_hz", g.pulse_frequency_hz},
              {"pulse_cycles", g.pulse_cycles},
              {"angular_speed_rad_s", g.angular_speed_rad_s}};
}

SensorGeometry geometry_from_json(const json& j) {
  SensorGeometry g;
  g.wheel_diameter_m = j.at("wheel_diameter_m").get<double>();
  g.wheel_radius_m = j.at("wheel_radius_m").get<double>();
  g.inner_length_m = j.at("inner_length_m").get<double>();
  g.outer_length_m = j.at("outer_length_m").get<double>();
  g.speed_of_sound_mps = j.at("speed_of_sound_mps").get<double>();
  g.pulse_frequency_hz = j.at("pulse_frequency_hz").get<double>();
  g.pulse_cycles = j.at("pulse_cycles").get<int>();
  g.angular_speed_rad_s = j.at("angular_speed_rad_s").get<double>();
  return g;
}

json cycle_to_json(const RangingCycle& c) {
  return json{{"t_ex_ms", c.t_ex_ms},
              {"wheel_angle_rad", c.wheel_angle_rad},
              {"samples", c.samples}};
}

RangingCycle cycle_from_json(const json& j) {
  RangingCycle c;
  c.t_ex_ms = j.at("t_ex_ms").get<double>();
  c.wheel_angle_rad = j.at("wheel_angle_rad").get<double>();
  c.samples = j.at("samples").get<std::vector<std::uint16_t>>();
  c.sample_rate_hz = kSampleRateHz;
  return c;
}

}  // namespace

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t size) {
  static const std::array<std::uint32_t, 256> table = make_crc_table();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) {
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + frame.payload.size() + 4);
  out.insert(out.end(), kFrameMagic, kFrameMagic + 4);
  put_u16(out, frame.version);
  out.push_back(static_cast<std::uint8_t>(frame.type));
  put_u32(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  put_u32(out, crc32_ieee(out.data(), out.size()));
  return out;
}

Frame decode_frame(const std::uint8_t* data, std::size_t size) {
  require(size >= kFrameHeaderSize + 4, Errc::truncated_frame, "frame shorter than header + CRC");
  require(std::equal(data, data + 4, kFrameMagic), Errc::bad_magic, "frame magic mismatch");
  ByteReader header(data + 4, size - 4);
  const std::uint16_t version = header.u16();
  require(version == kProtocolVersion, Errc::version_mismatch,
          "protocol version " + std::to_string(version) + " not supported");
  const std::uint8_t type = header.u8();
  require(type <= static_cast<std::uint8_t>(FrameType::EndOfTrial), Errc::truncated_frame,
          "unknown frame type " + std::to_string(type));
  const std::uint32_t payload_len = header.u32();
  require(size == kFrameHeaderSize + payload_len + 4, Errc::truncated_frame,
          "frame size does not match payload length");
  ByteReader crc_reader(data + kFrameHeaderSize + payload_len, 4);
  const std::uint32_t stored_crc = crc_reader.u32();
  const std::uint32_t computed = crc32_ieee(data, kFrameHeaderSize + payload_len);
  require(stored_crc == computed, Errc::crc_mismatch, "frame CRC check failed");

  Frame frame;
  frame.version = version;
  frame.type = static_cast<FrameType>(type);
  frame.payload.assign(data + kFrameHeaderSize, data + kFrameHeaderSize + payload_len);
  return frame;
}

Frame decode_frame(const std::vector<std::uint8_t>& bytes) {
  return decode_frame(bytes.data(), bytes.size());
}

std::vector<std::uint8_t> cycle_payload(const RangingCycle& cycle) {
  std::vector<std::uint8_t> out;
  out.reserve(20 + cycle.samples.size() * 2);
  put_f64(out, cycle.t_ex_ms);
  put_f64(out, cycle.wheel_angle_rad);
  put_u32(out, static_cast<std::uint32_t>(cycle.samples.size()));
  for (std::uint16_t s : cycle.samples) put_u16(out, s);
  return out;
}

RangingCycle parse_cycle_payload(const std::vector<std::uint8_t>& payload) {
  ByteReader r(payload.data(), payload.size());
  RangingCycle cycle;
  cycle.t_ex_ms = r.f64();
  cycle.wheel_angle_rad = r.f64();
  const std::uint32_t count = r.u32();
  require(r.remaining() == count * 2u, Errc::truncated_frame,
          "cycle payload does not match its sample count");
  cycle.samples.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) cycle.samples[i] = r.u16();
  cycle.sample_rate_hz = kSampleRateHz;
  return cycle;
}

std::vector<std::uint8_t> flag_payload(const FlagEvent& flag) {
  std::vector<std::uint8_t> out;
  put_f64(out, flag.t_ex_ms);
  out.push_back(static_cast<std::uint8_t>(flag.kind));
  return out;
}

FlagEvent parse_flag_payload(const std::vector<std::uint8_t>& payload) {
  ByteReader r(payload.data(), payload.size());
  FlagEvent flag;
  flag.t_ex_ms = r.f64();
  const std::uint8_t kind = r.u8();
  require(kind <= 1, Errc::truncated_frame, "unknown flag kind");
  require(r.remaining() == 0, Errc::truncated_frame, "flag payload has trailing bytes");
  flag.kind = static_cast<FlagKind>(kind);
  return flag;
}

std::string hello_json(const ExperimentLog& log) {
  json doc{{"geometry", geometry_to_json(log.geometry)},
           {"scene", log.scene_ref},
           {"seed", log.seed}};
  if (!log.params_json.empty()) {
    doc["params"] = json::parse(log.params_json);
  }
  return doc.dump();
}

void apply_hello_json(const std::string& text, ExperimentLog& log) {
  if (text.empty()) return;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::bad_config, std::string("hello payload is not valid JSON: ") + e.what());
  }
  if (doc.contains("geometry")) log.geometry = geometry_from_json(doc["geometry"]);
  if (doc.contains("scene")) log.scene_ref = doc["scene"].get<std::string>();
  if (doc.contains("seed")) log.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("params")) log.params_json = doc["params"].dump();
}

std::vector<Frame> log_to_frames(const ExperimentLog& log) {
  std::vector<Frame> frames;
  frames.reserve(log.cycles.size() + log.flags.size() + 2);

  Frame hello;
  hello.type = FrameType::Hello;
  const std::string header = hello_json(log);
  hello.payload.assign(header.begin(), header.end());
  frames.push_back(std::move(hello));

  // Interleave flags by timestamp; a flag at a cycle's t_ex follows the cycle.
  std::size_t next_flag = 0;
  for (const RangingCycle& cycle : log.cycles) {
    while (next_flag < log.flags.size() && log.flags[next_flag].t_ex_ms < cycle.t_ex_ms) {
      frames.push_back({kProtocolVersion, FrameType::Flag, flag_payload(log.flags[next_flag])});
      ++next_flag;
    }
    frames.push_back({kProtocolVersion, FrameType::RangingCycle, cycle_payload(cycle)});
  }
  while (next_flag < log.flags.size()) {
    frames.push_back({kProtocolVersion, FrameType::Flag, flag_payload(log.flags[next_flag])});
    ++next_flag;
  }

  frames.push_back({kProtocolVersion, FrameType::EndOfTrial, {}});
  return frames;
}

ExperimentLog frames_to_log(const std::vector<Frame>& frames) {
  ExperimentLog log;
  for (const Frame& frame : frames) {
    switch (frame.type) {
      case FrameType::Hello:
        apply_hello_json(std::string(frame.payload.begin(), frame.payload.end()), log);
        break;
      case FrameType::RangingCycle:
        log.cycles.push_back(parse_cycle_payload(frame.payload));
        break;
      case FrameType::Flag:
        log.flags.push_back(parse_flag_payload(frame.payload));
        break;
      case FrameType::EndOfTrial:
        return log;
    }
  }
  return log;
}

void write_trial_binary(const ExperimentLog& log, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  require(file.good(), Errc::io_error, "cannot open '" + path + "' for writing");
  for (const Frame& frame : log_to_frames(log)) {
    const std::vector<std::uint8_t> bytes = encode_frame(frame);
    file.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
  }
  require(file.good(), Errc::io_error, "short write to '" + path + "'");
}

ExperimentLog read_trial_binary(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  require(file.good(), Errc::io_error, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());

  std::vector<Frame> frames;
  std::size_t at = 0;
  while (at < bytes.size()) {
    require(bytes.size() - at >= kFrameHeaderSize + 4, Errc::truncated_frame,
            "trailing bytes too short for a frame");
    ByteReader peek(bytes.data() + at + 7, 4);
    const std::uint32_t payload_len = peek.u32();
    const std::size_t frame_size = kFrameHeaderSize + payload_len + 4;
    require(at + frame_size <= bytes.size(), Errc::truncated_frame, "file ends mid-frame");
    frames.push_back(decode_frame(bytes.data() + at, frame_size));
    at += frame_size;
  }
  return frames_to_log(frames);
}

void write_trial_jsonl(const ExperimentLog& log, const std::string& path) {
  std::ofstream file(path);
  require(file.good(), Errc::io_error, "cannot open '" + path + "' for writing");

  json hello = json::parse(hello_json(log));
  hello["type"] = "hello";
  file << hello.dump() << "\n";

  std::size_t next_flag = 0;
  auto write_flag = [&file](const FlagEvent& f) {
    json line{{"type", "flag"},
              {"t_ex_ms", f.t_ex_ms},
              {"kind", f.kind == FlagKind::ContactStart ? "ContactStart" : "ContactEnd"}};
    file << line.dump() << "\n";
  };
  for (const RangingCycle& cycle : log.cycles) {
    while (next_flag < log.flags.size() && log.flags[next_flag].t_ex_ms < cycle.t_ex_ms) {
      write_flag(log.flags[next_flag++]);
    }
    json line = cycle_to_json(cycle);
    line["type"] = "cycle";
    file << line.dump() << "\n";
  }
  while (next_flag < log.flags.size()) write_flag(log.flags[next_flag++]);

  file << json{{"type", "end"}}.dump() << "\n";
  require(file.good(), Errc::io_error, "short write to '" + path + "'");
}

ExperimentLog read_trial_jsonl(const std::string& path) {
  std::ifstream file(path);
  require(file.good(), Errc::io_error, "cannot open '" + path + "'");

  ExperimentLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      fail(Errc::bad_config,
           "line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    const std::string type = doc.value("type", "");
    if (type == "hello") {
      doc.erase("type");
      apply_hello_json(doc.dump(), log);
    } else if (type == "cycle") {
      log.cycles.push_back(cycle_from_json(doc));
    } else if (type == "flag") {
      FlagEvent f;
      f.t_ex_ms = doc.at("t_ex_ms").get<double>();
      f.kind = doc.at("kind").get<std::string>() == "ContactStart" ? FlagKind::ContactStart
                                                                   : FlagKind::ContactEnd;
      log.flags.push_back(f);
    } else if (type == "end") {
      break;
    } else {
      fail(Errc::bad_config, "line " + std::to_string(line_no) + ": unknown record type");
    }
  }
  return log;
}

}  // namespace awts
