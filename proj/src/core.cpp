#include "awts/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace awts {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_geometry: return "invalid-geometry";
    case Errc::invalid_speed: return "invalid-speed";
    case Errc::invalid_frequency: return "invalid-frequency";
    case Errc::invalid_scene: return "invalid-scene";
    case Errc::no_send_pulse: return "no-send-pulse";
    case Errc::degenerate_normalization: return "normalization-degenerate";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::dead_zone: return "dead-zone";
    case Errc::delta_theta_out_of_range: return "delta-theta-out-of-range";
    case Errc::insufficient_peaks: return "insufficient-peaks";
    case Errc::degenerate_data: return "degenerate-data";
    case Errc::bad_magic: return "bad-magic";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::crc_mismatch: return "crc-mismatch";
    case Errc::truncated_frame: return "truncated-frame";
    case Errc::bad_config: return "bad-config";
    case Errc::io_error: return "io-error";
  }
  return "unknown-error";
}

SensorGeometry SensorGeometry::from_wheel(double diameter_m, double inner_length_m, double rpm,
                                          double speed_of_sound_mps, double pulse_frequency_hz,
                                          int pulse_cycles) {
  SensorGeometry g;
  g.wheel_diameter_m = diameter_m;
  g.wheel_radius_m = diameter_m / 2.0;
  g.inner_length_m = inner_length_m;
  g.outer_length_m = std::numbers::pi * diameter_m;
  g.speed_of_sound_mps = speed_of_sound_mps;
  g.pulse_frequency_hz = pulse_frequency_hz;
  g.pulse_cycles = pulse_cycles;
  g.angular_speed_rad_s = rpm * 2.0 * std::numbers::pi / 60.0;
  g.validate();
  return g;
}

void SensorGeometry::validate() const {
  require(wheel_diameter_m > 0.0 && wheel_radius_m > 0.0, Errc::invalid_geometry,
          "wheel dimensions must be positive");
  require(std::abs(wheel_diameter_m - 2.0 * wheel_radius_m) <= 1e-9 * wheel_diameter_m,
          Errc::invalid_geometry, "wheel_diameter must equal 2 * wheel_radius");
  require(std::abs(outer_length_m - std::numbers::pi * wheel_diameter_m) <=
              1e-9 * std::max(1.0, outer_length_m),
          Errc::invalid_geometry, "outer_length must equal pi * wheel_diameter");
  require(inner_length_m >= 0.0, Errc::invalid_geometry, "inner_length must be non-negative");
  require(total_length_m() > 0.0, Errc::invalid_geometry, "total waveguide length must be positive");
  require(speed_of_sound_mps > 0.0, Errc::invalid_geometry, "speed of sound must be positive");
  require(pulse_frequency_hz > 0.0, Errc::invalid_geometry, "pulse frequency must be positive");
  require(pulse_cycles >= 1, Errc::invalid_geometry, "pulse cycle count must be >= 1");
  require(angular_speed_rad_s >= 0.0, Errc::invalid_geometry, "angular speed must be non-negative");
}

bool measurement_equal(const RangingCycle& a, const RangingCycle& b) {
  return a.t_ex_ms == b.t_ex_ms && a.wheel_angle_rad == b.wheel_angle_rad &&
         a.sample_rate_hz == b.sample_rate_hz && a.samples == b.samples;
}

std::size_t stage_length(TraceStage stage) {
  switch (stage) {
    case TraceStage::Raw4000: return 4000;
    case TraceStage::Shifted2000: return 2000;
    case TraceStage::Baselined1750: return 1750;
  }
  return 0;
}

std::string_view stage_name(TraceStage stage) {
  switch (stage) {
    case TraceStage::Raw4000: return "Raw4000";
    case TraceStage::Shifted2000: return "Shifted2000";
    case TraceStage::Baselined1750: return "Baselined1750";
  }
  return "?";
}

namespace {
const std::vector<std::string> kTerrainNames = {"Wood", "Outdoor", "Soft", "Ribbed", "NFM"};
const std::vector<std::string> kObstacleNames = {"Flat", "SemiCircle", "Triangle"};
}  // namespace

std::string_view terrain_name(Terrain t) { return kTerrainNames[static_cast<int>(t)]; }

std::string_view obstacle_shape_name(ObstacleShape s) {
  switch (s) {
    case ObstacleShape::Flat: return "Flat";
    case ObstacleShape::SemiCircle: return "SemiCircle";
    case ObstacleShape::Triangle: return "Triangle";
    case ObstacleShape::Rectangle: return "Rectangle";
  }
  return "?";
}

Terrain terrain_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTerrainNames.size(); ++i) {
    if (kTerrainNames[i] == name) return static_cast<Terrain>(i);
  }
  fail(Errc::bad_config, "unknown terrain name '" + std::string(name) + "'");
}

ObstacleShape obstacle_shape_from_name(std::string_view name) {
  for (ObstacleShape s : {ObstacleShape::Flat, ObstacleShape::SemiCircle, ObstacleShape::Triangle,
                          ObstacleShape::Rectangle}) {
    if (obstacle_shape_name(s) == name) return s;
  }
  fail(Errc::bad_config, "unknown obstacle shape '" + std::string(name) + "'");
}

std::string_view ClassLabel::name() const { return names(task)[static_cast<std::size_t>(index)]; }

ClassLabel ClassLabel::terrain(Terrain t) { return {Task::Terrain, static_cast<int>(t)}; }

ClassLabel ClassLabel::obstacle(ObstacleShape s) {
  require(s != ObstacleShape::Rectangle, Errc::shape_mismatch,
          "Rectangle is not an obstacle-shape class label");
  return {Task::ObstacleShape, static_cast<int>(s)};
}

const std::vector<std::string>& ClassLabel::names(Task task) {
  return task == Task::Terrain ? kTerrainNames : kObstacleNames;
}

double ranging_time_of_sample(std::size_t index, double sample_rate_hz) {
  require(sample_rate_hz > 0.0, Errc::bad_config, "sample rate must be positive");
  return static_cast<double>(index) / sample_rate_hz * 1000.0;
}

std::string Violation::to_string() const {
  std::ostringstream os;
  os << "cycle " << cycle_index << ": " << invariant;
  if (!detail.empty()) os << " (" << detail << ")";
  return os.str();
}

std::vector<Violation> validate_log(const ExperimentLog& log) {
  std::vector<Violation> out;
  auto add = [&out](std::size_t i, std::string invariant, std::string detail) {
    out.push_back({i, std::move(invariant), std::move(detail)});
  };

  try {
    log.geometry.validate();
  } catch (const Error& e) {
    add(0, "geometry", e.what());
  }

  for (std::size_t i = 0; i < log.cycles.size(); ++i) {
    const RangingCycle& c = log.cycles[i];
    if (c.samples.size() != kRawCycleSamples) {
      add(i, "sample-count",
          std::to_string(c.samples.size()) + " != " + std::to_string(kRawCycleSamples));
    }
    for (std::uint16_t s : c.samples) {
      if (s > static_cast<std::uint16_t>(kAdcMax)) {
        add(i, "sample-range", "value " + std::to_string(s) + " above ADC full scale");
        break;
      }
    }
    if (c.sample_rate_hz <= 0.0) add(i, "sample-rate", "must be positive");
    if (c.trigger_delay_ms < 0.0 || c.trigger_delay_ms > kTriggerJitterMaxMs) {
      add(i, "trigger-delay", std::to_string(c.trigger_delay_ms) + " ms outside [0, 7.5]");
    }
    if (i > 0) {
      const double dt = c.t_ex_ms - log.cycles[i - 1].t_ex_ms;
      if (dt <= 0.0) {
        add(i, "t-ex-monotonic", "t_ex not strictly increasing");
      } else if (std::abs(dt - kTriggerPeriodMs) > kTriggerJitterMaxMs) {
        add(i, "trigger-spacing", std::to_string(dt) + " ms from previous cycle");
      }
    }
  }

  for (std::size_t i = 1; i < log.flags.size(); ++i) {
    if (log.flags[i].t_ex_ms < log.flags[i - 1].t_ex_ms) {
      add(i, "flag-order", "flags not ordered by t_ex");
    }
  }
  return out;
}

double normalize_angle(double rad) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(rad, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

}  // namespace awts
