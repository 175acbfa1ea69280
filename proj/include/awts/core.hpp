#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "awts/errors.hpp"

namespace awts {

// Acquisition constants shared by the whole pipeline.
inline constexpr double kAdcMax = 4096.0;              // counts, maps 0-1.8 V
inline constexpr double kAdcVoltsFullScale = 1.8;      // display conversion only
inline constexpr double kSampleRateHz = 200000.0;
inline constexpr std::size_t kRawCycleSamples = 4000;
inline constexpr double kTriggerPeriodMs = 50.0;       // 20 Hz query trigger
inline constexpr double kTriggerJitterMaxMs = 7.5;
inline constexpr double kPreambleMs = 10000.0;         // stationary lead-in per trial

/// Wheel + waveguide dimensions and acoustic constants. The waveguide wraps
/// the full wheel circumference, so outer_length_m is pi * wheel_diameter_m,
/// and the inner (hub) section is the rangefinder dead zone.
struct SensorGeometry {
  double wheel_diameter_m = 0.27;
  double wheel_radius_m = 0.135;
  double inner_length_m = 0.15;
  double outer_length_m = 0.8482300164692441;  // pi * 0.27
  double speed_of_sound_mps = 343.0;
  double pulse_frequency_hz = 42000.0;
  int pulse_cycles = 8;
  double angular_speed_rad_s = 0.6283185307179586;  // 6 RPM

  double total_length_m() const { return inner_length_m + outer_length_m; }

  /// Build a consistent geometry from the free parameters.
  static SensorGeometry from_wheel(double diameter_m, double inner_length_m, double rpm,
                                   double speed_of_sound_mps = 343.0,
                                   double pulse_frequency_hz = 42000.0, int pulse_cycles = 8);

  /// Bench prototype constants: 27 cm wheel, 15 cm dead zone, 42 kHz, 6 RPM.
  static SensorGeometry prototype() { return SensorGeometry{}; }

  void validate() const;  // throws invalid_geometry
};

/// One send/receive acoustic trace as acquired: 4000 ADC samples at 200 kHz.
/// trigger_delay_ms and clipped are simulator-side ground truth; they are not
/// part of the transmitted measurement (see measurement_equal).
struct RangingCycle {
  double t_ex_ms = 0.0;         // experiment time of the query trigger
  std::vector<std::uint16_t> samples;
  double sample_rate_hz = kSampleRateHz;
  double wheel_angle_rad = 0.0;
  double trigger_delay_ms = 0.0;
  bool clipped = false;
};

bool measurement_equal(const RangingCycle& a, const RangingCycle& b);

/// Pipeline stage of a processed trace; keeps the 4000/2000/1750 sample
/// conventions from mixing.
enum class TraceStage : std::uint8_t { Raw4000, Shifted2000, Baselined1750 };

std::size_t stage_length(TraceStage stage);
std::string_view stage_name(TraceStage stage);

/// A processed trace. Ranging time of sample i is i / sample_rate (the shift
/// to ranging time 0 happened when the stage advanced past Raw4000).
struct Trace {
  std::vector<double> samples;
  TraceStage stage = TraceStage::Shifted2000;
  double t_ex_ms = 0.0;
};

enum class Task : std::uint8_t { Terrain, ObstacleShape };

enum class Terrain : std::uint8_t { Wood = 0, Outdoor, Soft, Ribbed, Nfm };

/// Flat is a class label only; scene obstacles are the other three shapes.
enum class ObstacleShape : std::uint8_t { Flat = 0, SemiCircle, Triangle, Rectangle };

std::string_view terrain_name(Terrain t);
std::string_view obstacle_shape_name(ObstacleShape s);
Terrain terrain_from_name(std::string_view name);           // throws bad_config
ObstacleShape obstacle_shape_from_name(std::string_view name);

/// Label of one classification window; index is the position inside the
/// task's label set (Terrain: Wood..NFM; ObstacleShape: Flat, SemiCircle,
/// Triangle).
struct ClassLabel {
  Task task = Task::Terrain;
  int index = 0;

  std::string_view name() const;
  static ClassLabel terrain(Terrain t);
  static ClassLabel obstacle(ObstacleShape s);  // throws shape_mismatch for Rectangle
  static const std::vector<std::string>& names(Task task);

  friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

/// N consecutive processed traces of equal length; the classifier's unit of
/// input.
struct TraceWindow {
  std::vector<Trace> traces;
  ClassLabel label;
  double t_ex_begin_ms = 0.0;
  double t_ex_end_ms = 0.0;

  std::size_t window_size() const { return traces.size(); }
};

enum class FlagKind : std::uint8_t { ContactStart = 0, ContactEnd = 1 };

/// Ground-truth contact event (the simulation's stand-in for the manual
/// keyboard flag).
struct FlagEvent {
  double t_ex_ms = 0.0;
  FlagKind kind = FlagKind::ContactStart;

  friend bool operator==(const FlagEvent&, const FlagEvent&) = default;
};

/// One trial: ordered cycles, contact flags, the scene document that produced
/// it and the geometry it was recorded with. scene_ref holds the canonical
/// scene JSON (or a bare name for hand-made logs).
struct ExperimentLog {
  std::vector<RangingCycle> cycles;
  std::vector<FlagEvent> flags;
  std::string scene_ref;
  SensorGeometry geometry;
  std::uint64_t seed = 0;
  std::string params_json;  // acquisition parameters, serialized
};

/// Ranging time (ms) of a sample index at the given rate.
double ranging_time_of_sample(std::size_t index, double sample_rate_hz);

/// One broken invariant found by validate_log. For log-level violations the
/// cycle index is the position where the invariant broke.
struct Violation {
  std::size_t cycle_index = 0;
  std::string invariant;
  std::string detail;

  std::string to_string() const;
};

/// Checks every type invariant; returns an empty vector iff the log is
/// well-formed. Never throws.
std::vector<Violation> validate_log(const ExperimentLog& log);

double normalize_angle(double rad);  // into [0, 2*pi)

}  // namespace awts
