#pragma once

#include "awts/core.hpp"
#include "awts/dsp.hpp"

namespace awts {

inline constexpr double kCollisionWindowMs = 500.0;

/// Result of the obstacle-height heuristic around one collision flag.
struct HeightEstimate {
  double delta_t_c_ms = 0.0;
  double delta_theta_rad = 0.0;
  double height_m = 0.0;
  double window_begin_ms = 0.0;
  double window_end_ms = 0.0;
  double epsilon_ms = kCollisionWindowMs;
  std::size_t pooled_peaks = 0;
  std::size_t cycles_used = 0;
};

/// Ranging time below which returns come from inside the hub (2*L_inner/c).
double dead_zone_time_ms(const SensorGeometry& geom);

/// Invert t_r = 2*(L_inner + theta*d/2)/c. Throws dead_zone for returns from
/// inside the hub.
double peak_time_to_theta(double t_r_ms, const SensorGeometry& geom);

/// delta_theta = c * delta_t_c / d, constrained to (0, 2*pi). Throws
/// delta_theta_out_of_range otherwise.
double delta_theta_from_delta_t(double delta_t_ms, const SensorGeometry& geom);

/// Obstacle height from the contact-angle change: h = d * sin^2(dtheta/2).
double height_from_delta_theta(double delta_theta_rad, const SensorGeometry& geom);

/// Percentile by linear interpolation between order statistics; q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Per-cycle isolated peaks inside the +-epsilon window around the collision
/// flag (normalize, EMA, find_peaks on each cycle).
struct CyclePeaks {
  std::size_t cycle_index = 0;
  double t_ex_ms = 0.0;
  PeakSet peaks;
};
std::vector<CyclePeaks> collision_window_peaks(const ExperimentLog& log, double collision_t_ex_ms,
                                               const PeakParams& params,
                                               double epsilon_ms = kCollisionWindowMs);

/// The full heuristic: pool return peaks from every cycle within +-500 ms of
/// the collision, take the 80th minus 20th percentile of their ranging
/// times, and convert to a height. Pooled peaks must lie past the hub dead
/// zone and before the full waveguide round trip (the open-end echo is not a
/// contact).
HeightEstimate estimate_height(const ExperimentLog& log, double collision_t_ex_ms,
                               const PeakParams& params, const SensorGeometry& geom);

}  // namespace awts
