#include "awts/localize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace awts {

double dead_zone_time_ms(const SensorGeometry& geom) {
  return 2.0 * geom.inner_length_m / geom.speed_of_sound_mps * 1000.0;
}

double peak_time_to_theta(double t_r_ms, const SensorGeometry& geom) {
  geom.validate();
  const double dead = dead_zone_time_ms(geom);
  require(t_r_ms >= dead, Errc::dead_zone, "return peak lies inside the hub dead zone");
  const double x = geom.speed_of_sound_mps * t_r_ms / 1000.0 / 2.0 - geom.inner_length_m;
  return x * 2.0 / geom.wheel_diameter_m;
}

double delta_theta_from_delta_t(double delta_t_ms, const SensorGeometry& geom) {
  geom.validate();
  const double delta_theta =
      geom.speed_of_sound_mps * delta_t_ms / 1000.0 / geom.wheel_diameter_m;
  require(delta_theta > 0.0, Errc::delta_theta_out_of_range,
          "contact-angle change must be positive");
  require(delta_theta < 2.0 * std::numbers::pi, Errc::delta_theta_out_of_range,
          "contact-angle change must stay below one full turn");
  return delta_theta;
}

double height_from_delta_theta(double delta_theta_rad, const SensorGeometry& geom) {
  require(delta_theta_rad > 0.0 && delta_theta_rad < 2.0 * std::numbers::pi,
          Errc::delta_theta_out_of_range, "delta theta must lie in (0, 2*pi)");
  const double s = std::sin(delta_theta_rad / 2.0);
  return geom.wheel_diameter_m * s * s;
}

double percentile(std::vector<double> values, double q) {
  require(!values.empty(), Errc::insufficient_peaks, "percentile of an empty pool");
  require(q >= 0.0 && q <= 1.0, Errc::bad_config, "percentile fraction must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= values.size()) return values.back();
  const double w = rank - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[lo + 1] * w;
}

std::vector<CyclePeaks> collision_window_peaks(const ExperimentLog& log, double collision_t_ex_ms,
                                               const PeakParams& params, double epsilon_ms) {
  params.validate();
  const double mean = trial_mean_amplitude(log);
  std::vector<CyclePeaks> out;
  for (std::size_t i = 0; i < log.cycles.size(); ++i) {
    const RangingCycle& cycle = log.cycles[i];
    if (std::abs(cycle.t_ex_ms - collision_t_ex_ms) > epsilon_ms) continue;
    const Trace shifted = align_and_trim(cycle, mean);
    const double max_value = *std::max_element(shifted.samples.begin(), shifted.samples.end());
    require(max_value > 0.0, Errc::degenerate_normalization, "cycle is all zero");
    std::vector<double> normalized(shifted.samples.size());
    for (std::size_t k = 0; k < normalized.size(); ++k) {
      normalized[k] = shifted.samples[k] / max_value;
    }
    const std::vector<double> smoothed = ema_filter(normalized, params.ema_alpha);
    out.push_back({i, cycle.t_ex_ms, find_peaks(smoothed, params, cycle.sample_rate_hz)});
    out.back().peaks.source_cycle = i;
  }
  return out;
}

HeightEstimate estimate_height(const ExperimentLog& log, double collision_t_ex_ms,
                               const PeakParams& params, const SensorGeometry& geom) {
  const std::vector<CyclePeaks> per_cycle =
      collision_window_peaks(log, collision_t_ex_ms, params);
  const double dead = dead_zone_time_ms(geom);
  // Contacts live strictly inside the wheel perimeter, so their returns stay
  // within the full waveguide round trip; the open-end echo arrives later
  // (past the hub adapter) and is not a contact.
  const double pulse_ms = geom.pulse_cycles / geom.pulse_frequency_hz * 1000.0;
  const double end_bound =
      2.0 * geom.total_length_m() / geom.speed_of_sound_mps * 1000.0 + pulse_ms / 2.0;

  std::vector<double> pooled;
  for (const CyclePeaks& cp : per_cycle) {
    for (const PeakSet::Peak& p : cp.peaks.peaks) {
      if (p.t_r_ms > dead && p.t_r_ms < end_bound) pooled.push_back(p.t_r_ms);
    }
  }
  require(pooled.size() >= 2, Errc::insufficient_peaks,
          "need at least two pooled return peaks around the collision");

  HeightEstimate est;
  est.window_begin_ms = collision_t_ex_ms - kCollisionWindowMs;
  est.window_end_ms = collision_t_ex_ms + kCollisionWindowMs;
  est.pooled_peaks = pooled.size();
  est.cycles_used = per_cycle.size();
  est.delta_t_c_ms = percentile(pooled, 0.8) - percentile(pooled, 0.2);
  est.delta_theta_rad = delta_theta_from_delta_t(est.delta_t_c_ms, geom);
  est.height_m = height_from_delta_theta(est.delta_theta_rad, geom);
  return est;
}

}  // namespace awts
