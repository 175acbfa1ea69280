#include "awts/design.hpp"

#include <numbers>

namespace awts {

double query_time_ms(const SensorGeometry& geom) {
  const double length = geom.total_length_m();
  require(length > 0.0, Errc::invalid_geometry, "waveguide length must be positive");
  require(geom.speed_of_sound_mps > 0.0, Errc::invalid_geometry,
          "speed of sound must be positive");
  return 2.0 * length / geom.speed_of_sound_mps * 1000.0;
}

double cycles_per_rotation(const SensorGeometry& geom) {
  require(geom.angular_speed_rad_s > 0.0, Errc::invalid_speed, "angular speed must be positive");
  const double denom = geom.angular_speed_rad_s *
                       (2.0 * std::numbers::pi * geom.wheel_radius_m + geom.inner_length_m);
  return std::numbers::pi * geom.speed_of_sound_mps / denom;
}

double min_separation_m(const SensorGeometry& geom) {
  require(geom.pulse_frequency_hz > 0.0, Errc::invalid_frequency,
          "pulse frequency must be positive");
  require(geom.pulse_cycles >= 1, Errc::invalid_geometry, "pulse cycle count must be >= 1");
  const double wavelength = geom.speed_of_sound_mps / geom.pulse_frequency_hz;
  return geom.pulse_cycles * wavelength / 2.0;
}

DesignReport make_design_report(const SensorGeometry& geom) {
  DesignReport report;
  report.query_time_ms = query_time_ms(geom);
  report.cycles_per_rotation = cycles_per_rotation(geom);
  report.min_separation_m = min_separation_m(geom);
  report.wavelength_m = geom.speed_of_sound_mps / geom.pulse_frequency_hz;
  return report;
}

}  // namespace awts
