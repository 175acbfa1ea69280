#pragma once

#include "awts/core.hpp"

namespace awts {

/// Closed-form sensor design trade-offs for a given geometry.
struct DesignReport {
  double query_time_ms = 0.0;        // minimum send+return time, 2L/c
  double cycles_per_rotation = 0.0;  // ranging cycles per wheel rotation
  double min_separation_m = 0.0;     // smallest resolvable indentation spacing
  double wavelength_m = 0.0;         // c / f
};

/// Minimum query time 2L/c in ms. Throws invalid_geometry for non-positive
/// L or c.
double query_time_ms(const SensorGeometry& geom);

/// Ranging cycles per wheel rotation, pi*c / (omega * (2*pi*r + L_inner)).
/// Throws invalid_speed for omega <= 0.
double cycles_per_rotation(const SensorGeometry& geom);

/// Smallest separation of two independently localizable indentations,
/// n * lambda / 2. Throws invalid_frequency for f <= 0.
double min_separation_m(const SensorGeometry& geom);

DesignReport make_design_report(const SensorGeometry& geom);

}  // namespace awts
