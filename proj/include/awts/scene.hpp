#pragma once

#include <optional>
#include <string>
#include <vector>

#include "awts/core.hpp"

namespace awts {

// Calibration shared between terrain textures (which express roughness as
// reflected-amplitude counts) and the default acoustic reflection gain.
inline constexpr double kNominalReflectionGainCounts = 2600.0;
inline constexpr double kNominalDepthRefM = 0.004;

enum class TexturePattern : std::uint8_t { Sine = 0, Spikes = 1 };

/// Periodic indentation-depth modulation of the ground contact. The
/// amplitude is expressed as reflected-amplitude ADC counts at the nominal
/// reflection gain, so texture presets read directly as signal swing.
struct TerrainTexture {
  double roughness_amplitude_counts = 0.0;
  double spatial_period_m = 0.05;
  double absorption = 0.0;  // 0..1, fraction of reflected energy lost
  TexturePattern pattern = TexturePattern::Sine;
};

TerrainTexture default_texture(Terrain t);

struct ObstacleSpec {
  ObstacleShape shape = ObstacleShape::SemiCircle;  // SemiCircle | Triangle | Rectangle
  double height_m = 0.025;
  double ground_position_m = 0.5;  // reference point, measured from the start contact
  std::optional<bool> surmountable;  // default: height <= climb limit

  /// Ground interval occupied by the obstacle (overlap validation).
  double footprint_begin_m() const;
  double footprint_end_m() const;
};

/// Rectangles extend this far along the ground from their near face.
inline constexpr double kRectangleDepthM = 0.08;

/// Heights above this fraction of the wheel diameter cannot be climbed.
double climb_limit_m(const SensorGeometry& geom);
bool resolved_surmountable(const ObstacleSpec& o, const SensorGeometry& geom);

/// Terrain + obstacle layout for one trial. The labelled material starts at
/// material_transition_m (the approach strip before it is plain wood); a
/// ContactStart flag is emitted when the wheel first reaches it. Wood scenes
/// have no material flag.
struct ScenePlan {
  std::string name;
  Terrain terrain = Terrain::Wood;
  TerrainTexture texture;
  double material_transition_m = 0.0;
  std::vector<ObstacleSpec> obstacles;
  double trial_length_m = 1.0;
  double theta0_rad = 0.0;  // initial angle from rangefinder to ground contact
};

enum class ContactKind : std::uint8_t { Ground = 0, Obstacle = 1 };

/// One waveguide indentation: theta is the material angle from the
/// rangefinder along the waveguide (x = theta * d / 2).
struct Contact {
  double theta_rad = 0.0;
  ContactKind kind = ContactKind::Ground;
  double depth_m = 0.0;
  double absorption = 0.0;
  ObstacleShape shape = ObstacleShape::Flat;  // set for Obstacle contacts
};

struct ContactState {
  std::vector<Contact> contacts;  // at most 2: ground plus one obstacle
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double t_ex_ms = 0.0;
};

struct TrialStates {
  std::vector<ContactState> states;
  std::vector<FlagEvent> flags;
};

/// Distance from the rangefinder to a contact along the wheel perimeter,
/// x = theta * d / 2. Angles outside [0, 2*pi) are normalized.
double contact_angle_to_perimeter_distance(double theta_rad, const SensorGeometry& geom);

/// Contact geometry of the wheel rim against one obstacle at the given wheel
/// center position. gamma_rad is the centre angle from the straight-down
/// direction to the contact point, positive toward the rolling direction;
/// depth_m is the rim penetration. Empty when not in contact.
struct ObstacleContactGeometry {
  double gamma_rad = 0.0;
  double depth_m = 0.0;
};
std::optional<ObstacleContactGeometry> obstacle_contact_geometry(double center_x_m,
                                                                 const ObstacleSpec& obstacle,
                                                                 const SensorGeometry& geom);

/// Indentation depth of the ground contact at ground position s.
double ground_depth_m(const TerrainTexture& texture, double s_m);

ContactState initial_state(const ScenePlan& scene, const SensorGeometry& geom);

/// Advance one trigger interval. The wheel is stationary until the 10 s
/// preamble ends; afterwards the centre advances r*omega*dt and the ground
/// contact angle decreases by omega*dt (the rangefinder is fixed in the wheel
/// frame). Contact with an insurmountable obstacle pins the centre while the
/// commanded rotation continues.
ContactState roll_step(const ContactState& state, const ScenePlan& scene,
                       const SensorGeometry& geom, double dt_ms);

void validate_scene(const ScenePlan& scene, const SensorGeometry& geom);

/// Run a full trial: one ContactState per 20 Hz trigger plus ground-truth
/// ContactStart/ContactEnd flags at obstacle and material transitions.
TrialStates run_trial(const ScenePlan& scene, const SensorGeometry& geom, double duration_ms);

ScenePlan scene_from_json(const std::string& json_text);
std::string scene_to_json(const ScenePlan& scene);

}  // namespace awts
