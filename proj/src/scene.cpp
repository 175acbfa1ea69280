#include "awts/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace awts {

namespace {

constexpr double kGroundIndentationFrac = 0.85;  // of the nominal depth reference

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point closest_on_segment(Point a, Point b, Point p) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 <= 0.0) return a;
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return {a.x + t * vx, a.y + t * vy};
}

/// Closest point of the obstacle boundary to the wheel centre.
Point closest_boundary_point(double cx, double cy, const ObstacleSpec& o) {
  switch (o.shape) {
    case ObstacleShape::Rectangle: {
      // Wheel centre is above the top face, so the closest point lies on it.
      const double qx = std::clamp(cx, o.ground_position_m, o.ground_position_m + kRectangleDepthM);
      return {qx, o.height_m};
    }
    case ObstacleShape::SemiCircle: {
      const Point centre{o.ground_position_m, 0.0};
      const double d = dist({cx, cy}, centre);
      if (d <= 0.0) return {centre.x, o.height_m};
      const double ux = (cx - centre.x) / d;
      const double uy = (cy - centre.y) / d;
      return {centre.x + o.height_m * ux, centre.y + o.height_m * uy};
    }
    case ObstacleShape::Triangle: {
      // Isoceles with 45 degree faces: apex at (position, h), base half-width h.
      const Point apex{o.ground_position_m, o.height_m};
      const Point near_base{o.ground_position_m - o.height_m, 0.0};
      const Point far_base{o.ground_position_m + o.height_m, 0.0};
      const Point p{cx, cy};
      const Point q1 = closest_on_segment(near_base, apex, p);
      const Point q2 = closest_on_segment(apex, far_base, p);
      return dist(q1, p) <= dist(q2, p) ? q1 : q2;
    }
    case ObstacleShape::Flat: break;
  }
  fail(Errc::invalid_scene, "obstacle has no solid shape");
}

double texture_pattern(const TerrainTexture& t, double s_m) {
  if (t.spatial_period_m <= 0.0) return 0.0;
  const double phase = s_m / t.spatial_period_m;
  switch (t.pattern) {
    case TexturePattern::Sine:
      return std::sin(2.0 * std::numbers::pi * phase);
    case TexturePattern::Spikes: {
      const double frac = phase - std::floor(phase);
      return frac < 0.18 ? 1.0 : -0.15;
    }
  }
  return 0.0;
}

const TerrainTexture& material_at(const ScenePlan& scene, double s_m) {
  static const TerrainTexture wood = default_texture(Terrain::Wood);
  if (scene.terrain != Terrain::Wood && s_m < scene.material_transition_m) return wood;
  return scene.texture;
}

bool material_active(const ScenePlan& scene, double s_m) {
  return scene.terrain != Terrain::Wood && s_m >= scene.material_transition_m;
}

const Contact* find_ground(const ContactState& state) {
  for (const Contact& c : state.contacts) {
    if (c.kind == ContactKind::Ground) return &c;
  }
  return nullptr;
}

bool has_obstacle_contact(const ContactState& state) {
  return std::any_of(state.contacts.begin(), state.contacts.end(),
                     [](const Contact& c) { return c.kind == ContactKind::Obstacle; });
}

/// Contacts for a wheel centred at (cx, r) with ground contact angle theta_g.
std::vector<Contact> contacts_at(double cx, double theta_g, const ScenePlan& scene,
                                 const SensorGeometry& geom) {
  std::vector<Contact> contacts;

  const TerrainTexture& texture = material_at(scene, cx);
  Contact ground;
  ground.theta_rad = normalize_angle(theta_g);
  ground.kind = ContactKind::Ground;
  ground.depth_m = ground_depth_m(texture, cx);
  ground.absorption = texture.absorption;
  contacts.push_back(ground);

  // At most one obstacle contact: the deepest penetration wins.
  const ObstacleSpec* best = nullptr;
  ObstacleContactGeometry best_geo;
  for (const ObstacleSpec& o : scene.obstacles) {
    const auto geo = obstacle_contact_geometry(cx, o, geom);
    if (geo && (!best || geo->depth_m > best_geo.depth_m)) {
      best = &o;
      best_geo = *geo;
    }
  }
  if (best) {
    Contact c;
    c.kind = ContactKind::Obstacle;
    c.theta_rad = normalize_angle(theta_g - best_geo.gamma_rad);
    // The tube compresses under any contact load; rim penetration adds on top.
    c.depth_m = kNominalDepthRefM * kGroundIndentationFrac + best_geo.depth_m;
    c.absorption = 0.0;  // printed plastic reflects hard
    c.shape = best->shape;
    contacts.push_back(c);
  }
  return contacts;
}

bool touching_insurmountable(double cx, const ScenePlan& scene, const SensorGeometry& geom) {
  for (const ObstacleSpec& o : scene.obstacles) {
    if (resolved_surmountable(o, geom)) continue;
    if (obstacle_contact_geometry(cx, o, geom)) return true;
  }
  return false;
}

}  // namespace

TerrainTexture default_texture(Terrain t) {
  switch (t) {
    case Terrain::Wood: return {15.0, 0.05, 0.05, TexturePattern::Sine};
    case Terrain::Outdoor: return {320.0, 0.008, 0.22, TexturePattern::Sine};
    case Terrain::Soft: return {500.0, 0.14, 0.52, TexturePattern::Sine};
    case Terrain::Ribbed: return {600.0, 0.06, 0.32, TexturePattern::Spikes};
    case Terrain::Nfm: return {260.0, 0.024, 0.40, TexturePattern::Sine};
  }
  return {};
}

double ObstacleSpec::footprint_begin_m() const {
  switch (shape) {
    case ObstacleShape::Rectangle: return ground_position_m;
    default: return ground_position_m - height_m;
  }
}

double ObstacleSpec::footprint_end_m() const {
  switch (shape) {
    case ObstacleShape::Rectangle: return ground_position_m + kRectangleDepthM;
    default: return ground_position_m + height_m;
  }
}

double climb_limit_m(const SensorGeometry& geom) { return 0.05 * geom.wheel_diameter_m; }

bool resolved_surmountable(const ObstacleSpec& o, const SensorGeometry& geom) {
  if (o.surmountable.has_value()) return *o.surmountable;
  return o.height_m <= climb_limit_m(geom);
}

double contact_angle_to_perimeter_distance(double theta_rad, const SensorGeometry& geom) {
  return normalize_angle(theta_rad) * geom.wheel_diameter_m / 2.0;
}

std::optional<ObstacleContactGeometry> obstacle_contact_geometry(double center_x_m,
                                                                 const ObstacleSpec& obstacle,
                                                                 const SensorGeometry& geom) {
  const double r = geom.wheel_radius_m;
  const Point c{center_x_m, r};
  const Point q = closest_boundary_point(c.x, c.y, obstacle);
  const double d = dist(c, q);
  if (d > r + 1e-12) return std::nullopt;  // tolerance keeps the exact-touch case in contact
  ObstacleContactGeometry geo;
  geo.depth_m = std::max(0.0, r - d);
  geo.gamma_rad = std::atan2(q.x - c.x, c.y - q.y);
  return geo;
}

double ground_depth_m(const TerrainTexture& texture, double s_m) {
  const double gain_scale = kNominalReflectionGainCounts * (1.0 - texture.absorption);
  double frac = kGroundIndentationFrac;
  if (gain_scale > 0.0) {
    frac += texture.roughness_amplitude_counts * texture_pattern(texture, s_m) / gain_scale;
  }
  frac = std::clamp(frac, 0.02, 1.0);
  return kNominalDepthRefM * frac;
}

ContactState initial_state(const ScenePlan& scene, const SensorGeometry& geom) {
  ContactState s;
  s.t_ex_ms = 0.0;
  s.center_x_m = 0.0;
  s.center_y_m = geom.wheel_radius_m;
  s.contacts = contacts_at(0.0, scene.theta0_rad, scene, geom);
  return s;
}

ContactState roll_step(const ContactState& state, const ScenePlan& scene,
                       const SensorGeometry& geom, double dt_ms) {
  require(dt_ms > 0.0, Errc::bad_config, "roll_step requires dt > 0");
  const Contact* ground = find_ground(state);
  require(ground != nullptr, Errc::bad_config, "roll_step requires a ground contact");

  const double t_next = state.t_ex_ms + dt_ms;
  const double rolling_ms = std::max(0.0, t_next - std::max(state.t_ex_ms, kPreambleMs));
  const double d_rot = geom.angular_speed_rad_s * rolling_ms / 1000.0;

  const bool stalled = touching_insurmountable(state.center_x_m, scene, geom);

  ContactState next;
  next.t_ex_ms = t_next;
  next.center_y_m = geom.wheel_radius_m;
  next.center_x_m = state.center_x_m + (stalled ? 0.0 : geom.wheel_radius_m * d_rot);
  const double theta_g = normalize_angle(ground->theta_rad - d_rot);
  next.contacts = contacts_at(next.center_x_m, theta_g, scene, geom);
  return next;
}

void validate_scene(const ScenePlan& scene, const SensorGeometry& geom) {
  require(scene.theta0_rad >= 0.0 && scene.theta0_rad < 2.0 * std::numbers::pi,
          Errc::invalid_scene, "initial wheel angle must lie in [0, 2*pi)");
  require(scene.trial_length_m >= 0.0, Errc::invalid_scene, "trial length must be non-negative");
  require(scene.material_transition_m >= 0.0, Errc::invalid_scene,
          "material transition must be non-negative");

  std::vector<std::pair<double, double>> spans;
  for (const ObstacleSpec& o : scene.obstacles) {
    require(o.shape != ObstacleShape::Flat, Errc::invalid_scene, "obstacle shape cannot be Flat");
    require(o.height_m > 0.0, Errc::invalid_scene, "obstacle height must be positive");
    require(o.height_m < geom.wheel_radius_m, Errc::invalid_scene,
            "obstacle height must be below the wheel radius");
    if (o.shape == ObstacleShape::Rectangle && o.height_m > climb_limit_m(geom)) {
      require(!resolved_surmountable(o, geom), Errc::invalid_scene,
              "rectangle above the climb limit must be marked insurmountable");
    }
    spans.emplace_back(o.footprint_begin_m(), o.footprint_end_m());
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    require(spans[i].first >= spans[i - 1].second, Errc::invalid_scene,
            "obstacles overlap along the ground");
  }
}

TrialStates run_trial(const ScenePlan& scene, const SensorGeometry& geom, double duration_ms) {
  validate_scene(scene, geom);
  geom.validate();
  require(duration_ms >= kPreambleMs, Errc::bad_config,
          "trial duration must cover the 10 s stationary preamble");

  TrialStates trial;
  const auto n_states = static_cast<std::size_t>(duration_ms / kTriggerPeriodMs);
  trial.states.reserve(n_states);

  ContactState state = initial_state(scene, geom);
  bool obstacle_active = false;
  bool material_flagged = false;
  for (std::size_t i = 0; i < n_states; ++i) {
    if (i > 0) state = roll_step(state, scene, geom, kTriggerPeriodMs);

    const bool obstacle_now = has_obstacle_contact(state);
    if (obstacle_now != obstacle_active) {
      trial.flags.push_back(
          {state.t_ex_ms, obstacle_now ? FlagKind::ContactStart : FlagKind::ContactEnd});
      obstacle_active = obstacle_now;
    }
    if (!material_flagged && material_active(scene, state.center_x_m)) {
      trial.flags.push_back({state.t_ex_ms, FlagKind::ContactStart});
      material_flagged = true;
    }
    trial.states.push_back(state);
  }
  std::stable_sort(trial.flags.begin(), trial.flags.end(),
                   [](const FlagEvent& a, const FlagEvent& b) { return a.t_ex_ms < b.t_ex_ms; });
  return trial;
}

namespace {

using nlohmann::json;

TexturePattern pattern_from_name(const std::string& name) {
  if (name == "sine") return TexturePattern::Sine;
  if (name == "spikes") return TexturePattern::Spikes;
  fail(Errc::bad_config, "scene.terrain.pattern: unknown pattern '" + name + "'");
}

const char* pattern_name(TexturePattern p) {
  return p == TexturePattern::Sine ? "sine" : "spikes";
}

}  // namespace

ScenePlan scene_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(Errc::bad_config, std::string("scene JSON parse error: ") + e.what());
  }
  try {
    ScenePlan scene;
    scene.name = doc.value("name", "");
    const json& terr = doc.at("terrain");
    scene.terrain = terrain_from_name(terr.at("label").get<std::string>());
    scene.texture = default_texture(scene.terrain);
    if (terr.contains("roughness_amplitude"))
      scene.texture.roughness_amplitude_counts = terr["roughness_amplitude"].get<double>();
    if (terr.contains("spatial_period"))
      scene.texture.spatial_period_m = terr["spatial_period"].get<double>();
    if (terr.contains("absorption")) scene.texture.absorption = terr["absorption"].get<double>();
    if (terr.contains("pattern"))
      scene.texture.pattern = pattern_from_name(terr["pattern"].get<std::string>());
    scene.material_transition_m = doc.value("material_transition", 0.0);
    scene.trial_length_m = doc.value("trial_length", 1.0);
    scene.theta0_rad = doc.value("initial_wheel_angle", 0.0);
    if (doc.contains("obstacles")) {
      for (const json& jo : doc["obstacles"]) {
        ObstacleSpec o;
        o.shape = obstacle_shape_from_name(jo.at("shape").get<std::string>());
        o.height_m = jo.at("height").get<double>();
        o.ground_position_m = jo.at("position").get<double>();
        if (jo.contains("surmountable")) o.surmountable = jo["surmountable"].get<bool>();
        scene.obstacles.push_back(o);
      }
    }
    return scene;
  } catch (const json::exception& e) {
    fail(Errc::bad_config, std::string("scene JSON field error: ") + e.what());
  }
}

std::string scene_to_json(const ScenePlan& scene) {
  json terr{{"label", std::string(terrain_name(scene.terrain))},
            {"roughness_amplitude", scene.texture.roughness_amplitude_counts},
            {"spatial_period", scene.texture.spatial_period_m},
            {"absorption", scene.texture.absorption},
            {"pattern", pattern_name(scene.texture.pattern)}};
  json obstacles = json::array();
  for (const ObstacleSpec& o : scene.obstacles) {
    json jo{{"shape", std::string(obstacle_shape_name(o.shape))},
            {"height", o.height_m},
            {"position", o.ground_position_m}};
    if (o.surmountable.has_value()) jo["surmountable"] = *o.surmountable;
    obstacles.push_back(jo);
  }
  json doc{{"name", scene.name},
           {"terrain", terr},
           {"material_transition", scene.material_transition_m},
           {"obstacles", obstacles},
           {"trial_length", scene.trial_length_m},
           {"initial_wheel_angle", scene.theta0_rad}};
  return doc.dump(2);
}

}  // namespace awts
