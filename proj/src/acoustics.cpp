#include "awts/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace awts {

namespace {

/// Add a Hann-shaped envelope pulse centred at `center` (fractional samples
/// allowed). Contributions beyond the record are dropped.
void add_pulse(std::vector<double>& trace, double center, double width, double amplitude) {
  if (width < 2.0 || amplitude == 0.0) return;
  const double half = width / 2.0;
  const auto lo = static_cast<long>(std::ceil(center - half));
  const auto hi = static_cast<long>(std::floor(center + half));
  for (long i = std::max<long>(lo, 0); i <= hi && i < static_cast<long>(trace.size()); ++i) {
    const double phase = (static_cast<double>(i) - center) / half;  // -1..1
    trace[static_cast<std::size_t>(i)] +=
        amplitude * 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
  }
}

/// Fraction of the travelling wave blocked by an indentation: a sharp dent
/// (triangle edge, rectangle corner) obstructs the bore harder than a smooth
/// one, in proportion to how deep it is.
double obstacle_depth_frac(const Contact& contact, const AcousticParams& params) {
  if (contact.kind != ContactKind::Obstacle) return 0.0;
  return std::clamp(contact.depth_m / params.reflection_depth_ref_m, 0.0, 1.0);
}

/// Fraction of the travelling wave an obstacle dent blocks. A knife edge is
/// an abrupt reflective barrier; a broad dome mostly lets the wave through.
/// The dent's character is set by the shape, not by how far it is pressed.
double transmission_blocking(const Contact& contact, const AcousticParams& params) {
  if (obstacle_depth_frac(contact, params) <= 0.0) return 0.0;
  if (contact.shape == ObstacleShape::Triangle) return 0.75;
  if (contact.shape == ObstacleShape::SemiCircle) return 0.25;
  return 0.50;  // rectangle corner
}

/// Waves crossing a constricted segment slow down; a long gentle dome adds
/// far more transmitted-path delay than a single pinch line (round trip, ms).
double constriction_delay_ms(const Contact& contact, const AcousticParams& params) {
  if (obstacle_depth_frac(contact, params) <= 0.0) return 0.0;
  if (contact.shape == ObstacleShape::Triangle) return 0.15;
  if (contact.shape == ObstacleShape::SemiCircle) return 0.60;
  return 0.30;  // rectangle corner
}

}  // namespace

double AcousticParams::send_pulse_width_samples(const SensorGeometry& geom) const {
  return geom.pulse_cycles / geom.pulse_frequency_hz * kSampleRateHz;
}

void AcousticParams::validate() const {
  require(send_pulse_amplitude >= 0.0 && baseline_level >= 0.0 && reflection_gain_g0 >= 0.0 &&
              reflection_depth_ref_m > 0.0 && attenuation_per_m >= 0.0 && noise_std >= 0.0 &&
              clutter_rate >= 0.0 && end_echo_gain >= 0.0 && end_adapter_m >= 0.0 &&
              comb_gain >= 0.0 && comb_teeth >= 0,
          Errc::bad_config, "acoustic parameters must be non-negative");
  require(trigger_jitter_max_ms >= 0.0 && trigger_jitter_max_ms <= kTriggerJitterMaxMs,
          Errc::bad_config, "trigger jitter bound must lie in [0, 7.5] ms");
}

AcousticParams AcousticParams::noise_free() const {
  AcousticParams p = *this;
  p.noise_std = 0.0;
  p.clutter_rate = 0.0;
  return p;
}

AcousticParams AcousticParams::bench() {
  AcousticParams p;
  p.end_echo_gain = 1400.0;
  p.comb_gain = 450.0;
  return p;
}

double reflection_gain(double depth_m, double absorption, const AcousticParams& params) {
  const double depth_frac = std::min(depth_m / params.reflection_depth_ref_m, 1.0);
  return params.reflection_gain_g0 * std::max(depth_frac, 0.0) *
         std::clamp(1.0 - absorption, 0.0, 1.0);
}

RangingCycle synthesize_cycle(const ContactState& state, const AcousticParams& params,
                              const SensorGeometry& geom, Rng& rng) {
  params.validate();
  const double fs = kSampleRateHz;
  const double width = params.send_pulse_width_samples(geom);
  const double pulse_duration_ms = geom.pulse_cycles / geom.pulse_frequency_hz * 1000.0;

  RangingCycle cycle;
  cycle.t_ex_ms = state.t_ex_ms;
  cycle.sample_rate_hz = fs;
  cycle.trigger_delay_ms = rng.uniform(0.0, params.trigger_jitter_max_ms);

  std::vector<double> trace(kRawCycleSamples, params.baseline_level);

  // Send pulse: onset at the trigger delay, envelope centred half a width in.
  const double onset = cycle.trigger_delay_ms / 1000.0 * fs;
  add_pulse(trace, onset + width / 2.0, width, params.send_pulse_amplitude);

  // Walk the waveguide outward: contacts reflect, rim features imprint their
  // fixed comb of small reflections, and every indentation passed on the way
  // transmits (1 - absorption - blocking)^2 of the remaining energy.
  std::vector<const Contact*> ordered;
  for (const Contact& contact : state.contacts) ordered.push_back(&contact);
  std::sort(ordered.begin(), ordered.end(), [](const Contact* a, const Contact* b) {
    return normalize_angle(a->theta_rad) < normalize_angle(b->theta_rad);
  });

  auto contact_return = [&](const Contact& contact, double transmission, double delay_ms) {
    const double x = contact_angle_to_perimeter_distance(contact.theta_rad, geom);
    const double path = 2.0 * (geom.inner_length_m + x);
    const double t_r_ms = path / geom.speed_of_sound_mps * 1000.0 + delay_ms;
    const double gain = reflection_gain(contact.depth_m, contact.absorption, params) *
                        std::exp(-params.attenuation_per_m * path) * transmission;
    const double center = onset + t_r_ms / 1000.0 * fs;
    // A broad smooth dent stretches the reflection; a sharp one keeps it tight.
    const double pulse_width =
        contact.kind == ContactKind::Obstacle && contact.shape == ObstacleShape::SemiCircle
            ? width * 2.0
            : width;
    add_pulse(trace, center, pulse_width, gain);
    if (contact.shape == ObstacleShape::Triangle && contact.kind == ContactKind::Obstacle) {
      // Secondary face echo one pulse duration later at half amplitude.
      add_pulse(trace, center + pulse_duration_ms / 1000.0 * fs, width, gain * 0.5);
    }
  };

  auto comb_return = [&](int tooth, double transmission, double delay_ms) {
    const double theta = (tooth + 0.5) * 2.0 * std::numbers::pi / params.comb_teeth;
    const double x = theta * geom.wheel_diameter_m / 2.0;
    const double path = 2.0 * (geom.inner_length_m + x);
    const double t_r_ms = path / geom.speed_of_sound_mps * 1000.0 + delay_ms;
    const double gain =
        params.comb_gain * std::exp(-params.attenuation_per_m * path) * transmission;
    add_pulse(trace, onset + t_r_ms / 1000.0 * fs, width, gain);
  };

  double transmission = 1.0;
  double delay_ms = 0.0;
  std::size_t next_contact = 0;
  auto pass_contact = [&](const Contact& contact) {
    contact_return(contact, transmission, delay_ms);
    const double pass = std::clamp(
        1.0 - contact.absorption - transmission_blocking(contact, params), 0.0, 1.0);
    transmission *= pass * pass;
    delay_ms += constriction_delay_ms(contact, params);
  };

  if (params.comb_gain > 0.0 && params.comb_teeth > 0) {
    for (int tooth = 0; tooth < params.comb_teeth; ++tooth) {
      const double tooth_theta = (tooth + 0.5) * 2.0 * std::numbers::pi / params.comb_teeth;
      while (next_contact < ordered.size() &&
             normalize_angle(ordered[next_contact]->theta_rad) < tooth_theta) {
        pass_contact(*ordered[next_contact]);
        ++next_contact;
      }
      comb_return(tooth, transmission, delay_ms);
    }
  }
  for (; next_contact < ordered.size(); ++next_contact) pass_contact(*ordered[next_contact]);

  if (params.end_echo_gain > 0.0) {
    // The open end sits past the hub adapter, beyond every contact position;
    // the open-end transition smears the reflection wide.
    const double path = 2.0 * (geom.total_length_m() + params.end_adapter_m);
    const double t_r_ms = path / geom.speed_of_sound_mps * 1000.0 + delay_ms;
    double gain = params.end_echo_gain * std::exp(-params.attenuation_per_m * path) *
                  transmission;
    add_pulse(trace, onset + t_r_ms / 1000.0 * fs, width * 2.2, gain);
  }

  const int n_clutter = rng.poisson(params.clutter_rate);
  for (int i = 0; i < n_clutter; ++i) {
    const double center = rng.uniform(0.0, static_cast<double>(kRawCycleSamples));
    const double amp = rng.uniform(0.1, 0.9) * params.reflection_gain_g0;
    add_pulse(trace, center, width, amp);
  }

  cycle.samples.resize(kRawCycleSamples);
  bool clipped = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    double v = trace[i];
    if (params.noise_std > 0.0) v += rng.gaussian(params.noise_std);
    if (v < 0.0 || v > kAdcMax) clipped = true;
    v = std::clamp(v, 0.0, kAdcMax);
    cycle.samples[i] = static_cast<std::uint16_t>(std::llround(v));
  }
  cycle.clipped = clipped;
  return cycle;
}

RangingCycle synthesize_cycle(const ContactState& state, const AcousticParams& params,
                              const SensorGeometry& geom) {
  Rng rng(params.rng_seed);
  return synthesize_cycle(state, params, geom, rng);
}

ExperimentLog synthesize_trial(const TrialStates& trial, const ScenePlan& scene,
                               const AcousticParams& params, const SensorGeometry& geom) {
  ExperimentLog log;
  log.geometry = geom;
  log.scene_ref = scene_to_json(scene);
  log.seed = params.rng_seed;
  log.flags = trial.flags;

  nlohmann::json jp{{"send_pulse_amplitude", params.send_pulse_amplitude},
                    {"baseline_level", params.baseline_level},
                    {"reflection_gain_g0", params.reflection_gain_g0},
                    {"reflection_depth_ref_m", params.reflection_depth_ref_m},
                    {"attenuation_per_m", params.attenuation_per_m},
                    {"end_echo_gain", params.end_echo_gain},
                    {"end_adapter_m", params.end_adapter_m},
                    {"comb_gain", params.comb_gain},
                    {"comb_teeth", params.comb_teeth},
                    {"noise_std", params.noise_std},
                    {"clutter_rate", params.clutter_rate},
                    {"trigger_jitter_max_ms", params.trigger_jitter_max_ms},
                    {"rng_seed", params.rng_seed}};
  log.params_json = jp.dump();

  Rng rng(params.rng_seed);
  log.cycles.reserve(trial.states.size());
  for (std::size_t i = 0; i < trial.states.size(); ++i) {
    RangingCycle cycle = synthesize_cycle(trial.states[i], params, geom, rng);
    const Contact* ground = nullptr;
    for (const Contact& c : trial.states[i].contacts) {
      if (c.kind == ContactKind::Ground) ground = &c;
    }
    cycle.wheel_angle_rad = ground ? ground->theta_rad : 0.0;
    log.cycles.push_back(std::move(cycle));
  }
  return log;
}

}  // namespace awts
