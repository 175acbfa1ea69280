#pragma once

#include <cstdint>

#include "awts/core.hpp"
#include "awts/rng.hpp"
#include "awts/scene.hpp"

namespace awts {

/// Synthesis knobs for raw ranging cycles. Amplitudes are ADC counts above
/// the baseline level; attenuation applies exponentially over the 2x acoustic
/// round trip.
struct AcousticParams {
  double send_pulse_amplitude = 2800.0;
  double baseline_level = 25.0;
  double reflection_gain_g0 = kNominalReflectionGainCounts;
  double reflection_depth_ref_m = kNominalDepthRefM;
  double attenuation_per_m = 0.03;
  double end_echo_gain = 0.0;   // open tube end reflection; 0 disables
  double end_adapter_m = 0.06;  // non-wrapped tail between wheel exit and open end
  double comb_gain = 0.0;       // rim-feature reflection comb; 0 disables
  int comb_teeth = 12;
  double noise_std = 12.0;
  double clutter_rate = 0.5;  // spurious resonance peaks per cycle (Poisson)
  double trigger_jitter_max_ms = kTriggerJitterMaxMs;
  std::uint64_t rng_seed = 1;

  /// Send pulse width in samples, n_cycles / f at the ADC rate.
  double send_pulse_width_samples(const SensorGeometry& geom) const;

  void validate() const;

  /// Noise-free variant: no noise, no clutter (jitter kept).
  AcousticParams noise_free() const;

  /// Bench profile: defaults plus the open-end echo of the prototype tube.
  static AcousticParams bench();
};

/// Reflected pulse amplitude for one contact before attenuation:
/// g0 * min(depth / depth_ref, 1) * (1 - absorption).
double reflection_gain(double depth_m, double absorption, const AcousticParams& params);

/// Isolated return peaks of one cycle (ranging time and normalized
/// amplitude).
struct PeakSet {
  struct Peak {
    double t_r_ms = 0.0;
    double amplitude = 0.0;  // normalized 0..1
  };
  std::vector<Peak> peaks;
  std::size_t source_cycle = 0;
};

/// Synthesize one raw 4000-sample cycle: trigger-delay baseline, send pulse,
/// one reflection per contact at its time-of-flight (triangle contacts add a
/// half-amplitude echo one pulse width later), the open-end echo when
/// enabled, Poisson clutter, Gaussian noise, clamped to the ADC range.
/// Reflections passing earlier indentations lose (1-absorption)^2 per pass.
RangingCycle synthesize_cycle(const ContactState& state, const AcousticParams& params,
                              const SensorGeometry& geom, Rng& rng);

/// Convenience overload seeding a fresh stream from params.rng_seed.
RangingCycle synthesize_cycle(const ContactState& state, const AcousticParams& params,
                              const SensorGeometry& geom);

/// One cycle per state; flags are copied from the simulator ground truth.
ExperimentLog synthesize_trial(const TrialStates& trial, const ScenePlan& scene,
                               const AcousticParams& params, const SensorGeometry& geom);

}  // namespace awts
