#pragma once

#include <vector>

#include "awts/acoustics.hpp"
#include "awts/core.hpp"

namespace awts {

/// Peak-isolation parameters (heights on traces normalized to max 1.0).
struct PeakParams {
  double ema_alpha = 0.75;
  double min_height = 0.3;
  int min_distance = 20;  // samples
  double min_prominence = 0.6;
  double min_threshold = 0.0001;

  void validate() const;
};

struct PipelineConfig {
  std::size_t shifted_length = 2000;
  double baseline_cutoff_hz = 100.0;
  std::size_t drop_prefix = 350;
  std::size_t keep_length = 1750;
  std::size_t terrain_window = 5;
  std::size_t obstacle_window = 90;

  /// Aligned samples the baselining path consumes (drop_prefix + keep_length;
  /// 2100 with the defaults, taken from the raw record before the ranging
  /// window is truncated to shifted_length).
  std::size_t baselined_input_length() const;

  void validate() const;
};

/// Mean amplitude over every sample of every cycle (the padding value).
double trial_mean_amplitude(const ExperimentLog& log);

/// Index of the first sample above the send-pulse onset threshold. The
/// threshold is a robust baseline estimate (median + 6 sigma via MAD) so it
/// tolerates trigger delays shorter than the pre-pulse window. Throws
/// no_send_pulse when nothing crosses it.
std::size_t send_pulse_onset(const std::vector<std::uint16_t>& samples);
std::size_t send_pulse_onset(const std::vector<double>& samples);

/// Shift a raw cycle so the send-pulse onset is ranging time 0, truncate to
/// shifted_length, pad the tail with the trial mean amplitude.
Trace align_and_trim(const RangingCycle& raw, double trial_mean_amplitude,
                     const PipelineConfig& cfg = {});

/// Low-pass baseline subtraction, rectification, per-trace normalization (by
/// the maximum of the region that survives truncation), then truncation to
/// keep_length samples. Throws degenerate_normalization for all-flat traces.
Trace baseline_rectify_normalize(const Trace& shifted, const PipelineConfig& cfg = {});

/// Batch variant: additionally re-aligns every trace's send pulse onset to
/// the batch minimum before normalizing.
std::vector<Trace> baseline_rectify_normalize_batch(const std::vector<Trace>& shifted,
                                                    const PipelineConfig& cfg = {});

/// y[0] = x[0]; y[i] = alpha*x[i] + (1-alpha)*y[i-1].
std::vector<double> ema_filter(const std::vector<double>& trace, double alpha);

/// Local maxima (plateaus collapse to their midpoint; record edges excluded)
/// filtered in order by: height, vertical threshold against both neighbours,
/// minimum distance (keeping taller peaks first), and prominence. Matches
/// the conventional peak-finder semantics; the test suite pins it against an
/// independent brute-force oracle.
std::vector<std::size_t> find_peak_indices(const std::vector<double>& trace,
                                           const PeakParams& params);

PeakSet find_peaks(const std::vector<double>& trace, const PeakParams& params,
                   double sample_rate_hz = kSampleRateHz);

struct WindowingReport {
  std::vector<TraceWindow> windows;
  std::size_t skipped_unfit = 0;     // windows that did not fit in the trial
  std::size_t skipped_tail = 0;      // leftover traces shorter than one window
  std::size_t skipped_no_flag = 0;   // trials lacking the required flag
  std::size_t skipped_cycles = 0;    // cycles with no detectable send pulse
};

/// Terrain task: non-overlapping windows of terrain_window shifted traces
/// (post-flag region for non-Wood surfaces). Obstacle task: per trial, one
/// obstacle_window-sized window with at most 15 traces before the first
/// ContactStart flag plus one flat-ground window from the region bounded by
/// trace 0 and 15 traces before the flag.
WindowingReport make_windows(const ExperimentLog& log, Task task, const PipelineConfig& cfg = {});

}  // namespace awts
