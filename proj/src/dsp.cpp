#include "awts/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "awts/scene.hpp"

namespace awts {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const auto lower = std::max_element(values.begin(), values.begin() + mid);
    m = (m + *lower) / 2.0;
  }
  return m;
}

/// Robust onset threshold: median + 6 sigma, sigma estimated from the MAD.
template <typename T>
std::size_t onset_index(const std::vector<T>& samples) {
  require(!samples.empty(), Errc::no_send_pulse, "empty trace");
  std::vector<double> values(samples.begin(), samples.end());
  const double med = median_of(values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
  const double mad = median_of(std::move(dev));
  const double threshold = med + 6.0 * 1.4826 * mad;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > threshold) return i;
  }
  fail(Errc::no_send_pulse, "no sample exceeds the onset threshold");
}

std::vector<double> lowpass_forward(const std::vector<double>& x, double cutoff_hz,
                                    double sample_rate_hz) {
  const double a = 1.0 - std::exp(-2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz);
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t i = 1; i < x.size(); ++i) y[i] = y[i - 1] + a * (x[i] - y[i - 1]);
  return y;
}

std::vector<double> baseline_and_rectify(const std::vector<double>& x, const PipelineConfig& cfg) {
  std::vector<double> y = lowpass_forward(x, cfg.baseline_cutoff_hz, kSampleRateHz);
  std::vector<double> b(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) b[i] = std::abs(x[i] - y[i]);
  return b;
}

/// Normalize by the maximum of the kept region and truncate. The divisor is
/// taken over the surviving samples so every processed trace has max 1.0.
Trace normalize_and_truncate(std::vector<double> rectified, double t_ex_ms,
                             const PipelineConfig& cfg) {
  const std::size_t lo = cfg.drop_prefix;
  const std::size_t hi = cfg.drop_prefix + cfg.keep_length;
  require(rectified.size() >= hi, Errc::bad_config, "trace shorter than drop_prefix + keep_length");
  double max_kept = 0.0;
  for (std::size_t i = lo; i < hi; ++i) max_kept = std::max(max_kept, rectified[i]);
  require(max_kept > 0.0, Errc::degenerate_normalization,
          "trace is flat; nothing to normalize against");
  Trace out;
  out.stage = TraceStage::Baselined1750;
  out.t_ex_ms = t_ex_ms;
  out.samples.resize(cfg.keep_length);
  for (std::size_t i = lo; i < hi; ++i) out.samples[i - lo] = rectified[i] / max_kept;
  return out;
}

}  // namespace

void PeakParams::validate() const {
  require(ema_alpha > 0.0 && ema_alpha <= 1.0, Errc::bad_config, "ema_alpha must be in (0, 1]");
  require(min_height > 0.0 && min_height <= 1.0, Errc::bad_config, "min_height must be in (0, 1]");
  require(min_distance >= 1, Errc::bad_config, "min_distance must be >= 1");
  require(min_prominence > 0.0 && min_prominence <= 1.0, Errc::bad_config,
          "min_prominence must be in (0, 1]");
  require(min_threshold >= 0.0 && min_threshold <= 1.0, Errc::bad_config,
          "min_threshold must be in [0, 1]");
}

void PipelineConfig::validate() const {
  require(shifted_length >= 1 && shifted_length <= kRawCycleSamples, Errc::bad_config,
          "shifted_length must lie in [1, 4000]");
  require(baseline_cutoff_hz > 0.0, Errc::bad_config, "baseline cutoff must be positive");
  // The baselining path reads drop_prefix + keep_length aligned samples out
  // of the raw record (2100 with the bench defaults), so the bound is the
  // raw cycle, not the 2000-sample ranging window.
  require(drop_prefix + keep_length <= kRawCycleSamples, Errc::bad_config,
          "drop_prefix + keep_length must not exceed the raw cycle length");
  require(terrain_window >= 1 && obstacle_window >= 1, Errc::bad_config,
          "window sizes must be >= 1");
}

std::size_t PipelineConfig::baselined_input_length() const { return drop_prefix + keep_length; }

double trial_mean_amplitude(const ExperimentLog& log) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const RangingCycle& c : log.cycles) {
    sum = std::accumulate(c.samples.begin(), c.samples.end(), sum);
    count += c.samples.size();
  }
  require(count > 0, Errc::bad_config, "log has no samples");
  return sum / static_cast<double>(count);
}

std::size_t send_pulse_onset(const std::vector<std::uint16_t>& samples) {
  return onset_index(samples);
}

std::size_t send_pulse_onset(const std::vector<double>& samples) { return onset_index(samples); }

namespace {

Trace align_to_length(const RangingCycle& raw, double trial_mean_amplitude, std::size_t length) {
  require(raw.samples.size() == kRawCycleSamples, Errc::bad_config,
          "align_and_trim expects a raw 4000-sample cycle");
  const std::size_t onset = send_pulse_onset(raw.samples);

  Trace out;
  out.stage = TraceStage::Shifted2000;
  out.t_ex_ms = raw.t_ex_ms;
  out.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t src = onset + i;
    out.samples[i] =
        src < raw.samples.size() ? static_cast<double>(raw.samples[src]) : trial_mean_amplitude;
  }
  return out;
}

}  // namespace

Trace align_and_trim(const RangingCycle& raw, double trial_mean_amplitude,
                     const PipelineConfig& cfg) {
  cfg.validate();
  return align_to_length(raw, trial_mean_amplitude, cfg.shifted_length);
}

Trace baseline_rectify_normalize(const Trace& shifted, const PipelineConfig& cfg) {
  cfg.validate();
  require(shifted.stage == TraceStage::Shifted2000, Errc::bad_config,
          "expected a Shifted2000 trace");
  require(shifted.samples.size() >= cfg.baselined_input_length(), Errc::bad_config,
          "trace too short for drop_prefix + keep_length");
  return normalize_and_truncate(baseline_and_rectify(shifted.samples, cfg), shifted.t_ex_ms, cfg);
}

std::vector<Trace> baseline_rectify_normalize_batch(const std::vector<Trace>& shifted,
                                                    const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<double>> rectified;
  rectified.reserve(shifted.size());
  std::vector<std::size_t> onsets;
  onsets.reserve(shifted.size());
  for (const Trace& t : shifted) {
    require(t.stage == TraceStage::Shifted2000, Errc::bad_config, "expected Shifted2000 traces");
    require(t.samples.size() >= cfg.baselined_input_length(), Errc::bad_config,
            "trace too short for drop_prefix + keep_length");
    rectified.push_back(baseline_and_rectify(t.samples, cfg));
    onsets.push_back(onset_index(rectified.back()));
  }

  const std::size_t target =
      onsets.empty() ? 0 : *std::min_element(onsets.begin(), onsets.end());

  std::vector<Trace> out;
  out.reserve(shifted.size());
  for (std::size_t k = 0; k < rectified.size(); ++k) {
    std::vector<double>& r = rectified[k];
    const std::size_t shift = onsets[k] - target;
    if (shift > 0) {
      std::rotate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(shift), r.end());
      // fill the vacated tail by holding the last real sample
      std::fill(r.end() - static_cast<std::ptrdiff_t>(shift), r.end(), r[r.size() - shift - 1]);
    }
    out.push_back(normalize_and_truncate(std::move(r), shifted[k].t_ex_ms, cfg));
  }
  return out;
}

std::vector<double> ema_filter(const std::vector<double>& trace, double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, Errc::bad_config, "alpha must be in (0, 1]");
  std::vector<double> y(trace.size());
  if (trace.empty()) return y;
  y[0] = trace[0];
  for (std::size_t i = 1; i < trace.size(); ++i) {
    y[i] = alpha * trace[i] + (1.0 - alpha) * y[i - 1];
  }
  return y;
}

std::vector<std::size_t> find_peak_indices(const std::vector<double>& x,
                                           const PeakParams& params) {
  params.validate();
  std::vector<std::size_t> peaks;
  if (x.size() < 3) return peaks;

  // Local maxima; a flat plateau collapses to its midpoint and plateaus
  // touching either record edge are not peaks.
  const std::size_t i_max = x.size() - 1;
  for (std::size_t i = 1; i < i_max;) {
    if (x[i - 1] < x[i]) {
      std::size_t ahead = i + 1;
      while (ahead < i_max && x[ahead] == x[i]) ++ahead;
      if (x[ahead] < x[i]) {
        peaks.push_back((i + ahead - 1) / 2);
        i = ahead;
        continue;
      }
    }
    ++i;
  }

  // 1) height
  std::erase_if(peaks, [&](std::size_t p) { return x[p] < params.min_height; });

  // 2) vertical threshold against both immediate neighbours
  std::erase_if(peaks, [&](std::size_t p) {
    return std::min(x[p] - x[p - 1], x[p] - x[p + 1]) < params.min_threshold;
  });

  // 3) distance: walk peaks from tallest to smallest (ties: rightmost first)
  //    and drop everything closer than min_distance to a kept peak.
  if (!peaks.empty()) {
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[peaks[a]] < x[peaks[b]]; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t oi = order.size(); oi-- > 0;) {
      const std::size_t j = order[oi];
      if (!keep[j]) continue;
      for (std::size_t k = j; k-- > 0 && peaks[j] - peaks[k] < static_cast<std::size_t>(params.min_distance);) {
        keep[k] = false;
      }
      for (std::size_t k = j + 1;
           k < peaks.size() && peaks[k] - peaks[j] < static_cast<std::size_t>(params.min_distance);
           ++k) {
        keep[k] = false;
      }
    }
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < peaks.size(); ++k) {
      if (keep[k]) kept.push_back(peaks[k]);
    }
    peaks = std::move(kept);
  }

  // 4) prominence: height above the higher of the two lowest valleys between
  //    the peak and the nearest taller sample (or record edge) on each side.
  std::erase_if(peaks, [&](std::size_t p) {
    double left_min = x[p];
    for (std::size_t i = p;; --i) {
      if (x[i] > x[p]) break;
      left_min = std::min(left_min, x[i]);
      if (i == 0) break;
    }
    double right_min = x[p];
    for (std::size_t i = p; i < x.size() && x[i] <= x[p]; ++i) {
      right_min = std::min(right_min, x[i]);
    }
    const double prominence = x[p] - std::max(left_min, right_min);
    return prominence < params.min_prominence;
  });

  return peaks;
}

PeakSet find_peaks(const std::vector<double>& trace, const PeakParams& params,
                   double sample_rate_hz) {
  PeakSet set;
  for (std::size_t p : find_peak_indices(trace, params)) {
    set.peaks.push_back({ranging_time_of_sample(p, sample_rate_hz), trace[p]});
  }
  return set;
}

namespace {

ScenePlan scene_of(const ExperimentLog& log) {
  require(!log.scene_ref.empty(), Errc::bad_config, "log carries no scene document");
  return scene_from_json(log.scene_ref);
}

std::vector<Trace> aligned_traces(const ExperimentLog& log, std::size_t length,
                                  std::size_t* skipped_cycles) {
  const double mean = trial_mean_amplitude(log);
  std::vector<Trace> shifted;
  shifted.reserve(log.cycles.size());
  for (const RangingCycle& c : log.cycles) {
    try {
      shifted.push_back(align_to_length(c, mean, length));
    } catch (const Error& e) {
      if (e.code() != Errc::no_send_pulse) throw;
      ++*skipped_cycles;
    }
  }
  return shifted;
}

std::size_t first_flag_index(const std::vector<Trace>& traces, const ExperimentLog& log,
                             bool* found) {
  *found = false;
  for (const FlagEvent& f : log.flags) {
    if (f.kind != FlagKind::ContactStart) continue;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      if (traces[i].t_ex_ms >= f.t_ex_ms) {
        *found = true;
        return i;
      }
    }
    return traces.size();
  }
  return traces.size();
}

}  // namespace

WindowingReport make_windows(const ExperimentLog& log, Task task, const PipelineConfig& cfg) {
  cfg.validate();
  WindowingReport report;
  const ScenePlan scene = scene_of(log);
  const std::size_t aligned_length =
      task == Task::Terrain ? cfg.shifted_length : cfg.baselined_input_length();
  std::vector<Trace> shifted = aligned_traces(log, aligned_length, &report.skipped_cycles);

  if (task == Task::Terrain) {
    std::size_t begin = 0;
    if (scene.terrain != Terrain::Wood) {
      bool found = false;
      begin = first_flag_index(shifted, log, &found);
      if (!found) {
        ++report.skipped_no_flag;
        return report;
      }
    }
    const ClassLabel label = ClassLabel::terrain(scene.terrain);
    std::size_t i = begin;
    for (; i + cfg.terrain_window <= shifted.size(); i += cfg.terrain_window) {
      TraceWindow w;
      w.label = label;
      w.traces.assign(shifted.begin() + static_cast<std::ptrdiff_t>(i),
                      shifted.begin() + static_cast<std::ptrdiff_t>(i + cfg.terrain_window));
      w.t_ex_begin_ms = w.traces.front().t_ex_ms;
      w.t_ex_end_ms = w.traces.back().t_ex_ms;
      report.windows.push_back(std::move(w));
    }
    if (i < shifted.size()) report.skipped_tail += shifted.size() - i;
    return report;
  }

  // Obstacle task. One obstacle window per trial (at most 15 pre-flag
  // traces) plus one flat-ground window from the pre-obstacle region.
  bool found = false;
  const std::size_t flag = first_flag_index(shifted, log, &found);
  if (!found) {
    ++report.skipped_no_flag;
    return report;
  }
  const std::vector<Trace> processed = baseline_rectify_normalize_batch(shifted, cfg);
  const std::size_t n = processed.size();
  auto slice_window = [&](std::size_t begin, ClassLabel label) {
    TraceWindow w;
    w.label = label;
    w.traces.assign(processed.begin() + static_cast<std::ptrdiff_t>(begin),
                    processed.begin() + static_cast<std::ptrdiff_t>(begin + cfg.obstacle_window));
    w.t_ex_begin_ms = w.traces.front().t_ex_ms;
    w.t_ex_end_ms = w.traces.back().t_ex_ms;
    report.windows.push_back(std::move(w));
  };

  const bool shaped = !scene.obstacles.empty() &&
                      scene.obstacles.front().shape != ObstacleShape::Rectangle;
  const std::size_t start = flag >= 15 ? flag - 15 : 0;
  if (shaped && start + cfg.obstacle_window <= n) {
    slice_window(start, ClassLabel::obstacle(scene.obstacles.front().shape));
  } else {
    ++report.skipped_unfit;
  }

  const std::size_t flat_end = flag >= 15 ? flag - 15 : 0;
  if (flat_end >= cfg.obstacle_window) {
    slice_window(0, ClassLabel::obstacle(ObstacleShape::Flat));
  } else {
    ++report.skipped_unfit;
  }
  return report;
}

}  // namespace awts
