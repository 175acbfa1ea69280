#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "awts/acoustics.hpp"
#include "awts/classify.hpp"
#include "awts/core.hpp"
#include "awts/localize.hpp"
#include "awts/scene.hpp"

namespace awts {

/// Scene factories for the three bench experiments.

/// Rolling-surface trial: wood approach strip, then the labelled material.
ScenePlan make_terrain_scene(Terrain terrain, double transition_m = 0.15);

/// Obstacle-shape trial on wood: one surmountable semicircle or triangle.
ScenePlan make_obstacle_scene(ObstacleShape shape, double height_m, double position_m = 0.3);

/// Collision trial: a rectangle placed so the wheel face reaches it
/// approach_s seconds after rolling starts.
struct HeightTrialPlan {
  ScenePlan scene;
  double duration_ms = 0.0;
};
HeightTrialPlan make_height_trial(double height_m, const SensorGeometry& geom,
                                  double approach_s = 0.8, double post_s = 0.8);

/// duration = preamble + trial_length / (omega * r).
double trial_duration_ms(const ScenePlan& scene, const SensorGeometry& geom);

/// run_trial + synthesize_trial in one call.
ExperimentLog simulate_trial(const ScenePlan& scene, const SensorGeometry& geom,
                             const AcousticParams& params, double duration_ms);

/// Windows on disk: one JSON object per line with task, label, t_ex span and
/// trace data.
void save_windows(const std::vector<TraceWindow>& windows, const std::string& path);
std::vector<TraceWindow> load_windows(const std::string& path);

std::string eval_report_json(const EvalReport& report);
void write_eval_report(const EvalReport& report, const std::string& path);
void write_confusion_csv(const EvalReport& report, const std::string& path);
void write_pr_csv(const EvalReport& report, const std::string& path);

std::string height_estimate_json(const HeightEstimate& estimate);
void write_peaks_csv(const std::vector<CyclePeaks>& peaks, const std::string& path);

/// Box-plot quantile rows (one per group) for the collision experiment.
struct BoxStats {
  std::string group;
  std::size_t count = 0;
  double mean = 0.0, min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0;
};
BoxStats box_stats(const std::string& group, std::vector<double> values);
void write_boxplot_csv(const std::vector<BoxStats>& rows, const std::string& path);

/// Experiment runner configuration (JSON file; see docs/formats.md).
struct ExperimentConfig {
  int experiment = 3;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  SensorGeometry geometry = SensorGeometry::prototype();
  AcousticParams acoustics = AcousticParams::bench();

  // experiment 1 (rolling surfaces)
  int trials_per_surface = 10;
  double train_fraction = 0.7;
  int max_windows_per_trial = 12;

  // experiment 2 (obstacle shapes)
  int block1_trials_per_shape = 134;
  int block2_trials_per_combo = 15;

  // experiment 3 (collision heights)
  int short_trials = 43;
  int tall_trials = 12;
  double short_height_m = 0.025;
  double tall_height_m = 0.07;

  TrainConfig train;
};

/// Parse and validate a config file; schema violations name the offending
/// field. Relative output directories resolve under $AWTS_DATA_DIR when set.
ExperimentConfig load_experiment_config(const std::string& path);

/// One planned trial of an experiment run (exposed so callers can inspect
/// the protocol without simulating).
struct PlannedTrial {
  ScenePlan scene;
  double duration_ms = 0.0;
  std::uint64_t seed = 0;
  int split = 0;  // 0 train, 1 test (classification experiments)
  std::string group;
  std::string stem;  // output file stem
};
std::vector<PlannedTrial> plan_trials(const ExperimentConfig& config);

/// Execute the configured experiment end to end and write every artifact
/// (trial files, windows, model, reports, plot-ready CSVs) under output_dir.
void cli_run(const ExperimentConfig& config);

}  // namespace awts
