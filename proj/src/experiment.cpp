#include "awts/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "awts/dsp.hpp"
#include "awts/rng.hpp"
#include "awts/telemetry.hpp"
#include "json.hpp"

namespace awts {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double sample_theta0(std::size_t trial_index, Rng& rng) {
  const double base = static_cast<double>(trial_index % 12) * 30.0;
  return normalize_angle((base + rng.uniform(-20.0, 20.0)) * std::numbers::pi / 180.0);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream file(path);
  require(file.good(), Errc::io_error, "cannot open '" + path + "' for writing");
  return file;
}

}  // namespace

ScenePlan make_terrain_scene(Terrain terrain, double transition_m) {
  ScenePlan scene;
  scene.name = std::string("terrain-") + std::string(terrain_name(terrain));
  scene.terrain = terrain;
  scene.texture = default_texture(terrain);
  scene.material_transition_m = terrain == Terrain::Wood ? 0.0 : transition_m;
  scene.trial_length_m = 1.2;
  return scene;
}

ScenePlan make_obstacle_scene(ObstacleShape shape, double height_m, double position_m) {
  ScenePlan scene;
  std::ostringstream name;
  name << "obstacle-" << obstacle_shape_name(shape) << "-"
       << static_cast<int>(std::lround(height_m * 1000.0)) << "mm";
  scene.name = name.str();
  scene.terrain = Terrain::Wood;
  scene.texture = default_texture(Terrain::Wood);
  ObstacleSpec o;
  o.shape = shape;
  o.height_m = height_m;
  o.ground_position_m = position_m;
  o.surmountable = true;
  scene.obstacles.push_back(o);
  scene.trial_length_m = 0.75;
  return scene;
}

HeightTrialPlan make_height_trial(double height_m, const SensorGeometry& geom, double approach_s,
                                  double post_s) {
  const double speed = geom.angular_speed_rad_s * geom.wheel_radius_m;
  require(speed > 0.0, Errc::invalid_speed, "collision trials need a rolling wheel");
  // Wheel face touches the near corner this far before the face position.
  const double touch_gap = std::sqrt(height_m * (geom.wheel_diameter_m - height_m));

  HeightTrialPlan plan;
  plan.scene.name = "height-" + std::to_string(static_cast<int>(std::lround(height_m * 1000.0))) +
                    "mm";
  plan.scene.terrain = Terrain::Wood;
  plan.scene.texture = default_texture(Terrain::Wood);
  ObstacleSpec o;
  o.shape = ObstacleShape::Rectangle;
  o.height_m = height_m;
  o.ground_position_m = touch_gap + approach_s * speed;
  plan.scene.obstacles.push_back(o);
  plan.scene.trial_length_m = (approach_s + post_s) * speed;
  plan.duration_ms = kPreambleMs + (approach_s + post_s) * 1000.0;
  return plan;
}

double trial_duration_ms(const ScenePlan& scene, const SensorGeometry& geom) {
  const double speed = geom.angular_speed_rad_s * geom.wheel_radius_m;
  require(speed > 0.0, Errc::invalid_speed, "trial duration needs a rolling wheel");
  return kPreambleMs + scene.trial_length_m / speed * 1000.0;
}

ExperimentLog simulate_trial(const ScenePlan& scene, const SensorGeometry& geom,
                             const AcousticParams& params, double duration_ms) {
  return synthesize_trial(run_trial(scene, geom, duration_ms), scene, params, geom);
}

void save_windows(const std::vector<TraceWindow>& windows, const std::string& path) {
  std::ofstream file = open_out(path);
  for (const TraceWindow& w : windows) {
    json traces = json::array();
    for (const Trace& t : w.traces) traces.push_back(t.samples);
    json line{{"task", w.label.task == Task::Terrain ? "Terrain" : "ObstacleShape"},
              {"label", std::string(w.label.name())},
              {"stage", std::string(stage_name(w.traces.empty() ? TraceStage::Shifted2000
                                                                : w.traces.front().stage))},
              {"t_ex_span", {w.t_ex_begin_ms, w.t_ex_end_ms}},
              {"traces", std::move(traces)}};
    file << line.dump() << "\n";
  }
  require(file.good(), Errc::io_error, "short write to '" + path + "'");
}

std::vector<TraceWindow> load_windows(const std::string& path) {
  std::ifstream file(path);
  require(file.good(), Errc::io_error, "cannot open '" + path + "'");
  std::vector<TraceWindow> windows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      fail(Errc::bad_config, "windows line " + std::to_string(line_no) + ": " + e.what());
    }
    TraceWindow w;
    const std::string task = doc.at("task").get<std::string>();
    const std::string label = doc.at("label").get<std::string>();
    if (task == "Terrain") {
      w.label = ClassLabel::terrain(terrain_from_name(label));
    } else {
      w.label = ClassLabel::obstacle(obstacle_shape_from_name(label));
    }
    TraceStage stage = TraceStage::Shifted2000;
    const std::string stage_str = doc.value("stage", "Shifted2000");
    if (stage_str == "Baselined1750") stage = TraceStage::Baselined1750;
    w.t_ex_begin_ms = doc.at("t_ex_span")[0].get<double>();
    w.t_ex_end_ms = doc.at("t_ex_span")[1].get<double>();
    for (const json& jt : doc.at("traces")) {
      Trace t;
      t.samples = jt.get<std::vector<double>>();
      t.stage = stage;
      w.traces.push_back(std::move(t));
    }
    if (!w.traces.empty()) {
      w.traces.front().t_ex_ms = w.t_ex_begin_ms;
      w.traces.back().t_ex_ms = w.t_ex_end_ms;
    }
    windows.push_back(std::move(w));
  }
  return windows;
}

std::string eval_report_json(const EvalReport& report) {
  json confusion = json::array();
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) row.push_back(report.confusion(r, c));
    confusion.push_back(std::move(row));
  }
  json doc{{"accuracy", report.accuracy},
           {"macro_precision", report.macro_precision},
           {"weighted_precision", report.weighted_precision},
           {"classes", report.class_names},
           {"confusion", std::move(confusion)},
           {"precision_undefined", report.precision_undefined}};
  return doc.dump(2);
}

void write_eval_report(const EvalReport& report, const std::string& path) {
  std::ofstream file = open_out(path);
  file << eval_report_json(report) << "\n";
}

void write_confusion_csv(const EvalReport& report, const std::string& path) {
  std::ofstream file = open_out(path);
  file << "truth";
  for (const std::string& name : report.class_names) file << "," << name;
  file << "\n";
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    file << report.class_names[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) file << "," << report.confusion(r, c);
    file << "\n";
  }
}

void write_pr_csv(const EvalReport& report, const std::string& path) {
  std::ofstream file = open_out(path);
  file << "class,point,recall,precision\n";
  for (std::size_t c = 0; c < report.pr_curves.size(); ++c) {
    for (std::size_t i = 0; i < report.pr_curves[c].size(); ++i) {
      file << report.class_names[c] << "," << i << "," << report.pr_curves[c][i].first << ","
           << report.pr_curves[c][i].second << "\n";
    }
  }
}

std::string height_estimate_json(const HeightEstimate& estimate) {
  json doc{{"delta_t_c_ms", estimate.delta_t_c_ms},
           {"delta_theta_rad", estimate.delta_theta_rad},
           {"height_m", estimate.height_m},
           {"window_ms", {estimate.window_begin_ms, estimate.window_end_ms}},
           {"epsilon_ms", estimate.epsilon_ms},
           {"pooled_peaks", estimate.pooled_peaks},
           {"cycles_used", estimate.cycles_used}};
  return doc.dump(2);
}

void write_peaks_csv(const std::vector<CyclePeaks>& peaks, const std::string& path) {
  std::ofstream file = open_out(path);
  file << "cycle_index,t_ex_ms,t_r_ms,amplitude\n";
  for (const CyclePeaks& cp : peaks) {
    for (const PeakSet::Peak& p : cp.peaks.peaks) {
      file << cp.cycle_index << "," << cp.t_ex_ms << "," << p.t_r_ms << "," << p.amplitude << "\n";
    }
  }
}

BoxStats box_stats(const std::string& group, std::vector<double> values) {
  require(!values.empty(), Errc::bad_config, "box stats of an empty group");
  BoxStats s;
  s.group = group;
  s.count = values.size();
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.q1 = percentile(values, 0.25);
  s.median = percentile(values, 0.5);
  s.q3 = percentile(values, 0.75);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  const double iqr = s.q3 - s.q1;
  s.whisker_low = s.max;
  s.whisker_high = s.min;
  for (double v : values) {
    if (v >= s.q1 - 1.5 * iqr) {
      s.whisker_low = std::min(s.whisker_low, v);
    }
    if (v <= s.q3 + 1.5 * iqr) {
      s.whisker_high = std::max(s.whisker_high, v);
    }
  }
  return s;
}

void write_boxplot_csv(const std::vector<BoxStats>& rows, const std::string& path) {
  std::ofstream file = open_out(path);
  file << "group,count,mean,min,q1,median,q3,max,whisker_low,whisker_high\n";
  for (const BoxStats& s : rows) {
    file << s.group << "," << s.count << "," << s.mean << "," << s.min << "," << s.q1 << ","
         << s.median << "," << s.q3 << "," << s.max << "," << s.whisker_low << ","
         << s.whisker_high << "\n";
  }
}

namespace {

template <typename T>
T config_field(const json& doc, const std::string& path, T fallback) {
  const json* node = &doc;
  std::string walked;
  std::istringstream parts(path);
  std::string key;
  while (std::getline(parts, key, '.')) {
    if (!node->contains(key)) return fallback;
    node = &(*node)[key];
    walked = walked.empty() ? key : walked + "." + key;
  }
  try {
    return node->get<T>();
  } catch (const json::exception& e) {
    fail(Errc::bad_config, "config field '" + path + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream file(path);
  require(file.good(), Errc::io_error, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(file);
  } catch (const json::exception& e) {
    fail(Errc::bad_config, std::string("config parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.experiment = config_field<int>(doc, "experiment", 3);
  require(cfg.experiment >= 1 && cfg.experiment <= 3, Errc::bad_config,
          "config field 'experiment': must be 1, 2 or 3");
  cfg.output_dir = config_field<std::string>(doc, "output_dir", "out");
  cfg.seed = config_field<std::uint64_t>(doc, "seed", 1);

  const double rpm =
      config_field<double>(doc, "geometry.rpm", cfg.experiment == 3 ? 2.0 : 6.0);
  cfg.geometry = SensorGeometry::from_wheel(
      config_field<double>(doc, "geometry.wheel_diameter_m", 0.27),
      config_field<double>(doc, "geometry.inner_length_m", 0.15), rpm,
      config_field<double>(doc, "geometry.speed_of_sound_mps", 343.0),
      config_field<double>(doc, "geometry.pulse_frequency_hz", 42000.0),
      config_field<int>(doc, "geometry.pulse_cycles", 8));

  cfg.acoustics.send_pulse_amplitude =
      config_field<double>(doc, "acoustics.send_pulse_amplitude", cfg.acoustics.send_pulse_amplitude);
  cfg.acoustics.baseline_level =
      config_field<double>(doc, "acoustics.baseline_level", cfg.acoustics.baseline_level);
  cfg.acoustics.noise_std = config_field<double>(doc, "acoustics.noise_std", cfg.acoustics.noise_std);
  cfg.acoustics.clutter_rate =
      config_field<double>(doc, "acoustics.clutter_rate", cfg.acoustics.clutter_rate);
  cfg.acoustics.attenuation_per_m =
      config_field<double>(doc, "acoustics.attenuation_per_m", cfg.acoustics.attenuation_per_m);
  cfg.acoustics.end_echo_gain =
      config_field<double>(doc, "acoustics.end_echo_gain", cfg.acoustics.end_echo_gain);
  cfg.acoustics.trigger_jitter_max_ms = config_field<double>(doc, "acoustics.trigger_jitter_max_ms",
                                                             cfg.acoustics.trigger_jitter_max_ms);
  cfg.acoustics.validate();

  cfg.trials_per_surface = config_field<int>(doc, "terrain.trials_per_surface", 10);
  cfg.train_fraction = config_field<double>(doc, "terrain.train_fraction", 0.7);
  require(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0, Errc::bad_config,
          "config field 'terrain.train_fraction': must lie in (0, 1)");
  cfg.max_windows_per_trial = config_field<int>(doc, "terrain.max_windows_per_trial", 12);

  cfg.block1_trials_per_shape = config_field<int>(doc, "obstacle.block1_trials_per_shape", 134);
  cfg.block2_trials_per_combo = config_field<int>(doc, "obstacle.block2_trials_per_combo", 15);

  cfg.short_trials = config_field<int>(doc, "height.short_trials", 43);
  cfg.tall_trials = config_field<int>(doc, "height.tall_trials", 12);
  cfg.short_height_m = config_field<double>(doc, "height.short_height_m", 0.025);
  cfg.tall_height_m = config_field<double>(doc, "height.tall_height_m", 0.07);

  cfg.train.inverse_reg_c = config_field<double>(doc, "train.inverse_reg_c", 0.5);
  cfg.train.max_iterations = config_field<int>(doc, "train.max_iterations", 2000);
  cfg.train.grad_tolerance_inf = config_field<double>(doc, "train.grad_tolerance_inf", 1e-5);

  require(cfg.trials_per_surface >= 1 && cfg.block1_trials_per_shape >= 1 &&
              cfg.block2_trials_per_combo >= 1 && cfg.short_trials >= 1 && cfg.tall_trials >= 1,
          Errc::bad_config, "trial counts must be >= 1");

  if (const char* root = std::getenv("AWTS_DATA_DIR"); root && root[0] != '\0') {
    const fs::path out(cfg.output_dir);
    if (out.is_relative()) cfg.output_dir = (fs::path(root) / out).string();
  }
  return cfg;
}

std::vector<PlannedTrial> plan_trials(const ExperimentConfig& config) {
  std::vector<PlannedTrial> plan;
  std::uint64_t counter = 0;

  auto push = [&](ScenePlan scene, double duration, int split, std::string group,
                  std::string stem) {
    Rng rng(mix_seed(config.seed, counter));
    scene.theta0_rad = sample_theta0(counter, rng);
    PlannedTrial t;
    t.scene = std::move(scene);
    t.duration_ms = duration;
    t.seed = mix_seed(config.seed, counter * 2 + 1);
    t.split = split;
    t.group = std::move(group);
    t.stem = std::move(stem);
    plan.push_back(std::move(t));
    ++counter;
  };

  switch (config.experiment) {
    case 1: {
      const int n_train =
          static_cast<int>(std::lround(config.train_fraction * config.trials_per_surface));
      for (Terrain terrain : {Terrain::Wood, Terrain::Outdoor, Terrain::Soft, Terrain::Ribbed,
                              Terrain::Nfm}) {
        const ScenePlan scene = make_terrain_scene(terrain);
        const double duration = trial_duration_ms(scene, config.geometry);
        for (int t = 0; t < config.trials_per_surface; ++t) {
          std::ostringstream stem;
          stem << "terrain_" << terrain_name(terrain) << "_" << t;
          push(scene, duration, t < n_train ? 0 : 1, std::string(terrain_name(terrain)),
               stem.str());
        }
      }
      break;
    }
    case 2: {
      for (ObstacleShape shape : {ObstacleShape::SemiCircle, ObstacleShape::Triangle}) {
        const ScenePlan scene = make_obstacle_scene(shape, 0.025);
        const double duration = trial_duration_ms(scene, config.geometry);
        for (int t = 0; t < config.block1_trials_per_shape; ++t) {
          std::ostringstream stem;
          stem << "obstacle_b1_" << obstacle_shape_name(shape) << "_25mm_" << t;
          push(scene, duration, 0, std::string(obstacle_shape_name(shape)), stem.str());
        }
      }
      for (ObstacleShape shape : {ObstacleShape::SemiCircle, ObstacleShape::Triangle}) {
        for (int h_mm : {10, 15, 20, 25}) {
          const ScenePlan scene = make_obstacle_scene(shape, h_mm / 1000.0);
          const double duration = trial_duration_ms(scene, config.geometry);
          for (int t = 0; t < config.block2_trials_per_combo; ++t) {
            std::ostringstream stem;
            stem << "obstacle_b2_" << obstacle_shape_name(shape) << "_" << h_mm << "mm_" << t;
            push(scene, duration, 1, std::string(obstacle_shape_name(shape)), stem.str());
          }
        }
      }
      break;
    }
    case 3: {
      for (int t = 0; t < config.short_trials; ++t) {
        const HeightTrialPlan hp = make_height_trial(config.short_height_m, config.geometry);
        push(hp.scene, hp.duration_ms, 0, "short", "height_short_" + std::to_string(t));
      }
      for (int t = 0; t < config.tall_trials; ++t) {
        const HeightTrialPlan hp = make_height_trial(config.tall_height_m, config.geometry);
        push(hp.scene, hp.duration_ms, 0, "tall", "height_tall_" + std::to_string(t));
      }
      break;
    }
    default:
      fail(Errc::bad_config, "config field 'experiment': must be 1, 2 or 3");
  }
  return plan;
}

namespace {

void run_classification_experiment(const ExperimentConfig& config,
                                   const std::vector<PlannedTrial>& plan, Task task) {
  const fs::path out(config.output_dir);
  std::vector<TraceWindow> windows;
  std::vector<int> split;
  std::vector<int> heights_mm;

  for (const PlannedTrial& trial : plan) {
    AcousticParams params = config.acoustics;
    params.rng_seed = trial.seed;
    const ExperimentLog log = simulate_trial(trial.scene, config.geometry, params,
                                             trial.duration_ms);
    write_trial_binary(log, (out / (trial.stem + ".awts")).string());

    WindowingReport rep = make_windows(log, task);
    std::size_t kept = 0;
    for (TraceWindow& w : rep.windows) {
      if (task == Task::Terrain && config.max_windows_per_trial > 0 &&
          kept >= static_cast<std::size_t>(config.max_windows_per_trial)) {
        break;
      }
      int h_mm = 0;
      if (task == Task::ObstacleShape && w.label.index != static_cast<int>(ObstacleShape::Flat) &&
          !trial.scene.obstacles.empty()) {
        h_mm = static_cast<int>(std::lround(trial.scene.obstacles.front().height_m * 1000.0));
      }
      windows.push_back(std::move(w));
      split.push_back(trial.split);
      heights_mm.push_back(h_mm);
      ++kept;
    }
  }

  std::vector<TraceWindow> train_windows;
  std::vector<TraceWindow> test_windows;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (split[i] == 0 ? train_windows : test_windows).push_back(windows[i]);
  }
  save_windows(train_windows, (out / "windows_train.jsonl").string());
  save_windows(test_windows, (out / "windows_test.jsonl").string());
  train_windows.clear();
  test_windows.clear();

  const double scale = task == Task::Terrain ? 1.0 / kAdcMax : 1.0;
  const Dataset data = dataset_from_windows(windows, split, scale, config.seed);
  windows.clear();
  windows.shrink_to_fit();

  const LRModel model = train_lr(data, config.train);
  save_model(model, (out / "model.bin").string());
  const EvalReport report = evaluate(model, data);
  write_eval_report(report, (out / "eval_report.json").string());
  write_confusion_csv(report, (out / "confusion.csv").string());
  write_pr_csv(report, (out / "pr_curves.csv").string());

  if (task == Task::ObstacleShape) {
    std::map<int, std::pair<std::size_t, std::size_t>> by_height;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (split[i] == 1) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    }
    const std::vector<int> predicted = model.predict(x);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = static_cast<std::size_t>(rows[i]);
      if (heights_mm[row] == 0) continue;
      auto& bucket = by_height[heights_mm[row]];
      if (predicted[i] == data.labels[row]) ++bucket.first;
      ++bucket.second;
    }
    std::ofstream file = open_out((out / "accuracy_by_height.csv").string());
    file << "height_mm,windows,accuracy\n";
    for (const auto& [h, counts] : by_height) {
      file << h << "," << counts.second << ","
           << (counts.second ? static_cast<double>(counts.first) / counts.second : 0.0) << "\n";
    }
  }
}

void run_height_experiment(const ExperimentConfig& config,
                           const std::vector<PlannedTrial>& plan) {
  const fs::path out(config.output_dir);
  std::vector<double> short_estimates;
  std::vector<double> tall_estimates;
  std::ofstream estimates = open_out((out / "estimates.csv").string());
  estimates << "trial,group,true_height_m,estimated_height_m,delta_t_c_ms,status\n";

  for (const PlannedTrial& trial : plan) {
    AcousticParams params = config.acoustics;
    params.rng_seed = trial.seed;
    const ExperimentLog log = simulate_trial(trial.scene, config.geometry, params,
                                             trial.duration_ms);
    write_trial_binary(log, (out / (trial.stem + ".awts")).string());

    double collision = -1.0;
    for (const FlagEvent& f : log.flags) {
      if (f.kind == FlagKind::ContactStart) {
        collision = f.t_ex_ms;
        break;
      }
    }
    const double truth = trial.scene.obstacles.front().height_m;
    const PeakParams peak_params;
    std::string status = "ok";
    double estimated = 0.0;
    double delta_t = 0.0;
    try {
      require(collision >= 0.0, Errc::insufficient_peaks, "trial has no collision flag");
      const HeightEstimate est = estimate_height(log, collision, peak_params, config.geometry);
      estimated = est.height_m;
      delta_t = est.delta_t_c_ms;
      std::ofstream hj = open_out((out / (trial.stem + "_height.json")).string());
      hj << height_estimate_json(est) << "\n";
      write_peaks_csv(collision_window_peaks(log, collision, peak_params),
                      (out / (trial.stem + "_peaks.csv")).string());
      (trial.group == "short" ? short_estimates : tall_estimates).push_back(estimated);
    } catch (const Error& e) {
      status = errc_name(e.code());
    }
    estimates << trial.stem << "," << trial.group << "," << truth << "," << estimated << ","
              << delta_t << "," << status << "\n";
  }

  std::vector<BoxStats> rows;
  if (!short_estimates.empty()) rows.push_back(box_stats("short", short_estimates));
  if (!tall_estimates.empty()) rows.push_back(box_stats("tall", tall_estimates));
  write_boxplot_csv(rows, (out / "height_boxplot.csv").string());
}

}  // namespace

void cli_run(const ExperimentConfig& config) {
  fs::create_directories(config.output_dir);
  const std::vector<PlannedTrial> plan = plan_trials(config);
  switch (config.experiment) {
    case 1: run_classification_experiment(config, plan, Task::Terrain); break;
    case 2: run_classification_experiment(config, plan, Task::ObstacleShape); break;
    case 3: run_height_experiment(config, plan); break;
    default: fail(Errc::bad_config, "config field 'experiment': must be 1, 2 or 3");
  }
}

}  // namespace awts
