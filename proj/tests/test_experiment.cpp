#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "awts/experiment.hpp"
#include "awts/telemetry.hpp"
#include "doctest.h"

using namespace awts;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream f(path);
  f << content;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("terrain config plans ten trials per surface, fifty files") {
  const std::string path = write_temp("awts_cfg1.json", R"({"experiment": 1})");
  const ExperimentConfig cfg = load_experiment_config(path);
  const std::vector<PlannedTrial> plan = plan_trials(cfg);
  CHECK(plan.size() == 50);
  std::size_t wood = 0;
  for (const PlannedTrial& t : plan) wood += t.group == "Wood" ? 1 : 0;
  CHECK(wood == 10);
  fs::remove(path);
}

TEST_CASE("obstacle config plans 134 trials per shape in the first block") {
  const std::string path = write_temp("awts_cfg2.json", R"({"experiment": 2})");
  const ExperimentConfig cfg = load_experiment_config(path);
  const std::vector<PlannedTrial> plan = plan_trials(cfg);
  std::size_t block1_semi = 0, block1_tri = 0, block2 = 0;
  for (const PlannedTrial& t : plan) {
    if (t.split == 0) {
      REQUIRE(t.scene.obstacles.size() == 1);
      CHECK(t.scene.obstacles[0].height_m == doctest::Approx(0.025));
      (t.scene.obstacles[0].shape == ObstacleShape::SemiCircle ? block1_semi : block1_tri) += 1;
    } else {
      ++block2;
    }
  }
  CHECK(block1_semi == 134);
  CHECK(block1_tri == 134);
  CHECK(block2 == 2 * 4 * 15);  // shapes x heights x trials
  fs::remove(path);
}

TEST_CASE("collision config plans 43 short and 12 tall trials") {
  const std::string path = write_temp("awts_cfg3.json", R"({"experiment": 3})");
  const ExperimentConfig cfg = load_experiment_config(path);
  const std::vector<PlannedTrial> plan = plan_trials(cfg);
  std::size_t short_trials = 0, tall_trials = 0;
  for (const PlannedTrial& t : plan) (t.group == "short" ? short_trials : tall_trials) += 1;
  CHECK(short_trials == 43);
  CHECK(tall_trials == 12);
  fs::remove(path);
}

TEST_CASE("config errors name the offending field") {
  CHECK_THROWS_AS(load_experiment_config("/nonexistent/awts.json"), Error);

  const std::string bad_json = write_temp("awts_badjson.json", "{oops");
  CHECK_THROWS_AS(load_experiment_config(bad_json), Error);
  fs::remove(bad_json);

  const std::string bad_field =
      write_temp("awts_badfield.json", R"({"experiment": 1, "terrain": {"trials_per_surface": "ten"}})");
  try {
    load_experiment_config(bad_field);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("terrain.trials_per_surface") != std::string::npos);
  }
  fs::remove(bad_field);

  const std::string bad_value =
      write_temp("awts_badvalue.json", R"({"experiment": 1, "terrain": {"train_fraction": 1.5}})");
  CHECK_THROWS_AS(load_experiment_config(bad_value), Error);
  fs::remove(bad_value);

  const std::string bad_exp = write_temp("awts_badexp.json", R"({"experiment": 7})");
  CHECK_THROWS_AS(load_experiment_config(bad_exp), Error);
  fs::remove(bad_exp);
}

TEST_CASE("AWTS_DATA_DIR anchors relative output directories") {
  const std::string path = write_temp("awts_cfgenv.json", R"({"experiment": 3, "output_dir": "runs/x"})");
  setenv("AWTS_DATA_DIR", "/tmp/awts_root", 1);
  const ExperimentConfig cfg = load_experiment_config(path);
  CHECK(cfg.output_dir == "/tmp/awts_root/runs/x");
  unsetenv("AWTS_DATA_DIR");
  const ExperimentConfig cfg2 = load_experiment_config(path);
  CHECK(cfg2.output_dir == "runs/x");
  fs::remove(path);
}

TEST_CASE("height trial plan collides when promised") {
  const SensorGeometry geom = SensorGeometry::from_wheel(0.27, 0.15, 2.0);
  const HeightTrialPlan plan = make_height_trial(0.025, geom, 0.8, 0.8);
  const TrialStates states = run_trial(plan.scene, geom, plan.duration_ms);
  REQUIRE(!states.flags.empty());
  const double expected = kPreambleMs + 800.0;
  CHECK(states.flags[0].t_ex_ms >= expected - kTriggerPeriodMs);
  CHECK(states.flags[0].t_ex_ms <= expected + kTriggerPeriodMs);
}

TEST_CASE("box stats quantiles agree with hand-computed values") {
  const BoxStats s = box_stats("g", {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 100.0});
  CHECK(s.count == 9);
  CHECK(s.median == doctest::Approx(5.0));
  CHECK(s.q1 == doctest::Approx(3.0));
  CHECK(s.q3 == doctest::Approx(7.0));
  CHECK(s.min == doctest::Approx(1.0));
  CHECK(s.max == doctest::Approx(100.0));
  CHECK(s.whisker_low == doctest::Approx(1.0));
  CHECK(s.whisker_high == doctest::Approx(8.0));  // 100 is an outlier
  CHECK(s.mean == doctest::Approx(136.0 / 9.0));
}

TEST_CASE("windows save/load round trip") {
  std::vector<TraceWindow> windows;
  TraceWindow w;
  w.label = ClassLabel::terrain(Terrain::Ribbed);
  w.t_ex_begin_ms = 100.0;
  w.t_ex_end_ms = 300.0;
  for (int t = 0; t < 3; ++t) {
    Trace trace;
    trace.stage = TraceStage::Shifted2000;
    trace.samples = {1.5, 2.5, 3.5};
    w.traces.push_back(trace);
  }
  windows.push_back(w);
  const std::string path = (fs::temp_directory_path() / "awts_windows.jsonl").string();
  save_windows(windows, path);
  const std::vector<TraceWindow> loaded = load_windows(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].label == windows[0].label);
  CHECK(loaded[0].traces.size() == 3);
  CHECK(loaded[0].traces[1].samples == windows[0].traces[1].samples);
  CHECK(loaded[0].traces[0].stage == TraceStage::Shifted2000);
  CHECK(loaded[0].t_ex_begin_ms == 100.0);
  fs::remove(path);
}

TEST_CASE("experiment 3 run writes every artifact") {
  const fs::path out = fs::temp_directory_path() / "awts_exp3_smoke";
  fs::remove_all(out);
  ExperimentConfig cfg;
  cfg.experiment = 3;
  cfg.output_dir = out.string();
  cfg.seed = 77;
  cfg.geometry = SensorGeometry::from_wheel(0.27, 0.15, 2.0);
  cfg.short_trials = 3;
  cfg.tall_trials = 2;
  cli_run(cfg);

  CHECK(fs::exists(out / "height_short_0.awts"));
  CHECK(fs::exists(out / "height_tall_1.awts"));
  CHECK(fs::exists(out / "estimates.csv"));
  CHECK(fs::exists(out / "height_boxplot.csv"));
  CHECK(fs::exists(out / "height_short_0_height.json"));
  CHECK(fs::exists(out / "height_short_0_peaks.csv"));

  // box plot CSV carries one row per group with the configured counts
  const std::string csv = slurp((out / "height_boxplot.csv").string());
  CHECK(csv.find("short,3") != std::string::npos);
  CHECK(csv.find("tall,2") != std::string::npos);

  // the trial files are valid logs
  const ExperimentLog log = read_trial_binary((out / "height_tall_0.awts").string());
  CHECK(log.cycles.size() > 200);
  CHECK(validate_log(log).empty());
  fs::remove_all(out);
}

TEST_CASE("eval report writers emit parseable artifacts") {
  EvalReport report;
  report.accuracy = 0.875;
  report.macro_precision = 0.8;
  report.weighted_precision = 0.85;
  report.class_names = {"Flat", "SemiCircle", "Triangle"};
  report.confusion = Eigen::MatrixXi::Zero(3, 3);
  report.confusion(0, 0) = 5;
  report.confusion(1, 1) = 2;
  report.confusion(2, 0) = 1;
  report.precision_undefined = {false, false, true};
  report.pr_curves.resize(3);
  report.pr_curves[0] = {{0.5, 1.0}, {1.0, 0.9}};

  const std::string json_text = eval_report_json(report);
  CHECK(json_text.find("\"accuracy\": 0.875") != std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "awts_eval_smoke";
  fs::create_directories(dir);
  write_confusion_csv(report, (dir / "confusion.csv").string());
  write_pr_csv(report, (dir / "pr.csv").string());
  const std::string confusion = slurp((dir / "confusion.csv").string());
  CHECK(confusion.find("truth,Flat,SemiCircle,Triangle") != std::string::npos);
  CHECK(confusion.find("Flat,5,0,0") != std::string::npos);
  const std::string pr = slurp((dir / "pr.csv").string());
  CHECK(pr.find("Flat,0,0.5,1") != std::string::npos);
  fs::remove_all(dir);
}
