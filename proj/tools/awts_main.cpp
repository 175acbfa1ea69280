#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "awts/classify.hpp"
#include "awts/design.hpp"
#include "awts/dsp.hpp"
#include "awts/experiment.hpp"
#include "awts/localize.hpp"
#include "awts/net.hpp"
#include "awts/telemetry.hpp"
#include "json.hpp"

namespace {

using namespace awts;

namespace fs = std::filesystem;

std::string resolve_path(const std::string& path) {
  if (path.empty()) return path;
  const fs::path p(path);
  if (const char* root = std::getenv("AWTS_DATA_DIR"); root && root[0] != '\0' && p.is_relative()) {
    return (fs::path(root) / p).string();
  }
  return path;
}

std::string read_text(const std::string& path) {
  std::ifstream file(path);
  require(file.good(), Errc::io_error, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
}

int cmd_design(double diameter, double inner, double rpm, double c, double f, int n, bool json_only) {
  const SensorGeometry geom = SensorGeometry::from_wheel(diameter, inner, rpm, c, f, n);
  const DesignReport report = make_design_report(geom);
  nlohmann::json doc{{"query_time_ms", report.query_time_ms},
                     {"cycles_per_rotation", report.cycles_per_rotation},
                     {"min_separation_m", report.min_separation_m},
                     {"wavelength_m", report.wavelength_m}};
  std::cout << doc.dump(2) << "\n";
  if (!json_only) {
    std::printf("\n%-24s %12.4f ms\n", "query time", report.query_time_ms);
    std::printf("%-24s %12.1f\n", "cycles per rotation", report.cycles_per_rotation);
    std::printf("%-24s %12.4f mm\n", "min separation", report.min_separation_m * 1000.0);
    std::printf("%-24s %12.4f mm\n", "wavelength", report.wavelength_m * 1000.0);
  }
  return 0;
}

ExperimentLog load_trial(const std::string& path) {
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
    return read_trial_jsonl(path);
  }
  return read_trial_binary(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic waveguide tire sensing toolkit"};
  app.require_subcommand(1);

  // design
  double diameter = 0.27, inner = 0.15, rpm = 6.0, speed = 343.0, freq = 42000.0;
  int cycles = 8;
  bool json_only = false;
  auto* design = app.add_subcommand("design", "print the design trade-off report");
  design->add_option("--diameter", diameter, "wheel diameter [m]");
  design->add_option("--inner-length", inner, "hub dead-zone length [m]");
  design->add_option("--rpm", rpm, "wheel speed [RPM]");
  design->add_option("--speed-of-sound", speed, "speed of sound [m/s]");
  design->add_option("--frequency", freq, "pulse frequency [Hz]");
  design->add_option("--pulse-cycles", cycles, "cycles per send pulse");
  design->add_flag("--json", json_only, "JSON output only");

  // simulate
  std::string scene_path, out_path;
  std::uint64_t seed = 1;
  double duration = 0.0, sim_rpm = 6.0;
  bool jsonl = false, clean = false;
  auto* simulate = app.add_subcommand("simulate", "run one trial and write the log");
  simulate->add_option("--scene", scene_path, "scene JSON file")->required();
  simulate->add_option("--out", out_path, "output trial file")->required();
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--duration", duration, "trial duration [ms] (default: from trial length)");
  simulate->add_option("--rpm", sim_rpm, "wheel speed [RPM]");
  simulate->add_flag("--jsonl", jsonl, "write JSON-lines instead of binary frames");
  simulate->add_flag("--clean", clean, "disable noise and clutter");

  // process
  std::string trial_path, windows_path, task_name = "terrain";
  auto* process = app.add_subcommand("process", "extract labelled windows from a trial");
  process->add_option("--trial", trial_path, "trial file")->required();
  process->add_option("--task", task_name, "terrain | obstacle");
  process->add_option("--out", windows_path, "output windows JSONL")->required();

  // train
  std::vector<std::string> window_files;
  std::string model_path;
  TrainConfig train_cfg;
  auto* train = app.add_subcommand("train", "train logistic regression on window files");
  train->add_option("--windows", window_files, "windows JSONL files")->required();
  train->add_option("--out", model_path, "output model file")->required();
  train->add_option("--inverse-reg-c", train_cfg.inverse_reg_c, "inverse regularization C");
  train->add_option("--max-iterations", train_cfg.max_iterations, "gradient descent cap");

  // eval
  std::string eval_model, report_path, pr_path, confusion_path;
  std::vector<std::string> eval_files;
  auto* eval = app.add_subcommand("eval", "evaluate a model on window files");
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--windows", eval_files, "windows JSONL files")->required();
  eval->add_option("--report", report_path, "EvalReport JSON output")->required();
  eval->add_option("--pr", pr_path, "PR-curve CSV output");
  eval->add_option("--confusion", confusion_path, "confusion-matrix CSV output");

  // height
  std::string height_trial, height_json, height_peaks;
  double flag_time = -1.0;
  auto* height = app.add_subcommand("height", "collision height estimate for one trial");
  height->add_option("--trial", height_trial, "trial file")->required();
  height->add_option("--flag-time", flag_time, "collision t_ex [ms] (default: first flag)");
  height->add_option("--json", height_json, "HeightEstimate JSON output");
  height->add_option("--peaks", height_peaks, "per-cycle peak table CSV output");

  // serve / replay
  std::string serve_trial_path, host = "127.0.0.1";
  std::uint16_t port = 0;
  bool realtime = false;
  auto* serve = app.add_subcommand("serve", "stream a trial over TCP (sensor node)");
  serve->add_option("--trial", serve_trial_path, "trial file")->required();
  serve->add_option("--port", port, "TCP port (0 = ephemeral)");
  serve->add_flag("--realtime", realtime, "pace cycle frames at 20 Hz");

  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "receive a streamed trial (host node)");
  replay->add_option("--host", host, "server address");
  replay->add_option("--port", port, "server port")->required();
  replay->add_option("--out", replay_out, "output trial file")->required();

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "run a full experiment from a config file");
  run->add_option("--config", config_path, "experiment config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (design->parsed()) {
      return cmd_design(diameter, inner, rpm, speed, freq, cycles, json_only);
    }
    if (simulate->parsed()) {
      const ScenePlan scene = scene_from_json(read_text(resolve_path(scene_path)));
      const SensorGeometry geom = SensorGeometry::from_wheel(0.27, 0.15, sim_rpm);
      AcousticParams params;
      params.rng_seed = seed;
      if (clean) params = params.noise_free();
      const double dur = duration > 0.0 ? duration : trial_duration_ms(scene, geom);
      const ExperimentLog log = simulate_trial(scene, geom, params, dur);
      const std::string out = resolve_path(out_path);
      jsonl ? write_trial_jsonl(log, out) : write_trial_binary(log, out);
      std::cout << "wrote " << log.cycles.size() << " cycles to " << out << "\n";
      return 0;
    }
    if (process->parsed()) {
      const ExperimentLog log = load_trial(resolve_path(trial_path));
      const Task task = task_name == "obstacle" ? Task::ObstacleShape : Task::Terrain;
      const WindowingReport rep = make_windows(log, task);
      save_windows(rep.windows, resolve_path(windows_path));
      std::cout << "windows: " << rep.windows.size() << " (skipped: unfit " << rep.skipped_unfit
                << ", tail " << rep.skipped_tail << ", no-flag " << rep.skipped_no_flag << ")\n";
      return 0;
    }
    if (train->parsed()) {
      std::vector<TraceWindow> windows;
      for (const std::string& f : window_files) {
        std::vector<TraceWindow> part = load_windows(resolve_path(f));
        windows.insert(windows.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
      }
      require(!windows.empty(), Errc::degenerate_data, "no windows loaded");
      const double scale = windows.front().label.task == Task::Terrain ? 1.0 / kAdcMax : 1.0;
      const Dataset data =
          dataset_from_windows(windows, std::vector<int>(windows.size(), 0), scale);
      TrainTrace trace;
      const LRModel model = train_lr(data, train_cfg, &trace);
      save_model(model, resolve_path(model_path));
      std::cout << "trained " << model.class_names.size() << " classes in " << trace.iterations
                << " iterations (final loss " << trace.loss.back() << ")\n";
      return 0;
    }
    if (eval->parsed()) {
      const LRModel model = load_model(resolve_path(eval_model));
      std::vector<TraceWindow> windows;
      for (const std::string& f : eval_files) {
        std::vector<TraceWindow> part = load_windows(resolve_path(f));
        windows.insert(windows.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
      }
      require(!windows.empty(), Errc::degenerate_data, "no windows loaded");
      const double scale = windows.front().label.task == Task::Terrain ? 1.0 / kAdcMax : 1.0;
      const Dataset data =
          dataset_from_windows(windows, std::vector<int>(windows.size(), 1), scale);
      const EvalReport report = evaluate(model, data);
      write_eval_report(report, resolve_path(report_path));
      if (!pr_path.empty()) write_pr_csv(report, resolve_path(pr_path));
      if (!confusion_path.empty()) write_confusion_csv(report, resolve_path(confusion_path));
      std::cout << "accuracy " << report.accuracy << ", macro precision "
                << report.macro_precision << "\n";
      return 0;
    }
    if (height->parsed()) {
      const ExperimentLog log = load_trial(resolve_path(height_trial));
      double collision = flag_time;
      if (collision < 0.0) {
        for (const FlagEvent& f : log.flags) {
          if (f.kind == FlagKind::ContactStart) {
            collision = f.t_ex_ms;
            break;
          }
        }
        require(collision >= 0.0, Errc::bad_config,
                "trial has no ContactStart flag; pass --flag-time");
      }
      const PeakParams params;
      const HeightEstimate est = estimate_height(log, collision, params, log.geometry);
      const std::string doc = height_estimate_json(est);
      std::cout << doc << "\n";
      if (!height_json.empty()) {
        std::ofstream out(resolve_path(height_json));
        out << doc << "\n";
      }
      if (!height_peaks.empty()) {
        write_peaks_csv(collision_window_peaks(log, collision, params),
                        resolve_path(height_peaks));
      }
      return 0;
    }
    if (serve->parsed()) {
      TrialServer server(load_trial(resolve_path(serve_trial_path)),
                         realtime ? Pace::Realtime : Pace::Unpaced, port);
      std::cout << "serving on 127.0.0.1:" << server.port() << "\n";
      const std::size_t frames = server.serve_one();
      std::cout << "delivered " << frames << " frames\n";
      return 0;
    }
    if (replay->parsed()) {
      const ExperimentLog log = receive_trial(host, port);
      const std::string out = resolve_path(replay_out);
      if (out.size() >= 6 && out.substr(out.size() - 6) == ".jsonl") {
        write_trial_jsonl(log, out);
      } else {
        write_trial_binary(log, out);
      }
      std::cout << "received " << log.cycles.size() << " cycles into " << out << "\n";
      return 0;
    }
    if (run->parsed()) {
      const ExperimentConfig config = load_experiment_config(resolve_path(config_path));
      cli_run(config);
      std::cout << "experiment " << config.experiment << " artifacts in " << config.output_dir
                << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
