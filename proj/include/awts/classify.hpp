#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "awts/core.hpp"
#include "awts/dsp.hpp"
#include "awts/scene.hpp"

namespace awts {

/// Flattened windows with labels and a train/test assignment.
struct Dataset {
  Eigen::MatrixXd features;  // one row per window
  std::vector<int> labels;
  std::vector<int> split;  // 0 = train, 1 = test
  std::vector<std::string> class_names;
  Task task = Task::Terrain;
  std::uint64_t seed = 0;

  Eigen::Index feature_dim() const { return features.cols(); }
  std::size_t size() const { return labels.size(); }
};

/// Row-major concatenation of the window's traces, order preserved. Throws
/// shape_mismatch for ragged traces.
Eigen::VectorXd flatten(const TraceWindow& window);

/// Assemble a dataset. feature_scale multiplies every feature (used to bring
/// raw ADC-count traces to unit range; normalized traces use 1.0).
Dataset dataset_from_windows(const std::vector<TraceWindow>& windows,
                             const std::vector<int>& split, double feature_scale = 1.0,
                             std::uint64_t seed = 0);

struct TrainConfig {
  double inverse_reg_c = 0.5;
  int max_iterations = 2000;
  double grad_tolerance_inf = 1e-5;
};

/// Multinomial logistic regression model.
struct LRModel {
  Eigen::MatrixXd weights;  // classes x features
  Eigen::VectorXd bias;
  double inverse_reg_c = 0.5;
  std::vector<std::string> class_names;
  Task task = Task::Terrain;

  Eigen::MatrixXd decision(const Eigen::MatrixXd& x) const;       // rows x classes
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const;  // softmax rows
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

/// Objective: multinomial cross-entropy (summed over rows) plus
/// ||W||^2 / (2C). Exposed for the finite-difference gradient check.
double lr_objective(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    const Eigen::MatrixXd& x, const std::vector<int>& y, double inverse_reg_c);
void lr_objective_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                           const Eigen::MatrixXd& x, const std::vector<int>& y,
                           double inverse_reg_c, Eigen::MatrixXd& grad_weights,
                           Eigen::VectorXd& grad_bias);

struct TrainTrace {
  std::vector<double> loss;  // objective after each accepted step
  int iterations = 0;
  bool reached_tolerance = false;
};

/// Full-batch gradient descent from zero weights with backtracking line
/// search; stops when the gradient infinity norm drops below the tolerance
/// or at max_iterations. Deterministic. Throws degenerate_data when the
/// train split holds fewer than two classes.
LRModel train_lr(const Dataset& data, const TrainConfig& cfg = {}, TrainTrace* trace = nullptr);

struct EvalReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double weighted_precision = 0.0;
  Eigen::MatrixXi confusion;  // rows: truth, cols: prediction
  std::vector<std::vector<std::pair<double, double>>> pr_curves;  // per class (recall, precision)
  std::vector<bool> precision_undefined;  // classes with no predicted samples
  std::vector<std::string> class_names;
};

/// Accuracy, precisions, confusion matrix and one-vs-rest PR curves over the
/// test split.
EvalReport evaluate(const LRModel& model, const Dataset& data);

/// Per-class recall (TP / class count) from a confusion matrix row.
double class_recall(const EvalReport& report, int class_index);

void save_model(const LRModel& model, const std::string& path);
LRModel load_model(const std::string& path);

/// End-to-end protocol configuration for run_task. Scenes listed in
/// train_scenes/test_scenes index into the scene vector; each runs
/// trials_per_*_scene times with seeded theta0 sampling.
struct RunProtocol {
  std::vector<std::size_t> train_scenes;
  std::vector<std::size_t> test_scenes;
  int trials_per_train_scene = 4;
  int trials_per_test_scene = 2;
  double trial_duration_ms = 20000.0;
  SensorGeometry geometry;
  AcousticParams acoustics = AcousticParams::bench();
  TrainConfig train;
  std::uint64_t seed = 1;
  int max_windows_per_trial = 12;  // terrain only; 0 keeps everything
};

struct RunTaskResult {
  EvalReport report;
  LRModel model;
  Dataset dataset;
  std::map<int, std::pair<std::size_t, std::size_t>> by_height_mm;  // (correct, total) per height
};

/// Simulate -> preprocess -> window -> train -> evaluate. For the obstacle
/// task the train scenes must use 25 mm obstacles only (block protocol);
/// size generalization is reported per obstacle height.
RunTaskResult run_task(Task task, const std::vector<ScenePlan>& scenes,
                       const RunProtocol& protocol);

}  // namespace awts
