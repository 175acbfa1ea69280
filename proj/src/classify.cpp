#include "awts/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "awts/bytes.hpp"
#include "awts/rng.hpp"

namespace awts {

Eigen::VectorXd flatten(const TraceWindow& window) {
  require(!window.traces.empty(), Errc::shape_mismatch, "window has no traces");
  const std::size_t len = window.traces.front().samples.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(window.traces.size() * len));
  Eigen::Index at = 0;
  for (const Trace& t : window.traces) {
    require(t.samples.size() == len, Errc::shape_mismatch, "window traces have unequal lengths");
    for (double v : t.samples) out[at++] = v;
  }
  return out;
}

Dataset dataset_from_windows(const std::vector<TraceWindow>& windows,
                             const std::vector<int>& split, double feature_scale,
                             std::uint64_t seed) {
  require(!windows.empty(), Errc::degenerate_data, "no windows to assemble");
  require(split.size() == windows.size(), Errc::bad_config,
          "split assignment must cover every window");

  Dataset data;
  data.task = windows.front().label.task;
  data.class_names = ClassLabel::names(data.task);
  data.seed = seed;
  data.split = split;

  const Eigen::VectorXd first = flatten(windows.front());
  data.features.resize(static_cast<Eigen::Index>(windows.size()), first.size());
  data.features.row(0) = first * feature_scale;
  data.labels.push_back(windows.front().label.index);
  for (std::size_t i = 1; i < windows.size(); ++i) {
    require(windows[i].label.task == data.task, Errc::shape_mismatch,
            "windows mix classification tasks");
    const Eigen::VectorXd row = flatten(windows[i]);
    require(row.size() == data.features.cols(), Errc::shape_mismatch,
            "windows have unequal feature dimensions");
    data.features.row(static_cast<Eigen::Index>(i)) = row * feature_scale;
    data.labels.push_back(windows[i].label.index);
  }
  return data;
}

namespace {

/// Row-wise softmax of the decision values, numerically stabilized.
Eigen::MatrixXd softmax_rows(Eigen::MatrixXd z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - m).exp();
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

double cross_entropy_sum(const Eigen::MatrixXd& z, const std::vector<int>& y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    loss += lse - z(i, y[static_cast<std::size_t>(i)]);
  }
  return loss;
}

}  // namespace

Eigen::MatrixXd LRModel::decision(const Eigen::MatrixXd& x) const {
  return (x * weights.transpose()).rowwise() + bias.transpose();
}

Eigen::MatrixXd LRModel::probabilities(const Eigen::MatrixXd& x) const {
  return softmax_rows(decision(x));
}

std::vector<int> LRModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z = decision(x);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index best = 0;
    z.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double lr_objective(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    const Eigen::MatrixXd& x, const std::vector<int>& y, double inverse_reg_c) {
  const Eigen::MatrixXd z = (x * weights.transpose()).rowwise() + bias.transpose();
  return cross_entropy_sum(z, y) + weights.squaredNorm() / (2.0 * inverse_reg_c);
}

void lr_objective_gradient(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                           const Eigen::MatrixXd& x, const std::vector<int>& y,
                           double inverse_reg_c, Eigen::MatrixXd& grad_weights,
                           Eigen::VectorXd& grad_bias) {
  Eigen::MatrixXd p = softmax_rows((x * weights.transpose()).rowwise() + bias.transpose());
  for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  grad_weights = p.transpose() * x + weights / inverse_reg_c;
  grad_bias = p.colwise().sum().transpose();
}

LRModel train_lr(const Dataset& data, const TrainConfig& cfg, TrainTrace* trace) {
  require(cfg.inverse_reg_c > 0.0, Errc::bad_config, "inverse regularization C must be positive");
  require(cfg.max_iterations >= 1, Errc::bad_config, "max_iterations must be >= 1");

  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < data.split.size(); ++i) {
    if (data.split[i] == 0) rows.push_back(static_cast<Eigen::Index>(i));
  }
  require(!rows.empty(), Errc::degenerate_data, "train split is empty");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  std::vector<int> y(rows.size());
  std::set<int> present;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    y[i] = data.labels[static_cast<std::size_t>(rows[i])];
    present.insert(y[i]);
  }
  require(present.size() >= 2, Errc::degenerate_data,
          "training requires at least two classes in the train split");

  const auto n_classes = static_cast<Eigen::Index>(data.class_names.size());
  LRModel model;
  model.task = data.task;
  model.class_names = data.class_names;
  model.inverse_reg_c = cfg.inverse_reg_c;
  model.weights = Eigen::MatrixXd::Zero(n_classes, x.cols());
  model.bias = Eigen::VectorXd::Zero(n_classes);

  double loss = lr_objective(model.weights, model.bias, x, y, cfg.inverse_reg_c);
  if (trace) {
    *trace = {};
    trace->loss.push_back(loss);
  }

  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
  double step = 1.0;
  constexpr double kArmijo = 1e-4;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    lr_objective_gradient(model.weights, model.bias, x, y, cfg.inverse_reg_c, grad_w, grad_b);
    const double grad_inf = std::max(grad_w.cwiseAbs().maxCoeff(), grad_b.cwiseAbs().maxCoeff());
    if (grad_inf < cfg.grad_tolerance_inf) {
      if (trace) trace->reached_tolerance = true;
      break;
    }
    const double grad_sq = grad_w.squaredNorm() + grad_b.squaredNorm();

    step *= 2.0;  // allow recovery after conservative iterations
    double new_loss = 0.0;
    bool accepted = false;
    while (step > 1e-20) {
      const Eigen::MatrixXd w_try = model.weights - step * grad_w;
      const Eigen::VectorXd b_try = model.bias - step * grad_b;
      new_loss = lr_objective(w_try, b_try, x, y, cfg.inverse_reg_c);
      if (new_loss <= loss - kArmijo * step * grad_sq) {
        model.weights = w_try;
        model.bias = b_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent progress at the smallest step
    loss = new_loss;
    if (trace) {
      trace->loss.push_back(loss);
      trace->iterations = iter + 1;
    }
  }
  return model;
}

EvalReport evaluate(const LRModel& model, const Dataset& data) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < data.split.size(); ++i) {
    if (data.split[i] == 1) rows.push_back(static_cast<Eigen::Index>(i));
  }
  require(!rows.empty(), Errc::bad_config, "test split is empty");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    y[i] = data.labels[static_cast<std::size_t>(rows[i])];
  }

  const auto k = static_cast<Eigen::Index>(model.class_names.size());
  const std::vector<int> predicted = model.predict(x);
  const Eigen::MatrixXd probs = model.probabilities(x);

  EvalReport report;
  report.class_names = model.class_names;
  report.confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < y.size(); ++i) report.confusion(y[i], predicted[i]) += 1;

  const auto total = static_cast<double>(y.size());
  report.accuracy = static_cast<double>(report.confusion.trace()) / total;

  report.precision_undefined.assign(static_cast<std::size_t>(k), false);
  double macro = 0.0;
  double weighted = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double predicted_c = report.confusion.col(c).sum();
    const double true_c = report.confusion.row(c).sum();
    double precision = 0.0;
    if (predicted_c > 0) {
      precision = report.confusion(c, c) / predicted_c;
    } else {
      report.precision_undefined[static_cast<std::size_t>(c)] = true;
    }
    macro += precision;
    weighted += precision * true_c / total;
  }
  report.macro_precision = macro / static_cast<double>(k);
  report.weighted_precision = weighted;

  // One-vs-rest precision-recall sweep over descending class probability.
  report.pr_curves.resize(static_cast<std::size_t>(k));
  for (Eigen::Index c = 0; c < k; ++c) {
    const std::size_t positives =
        static_cast<std::size_t>(std::count(y.begin(), y.end(), static_cast<int>(c)));
    if (positives == 0) continue;
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return probs(static_cast<Eigen::Index>(a), c) > probs(static_cast<Eigen::Index>(b), c);
    });
    std::size_t tp = 0;
    auto& curve = report.pr_curves[static_cast<std::size_t>(c)];
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (y[order[rank]] == static_cast<int>(c)) ++tp;
      curve.emplace_back(static_cast<double>(tp) / static_cast<double>(positives),
                         static_cast<double>(tp) / static_cast<double>(rank + 1));
    }
  }
  return report;
}

double class_recall(const EvalReport& report, int class_index) {
  const double truth = report.confusion.row(class_index).sum();
  if (truth <= 0) return 0.0;
  return report.confusion(class_index, class_index) / truth;
}

namespace {
constexpr char kModelMagic[4] = {'A', 'W', 'L', 'R'};
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

void save_model(const LRModel& model, const std::string& path) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kModelMagic, kModelMagic + 4);
  put_u16(out, kModelVersion);
  out.push_back(static_cast<std::uint8_t>(model.task));
  put_u32(out, static_cast<std::uint32_t>(model.weights.rows()));
  put_u64(out, static_cast<std::uint64_t>(model.weights.cols()));
  put_f64(out, model.inverse_reg_c);
  for (const std::string& name : model.class_names) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
  }
  for (Eigen::Index c = 0; c < model.bias.size(); ++c) put_f64(out, model.bias[c]);
  for (Eigen::Index c = 0; c < model.weights.rows(); ++c) {
    for (Eigen::Index j = 0; j < model.weights.cols(); ++j) put_f64(out, model.weights(c, j));
  }

  std::ofstream file(path, std::ios::binary);
  require(file.good(), Errc::io_error, "cannot open '" + path + "' for writing");
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  require(file.good(), Errc::io_error, "short write to '" + path + "'");
}

LRModel load_model(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  require(file.good(), Errc::io_error, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  ByteReader r(bytes.data(), bytes.size());
  const std::vector<std::uint8_t> magic = r.bytes(4);
  require(std::equal(magic.begin(), magic.end(), kModelMagic), Errc::bad_magic,
          "not a model file");
  require(r.u16() == kModelVersion, Errc::version_mismatch, "unsupported model version");

  LRModel model;
  model.task = static_cast<Task>(r.u8());
  const std::uint32_t classes = r.u32();
  const std::uint64_t dim = r.u64();
  model.inverse_reg_c = r.f64();
  for (std::uint32_t c = 0; c < classes; ++c) {
    const std::uint16_t len = r.u16();
    const std::vector<std::uint8_t> name = r.bytes(len);
    model.class_names.emplace_back(name.begin(), name.end());
  }
  model.bias.resize(classes);
  for (std::uint32_t c = 0; c < classes; ++c) model.bias[c] = r.f64();
  model.weights.resize(classes, static_cast<Eigen::Index>(dim));
  for (std::uint32_t c = 0; c < classes; ++c) {
    for (std::uint64_t j = 0; j < dim; ++j) {
      model.weights(c, static_cast<Eigen::Index>(j)) = r.f64();
    }
  }
  return model;
}

namespace {

/// Initial wheel angles follow the trial grid: multiples of 30 degrees with
/// +-20 degree jitter.
double sample_theta0(std::size_t trial_index, Rng& rng) {
  const double base = static_cast<double>(trial_index % 12) * 30.0;
  const double jitter = rng.uniform(-20.0, 20.0);
  return normalize_angle((base + jitter) * std::numbers::pi / 180.0);
}

}  // namespace

RunTaskResult run_task(Task task, const std::vector<ScenePlan>& scenes,
                       const RunProtocol& protocol) {
  if (task == Task::ObstacleShape) {
    for (std::size_t idx : protocol.train_scenes) {
      for (const ObstacleSpec& o : scenes.at(idx).obstacles) {
        require(std::abs(o.height_m - 0.025) < 1e-9, Errc::bad_config,
                "obstacle block protocol trains on 25 mm obstacles only");
      }
    }
  }

  std::vector<TraceWindow> windows;
  std::vector<int> split;
  std::vector<int> heights_mm;  // obstacle height per window, 0 for flat
  std::uint64_t counter = 0;

  auto run_block = [&](const std::vector<std::size_t>& scene_indices, int trials, int split_id) {
    for (std::size_t idx : scene_indices) {
      const ScenePlan& base = scenes.at(idx);
      for (int t = 0; t < trials; ++t) {
        Rng trial_rng(mix_seed(protocol.seed, counter));
        ScenePlan scene = base;
        scene.theta0_rad = sample_theta0(counter, trial_rng);
        AcousticParams params = protocol.acoustics;
        params.rng_seed = mix_seed(protocol.seed, counter * 2 + 1);
        ++counter;

        const TrialStates states = run_trial(scene, protocol.geometry, protocol.trial_duration_ms);
        const ExperimentLog log = synthesize_trial(states, scene, params, protocol.geometry);
        WindowingReport rep = make_windows(log, task);
        std::size_t kept = 0;
        for (TraceWindow& w : rep.windows) {
          if (task == Task::Terrain && protocol.max_windows_per_trial > 0 &&
              kept >= static_cast<std::size_t>(protocol.max_windows_per_trial)) {
            break;
          }
          int h_mm = 0;
          if (task == Task::ObstacleShape &&
              w.label.index != static_cast<int>(ObstacleShape::Flat) &&
              !scene.obstacles.empty()) {
            h_mm = static_cast<int>(std::lround(scene.obstacles.front().height_m * 1000.0));
          }
          windows.push_back(std::move(w));
          split.push_back(split_id);
          heights_mm.push_back(h_mm);
          ++kept;
        }
      }
    }
  };

  run_block(protocol.train_scenes, protocol.trials_per_train_scene, 0);
  run_block(protocol.test_scenes, protocol.trials_per_test_scene, 1);

  const double feature_scale = task == Task::Terrain ? 1.0 / kAdcMax : 1.0;
  RunTaskResult result;
  result.dataset = dataset_from_windows(windows, split, feature_scale, protocol.seed);
  windows.clear();
  windows.shrink_to_fit();

  result.model = train_lr(result.dataset, protocol.train);
  result.report = evaluate(result.model, result.dataset);

  if (task == Task::ObstacleShape) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (split[i] == 1) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), result.dataset.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = result.dataset.features.row(rows[i]);
    }
    const std::vector<int> predicted = result.model.predict(x);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = static_cast<std::size_t>(rows[i]);
      if (heights_mm[row] == 0) continue;
      auto& bucket = result.by_height_mm[heights_mm[row]];
      if (predicted[i] == result.dataset.labels[row]) ++bucket.first;
      ++bucket.second;
    }
  }
  return result;
}

}  // namespace awts
