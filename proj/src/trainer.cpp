#include "f1b/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "f1b/rng.hpp"

namespace f1b {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

void check_trainable(const TrainableModel& m) {
  if (m.cell.K != 2 || m.cell.activation != Activation::Tanh) {
    throw std::invalid_argument("trainer: cell must be the 2-dimensional tanh model");
  }
  if (m.head.beta.size() != 2) {
    throw std::invalid_argument("trainer: head dimension mismatch");
  }
}

double example_loss_and_grad(const TrainableModel& m, const SamplePath& path,
                             TrainGradient* grad) {
  const int n = path.n;
  Trajectory traj = run(m.cell, zero_state(m.cell), path, FlagEncoding::Symmetric);
  const double y = static_cast<double>(path.label());
  const double logit = m.head.margin(traj.back().s);
  const double loss = softplus(-y * logit);
  if (!grad) return loss;

  // d loss / d logit = -y * sigmoid(-y * logit)
  const double dlogit = -y * sigmoid(-y * logit);
  grad->beta += dlogit * traj.back().s;
  grad->gamma += dlogit;

  Eigen::VectorXd ds = dlogit * m.head.beta;
  for (int t = n; t >= 1; --t) {
    const Eigen::VectorXd& s_t = traj[static_cast<std::size_t>(t)].s;
    const Eigen::VectorXd& s_prev = traj[static_cast<std::size_t>(t - 1)].s;
    const InputVector xt = encode(path, t, FlagEncoding::Symmetric);
    const Eigen::Vector2d xv(xt.x_info, xt.x_flag);
    // tanh'(pre) = 1 - s_t^2
    const Eigen::VectorXd da = ds.cwiseProduct(
        Eigen::VectorXd::Ones(2) - s_t.cwiseProduct(s_t));
    grad->W += da * xv.transpose();
    grad->U += da * s_prev.transpose();
    grad->b += da;
    ds = m.cell.U.transpose() * da;
  }
  return loss;
}

double batch_loss(const TrainableModel& m, const std::vector<SamplePath>& batch,
                  TrainGradient* grad) {
  check_trainable(m);
  if (batch.empty()) throw std::invalid_argument("trainer: empty batch");
  if (grad) {
    grad->W = Eigen::MatrixXd::Zero(2, 2);
    grad->U = Eigen::MatrixXd::Zero(2, 2);
    grad->b = Eigen::VectorXd::Zero(2);
    grad->beta = Eigen::VectorXd::Zero(2);
    grad->gamma = 0.0;
  }
  double total = 0.0;
  for (const SamplePath& path : batch) total += example_loss_and_grad(m, path, grad);
  const double inv = 1.0 / static_cast<double>(batch.size());
  if (grad) {
    grad->W *= inv;
    grad->U *= inv;
    grad->b *= inv;
    grad->beta *= inv;
    grad->gamma *= inv;
  }
  return total * inv;
}

}  // namespace

double forward_loss(const TrainableModel& m, const std::vector<SamplePath>& batch) {
  return batch_loss(m, batch, nullptr);
}

TrainGradient backward(const TrainableModel& m, const std::vector<SamplePath>& batch) {
  TrainGradient grad;
  batch_loss(m, batch, &grad);
  return grad;
}

std::pair<TrainableModel, TrainReport> train(const TrainConfig& config) {
  if (config.n < 1 || config.batch_size < 1 || config.epochs < 1 ||
      config.momentum < 0.0 || config.momentum >= 1.0 || config.learning_rate < 0.0 ||
      !(config.init_scale > 0.0) || config.eval_paths < 1) {
    throw std::invalid_argument("train: invalid configuration");
  }

  TrainableModel model;
  model.cell.K = 2;
  model.cell.activation = Activation::Tanh;
  SplitMix64 init(stream_seed(config.seed, SeedStream::TrainInit));
  auto draw = [&] { return init.next_uniform(-config.init_scale, config.init_scale); };
  model.cell.W = Eigen::MatrixXd(2, 2);
  model.cell.U = Eigen::MatrixXd(2, 2);
  model.cell.b = Eigen::VectorXd(2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) model.cell.W(r, c) = draw();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) model.cell.U(r, c) = draw();
  for (int r = 0; r < 2; ++r) model.cell.b[r] = draw();
  model.head.beta = Eigen::VectorXd::Zero(2);
  model.head.gamma = 0.0;

  TrainGradient velocity;
  velocity.W = Eigen::MatrixXd::Zero(2, 2);
  velocity.U = Eigen::MatrixXd::Zero(2, 2);
  velocity.b = Eigen::VectorXd::Zero(2);
  velocity.beta = Eigen::VectorXd::Zero(2);
  velocity.gamma = 0.0;

  TrainReport report;
  report.loss_curve.reserve(static_cast<std::size_t>(config.epochs));
  const std::uint64_t batch_stream = stream_seed(config.seed, SeedStream::TrainBatch);

  std::vector<SamplePath> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));
  for (int step_idx = 0; step_idx < config.epochs; ++step_idx) {
    batch.clear();
    const std::uint64_t step_seed = derive_seed(batch_stream, static_cast<std::uint64_t>(step_idx));
    for (int i = 0; i < config.batch_size; ++i) {
      batch.push_back(sample_path(config.n, derive_seed(step_seed, static_cast<std::uint64_t>(i))));
    }
    TrainGradient grad;
    const double loss = batch_loss(model, batch, &grad);
    report.loss_curve.push_back(loss);
    if (!std::isfinite(loss)) {
      report.diverged = true;
      break;
    }
    // v <- momentum v + g ; theta <- theta - lr v
    velocity.W = config.momentum * velocity.W + grad.W;
    velocity.U = config.momentum * velocity.U + grad.U;
    velocity.b = config.momentum * velocity.b + grad.b;
    velocity.beta = config.momentum * velocity.beta + grad.beta;
    velocity.gamma = config.momentum * velocity.gamma + grad.gamma;
    model.cell.W -= config.learning_rate * velocity.W;
    model.cell.U -= config.learning_rate * velocity.U;
    model.cell.b -= config.learning_rate * velocity.b;
    model.head.beta -= config.learning_rate * velocity.beta;
    model.head.gamma -= config.learning_rate * velocity.gamma;
  }

  if (!report.diverged && report.loss_curve.size() >= 1) {
    const std::size_t window = std::min<std::size_t>(100, report.loss_curve.size());
    double mean = 0.0;
    for (std::size_t i = report.loss_curve.size() - window; i < report.loss_curve.size(); ++i) {
      mean += report.loss_curve[i];
    }
    mean /= static_cast<double>(window);
    report.converged = mean < 0.05;
  }

  // Fresh-path evaluation: accuracy of the trained head plus a separability
  // verdict on the final states it would have to split.
  const std::uint64_t eval_stream = stream_seed(config.seed, SeedStream::TrainEval);
  std::vector<Eigen::Vector2d> finals_pos, finals_neg;
  std::uint64_t correct = 0;
  for (std::int64_t i = 0; i < config.eval_paths; ++i) {
    const SamplePath path =
        sample_path(config.n, derive_seed(eval_stream, static_cast<std::uint64_t>(i)));
    CellState state = zero_state(model.cell);
    for (int t = 1; t <= config.n; ++t) {
      state = step(model.cell, state, encode(path, t, FlagEncoding::Symmetric));
    }
    if (model.head.classify(state.s) == path.label()) ++correct;
    (path.label() > 0 ? finals_pos : finals_neg).emplace_back(state.s[0], state.s[1]);
  }
  report.final_accuracy = static_cast<double>(correct) / static_cast<double>(config.eval_paths);
  if (!finals_pos.empty() && !finals_neg.empty()) {
    if (linear_separability_2d(finals_pos, finals_neg).has_value()) {
      report.separable = true;
      report.separability_error = 0.0;
    } else {
      report.separable = false;
      report.separability_error = best_linear_error_2d(finals_pos, finals_neg).error_rate;
    }
  }
  return {std::move(model), std::move(report)};
}

VanillaParams replay_reference_params() {
  VanillaParams p;
  p.K = 2;
  p.activation = Activation::Tanh;
  p.U = Eigen::MatrixXd(2, 2);
  p.U << -1.2, 0.1938, 0.8660, 0.6481;
  p.W = Eigen::MatrixXd(2, 2);
  p.W << 0.0073, -0.3010, 0.7336, 1.1052;
  p.b = Eigen::VectorXd::Zero(2);  // bias unspecified by the reference; zero assumed
  return p;
}

ReplayResult replay_figure4(std::int64_t paths_per_class, std::uint64_t seed, int workers) {
  if (paths_per_class < 1) {
    throw std::invalid_argument("replay: need at least one path per class");
  }
  const VanillaParams params = replay_reference_params();
  const int n = 100;
  const int L = 50;

  McOptions options;
  options.snapshot_times = {0, 25, 49, 50, 51, 75, 100};
  options.capture_samples = true;
  options.workers = workers;

  ReplayResult result;
  result.series = mc_distributions(params, zero_state(params), FlagEncoding::Symmetric, n,
                                   LMode::Fixed(L), paths_per_class, seed, options);

  auto snapshot_slot = [&](int t) {
    const auto& times = result.series.snapshot_times;
    return static_cast<std::size_t>(
        std::find(times.begin(), times.end(), t) - times.begin());
  };
  auto threshold_err = [&](int t, int coord) {
    const std::size_t si = snapshot_slot(t);
    return best_threshold_error(result.series.samples_pos[si][static_cast<std::size_t>(coord)],
                                result.series.samples_neg[si][static_cast<std::size_t>(coord)])
        .error_rate;
  };
  result.err_loading_coord2 = threshold_err(50, 1);
  result.err_after_coord2 = threshold_err(51, 1);
  result.err_after_coord1 = threshold_err(51, 0);
  result.err_final_coord1 = threshold_err(100, 0);

  const std::size_t last = snapshot_slot(100);
  std::vector<Eigen::Vector2d> finals_pos, finals_neg;
  finals_pos.reserve(static_cast<std::size_t>(paths_per_class));
  finals_neg.reserve(static_cast<std::size_t>(paths_per_class));
  for (std::int64_t i = 0; i < paths_per_class; ++i) {
    finals_pos.emplace_back(result.series.samples_pos[last][0][static_cast<std::size_t>(i)],
                            result.series.samples_pos[last][1][static_cast<std::size_t>(i)]);
    finals_neg.emplace_back(result.series.samples_neg[last][0][static_cast<std::size_t>(i)],
                            result.series.samples_neg[last][1][static_cast<std::size_t>(i)]);
  }
  if (auto separator = linear_separability_2d(finals_pos, finals_neg)) {
    result.separable = true;
    result.final_error_2d = 0.0;
    result.separator = *separator;
  } else {
    result.separable = false;
    const DirectionScanResult scan = best_linear_error_2d(finals_pos, finals_neg);
    result.final_error_2d = scan.error_rate;
    result.separator = scan.classifier;
  }
  return result;
}

}  // namespace f1b
