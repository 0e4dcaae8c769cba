#pragma once

#include "f1b/simulation.hpp"

namespace f1b {

// 2-dimensional tanh cell with a jointly trained logistic head on the final
// state. The head doubles as the linear classifier at evaluation time.
struct TrainableModel {
  VanillaParams cell;      // K = 2, tanh
  LinearClassifier head;   // beta (2), gamma
};

struct TrainConfig {
  int n = 10;
  int batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int epochs = 2000;  // optimizer steps; every step samples a fresh batch
  std::uint64_t seed = 1;
  double init_scale = 0.5;
  std::int64_t eval_paths = 10000;
};

// Gradient of the mean logistic loss with respect to every parameter.
struct TrainGradient {
  Eigen::MatrixXd W;  // 2 x 2
  Eigen::MatrixXd U;  // 2 x 2
  Eigen::VectorXd b;  // 2
  Eigen::VectorXd beta;
  double gamma = 0.0;
};

// Mean over the batch of log(1 + exp(-y (beta.s_n + gamma))), with the final
// state from the tanh recursion under the symmetric encoding.
double forward_loss(const TrainableModel& m, const std::vector<SamplePath>& batch);

// Exact reverse-mode gradient through all n steps.
TrainGradient backward(const TrainableModel& m, const std::vector<SamplePath>& batch);

struct TrainReport {
  std::vector<double> loss_curve;  // one entry per optimizer step
  double final_accuracy = 0.0;     // on fresh evaluation paths
  bool separable = false;          // exact 2-D separation of evaluation finals
  double separability_error = 0.0; // 0 when separable, else scanned linear error
  bool converged = false;          // mean loss over the last 100 steps < 0.05
  bool diverged = false;           // loss became non-finite; training stopped
};

// SGD with momentum on freshly sampled batches. Deterministic in the config.
std::pair<TrainableModel, TrainReport> train(const TrainConfig& config);

// Distribution replay of a fixed reference parameter set for the 2-D tanh
// cell (n = 100, flag fixed at 50, zero bias, zero initial state), with
// threshold-error summaries at the loading and transfer steps and a
// separability verdict on the final states.
struct ReplayResult {
  DistributionSeries series;
  double err_loading_coord2 = 0.0;   // t = 50, coordinate 2
  double err_after_coord2 = 0.0;     // t = 51, coordinate 2
  double err_after_coord1 = 0.0;     // t = 51, coordinate 1
  double err_final_coord1 = 0.0;     // t = 100, coordinate 1
  bool separable = false;            // exact separation of final 2-D states
  double final_error_2d = 0.0;       // 0 when separable, else scanned error
  LinearClassifier separator;
};

// The replayed parameter set.
VanillaParams replay_reference_params();

ReplayResult replay_figure4(std::int64_t paths_per_class, std::uint64_t seed,
                            int workers = 1);

}  // namespace f1b
