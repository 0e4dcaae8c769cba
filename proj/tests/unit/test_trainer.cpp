#include <doctest.h>

#include <cmath>

#include "f1b/trainer.hpp"
#include "test_util.hpp"

using namespace f1b;
using namespace f1b::testutil;

namespace {

TrainableModel zero_model() {
  TrainableModel m;
  m.cell.K = 2;
  m.cell.activation = Activation::Tanh;
  m.cell.W = Eigen::MatrixXd::Zero(2, 2);
  m.cell.U = Eigen::MatrixXd::Zero(2, 2);
  m.cell.b = Eigen::VectorXd::Zero(2);
  m.head.beta = Eigen::VectorXd::Zero(2);
  m.head.gamma = 0.0;
  return m;
}

SamplePath path_with_label(int n, int label, std::uint64_t seed) {
  return conditioned_path(n, LMode::Random(), label, seed);
}

// Flattened parameter access used by the finite-difference oracle.
std::vector<double*> parameter_slots(TrainableModel& m) {
  std::vector<double*> slots;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) slots.push_back(&m.cell.W(r, c));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) slots.push_back(&m.cell.U(r, c));
  for (int r = 0; r < 2; ++r) slots.push_back(&m.cell.b[r]);
  for (int r = 0; r < 2; ++r) slots.push_back(&m.head.beta[r]);
  slots.push_back(&m.head.gamma);
  return slots;
}

std::vector<double> gradient_slots(const TrainGradient& g) {
  std::vector<double> flat;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) flat.push_back(g.W(r, c));
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) flat.push_back(g.U(r, c));
  for (int r = 0; r < 2; ++r) flat.push_back(g.b[r]);
  for (int r = 0; r < 2; ++r) flat.push_back(g.beta[r]);
  flat.push_back(g.gamma);
  return flat;
}

}  // namespace

TEST_CASE("forward loss values") {
  SUBCASE("zero logits give log 2 per example") {
    const TrainableModel m = zero_model();
    std::vector<SamplePath> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(sample_path(6, i));
    CHECK(forward_loss(m, batch) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("a confident correct logit is nearly free") {
    TrainableModel m = zero_model();
    m.head.gamma = 10.0;  // zero cell weights keep s_n = 0, so the logit is 10
    const std::vector<SamplePath> pos{path_with_label(6, +1, 3)};
    CHECK(forward_loss(m, pos) == doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-12));
    CHECK(forward_loss(m, pos) == doctest::Approx(4.54e-5).epsilon(1e-2).scale(0.0));
    const std::vector<SamplePath> neg{path_with_label(6, -1, 3)};
    CHECK(forward_loss(m, neg) == doctest::Approx(10.0 + std::log1p(std::exp(-10.0))).epsilon(1e-12));
  }
  SUBCASE("empty batches are rejected") {
    CHECK_THROWS_AS(forward_loss(zero_model(), {}), std::invalid_argument);
  }
}

TEST_CASE("gradient of the zero model matches the hand derivation") {
  // With every parameter zero the logit is 0, sigmoid(0) = 1/2, so the
  // gamma gradient is -mean(label)/2 and everything upstream is zero.
  const TrainableModel m = zero_model();
  std::vector<SamplePath> batch;
  batch.push_back(path_with_label(5, +1, 1));
  batch.push_back(path_with_label(5, +1, 2));
  batch.push_back(path_with_label(5, +1, 3));
  batch.push_back(path_with_label(5, -1, 4));
  const TrainGradient g = backward(m, batch);
  CHECK(g.gamma == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(g.beta.isZero(0.0));
  CHECK(g.W.isZero(0.0));
  CHECK(g.U.isZero(0.0));
  CHECK(g.b.isZero(0.0));
}

TEST_CASE("backpropagated gradients match central finite differences") {
  SplitMix64 rng(505);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int config = 0; config < 10; ++config) {
    TrainableModel m = zero_model();
    m.cell.W = random_matrix(rng, 2, 2, 0.6);
    m.cell.U = random_matrix(rng, 2, 2, 0.6);
    m.cell.b = random_vector(rng, 2, 0.6);
    m.head.beta = random_vector(rng, 2, 0.6);
    m.head.gamma = rng.next_uniform(-0.6, 0.6);

    const int n = 4 + static_cast<int>(rng.next_below(9));  // up to 12
    std::vector<SamplePath> batch;
    for (int i = 0; i < 8; ++i) {
      batch.push_back(sample_path(n, derive_seed(config, i)));
    }
    const std::vector<double> analytic = gradient_slots(backward(m, batch));
    const std::vector<double*> slots = parameter_slots(m);
    for (std::size_t j = 0; j < slots.size(); ++j) {
      const double saved = *slots[j];
      *slots[j] = saved + eps;
      const double up = forward_loss(m, batch);
      *slots[j] = saved - eps;
      const double down = forward_loss(m, batch);
      *slots[j] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double rel = std::abs(analytic[j] - numeric) /
                         std::max({1e-3, std::abs(analytic[j]), std::abs(numeric)});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("training mechanics") {
  SUBCASE("a zero learning rate leaves the parameters at their initialization") {
    TrainConfig cfg;
    cfg.n = 5;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    cfg.eval_paths = 100;
    const auto [m1, r1] = train(cfg);
    cfg.epochs = 1;
    const auto [m2, r2] = train(cfg);
    CHECK(same_values(m1.cell.W, m2.cell.W));
    CHECK(same_values(m1.cell.U, m2.cell.U));
    CHECK(same_values(m1.cell.b, m2.cell.b));
    CHECK(same_values(m1.head.beta, m2.head.beta));
    CHECK(m1.head.gamma == m2.head.gamma);
  }
  SUBCASE("identical configurations give bit-identical runs") {
    TrainConfig cfg;
    cfg.n = 6;
    cfg.epochs = 40;
    cfg.eval_paths = 200;
    const auto [m1, r1] = train(cfg);
    const auto [m2, r2] = train(cfg);
    CHECK(same_values(m1.cell.W, m2.cell.W));
    CHECK(same_values(m1.cell.U, m2.cell.U));
    CHECK(m1.head.gamma == m2.head.gamma);
    CHECK(r1.loss_curve == r2.loss_curve);
  }
  SUBCASE("an absurd learning rate is reported as divergence") {
    TrainConfig cfg;
    cfg.n = 5;
    cfg.learning_rate = 1e308;
    cfg.epochs = 20;
    cfg.eval_paths = 100;
    const auto [model, report] = train(cfg);
    CHECK(report.diverged);
    CHECK(!report.converged);
    CHECK(!std::isfinite(report.loss_curve.back()));
  }
  SUBCASE("invalid configurations are rejected") {
    TrainConfig cfg;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train(cfg), std::invalid_argument);
  }
}

TEST_CASE("short sequences train to high accuracy for at least one seed") {
  int converged = 0;
  double best_accuracy = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig cfg;
    cfg.n = 10;
    cfg.seed = seed;
    cfg.eval_paths = 10000;
    const auto [model, report] = train(cfg);
    CHECK(!report.diverged);
    if (report.converged) {
      ++converged;
      CHECK(report.final_accuracy > 0.99);
      CHECK(report.separability_error < 0.05);
    }
    best_accuracy = std::max(best_accuracy, report.final_accuracy);
  }
  CHECK(converged >= 1);
  CHECK(best_accuracy > 0.99);
}

TEST_CASE("the reference replay produces loading and transfer signatures") {
  // Small path count: this checks wiring and the short-horizon claims, not
  // the acceptance thresholds.
  const ReplayResult r = replay_figure4(800, 20250810, 2);
  CHECK(r.series.n == 100);
  CHECK(r.err_loading_coord2 < 0.05);   // feature visible in the loading coordinate
  CHECK(r.err_after_coord1 < 0.05);     // and transferred one step later
  CHECK(r.err_after_coord2 > 0.2);      // while the loading coordinate forgets
  CHECK(r.err_final_coord1 >= 0.0);
  CHECK(r.final_error_2d <= 0.55);
  const auto& times = r.series.snapshot_times;
  CHECK(std::find(times.begin(), times.end(), 50) != times.end());
  CHECK(std::find(times.begin(), times.end(), 51) != times.end());
  CHECK(std::find(times.begin(), times.end(), 100) != times.end());
}
