#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "f1b/simulation.hpp"
#include "test_util.hpp"

using namespace f1b;
using namespace f1b::testutil;

namespace {

std::int64_t histogram_mass(const Histogram& h, bool positive) {
  const auto& counts = positive ? h.counts_pos : h.counts_neg;
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

}  // namespace

TEST_CASE("conditioned paths force the flagged bit and the flag position") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const SamplePath pos = conditioned_path(15, LMode::Fixed(7), +1, seed);
    CHECK(pos.flag_index == 7);
    CHECK(pos.label() == +1);
    const SamplePath neg = conditioned_path(15, LMode::Random(), -1, seed);
    CHECK(neg.label() == -1);
    CHECK(neg.flag_index >= 1);
    CHECK(neg.flag_index <= 15);
  }
}

TEST_CASE("distribution snapshots conserve mass and respect conditioning") {
  const ModelSystem sys = gru_k1_system({1.5, 1.0});
  McOptions opt;
  opt.snapshot_times = {0, 5, 10};
  opt.capture_samples = true;
  const std::int64_t paths = 3000;
  const DistributionSeries series = mc_distributions(
      sys.params, sys.s0, sys.encoding, 10, LMode::Fixed(5), paths, 512, opt);

  REQUIRE(series.snapshot_times == std::vector<int>{0, 5, 10});
  REQUIRE(series.histograms.size() == 3);
  for (std::size_t si = 0; si < 3; ++si) {
    CHECK(histogram_mass(series.histograms[si][0], true) == paths);
    CHECK(histogram_mass(series.histograms[si][0], false) == paths);
  }
  // Captured samples align with the histogram mass.
  REQUIRE(series.samples_pos.size() == 3);
  CHECK(series.samples_pos[2][0].size() == static_cast<std::size_t>(paths));

  // At the flag snapshot the positive class is strictly above the negative
  // class for this strong gate: the loaded feature dominates.
  const ThresholdResult at_flag =
      best_threshold_error(series.samples_pos[1][0], series.samples_neg[1][0]);
  CHECK(at_flag.error_rate < 0.05);
}

TEST_CASE("distribution runs are identical for any worker count") {
  const ModelSystem sys = gru_k1_system({0.8, 1.0});
  McOptions opt;
  opt.snapshot_times = {0, 3, 9};
  opt.capture_samples = true;
  DistributionSeries one, eight;
  opt.workers = 1;
  one = mc_distributions(sys.params, sys.s0, sys.encoding, 9, LMode::Random(), 2000, 77, opt);
  opt.workers = 8;
  eight = mc_distributions(sys.params, sys.s0, sys.encoding, 9, LMode::Random(), 2000, 77, opt);

  for (std::size_t si = 0; si < one.histograms.size(); ++si) {
    CHECK(one.histograms[si][0].counts_pos == eight.histograms[si][0].counts_pos);
    CHECK(one.histograms[si][0].counts_neg == eight.histograms[si][0].counts_neg);
    CHECK(one.samples_pos[si][0] == eight.samples_pos[si][0]);
    CHECK(one.samples_neg[si][0] == eight.samples_neg[si][0]);
  }
}

TEST_CASE("degenerate and invalid distribution requests") {
  const ModelSystem sys = gru_k1_system({1.0, 1.0});
  McOptions opt;
  opt.snapshot_times = {0, 2};
  const DistributionSeries empty =
      mc_distributions(sys.params, sys.s0, sys.encoding, 4, LMode::Random(), 0, 1, opt);
  CHECK(histogram_mass(empty.histograms[0][0], true) == 0);

  McOptions bad_snapshot;
  bad_snapshot.snapshot_times = {5};
  CHECK_THROWS_AS(mc_distributions(sys.params, sys.s0, sys.encoding, 4, LMode::Random(), 10,
                                   1, bad_snapshot),
                  std::invalid_argument);
  McOptions bad_bins;
  bad_bins.bins = 0;
  CHECK_THROWS_AS(mc_distributions(sys.params, sys.s0, sys.encoding, 4, LMode::Random(), 10,
                                   1, bad_bins),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc_distributions(sys.params, sys.s0, sys.encoding, 4, LMode::Fixed(9), 10,
                                   1, McOptions{}),
                  std::invalid_argument);
}

TEST_CASE("monte-carlo error estimation") {
  SUBCASE("a constant classifier sits at one half") {
    ModelSystem sys = gru_k1_system({1.0, 1.0});
    sys.classifier.beta = Eigen::VectorXd::Zero(1);
    const McErrorResult r = mc_error(sys, 10, 20000, 99, 2);
    CHECK(r.estimate == doctest::Approx(0.5).epsilon(0.03));
    CHECK(r.ci.lo <= 0.5);
    CHECK(r.ci.hi >= 0.5);
  }
  SUBCASE("the certified long construction measures exactly zero") {
    const double a = choose_a(100, 0.1);
    const ModelSystem sys = gru_k1_system({a, 1.0});
    CHECK(certify_gru_interval(sigmoid(a), std::tanh(1.0), 100).certified);
    const McErrorResult r = mc_error(sys, 100, 100000, 7, 2);
    CHECK(r.errors == 0);
    CHECK(r.estimate == 0.0);
    CHECK(r.ci.hi < 1e-4);
  }
  SUBCASE("estimates agree with enumeration on random draws") {
    SplitMix64 rng(2024);
    int covered = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
      const GruParams params = random_gru(rng, 1, 1.2);
      LinearClassifier classifier;
      classifier.beta = Eigen::VectorXd::Ones(1);
      classifier.gamma = rng.next_uniform(-0.2, 0.2);
      const CellState s0 = zero_state(params);
      const ExactResult exact =
          exact_error(params, s0, FlagEncoding::Symmetric, classifier, 10, 2);
      const McErrorResult mc = mc_error(params, s0, FlagEncoding::Symmetric, classifier, 10,
                                        4000, derive_seed(55, trial), 2);
      const double p = exact.error_probability();
      if (p >= mc.ci.lo && p <= mc.ci.hi) ++covered;
    }
    CHECK(covered >= trials - 1);  // Wilson 95% with a fixed seed
  }
  SUBCASE("worker counts do not change the estimate") {
    const ModelSystem sys = gru_k1_system({0.4, 1.0});
    const McErrorResult a = mc_error(sys, 12, 5000, 3, 1);
    const McErrorResult b = mc_error(sys, 12, 5000, 3, 8);
    CHECK(a.errors == b.errors);
  }
}

TEST_CASE("state moments match the recursion under the closed-form dynamics") {
  const double A = 0.9;
  const double B = std::tanh(1.0);
  const double a = std::log(A / (1.0 - A));
  const ModelSystem sys = gru_k1_system({a, 1.0});
  const int n = 6;
  const MomentSeries rec = moment_recursion(sigmoid(a), B, n);
  const auto [pos, neg] = mc_state_moments(sys.params, sys.s0, sys.encoding, n,
                                           LMode::Random(), 20000, 2718, 0, 2);
  for (int t = 0; t <= n; ++t) {
    const std::size_t i = static_cast<std::size_t>(t);
    if (pos.se_mean[i] > 0.0) {
      CHECK(std::abs(pos.mean[i] - rec.mean_pos[i]) <= 4.0 * pos.se_mean[i]);
      CHECK(std::abs(neg.mean[i] - rec.mean_neg[i]) <= 4.0 * neg.se_mean[i]);
    }
    if (pos.se_var[i] > 0.0) {
      CHECK(std::abs(pos.var[i] - rec.var_pos[i]) <= 4.0 * pos.se_var[i]);
      CHECK(std::abs(neg.var[i] - rec.var_neg[i]) <= 4.0 * neg.se_var[i]);
    }
  }
}

TEST_CASE("grid specification") {
  CHECK(GridSpec{-2.0, 2.0, 0.2}.values().size() == 21);
  CHECK(GridSpec{1.0, 1.0, 0.5}.values() == std::vector<double>{1.0});
  CHECK_THROWS_AS((GridSpec{0.0, 1.0, 0.0}.values()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{1.0, 0.0, 0.5}.values()), std::invalid_argument);
}

TEST_CASE("the scalar sweep") {
  SUBCASE("a memory-poor point cannot separate the final states") {
    const GridSpec u{0.8, 0.8, 1.0}, w1{0.9, 0.9, 1.0}, w2{0.1, 0.1, 1.0};
    const SweepReport r = sweep_vanilla_k1(u, w1, w2, 20, 2000, 31, 2);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].error > 0.2);
    CHECK(r.min_error == r.points[0].error);
  }
  SUBCASE("the documented scalar recursion agrees with the generic cell") {
    SplitMix64 rng(61);
    for (int trial = 0; trial < 25; ++trial) {
      const double U = rng.next_uniform(-2, 2);
      const double W1 = rng.next_uniform(-2, 2);
      const double W2 = rng.next_uniform(-2, 2);
      const SamplePath path = sample_path(9, derive_seed(14, trial));
      double scalar = 0.0;
      for (int t = 1; t <= path.n; ++t) {
        const double x_flag = (t == path.flag_index) ? 1.0 : -1.0;
        scalar = std::tanh(U * scalar + W1 * path.bit(t) + W2 * x_flag);
      }
      const VanillaParams params = vanilla1(U, W1, W2);
      CellState state = zero_state(params);
      for (int t = 1; t <= path.n; ++t) {
        state = step(params, state, encode(path, t, FlagEncoding::Symmetric));
      }
      CHECK(scalar == doctest::Approx(state.s[0]).epsilon(1e-12));
    }
  }
  SUBCASE("sweep results do not depend on the worker count") {
    const GridSpec u{-1.3, -0.3, 0.5}, w1{0.7, 0.7, 1.0}, w2{-0.4, 0.4, 0.4};
    const SweepReport one = sweep_vanilla_k1(u, w1, w2, 9, 64, 123, 1);
    const SweepReport eight = sweep_vanilla_k1(u, w1, w2, 9, 64, 123, 8);
    REQUIRE(one.points.size() == eight.points.size());
    for (std::size_t i = 0; i < one.points.size(); ++i) {
      CHECK(one.points[i].error == eight.points[i].error);
      CHECK(one.points[i].ci.lo == eight.points[i].ci.lo);
    }
  }
  SUBCASE("invalid requests") {
    CHECK_THROWS_AS(
        sweep_vanilla_k1(GridSpec{0, 1, 0.5}, GridSpec{0, 1, 0.5}, GridSpec{0, 1, -1}, 5, 10, 1),
        std::invalid_argument);
    CHECK_THROWS_AS(
        sweep_vanilla_k1(GridSpec{0, 1, 0.5}, GridSpec{0, 1, 0.5}, GridSpec{0, 1, 0.5}, 0, 10, 1),
        std::invalid_argument);
  }
}

TEST_CASE("csv exports") {
  SUBCASE("histogram schema") {
    const ModelSystem sys = gru_k1_system({1.0, 1.0});
    McOptions opt;
    opt.snapshot_times = {0, 4};
    opt.bins = 5;
    const DistributionSeries series =
        mc_distributions(sys.params, sys.s0, sys.encoding, 4, LMode::Random(), 50, 9, opt);
    std::ostringstream out;
    export_distributions_csv(series, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,coord,bin_left,bin_right,count_pos,count_neg");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 5);  // snapshots x bins (one coordinate)
  }
  SUBCASE("sweep schema") {
    const GridSpec g{0.5, 0.5, 1.0};
    const SweepReport r = sweep_vanilla_k1(g, g, g, 4, 10, 3, 1);
    std::ostringstream out;
    export_sweep_csv(r, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "U,W1,W2,err,ci_lo,ci_hi");
    std::getline(in, line);
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  SUBCASE("empty inputs give header-only files") {
    std::ostringstream hist_out;
    export_distributions_csv(DistributionSeries{}, hist_out);
    CHECK(hist_out.str() == "t,coord,bin_left,bin_right,count_pos,count_neg\n");
    std::ostringstream sweep_out;
    export_sweep_csv(SweepReport{}, sweep_out);
    CHECK(sweep_out.str() == "U,W1,W2,err,ci_lo,ci_hi\n");
  }
  SUBCASE("trajectory dump") {
    const ModelSystem sys = gru_k1_system({1.0, 1.0});
    const SamplePath path = sample_path(5, 4);
    const Trajectory traj = run(sys.params, sys.s0, path, sys.encoding);
    std::ostringstream out;
    export_trajectory_csv(traj, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,s_1");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
  }
}
