#pragma once

#include <iosfwd>
#include <vector>

#include "f1b/verification.hpp"

namespace f1b {

// Flag-position conditioning for Monte-Carlo runs.
struct LMode {
  bool is_fixed = false;
  int L = 0;

  static LMode Fixed(int L) { return {true, L}; }
  static LMode Random() { return {false, 0}; }
};

// Per-class counts over a shared binning. Samples outside the range are
// clamped into the edge bins, so mass is conserved.
struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 monotone edges
  std::vector<std::int64_t> counts_pos, counts_neg;
};

struct DistributionSeries {
  int n = 0;
  std::vector<int> snapshot_times;
  // histograms[snapshot][coordinate]
  std::vector<std::vector<Histogram>> histograms;
  // Raw per-path values, captured on request: samples_pos[snapshot][coord][path].
  std::vector<std::vector<std::vector<double>>> samples_pos, samples_neg;
  // For 2-D states: scatter of the first scatter_cap paths per class, at each
  // snapshot: scatter_pos[snapshot][path].
  std::vector<std::vector<Eigen::Vector2d>> scatter_pos, scatter_neg;
};

struct McOptions {
  std::vector<int> snapshot_times;  // defaults to {0, n/2, n} when empty
  int bins = 61;
  double bin_lo = -1.05;
  double bin_hi = 1.05;
  bool capture_samples = false;
  std::int64_t scatter_cap = 5000;
  int workers = 1;
};

// Runs paths_per_class conditioned-positive and conditioned-negative paths
// (the flagged bit is forced, all other bits stay i.i.d.) and bins every
// requested coordinate at every snapshot.
DistributionSeries mc_distributions(const AnyParams& params, const CellState& s0,
                                    FlagEncoding enc, int n, LMode l_mode,
                                    std::int64_t paths_per_class, std::uint64_t seed,
                                    const McOptions& options = {});

struct McErrorResult {
  double estimate = 0.0;
  Interval ci;  // Wilson 95%
  std::uint64_t errors = 0;
  std::uint64_t paths = 0;
};

// Unconditioned Monte-Carlo estimate of the classification error.
McErrorResult mc_error(const AnyParams& params, const CellState& s0, FlagEncoding enc,
                       const LinearClassifier& classifier, int n, std::int64_t num_paths,
                       std::uint64_t seed, int workers = 1);
McErrorResult mc_error(const ModelSystem& system, int n, std::int64_t num_paths,
                       std::uint64_t seed, int workers = 1);

// Per-time mean/variance of one state coordinate, per class, with standard
// errors estimated from the sample. Used to check the moment recursion.
struct ClassMoments {
  std::vector<double> mean, var, se_mean, se_var;  // index t in 0..n
};

std::pair<ClassMoments, ClassMoments> mc_state_moments(
    const AnyParams& params, const CellState& s0, FlagEncoding enc, int n, LMode l_mode,
    std::int64_t paths_per_class, std::uint64_t seed, int coordinate = 0, int workers = 1);

// The scalar-state search: final states follow
//   s_t = tanh(U s_{t-1} + W1 x_info + W2 x_flag)
// with zero bias and the symmetric encoding.
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  std::vector<double> values() const;
};

struct SweepPoint {
  double U = 0.0, W1 = 0.0, W2 = 0.0;
  double error = 0.0;
  Interval ci;
  std::uint64_t paths = 0;  // total finals entering the threshold search
  std::uint64_t seed = 0;   // derived per-point stream seed
};

struct SweepReport {
  GridSpec grid_u, grid_w1, grid_w2;
  int n = 0;
  std::int64_t paths_per_class = 0;
  std::uint64_t seed = 0;
  std::vector<SweepPoint> points;  // U-major, then W1, then W2
  double min_error = 0.0;
  std::size_t argmin = 0;
};

SweepReport sweep_vanilla_k1(const GridSpec& grid_u, const GridSpec& grid_w1,
                             const GridSpec& grid_w2, int n, std::int64_t paths_per_class,
                             std::uint64_t seed, int workers = 1);

// CSV writers. Histogram rows: t,coord,bin_left,bin_right,count_pos,count_neg.
// Sweep rows: U,W1,W2,err,ci_lo,ci_hi. Empty inputs produce a header-only file.
void export_distributions_csv(const DistributionSeries& series, std::ostream& out);
void export_sweep_csv(const SweepReport& report, std::ostream& out);
void export_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

// Conditioned path used throughout the Monte-Carlo layer: ordinary draw, then
// the flag position (when fixed) and the flagged bit (when label != 0) are
// forced. Forcing instead of rejecting keeps class balance exact.
SamplePath conditioned_path(int n, LMode l_mode, int label, std::uint64_t seed);

// Stream keys under the master seed. Every path seed is
// derive_seed(derive_seed(master, stream), index).
enum class SeedStream : std::uint64_t {
  Unconditioned = 0,
  Positive = 1,
  Negative = 2,
  Sweep = 3,
  MomentsPositive = 4,
  MomentsNegative = 5,
  TrainBatch = 6,
  TrainEval = 7,
  TrainInit = 8,
};

std::uint64_t stream_seed(std::uint64_t master, SeedStream stream);

}  // namespace f1b
