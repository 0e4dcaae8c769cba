#pragma once

#include <optional>
#include <vector>

#include "f1b/constructions.hpp"

namespace f1b {

// Outcome of exhaustive enumeration. The error probability is kept as an
// integer ratio so zero means zero.
struct ExactResult {
  int n = 0;
  std::uint64_t total_paths = 0;
  std::uint64_t errors = 0;
  double min_margin_pos = 0.0;  // min over positive paths of beta.s_n + gamma
  double max_margin_neg = 0.0;  // max over negative paths

  double error_probability() const {
    return total_paths ? static_cast<double>(errors) / static_cast<double>(total_paths) : 0.0;
  }
  bool zero_error() const { return errors == 0; }
};

ExactResult exact_error(const AnyParams& params, const CellState& s0, FlagEncoding enc,
                        const LinearClassifier& classifier, int n, int workers = 1,
                        int cap = PathEnumerator::kDefaultCap);
ExactResult exact_error(const ModelSystem& system, int n, int workers = 1,
                        int cap = PathEnumerator::kDefaultCap);

// Best 1-D threshold classifier over both orientations. orientation = +1
// predicts positive for values >= threshold, -1 for values <= threshold.
// Thresholds are midpoints between adjacent distinct values.
struct ThresholdResult {
  double error_rate = 0.0;
  double threshold = 0.0;
  int orientation = +1;
  std::uint64_t misclassified = 0;
  std::uint64_t total = 0;
};

ThresholdResult best_threshold_error(std::vector<double> pos, std::vector<double> neg);

// Exact 2-D linear separability honoring the tie rule (positives may sit on
// the boundary, negatives must be strictly below it). Candidate separators
// are spanned by pairs of points of the joint set plus axis-aligned
// directions; convex-hull vertices stand in for the full sets, which leaves
// the verdict unchanged. Returns the maximum-margin separator, or nullopt.
std::optional<LinearClassifier> linear_separability_2d(
    const std::vector<Eigen::Vector2d>& pos, const std::vector<Eigen::Vector2d>& neg);

// Cheapest linear classifier found by scanning projection directions
// (angular grid plus both axes). Upper bound on the optimal linear error.
struct DirectionScanResult {
  double error_rate = 0.0;
  LinearClassifier classifier;
};
DirectionScanResult best_linear_error_2d(const std::vector<Eigen::Vector2d>& pos,
                                         const std::vector<Eigen::Vector2d>& neg,
                                         int angles = 360);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Deterministic certificate: either per-(class, L) worst-case intervals of
// the final state (scalar constructions) or exact reachable final-state sets
// (the saturating 2-D construction).
struct IntervalCert {
  int n = 0;
  bool certified = false;
  double certified_margin = 0.0;
  // Scalar route, indexed by L-1.
  std::vector<Interval> pos_final, neg_final;
  // 2-D route, indexed by L-1.
  std::vector<std::vector<Eigen::Vector2d>> pos_final_states, neg_final_states;
};

// Worst-case interval propagation for the gated scalar construction with
// state recursion s_t = A s + (1-A) B x off the flag and swapped weights at
// the flag. Intervals start from the noise-saturated envelope [-B, B] (a
// fixed point of the off-flag step and a superset of anything reachable from
// s0 = 0), which makes the certified margin exactly B(2 A^{n-L+1} - 1) per L,
// minimized at L = 1. Certification is sufficient, not necessary.
IntervalCert certify_gru_interval(double A, double B, int n);

// Exact symbolic reachability for the saturating 2-D construction: the
// clamped dynamics close over a finite state set, so the certificate holds
// for every n and every flag position. Final margins are b1*w21 on both
// sides of the classifier.
IntervalCert certify_vanilla_k2(const VanillaK2Construction& c, int n);

// Mean/variance recursion for the gated scalar construction, conditioned on
// the flag position and mixed uniformly over it. Tracks both classes; the
// zero-bias dynamics make the negative-class series the exact mirror of the
// positive one.
struct MomentSeries {
  int n = 0;
  // Index t in 0..n.
  std::vector<double> mean_pos, var_pos, mean_neg, var_neg;
  // Conditional tables, indexed [L-1][t].
  std::vector<std::vector<double>> mean_pos_given_L, var_pos_given_L;
  std::vector<std::vector<double>> mean_neg_given_L, var_neg_given_L;
  // Chebyshev bound var_n / mean_n^2 for the threshold-at-zero classifier.
  // Reported for inspection only; certification never relies on it.
  double chebyshev_bound = 0.0;
};

MomentSeries moment_recursion(double A, double B, int n);

// Wilson 95% score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials);

}  // namespace f1b
