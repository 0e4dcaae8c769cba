#include "f1b/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "f1b/parallel.hpp"
#include "f1b/rng.hpp"

namespace f1b {

namespace {

// Round-trippable float formatting shared by all CSV writers.
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

int bin_of(double x, double lo, double width, int bins) {
  const int i = static_cast<int>(std::floor((x - lo) / width));
  return std::clamp(i, 0, bins - 1);
}

void check_lmode(int n, LMode l_mode) {
  if (l_mode.is_fixed && (l_mode.L < 1 || l_mode.L > n)) {
    throw std::invalid_argument("flag position must lie in 1..n");
  }
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, SeedStream stream) {
  return derive_seed(master, static_cast<std::uint64_t>(stream));
}

SamplePath conditioned_path(int n, LMode l_mode, int label, std::uint64_t seed) {
  SamplePath path = sample_path(n, seed);
  if (l_mode.is_fixed) path.flag_index = l_mode.L;
  if (label != 0) path.info_bits[static_cast<std::size_t>(path.flag_index - 1)] = label;
  return path;
}

DistributionSeries mc_distributions(const AnyParams& params, const CellState& s0,
                                    FlagEncoding enc, int n, LMode l_mode,
                                    std::int64_t paths_per_class, std::uint64_t seed,
                                    const McOptions& options) {
  if (n < 1) throw std::invalid_argument("mc_distributions: n must be positive");
  if (paths_per_class < 0) throw std::invalid_argument("mc_distributions: negative path count");
  if (options.bins < 1) throw std::invalid_argument("mc_distributions: need at least one bin");
  if (!(options.bin_lo < options.bin_hi)) {
    throw std::invalid_argument("mc_distributions: empty bin range");
  }
  check_lmode(n, l_mode);

  DistributionSeries series;
  series.n = n;
  series.snapshot_times = options.snapshot_times;
  if (series.snapshot_times.empty()) series.snapshot_times = {0, n / 2, n};
  std::sort(series.snapshot_times.begin(), series.snapshot_times.end());
  series.snapshot_times.erase(
      std::unique(series.snapshot_times.begin(), series.snapshot_times.end()),
      series.snapshot_times.end());
  for (int t : series.snapshot_times) {
    if (t < 0 || t > n) throw std::invalid_argument("mc_distributions: snapshot outside 0..n");
  }

  const int K = state_dim(params);
  const std::size_t snapshots = series.snapshot_times.size();
  std::vector<int> snapshot_index(static_cast<std::size_t>(n) + 1, -1);
  for (std::size_t si = 0; si < snapshots; ++si) {
    snapshot_index[static_cast<std::size_t>(series.snapshot_times[si])] = static_cast<int>(si);
  }

  const int bins = options.bins;
  const double width = (options.bin_hi - options.bin_lo) / bins;
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i) edges[static_cast<std::size_t>(i)] = options.bin_lo + width * i;

  series.histograms.assign(snapshots, std::vector<Histogram>(static_cast<std::size_t>(K)));
  for (auto& per_coord : series.histograms) {
    for (auto& h : per_coord) {
      h.bin_edges = edges;
      h.counts_pos.assign(static_cast<std::size_t>(bins), 0);
      h.counts_neg.assign(static_cast<std::size_t>(bins), 0);
    }
  }
  if (options.capture_samples) {
    auto shape = std::vector<std::vector<std::vector<double>>>(
        snapshots, std::vector<std::vector<double>>(
                       static_cast<std::size_t>(K),
                       std::vector<double>(static_cast<std::size_t>(paths_per_class), 0.0)));
    series.samples_pos = shape;
    series.samples_neg = std::move(shape);
  }
  const std::int64_t scatter = (K == 2) ? std::min(options.scatter_cap, paths_per_class) : 0;
  if (scatter > 0) {
    series.scatter_pos.assign(snapshots, std::vector<Eigen::Vector2d>(
                                             static_cast<std::size_t>(scatter)));
    series.scatter_neg = series.scatter_pos;
  }

  std::mutex merge_mutex;
  for (int label : {+1, -1}) {
    const std::uint64_t class_seed =
        stream_seed(seed, label > 0 ? SeedStream::Positive : SeedStream::Negative);
    auto& samples = label > 0 ? series.samples_pos : series.samples_neg;
    auto& scatter_dst = label > 0 ? series.scatter_pos : series.scatter_neg;

    for_each_block(paths_per_class, resolve_workers(options.workers),
                   [&](std::int64_t, std::int64_t begin, std::int64_t end) {
                     // Local integer counts; merge order does not matter.
                     std::vector<std::int64_t> local(
                         snapshots * static_cast<std::size_t>(K) * static_cast<std::size_t>(bins),
                         0);
                     auto local_at = [&](std::size_t si, int coord) {
                       return local.data() + (si * static_cast<std::size_t>(K) +
                                              static_cast<std::size_t>(coord)) *
                                                 static_cast<std::size_t>(bins);
                     };
                     for (std::int64_t i = begin; i < end; ++i) {
                       const SamplePath path = conditioned_path(
                           n, l_mode, label, derive_seed(class_seed, static_cast<std::uint64_t>(i)));
                       CellState state = s0;
                       auto record = [&](int t) {
                         const int si = snapshot_index[static_cast<std::size_t>(t)];
                         if (si < 0) return;
                         for (int k = 0; k < K; ++k) {
                           ++local_at(static_cast<std::size_t>(si), k)[bin_of(
                               state.s[k], options.bin_lo, width, bins)];
                           if (options.capture_samples) {
                             samples[static_cast<std::size_t>(si)][static_cast<std::size_t>(k)]
                                    [static_cast<std::size_t>(i)] = state.s[k];
                           }
                         }
                         if (scatter > 0 && i < scatter) {
                           scatter_dst[static_cast<std::size_t>(si)][static_cast<std::size_t>(i)] =
                               Eigen::Vector2d(state.s[0], state.s[1]);
                         }
                       };
                       record(0);
                       for (int t = 1; t <= n; ++t) {
                         state = step(params, state, encode(path, t, enc));
                         record(t);
                       }
                     }
                     std::lock_guard<std::mutex> lock(merge_mutex);
                     for (std::size_t si = 0; si < snapshots; ++si) {
                       for (int k = 0; k < K; ++k) {
                         auto& h = series.histograms[si][static_cast<std::size_t>(k)];
                         auto& counts = label > 0 ? h.counts_pos : h.counts_neg;
                         const std::int64_t* src = local_at(si, k);
                         for (int bi = 0; bi < bins; ++bi) counts[static_cast<std::size_t>(bi)] += src[bi];
                       }
                     }
                   });
  }
  return series;
}

McErrorResult mc_error(const AnyParams& params, const CellState& s0, FlagEncoding enc,
                       const LinearClassifier& classifier, int n, std::int64_t num_paths,
                       std::uint64_t seed, int workers) {
  if (n < 1) throw std::invalid_argument("mc_error: n must be positive");
  if (num_paths < 1) throw std::invalid_argument("mc_error: need at least one path");

  const std::uint64_t base = stream_seed(seed, SeedStream::Unconditioned);
  const std::int64_t blocks = block_count(num_paths);
  std::vector<std::uint64_t> block_errors(static_cast<std::size_t>(blocks), 0);

  for_each_block(num_paths, resolve_workers(workers),
                 [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                   std::uint64_t errs = 0;
                   for (std::int64_t i = begin; i < end; ++i) {
                     const SamplePath path =
                         sample_path(n, derive_seed(base, static_cast<std::uint64_t>(i)));
                     CellState state = s0;
                     for (int t = 1; t <= n; ++t) state = step(params, state, encode(path, t, enc));
                     if (classifier.classify(state.s) != path.label()) ++errs;
                   }
                   block_errors[static_cast<std::size_t>(block)] = errs;
                 });

  McErrorResult result;
  result.paths = static_cast<std::uint64_t>(num_paths);
  for (auto e : block_errors) result.errors += e;
  result.estimate = static_cast<double>(result.errors) / static_cast<double>(result.paths);
  result.ci = wilson_interval(result.errors, result.paths);
  return result;
}

McErrorResult mc_error(const ModelSystem& system, int n, std::int64_t num_paths,
                       std::uint64_t seed, int workers) {
  return mc_error(system.params, system.s0, system.encoding, system.classifier, n, num_paths,
                  seed, workers);
}

std::pair<ClassMoments, ClassMoments> mc_state_moments(
    const AnyParams& params, const CellState& s0, FlagEncoding enc, int n, LMode l_mode,
    std::int64_t paths_per_class, std::uint64_t seed, int coordinate, int workers) {
  if (n < 1) throw std::invalid_argument("mc_state_moments: n must be positive");
  if (paths_per_class < 2) {
    throw std::invalid_argument("mc_state_moments: need at least two paths per class");
  }
  if (coordinate < 0 || coordinate >= state_dim(params)) {
    throw std::invalid_argument("mc_state_moments: coordinate out of range");
  }
  check_lmode(n, l_mode);

  const std::size_t steps = static_cast<std::size_t>(n) + 1;
  std::pair<ClassMoments, ClassMoments> result;

  for (int label : {+1, -1}) {
    const std::uint64_t class_seed = stream_seed(
        seed, label > 0 ? SeedStream::MomentsPositive : SeedStream::MomentsNegative);
    const std::int64_t blocks = block_count(paths_per_class);
    // Power sums per block and time step; merged in block order so the
    // floating-point reduction is worker-count invariant.
    std::vector<std::vector<double>> s1(static_cast<std::size_t>(blocks),
                                        std::vector<double>(steps, 0.0));
    auto s2 = s1, s3 = s1, s4 = s1;

    for_each_block(paths_per_class, resolve_workers(workers),
                   [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                     auto& b1 = s1[static_cast<std::size_t>(block)];
                     auto& b2 = s2[static_cast<std::size_t>(block)];
                     auto& b3 = s3[static_cast<std::size_t>(block)];
                     auto& b4 = s4[static_cast<std::size_t>(block)];
                     for (std::int64_t i = begin; i < end; ++i) {
                       const SamplePath path = conditioned_path(
                           n, l_mode, label, derive_seed(class_seed, static_cast<std::uint64_t>(i)));
                       CellState state = s0;
                       auto accumulate = [&](std::size_t t) {
                         const double x = state.s[coordinate];
                         const double xx = x * x;
                         b1[t] += x;
                         b2[t] += xx;
                         b3[t] += xx * x;
                         b4[t] += xx * xx;
                       };
                       accumulate(0);
                       for (int t = 1; t <= n; ++t) {
                         state = step(params, state, encode(path, t, enc));
                         accumulate(static_cast<std::size_t>(t));
                       }
                     }
                   });

    ClassMoments& moments = label > 0 ? result.first : result.second;
    moments.mean.assign(steps, 0.0);
    moments.var.assign(steps, 0.0);
    moments.se_mean.assign(steps, 0.0);
    moments.se_var.assign(steps, 0.0);
    const double N = static_cast<double>(paths_per_class);
    for (std::size_t t = 0; t < steps; ++t) {
      double S1 = 0.0, S2 = 0.0, S3 = 0.0, S4 = 0.0;
      for (std::int64_t b = 0; b < blocks; ++b) {
        S1 += s1[static_cast<std::size_t>(b)][t];
        S2 += s2[static_cast<std::size_t>(b)][t];
        S3 += s3[static_cast<std::size_t>(b)][t];
        S4 += s4[static_cast<std::size_t>(b)][t];
      }
      const double mean = S1 / N;
      const double m2 = std::max(0.0, S2 / N - mean * mean);
      const double var = m2 * N / (N - 1.0);
      // Central fourth moment from raw power sums.
      const double m4 = std::max(
          0.0, S4 / N - 4.0 * mean * S3 / N + 6.0 * mean * mean * S2 / N - 3.0 * mean * mean * mean * mean);
      moments.mean[t] = mean;
      moments.var[t] = var;
      moments.se_mean[t] = std::sqrt(var / N);
      moments.se_var[t] = std::sqrt(std::max(0.0, m4 - m2 * m2) / N);
    }
  }
  return result;
}

std::vector<double> GridSpec::values() const {
  if (!(step > 0.0)) throw std::invalid_argument("grid: step must be positive");
  if (hi < lo) throw std::invalid_argument("grid: empty range");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> vals(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) vals[static_cast<std::size_t>(i)] = lo + step * i;
  return vals;
}

SweepReport sweep_vanilla_k1(const GridSpec& grid_u, const GridSpec& grid_w1,
                             const GridSpec& grid_w2, int n, std::int64_t paths_per_class,
                             std::uint64_t seed, int workers) {
  if (n < 1) throw std::invalid_argument("sweep: n must be positive");
  if (paths_per_class < 1) throw std::invalid_argument("sweep: need at least one path per class");

  const std::vector<double> us = grid_u.values();
  const std::vector<double> w1s = grid_w1.values();
  const std::vector<double> w2s = grid_w2.values();
  const std::int64_t total =
      static_cast<std::int64_t>(us.size()) * static_cast<std::int64_t>(w1s.size()) *
      static_cast<std::int64_t>(w2s.size());
  if (total == 0) throw std::invalid_argument("sweep: empty grid");

  SweepReport report;
  report.grid_u = grid_u;
  report.grid_w1 = grid_w1;
  report.grid_w2 = grid_w2;
  report.n = n;
  report.paths_per_class = paths_per_class;
  report.seed = seed;
  report.points.resize(static_cast<std::size_t>(total));

  const std::uint64_t sweep_seed = stream_seed(seed, SeedStream::Sweep);

  for_each_block(
      total, resolve_workers(workers),
      [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        std::vector<double> finals_pos(static_cast<std::size_t>(paths_per_class));
        std::vector<double> finals_neg(static_cast<std::size_t>(paths_per_class));
        for (std::int64_t p = begin; p < end; ++p) {
          const std::size_t iu = static_cast<std::size_t>(p) / (w1s.size() * w2s.size());
          const std::size_t rem = static_cast<std::size_t>(p) % (w1s.size() * w2s.size());
          const std::size_t i1 = rem / w2s.size();
          const std::size_t i2 = rem % w2s.size();
          SweepPoint& point = report.points[static_cast<std::size_t>(p)];
          point.U = us[iu];
          point.W1 = w1s[i1];
          point.W2 = w2s[i2];
          point.seed = derive_seed(sweep_seed, static_cast<std::uint64_t>(p));
          point.paths = static_cast<std::uint64_t>(2 * paths_per_class);

          for (int label : {+1, -1}) {
            const std::uint64_t class_seed =
                derive_seed(point.seed, label > 0 ? 1 : 2);
            auto& finals = label > 0 ? finals_pos : finals_neg;
            for (std::int64_t i = 0; i < paths_per_class; ++i) {
              SplitMix64 rng(derive_seed(class_seed, static_cast<std::uint64_t>(i)));
              const int L = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))) + 1;
              double s = 0.0;
              for (int t = 1; t <= n; ++t) {
                int bit = rng.next_sign();
                if (t == L) bit = label;
                const double x_flag = (t == L) ? 1.0 : -1.0;
                s = std::tanh(point.U * s + point.W1 * static_cast<double>(bit) +
                              point.W2 * x_flag);
              }
              finals[static_cast<std::size_t>(i)] = s;
            }
          }
          const ThresholdResult r = best_threshold_error(finals_pos, finals_neg);
          point.error = r.error_rate;
          point.ci = wilson_interval(r.misclassified, r.total);
        }
      },
      /*block_size=*/16);

  report.min_error = report.points.front().error;
  report.argmin = 0;
  for (std::size_t i = 1; i < report.points.size(); ++i) {
    if (report.points[i].error < report.min_error) {
      report.min_error = report.points[i].error;
      report.argmin = i;
    }
  }
  return report;
}

void export_distributions_csv(const DistributionSeries& series, std::ostream& out) {
  out << "t,coord,bin_left,bin_right,count_pos,count_neg\n";
  for (std::size_t si = 0; si < series.histograms.size(); ++si) {
    const int t = series.snapshot_times[si];
    for (std::size_t k = 0; k < series.histograms[si].size(); ++k) {
      const Histogram& h = series.histograms[si][k];
      for (std::size_t bi = 0; bi + 1 < h.bin_edges.size(); ++bi) {
        out << t << ',' << (k + 1) << ',' << fmt(h.bin_edges[bi]) << ','
            << fmt(h.bin_edges[bi + 1]) << ',' << h.counts_pos[bi] << ','
            << h.counts_neg[bi] << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("export: write failed");
}

void export_sweep_csv(const SweepReport& report, std::ostream& out) {
  out << "U,W1,W2,err,ci_lo,ci_hi\n";
  for (const SweepPoint& p : report.points) {
    out << fmt(p.U) << ',' << fmt(p.W1) << ',' << fmt(p.W2) << ',' << fmt(p.error) << ','
        << fmt(p.ci.lo) << ',' << fmt(p.ci.hi) << '\n';
  }
  if (!out) throw std::runtime_error("export: write failed");
}

void export_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  const Eigen::Index K = trajectory.empty() ? 0 : trajectory.front().s.size();
  out << 't';
  for (Eigen::Index k = 1; k <= K; ++k) out << ",s_" << k;
  out << '\n';
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    out << t;
    for (Eigen::Index k = 0; k < K; ++k) out << ',' << fmt(trajectory[t].s[k]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("export: write failed");
}

}  // namespace f1b
