#include "f1b/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "f1b/parallel.hpp"

namespace f1b {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Strictness guard for symbolic certificates: computed margins carry at most
// a few ulps of rounding, so anything this far from zero keeps its sign.
constexpr double kMarginFloor = 1e-12;

}  // namespace

ExactResult exact_error(const AnyParams& params, const CellState& s0, FlagEncoding enc,
                        const LinearClassifier& classifier, int n, int workers,
                        int cap) {
  PathEnumerator en(n, cap);
  // Probe once so shape errors surface before threads start.
  (void)step(params, s0, encode(en.at(0), 1, enc));
  (void)classifier.margin(s0.s);

  const std::int64_t total = static_cast<std::int64_t>(en.size());
  const std::int64_t blocks = block_count(total);
  std::vector<std::uint64_t> block_errors(static_cast<std::size_t>(blocks), 0);
  std::vector<double> block_min_pos(static_cast<std::size_t>(blocks), kInf);
  std::vector<double> block_max_neg(static_cast<std::size_t>(blocks), -kInf);

  for_each_block(total, resolve_workers(workers),
                 [&](std::int64_t block, std::int64_t begin, std::int64_t end) {
                   std::uint64_t errs = 0;
                   double min_pos = kInf;
                   double max_neg = -kInf;
                   for (std::int64_t i = begin; i < end; ++i) {
                     const SamplePath path = en.at(static_cast<std::uint64_t>(i));
                     CellState state = s0;
                     for (int t = 1; t <= n; ++t) state = step(params, state, encode(path, t, enc));
                     const double margin = classifier.margin(state.s);
                     const int label = path.label();
                     const int predicted = margin >= 0.0 ? +1 : -1;
                     if (predicted != label) ++errs;
                     if (label > 0) {
                       min_pos = std::min(min_pos, margin);
                     } else {
                       max_neg = std::max(max_neg, margin);
                     }
                   }
                   block_errors[static_cast<std::size_t>(block)] = errs;
                   block_min_pos[static_cast<std::size_t>(block)] = min_pos;
                   block_max_neg[static_cast<std::size_t>(block)] = max_neg;
                 });

  ExactResult result;
  result.n = n;
  result.total_paths = en.size();
  result.min_margin_pos = kInf;
  result.max_margin_neg = -kInf;
  for (std::int64_t b = 0; b < blocks; ++b) {
    result.errors += block_errors[static_cast<std::size_t>(b)];
    result.min_margin_pos = std::min(result.min_margin_pos, block_min_pos[static_cast<std::size_t>(b)]);
    result.max_margin_neg = std::max(result.max_margin_neg, block_max_neg[static_cast<std::size_t>(b)]);
  }
  return result;
}

ExactResult exact_error(const ModelSystem& system, int n, int workers, int cap) {
  return exact_error(system.params, system.s0, system.encoding, system.classifier, n,
                     workers, cap);
}

ThresholdResult best_threshold_error(std::vector<double> pos, std::vector<double> neg) {
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("best_threshold_error: both classes must be nonempty");
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  const std::uint64_t P = pos.size();
  const std::uint64_t N = neg.size();

  // Sweep candidate thresholds from below the smallest value to above the
  // largest; between candidates only counts at the crossed value change.
  std::vector<double> values;
  values.reserve(pos.size() + neg.size());
  values.insert(values.end(), pos.begin(), pos.end());
  values.insert(values.end(), neg.begin(), neg.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  ThresholdResult best;
  best.total = P + N;
  best.misclassified = best.total + 1;

  std::uint64_t pos_below = 0;  // #pos <= current candidate's left value
  std::uint64_t neg_below = 0;
  auto consider = [&](double threshold) {
    const std::uint64_t errors_plus = pos_below + (N - neg_below);   // predict + iff x >= thr
    const std::uint64_t errors_minus = (P - pos_below) + neg_below;  // predict + iff x <= thr
    if (errors_plus < best.misclassified) {
      best.misclassified = errors_plus;
      best.threshold = threshold;
      best.orientation = +1;
    }
    if (errors_minus < best.misclassified) {
      best.misclassified = errors_minus;
      best.threshold = threshold;
      best.orientation = -1;
    }
  };

  consider(values.front() - 1.0);
  std::size_t pi = 0, ni = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = values[k];
    while (pi < pos.size() && pos[pi] <= v) ++pi;
    while (ni < neg.size() && neg[ni] <= v) ++ni;
    pos_below = pi;
    neg_below = ni;
    const double threshold =
        (k + 1 < values.size()) ? 0.5 * (v + values[k + 1]) : v + 1.0;
    consider(threshold);
  }

  best.error_rate = static_cast<double>(best.misclassified) / static_cast<double>(best.total);
  return best;
}

namespace {

using Point = Eigen::Vector2d;

std::vector<Point> dedupe(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  return pts;
}

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew monotone chain; input must be deduped and lexicographically sorted.
std::vector<Point> convex_hull(const std::vector<Point>& sorted_pts) {
  const std::size_t n = sorted_pts.size();
  if (n <= 2) return sorted_pts;
  std::vector<Point> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], sorted_pts[i]) <= 0) --k;
    hull[k++] = sorted_pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], sorted_pts[i]) <= 0) --k;
    hull[k++] = sorted_pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

struct SplitExtrema {
  double min_pos = kInf;
  double max_neg = -kInf;
};

SplitExtrema extrema(const Point& beta, const std::vector<Point>& pos,
                     const std::vector<Point>& neg) {
  SplitExtrema e;
  for (const Point& p : pos) e.min_pos = std::min(e.min_pos, beta.dot(p));
  for (const Point& q : neg) e.max_neg = std::max(e.max_neg, beta.dot(q));
  return e;
}

}  // namespace

std::optional<LinearClassifier> linear_separability_2d(const std::vector<Point>& pos,
                                                       const std::vector<Point>& neg) {
  auto make = [](double bx, double by, double gamma) {
    LinearClassifier c;
    c.beta = Eigen::VectorXd(2);
    c.beta << bx, by;
    c.gamma = gamma;
    return c;
  };
  if (pos.empty() && neg.empty()) return make(0.0, 0.0, 0.0);
  if (pos.empty()) return make(0.0, 0.0, -1.0);
  if (neg.empty()) return make(0.0, 0.0, 0.0);

  const std::vector<Point> pos_hull = convex_hull(dedupe(pos));
  const std::vector<Point> neg_hull = convex_hull(dedupe(neg));

  std::vector<Point> joint = pos_hull;
  joint.insert(joint.end(), neg_hull.begin(), neg_hull.end());

  std::vector<Point> candidates = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  for (std::size_t i = 0; i < joint.size(); ++i) {
    for (std::size_t j = i + 1; j < joint.size(); ++j) {
      const Point d = joint[i] - joint[j];
      if (d.squaredNorm() == 0.0) continue;
      candidates.push_back(d);
      candidates.push_back(-d);
      candidates.emplace_back(-d.y(), d.x());
      candidates.emplace_back(d.y(), -d.x());
    }
  }

  // Rank on hull extrema (cheap), then confirm the winners on the full sets.
  std::vector<std::pair<double, Point>> ranked;
  for (const Point& beta : candidates) {
    const SplitExtrema e = extrema(beta, pos_hull, neg_hull);
    if (e.min_pos > e.max_neg) {
      ranked.emplace_back((e.min_pos - e.max_neg) / beta.norm(), beta);
    }
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  for (std::size_t k = 0; k < std::min<std::size_t>(ranked.size(), 8); ++k) {
    const Point& beta = ranked[k].second;
    const SplitExtrema e = extrema(beta, pos, neg);
    if (e.min_pos > e.max_neg) {
      return make(beta.x(), beta.y(), -0.5 * (e.min_pos + e.max_neg));
    }
  }
  return std::nullopt;
}

DirectionScanResult best_linear_error_2d(const std::vector<Point>& pos,
                                         const std::vector<Point>& neg, int angles) {
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("best_linear_error_2d: both classes must be nonempty");
  }
  if (angles < 1) throw std::invalid_argument("best_linear_error_2d: angles must be positive");

  DirectionScanResult best;
  best.error_rate = 1.0;
  std::vector<double> proj_pos(pos.size()), proj_neg(neg.size());
  for (int k = 0; k < angles; ++k) {
    const double theta = M_PI * static_cast<double>(k) / static_cast<double>(angles);
    const Point beta(std::cos(theta), std::sin(theta));
    for (std::size_t i = 0; i < pos.size(); ++i) proj_pos[i] = beta.dot(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i) proj_neg[i] = beta.dot(neg[i]);
    const ThresholdResult r = best_threshold_error(proj_pos, proj_neg);
    if (r.error_rate < best.error_rate) {
      best.error_rate = r.error_rate;
      const double sign = r.orientation > 0 ? 1.0 : -1.0;
      best.classifier.beta = Eigen::VectorXd(2);
      best.classifier.beta << sign * beta.x(), sign * beta.y();
      best.classifier.gamma = -sign * r.threshold;
    }
  }
  return best;
}

IntervalCert certify_gru_interval(double A, double B, int n) {
  if (!(A > 0.0 && A < 1.0)) {
    throw std::invalid_argument("certify_gru_interval: A must lie in (0,1)");
  }
  if (!(B > 0.0)) {
    throw std::invalid_argument(
        "certify_gru_interval: B must be positive (flip the classifier for B < 0)");
  }
  if (n < 1) throw std::invalid_argument("certify_gru_interval: n must be positive");

  IntervalCert cert;
  cert.n = n;
  cert.pos_final.resize(static_cast<std::size_t>(n));
  cert.neg_final.resize(static_cast<std::size_t>(n));

  double min_lo = kInf;
  for (int L = 1; L <= n; ++L) {
    // Pre-flag interval is [-B, B]; the flag step contracts and recenters it.
    Interval iv{(1.0 - A) * (-B) + A * B, (1.0 - A) * B + A * B};
    for (int t = L + 1; t <= n; ++t) {
      iv = {A * iv.lo - (1.0 - A) * B, A * iv.hi + (1.0 - A) * B};
    }
    cert.pos_final[static_cast<std::size_t>(L - 1)] = iv;
    cert.neg_final[static_cast<std::size_t>(L - 1)] = {-iv.hi, -iv.lo};
    min_lo = std::min(min_lo, iv.lo);
  }

  cert.certified = min_lo > 0.0;
  cert.certified_margin = B * (2.0 * std::pow(A, n) - 1.0);
  return cert;
}

namespace {

struct K2State {
  double s1, s2;
  bool operator<(const K2State& o) const {
    return s1 != o.s1 ? s1 < o.s1 : s2 < o.s2;
  }
  bool operator==(const K2State& o) const { return s1 == o.s1 && s2 == o.s2; }
};

using K2Set = std::set<K2State>;

// Next memorization coordinate via the mechanism table. Returns false when
// the state falls outside every mechanism's condition, in which case the
// symbolic route cannot certify.
bool next_s1(const VanillaK2Construction& c, const K2State& s, double& out) {
  if (s.s2 == -1.0) {
    if (!(s.s1 > -1.0 && s.s1 < 1.0)) return false;
    out = s.s1;  // memorization: value carried over exactly
    return true;
  }
  const double h = s.s1 + c.b1 * s.s2 + c.b1;
  if (!(h > -1.0 && h < 1.0) || !(s.s2 > -1.0)) return false;
  out = h;  // state mixing
  return true;
}

bool noise_image(const VanillaK2Construction& c, const K2Set& in, K2Set& out) {
  out.clear();
  for (const K2State& s : in) {
    double s1;
    if (!next_s1(c, s, s1)) return false;
    // Load emptying: w21*x + b2 < -1 for both inputs, so s2 clamps to -1.
    out.insert({s1, -1.0});
  }
  return true;
}

bool flag_image(const VanillaK2Construction& c, const K2Set& in, int label, K2Set& out) {
  out.clear();
  for (const K2State& s : in) {
    double s1;
    if (!next_s1(c, s, s1)) return false;
    out.insert({s1, c.w21 * static_cast<double>(label)});  // feature loading
  }
  return true;
}

}  // namespace

IntervalCert certify_vanilla_k2(const VanillaK2Construction& c, int n) {
  c.validate();
  if (n < 1) throw std::invalid_argument("certify_vanilla_k2: n must be positive");

  IntervalCert cert;
  cert.n = n;
  cert.pos_final_states.resize(static_cast<std::size_t>(n));
  cert.neg_final_states.resize(static_cast<std::size_t>(n));

  const VanillaK2System sys = vanilla_k2_params(c);

  // Phase 1: close the pre-flag set under the noise step.
  K2Set preflag = {{0.0, -1.0}};
  for (;;) {
    K2Set next;
    if (!noise_image(c, preflag, next)) return cert;  // uncertifiable
    K2Set merged = preflag;
    merged.insert(next.begin(), next.end());
    if (merged == preflag) break;
    preflag = std::move(merged);
  }

  double min_pos_margin = kInf;
  double max_neg_margin = -kInf;
  auto margin_of = [&](const K2State& s) {
    Eigen::VectorXd v(2);
    v << s.s1, s.s2;
    return sys.classifier.margin(v);
  };

  for (int label : {+1, -1}) {
    // Phase 2: flag image, then noise steps to a fixed point. finals_by_k[k]
    // is the reachable set exactly k steps after the flag.
    std::vector<K2Set> finals_by_k;
    K2Set at_flag;
    if (!flag_image(c, preflag, label, at_flag)) return cert;
    finals_by_k.push_back(at_flag);
    for (;;) {
      K2Set next;
      if (!noise_image(c, finals_by_k.back(), next)) return cert;
      if (next == finals_by_k.back()) break;
      finals_by_k.push_back(std::move(next));
      if (finals_by_k.size() > 64) return cert;  // no closure; refuse to certify
    }

    auto& slots = (label > 0) ? cert.pos_final_states : cert.neg_final_states;
    for (int L = 1; L <= n; ++L) {
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n - L),
                                                  finals_by_k.size() - 1);
      for (const K2State& s : finals_by_k[k]) {
        slots[static_cast<std::size_t>(L - 1)].emplace_back(s.s1, s.s2);
        const double m = margin_of(s);
        if (label > 0) {
          min_pos_margin = std::min(min_pos_margin, m);
        } else {
          max_neg_margin = std::max(max_neg_margin, m);
        }
      }
    }
  }

  cert.certified = min_pos_margin > kMarginFloor && max_neg_margin < -kMarginFloor;
  cert.certified_margin = std::min(min_pos_margin, -max_neg_margin);
  return cert;
}

MomentSeries moment_recursion(double A, double B, int n) {
  if (!(A > 0.0 && A < 1.0)) {
    throw std::invalid_argument("moment_recursion: A must lie in (0,1)");
  }
  if (n < 1) throw std::invalid_argument("moment_recursion: n must be positive");

  MomentSeries series;
  series.n = n;
  const std::size_t steps = static_cast<std::size_t>(n) + 1;
  series.mean_pos_given_L.assign(static_cast<std::size_t>(n), std::vector<double>(steps, 0.0));
  series.var_pos_given_L = series.mean_pos_given_L;
  series.mean_neg_given_L = series.mean_pos_given_L;
  series.var_neg_given_L = series.mean_pos_given_L;

  const double noise_var = (1.0 - A) * (1.0 - A) * B * B;
  for (int L = 1; L <= n; ++L) {
    auto& mp = series.mean_pos_given_L[static_cast<std::size_t>(L - 1)];
    auto& vp = series.var_pos_given_L[static_cast<std::size_t>(L - 1)];
    auto& mn = series.mean_neg_given_L[static_cast<std::size_t>(L - 1)];
    auto& vn = series.var_neg_given_L[static_cast<std::size_t>(L - 1)];
    for (int t = 1; t <= n; ++t) {
      const std::size_t i = static_cast<std::size_t>(t);
      if (t == L) {
        mp[i] = (1.0 - A) * mp[i - 1] + A * B;
        mn[i] = (1.0 - A) * mn[i - 1] + A * B * -1.0;
        vp[i] = (1.0 - A) * (1.0 - A) * vp[i - 1];
        vn[i] = (1.0 - A) * (1.0 - A) * vn[i - 1];
      } else {
        mp[i] = A * mp[i - 1];
        mn[i] = A * mn[i - 1];
        vp[i] = A * A * vp[i - 1] + noise_var;
        vn[i] = A * A * vn[i - 1] + noise_var;
      }
    }
  }

  series.mean_pos.assign(steps, 0.0);
  series.var_pos.assign(steps, 0.0);
  series.mean_neg.assign(steps, 0.0);
  series.var_neg.assign(steps, 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < steps; ++t) {
    double m_pos = 0.0, m2_pos = 0.0, m_neg = 0.0, m2_neg = 0.0;
    for (int L = 0; L < n; ++L) {
      const double mu_p = series.mean_pos_given_L[static_cast<std::size_t>(L)][t];
      const double mu_n = series.mean_neg_given_L[static_cast<std::size_t>(L)][t];
      m_pos += mu_p;
      m_neg += mu_n;
      m2_pos += series.var_pos_given_L[static_cast<std::size_t>(L)][t] + mu_p * mu_p;
      m2_neg += series.var_neg_given_L[static_cast<std::size_t>(L)][t] + mu_n * mu_n;
    }
    series.mean_pos[t] = m_pos * inv_n;
    series.mean_neg[t] = m_neg * inv_n;
    series.var_pos[t] = m2_pos * inv_n - series.mean_pos[t] * series.mean_pos[t];
    series.var_neg[t] = m2_neg * inv_n - series.mean_neg[t] * series.mean_neg[t];
  }

  const double mu = series.mean_pos[steps - 1];
  const double v = series.var_pos[steps - 1];
  series.chebyshev_bound = mu != 0.0 ? v / (mu * mu) : kInf;
  return series;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;  // 97.5th normal quantile
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nt;
  const double center = (p + z2 / (2.0 * nt)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace f1b
