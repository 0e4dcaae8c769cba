#include "f1b/process.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "f1b/rng.hpp"

namespace f1b {

SamplePath sample_path(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_path: length must be positive");
  SplitMix64 rng(seed);
  SamplePath path;
  path.n = n;
  path.flag_index = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n))) + 1;
  path.info_bits.resize(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) path.info_bits[static_cast<std::size_t>(t)] = rng.next_sign();
  return path;
}

InputVector encode(const SamplePath& path, int t, FlagEncoding enc) {
  if (t < 1 || t > path.n) {
    throw std::out_of_range("encode: step index " + std::to_string(t) +
                            " outside 1.." + std::to_string(path.n));
  }
  InputVector x;
  x.x_info = static_cast<double>(path.bit(t));
  const bool flagged = (t == path.flag_index);
  switch (enc) {
    case FlagEncoding::Symmetric: x.x_flag = flagged ? +1.0 : -1.0; break;
    case FlagEncoding::Binary: x.x_flag = flagged ? 1.0 : 0.0; break;
  }
  return x;
}

PathEnumerator::PathEnumerator(int n, int cap) : n_(n) {
  if (n < 1) throw std::invalid_argument("enumerate: length must be positive");
  if (n > cap) {
    // Count overflows uint64 past n = 57, so report through long double.
    const long double required = static_cast<long double>(n) * std::pow(2.0L, n);
    std::ostringstream msg;
    msg << "enumeration too large: n=" << n << " requires " << required
        << " paths, above the cap of n=" << cap;
    throw std::length_error(msg.str());
  }
  total_ = static_cast<std::uint64_t>(n) << n;
}

SamplePath PathEnumerator::at(std::uint64_t index) const {
  if (index >= total_) throw std::out_of_range("path index out of range");
  const std::uint64_t word = index & ((std::uint64_t{1} << n_) - 1);
  SamplePath path;
  path.n = n_;
  path.flag_index = static_cast<int>(index >> n_) + 1;
  path.info_bits.resize(static_cast<std::size_t>(n_));
  for (int t = 1; t <= n_; ++t) {
    path.info_bits[static_cast<std::size_t>(t - 1)] =
        ((word >> (n_ - t)) & 1) ? +1 : -1;
  }
  return path;
}

std::vector<SamplePath> enumerate_paths(int n, int cap) {
  PathEnumerator en(n, cap);
  std::vector<SamplePath> paths;
  paths.reserve(static_cast<std::size_t>(en.size()));
  for (std::uint64_t i = 0; i < en.size(); ++i) paths.push_back(en.at(i));
  return paths;
}

std::string format_path_line(const SamplePath& path) {
  std::ostringstream out;
  out << "L=" << path.flag_index << ";bits=";
  for (int t = 1; t <= path.n; ++t) {
    if (t > 1) out << ',';
    out << (path.bit(t) > 0 ? "+1" : "-1");
  }
  out << ";label=" << (path.label() > 0 ? "+1" : "-1");
  return out.str();
}

}  // namespace f1b
