#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace f1b {

// How the flag component is rendered on the wire: Symmetric uses {-1,+1}
// with +1 at the flag, Binary uses {0,1} with 1 at the flag.
enum class FlagEncoding { Symmetric, Binary };

// One realization of the flagged-bit process: n independent info bits in
// {-1,+1} and a single flag position L drawn uniformly from 1..n. The class
// label of a path is its flagged info bit.
struct SamplePath {
  int n = 0;
  std::vector<int> info_bits;  // size n; info_bits[t-1] is bit t, each -1 or +1
  int flag_index = 0;          // L, 1-based

  int bit(int t) const { return info_bits[static_cast<std::size_t>(t - 1)]; }
  int label() const { return bit(flag_index); }
};

// The length-2 input at one time step.
struct InputVector {
  double x_info = 0.0;
  double x_flag = 0.0;
};

// Draws a path of length n. Deterministic in (n, seed): the flag position is
// drawn first, then one sign per bit.
SamplePath sample_path(int n, std::uint64_t seed);

// Input vector fed to a cell at step t (1-based). Throws std::out_of_range
// for t outside 1..n.
InputVector encode(const SamplePath& path, int t, FlagEncoding enc);

// Random-access view of all n*2^n paths of length n, ordered by L ascending,
// then bits counting up (bit 1 is the most significant digit, -1 < +1). The
// fixed order makes enumeration results stable across runs and allows the
// index space to be partitioned for parallel consumption.
class PathEnumerator {
 public:
  static constexpr int kDefaultCap = 16;

  explicit PathEnumerator(int n, int cap = kDefaultCap);

  std::uint64_t size() const noexcept { return total_; }
  SamplePath at(std::uint64_t index) const;

 private:
  int n_;
  std::uint64_t total_;
};

// Materializes the whole stream; intended for small n.
std::vector<SamplePath> enumerate_paths(int n, int cap = PathEnumerator::kDefaultCap);

// One-line dump format: "L=3;bits=+1,-1,...;label=+1".
std::string format_path_line(const SamplePath& path);

}  // namespace f1b
