#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "f1b/process.hpp"
#include "f1b/rng.hpp"

using namespace f1b;

TEST_CASE("sample_path is deterministic and validates its input") {
  const SamplePath a = sample_path(12, 42);
  const SamplePath b = sample_path(12, 42);
  CHECK(a.flag_index == b.flag_index);
  CHECK(a.info_bits == b.info_bits);
  CHECK_THROWS_AS(sample_path(0, 1), std::invalid_argument);

  // n = 1 leaves no choice for the flag; the label is the single bit.
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    const SamplePath p = sample_path(1, seed);
    CHECK(p.flag_index == 1);
    CHECK(p.label() == p.info_bits[0]);
  }
}

TEST_CASE("a frozen seed reproduces a known draw") {
  // Seed found by search; freezing it pins the draw order (flag first, then
  // one sign per bit) as a compatibility contract.
  const SamplePath p = sample_path(9, 569);
  CHECK(p.flag_index == 3);
  const std::vector<int> expected = {+1, +1, +1, -1, -1, +1, -1, +1, -1};
  CHECK(p.info_bits == expected);
  CHECK(p.label() == +1);
  CHECK(format_path_line(p) == "L=3;bits=+1,+1,+1,-1,-1,+1,-1,+1,-1;label=+1");
}

TEST_CASE("flag positions are uniform and labels are balanced") {
  const int n = 20;
  const int samples = 100000;
  std::vector<int> flag_counts(static_cast<std::size_t>(n), 0);
  int positives = 0;
  for (int i = 0; i < samples; ++i) {
    const SamplePath p = sample_path(n, derive_seed(7, static_cast<std::uint64_t>(i)));
    ++flag_counts[static_cast<std::size_t>(p.flag_index - 1)];
    if (p.label() > 0) ++positives;
  }

  // Each cell within 4 standard deviations of samples/n.
  const double expected = static_cast<double>(samples) / n;
  const double sd = std::sqrt(samples * (1.0 / n) * (1.0 - 1.0 / n));
  double chi2 = 0.0;
  for (int count : flag_counts) {
    CHECK(std::abs(count - expected) <= 4.0 * sd);
    chi2 += (count - expected) * (count - expected) / expected;
  }
  // Chi-square with n-1 = 19 dof: mean 19, sd sqrt(38).
  CHECK(chi2 <= 19.0 + 4.0 * std::sqrt(38.0));

  const double fraction = static_cast<double>(positives) / samples;
  const double band = 4.0 * std::sqrt(0.25 / samples);
  CHECK(fraction >= 0.5 - band);
  CHECK(fraction <= 0.5 + band);
}

TEST_CASE("enumeration yields every path exactly once in a fixed order") {
  SUBCASE("n=1") {
    const auto paths = enumerate_paths(1);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].flag_index == 1);
    CHECK(paths[0].info_bits == std::vector<int>{-1});
    CHECK(paths[1].info_bits == std::vector<int>{+1});
  }
  SUBCASE("n=3 counts") { CHECK(enumerate_paths(3).size() == 24); }
  SUBCASE("n=12 counts and label split") {
    const PathEnumerator en(12);
    CHECK(en.size() == 49152);
    std::uint64_t positives = 0;
    for (std::uint64_t i = 0; i < en.size(); ++i) {
      if (en.at(i).label() > 0) ++positives;
    }
    CHECK(positives == en.size() / 2);
  }
  SUBCASE("no duplicates up to n=12") {
    for (int n : {2, 5, 12}) {
      const PathEnumerator en(n);
      std::set<std::string> seen;
      for (std::uint64_t i = 0; i < en.size(); ++i) {
        seen.insert(format_path_line(en.at(i)));
      }
      CHECK(seen.size() == en.size());
    }
  }
  SUBCASE("order is lexicographic in (L, bits)") {
    const PathEnumerator en(3);
    // First path: L=1, all bits -1. Last: L=3, all +1.
    CHECK(format_path_line(en.at(0)) == "L=1;bits=-1,-1,-1;label=-1");
    CHECK(format_path_line(en.at(en.size() - 1)) == "L=3;bits=+1,+1,+1;label=+1");
    // Bits act as a binary counter with bit 1 most significant.
    CHECK(en.at(1).info_bits == std::vector<int>{-1, -1, +1});
    CHECK(en.at(4).info_bits == std::vector<int>{+1, -1, -1});
  }
}

TEST_CASE("enumeration refuses lengths above the cap and reports the size") {
  CHECK_THROWS_AS(enumerate_paths(17), std::length_error);
  try {
    enumerate_paths(20);
  } catch (const std::length_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("n=20") != std::string::npos);
  }
  // A raised cap admits the enumerator without materializing anything.
  CHECK(PathEnumerator(18, 20).size() == std::uint64_t{18} << 18);
  CHECK_THROWS_AS(PathEnumerator(0), std::invalid_argument);
}

TEST_CASE("encode renders both flag encodings") {
  // L=5 with bits +1,-1,+1,-1,-1,+1,-1,+1,-1: a negative path.
  SamplePath p;
  p.n = 9;
  p.info_bits = {+1, -1, +1, -1, -1, +1, -1, +1, -1};
  p.flag_index = 5;
  CHECK(p.label() == -1);

  const InputVector at_flag = encode(p, 5, FlagEncoding::Symmetric);
  CHECK(at_flag.x_info == -1.0);
  CHECK(at_flag.x_flag == +1.0);

  const InputVector first_binary = encode(p, 1, FlagEncoding::Binary);
  CHECK(first_binary.x_info == +1.0);
  CHECK(first_binary.x_flag == 0.0);

  const InputVector flag_binary = encode(p, 5, FlagEncoding::Binary);
  CHECK(flag_binary.x_info == static_cast<double>(p.label()));
  CHECK(flag_binary.x_flag == 1.0);

  CHECK_THROWS_AS(encode(p, 0, FlagEncoding::Symmetric), std::out_of_range);
  CHECK_THROWS_AS(encode(p, 10, FlagEncoding::Symmetric), std::out_of_range);
}

TEST_CASE("encodings agree on the info component and flag exactly once") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SamplePath p = sample_path(11, seed);
    int symmetric_flags = 0;
    int binary_flags = 0;
    for (int t = 1; t <= p.n; ++t) {
      const InputVector s = encode(p, t, FlagEncoding::Symmetric);
      const InputVector b = encode(p, t, FlagEncoding::Binary);
      CHECK(s.x_info == b.x_info);
      CHECK((s.x_flag == 1.0 || s.x_flag == -1.0));
      CHECK((b.x_flag == 1.0 || b.x_flag == 0.0));
      if (s.x_flag == 1.0) ++symmetric_flags;
      if (b.x_flag == 1.0) ++binary_flags;
    }
    CHECK(symmetric_flags == 1);
    CHECK(binary_flags == 1);
  }
}
