#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

// shared helpers for the property/unit test binaries
namespace testsup {

constexpr int kCases = 128;  // randomized cases per property

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(g);
}

inline int uniform_int(std::mt19937_64& g, int a, int b) {
  return std::uniform_int_distribution<int>(a, b)(g);
}

// dyadic lattice value k * 2^-20 with k in [a, b); sums of a few of these are
// exact in double precision, which makes inverse-pair tests exact
inline double dyadic(std::mt19937_64& g, int a, int b) {
  return double(uniform_int(g, a, b - 1)) * 0x1p-20;
}

inline double rel_err(double got, double want) {
  const double scale = std::abs(want) > 0 ? std::abs(want) : 1.0;
  return std::abs(got - want) / scale;
}

inline double rel_err(std::complex<double> got, std::complex<double> want) {
  const double scale = std::abs(want) > 0 ? std::abs(want) : 1.0;
  return std::abs(got - want) / scale;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace testsup
