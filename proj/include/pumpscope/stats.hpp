#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "pumpscope/error.hpp"

namespace pumpscope::stats {

// Helpers sort their input before summing so results do not depend on input order.

inline std::vector<double> sorted(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

inline void require_nonempty(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorKind::EmptyInput, "statistic of an empty sample");
}

inline double mean_sorted(std::span<const double> s) {
  require_nonempty(s);
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

inline double mean(std::span<const double> xs) { return mean_sorted(sorted(xs)); }

// Population standard deviation (divides by n).
inline double population_stddev(std::span<const double> xs) {
  auto s = sorted(xs);
  double m = mean_sorted(s);
  double acc = 0;
  for (double x : s) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(s.size()));
}

// Linear interpolation between closest ranks: position (n - 1) * q, q in [0, 1].
inline double percentile_sorted(std::span<const double> s, double q) {
  require_nonempty(s);
  if (s.size() == 1) return s.front();
  double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(s.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, s.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return s[lo] + (s[hi] - s[lo]) * frac;
}

inline double percentile(std::span<const double> xs, double q) { return percentile_sorted(sorted(xs), q); }

// Even counts average the two middle values, which the q = 0.5 interpolation yields.
inline double median(std::span<const double> xs) { return percentile(xs, 0.5); }

}  // namespace pumpscope::stats
