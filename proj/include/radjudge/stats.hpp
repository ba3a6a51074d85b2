#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "radjudge/errors.hpp"
#include "radjudge/rng.hpp"

namespace radjudge {

/// The tau-b denominator vanishes: one of the vectors is constant.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline long long tie_pair_count(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  long long pairs = 0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const long long t = static_cast<long long>(j - i);
    pairs += t * (t - 1) / 2;
    i = j;
  }
  return pairs;
}

/// Counts strict inversions (a[i] > a[j] with i < j) via merge sort.
inline long long count_inversions(std::vector<double>& values, std::vector<double>& scratch,
                                  std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inversions = count_inversions(values, scratch, lo, mid) +
                         count_inversions(values, scratch, mid, hi);
  std::size_t a = lo;
  std::size_t b = mid;
  std::size_t out = lo;
  while (a < mid && b < hi) {
    if (values[a] <= values[b]) {
      scratch[out++] = values[a++];
    } else {
      inversions += static_cast<long long>(mid - a);
      scratch[out++] = values[b++];
    }
  }
  while (a < mid) scratch[out++] = values[a++];
  while (b < hi) scratch[out++] = values[b++];
  std::copy(scratch.begin() + static_cast<std::ptrdiff_t>(lo),
            scratch.begin() + static_cast<std::ptrdiff_t>(hi),
            values.begin() + static_cast<std::ptrdiff_t>(lo));
  return inversions;
}

}  // namespace detail

/// Kendall tau-b via the sort-and-merge route:
///   tau_b = (n0 - n1 - n2 + n3 - 2D) / sqrt((n0 - n1)(n0 - n2))
/// with n0 total pairs, n1/n2 tie pairs in x/y, n3 joint-tie pairs, and D
/// the strict y-inversions after sorting by (x, y).
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error("kendall_tau_b: input lengths differ");
  if (n < 2) throw Error("kendall_tau_b: need at least 2 observations");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;

  long long x_ties = 0;
  long long joint_ties = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && x[order[j]] == x[order[i]]) ++j;
      const long long t = static_cast<long long>(j - i);
      x_ties += t * (t - 1) / 2;
      std::size_t k = i;
      while (k < j) {
        std::size_t m = k;
        while (m < j && y[order[m]] == y[order[k]]) ++m;
        const long long u = static_cast<long long>(m - k);
        joint_ties += u * (u - 1) / 2;
        k = m;
      }
      i = j;
    }
  }

  std::vector<double> y_sorted_by_x(n);
  for (std::size_t i = 0; i < n; ++i) y_sorted_by_x[i] = y[order[i]];
  const long long y_ties = detail::tie_pair_count(y_sorted_by_x);

  if (x_ties == n0 || y_ties == n0) {
    throw DegenerateInput("kendall_tau_b: a constant vector has no rank ordering");
  }

  std::vector<double> scratch(n);
  const long long discordant = detail::count_inversions(y_sorted_by_x, scratch, 0, n);

  const double numerator =
      static_cast<double>(n0 - x_ties - y_ties + joint_ties - 2 * discordant);
  const double denominator = std::sqrt(static_cast<double>(n0 - x_ties)) *
                             std::sqrt(static_cast<double>(n0 - y_ties));
  return numerator / denominator;
}

struct CorrelationResult {
  double tau_b = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_resamples = 0;
  int n_skipped = 0;  // degenerate resamples (constant vector), skipped
  double level = 0.95;
  std::uint64_t seed = 0;
};

namespace detail {

inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error("percentile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline bool all_equal(const std::vector<double>& v) {
  for (double value : v) {
    if (value != v.front()) return false;
  }
  return true;
}

}  // namespace detail

/// Percentile bootstrap over index pairs resampled with replacement. Each
/// resample uses a seed derived from (seed, resample index), so results do
/// not depend on evaluation order. Degenerate resamples are skipped and
/// counted.
inline CorrelationResult bootstrap_tau_ci(std::span<const double> x, std::span<const double> y,
                                          int n_resamples = 1000, double level = 0.95,
                                          std::uint64_t seed = 0) {
  CorrelationResult result;
  result.tau_b = kendall_tau_b(x, y);  // also validates the full sample
  result.n_resamples = n_resamples;
  result.level = level;
  result.seed = seed;

  const std::size_t n = x.size();
  std::vector<double> taus;
  taus.reserve(static_cast<std::size_t>(n_resamples));
  std::vector<double> bx(n);
  std::vector<double> by(n);
  for (int r = 0; r < n_resamples; ++r) {
    SeededRng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick = rng.bounded(n);
      bx[i] = x[pick];
      by[i] = y[pick];
    }
    if (detail::all_equal(bx) || detail::all_equal(by)) {
      ++result.n_skipped;
      continue;
    }
    taus.push_back(kendall_tau_b(bx, by));
  }
  if (taus.empty()) {
    throw DegenerateInput("bootstrap_tau_ci: every resample was degenerate");
  }
  std::sort(taus.begin(), taus.end());
  const double alpha = (1.0 - level) / 2.0;
  result.ci_low = detail::percentile(taus, alpha);
  result.ci_high = detail::percentile(taus, 1.0 - alpha);
  return result;
}

}  // namespace radjudge
