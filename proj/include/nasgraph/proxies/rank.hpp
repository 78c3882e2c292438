#pragma once

// Rank correlation.
//
// kendall_tau is the tie-corrected tau-b computed with Knight's
// O(n log n) algorithm: sort by (x, y), count the swaps a stable merge sort
// on y needs (discordant pairs), and correct for ties in x, y and both.
// spearman_rho is the Pearson correlation of mid-ranks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "nasgraph/error.hpp"

namespace nasgraph {

namespace detail {

inline void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatchError("rank correlation inputs differ in length");
  if (x.size() < 2) throw ValidationError("rank correlation needs at least 2 observations");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::isnan(x[i]) || std::isnan(y[i])) throw ValidationError("rank correlation input contains NaN");
}

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <class Eq>
std::int64_t tied_pairs(std::size_t n, Eq&& equal) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

// Stable merge sort of v, returning the number of inversions (strict >).
inline std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t tx = detail::tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]]; });
  const std::int64_t txy = detail::tied_pairs(
      n, [&](std::size_t a, std::size_t b) { return x[idx[a]] == x[idx[b]] && y[idx[a]] == y[idx[b]]; });

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::int64_t discordant = detail::merge_count(ys, buf, 0, n);
  const std::int64_t ty = detail::tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  if (tx == total || ty == total) throw NumericError("kendall tau undefined: all values tied");
  const std::int64_t concordant_minus_discordant = total - tx - ty + txy - 2 * discordant;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(total - tx) * static_cast<double>(total - ty));
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> mid_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && v[idx[j]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatchError("pearson inputs differ in length");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericError("correlation undefined: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
  detail::check_pair(x, y);
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

}  // namespace nasgraph
