// Copyright 2026 The Evalcard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pearson, Spearman and Kendall tau-b correlation.
//
// A correlation that has no value (constant side, zero tau-b denominator)
// raises UndefinedCorrelation; it is never reported as 0.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "evalcard/error.hpp"

namespace evalcard {

/// Equal-length, finite paired samples with at least two observations.
class PairedSamples {
 public:
  PairedSamples(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size())
      throw InvalidArgument("paired samples must have equal length");
    if (xs_.size() < 2)
      throw InvalidArgument("paired samples need at least 2 observations");
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(xs_.begin(), xs_.end(), finite) ||
        !std::all_of(ys_.begin(), ys_.end(), finite))
      throw InvalidArgument("paired samples must be finite");
  }

  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  std::size_t size() const noexcept { return xs_.size(); }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// 1-based fractional ranks; tied values share the mean of their ranks.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share ranks i+1..j+1
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline bool is_constant(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) ==
         v.end();
}

inline void require_variation(const char* statistic, std::span<const double> xs,
                              std::span<const double> ys) {
  const bool cx = is_constant(xs);
  const bool cy = is_constant(ys);
  if (cx && cy) throw UndefinedCorrelation(statistic, DegenerateSide::kBoth);
  if (cx) throw UndefinedCorrelation(statistic, DegenerateSide::kX);
  if (cy) throw UndefinedCorrelation(statistic, DegenerateSide::kY);
}

inline double product_moment(std::span<const double> xs,
                             std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Counts inversions of v (pairs i < j with v[i] > v[j]) while sorting it.
inline std::int64_t merge_count(std::vector<double>& v,
                                std::vector<double>& scratch, std::size_t lo,
                                std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, scratch, lo, mid) +
                       merge_count(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
  return swaps;
}

// Sum of t(t-1)/2 over runs of equal adjacent elements under `eq`.
template <class Seq, class Eq>
std::int64_t tied_pairs(const Seq& seq, Eq eq) {
  std::int64_t total = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i <= seq.size(); ++i) {
    if (i < seq.size() && eq(seq[i - 1], seq[i])) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace detail

inline double pearson(const PairedSamples& samples) {
  detail::require_variation("pearson", samples.xs(), samples.ys());
  return detail::product_moment(samples.xs(), samples.ys());
}

/// Pearson correlation of average ranks.
inline double spearman(const PairedSamples& samples) {
  detail::require_variation("spearman", samples.xs(), samples.ys());
  const auto rx = average_ranks(samples.xs());
  const auto ry = average_ranks(samples.ys());
  return detail::product_moment(rx, ry);
}

/// Kendall's tau-b, computed with Knight's O(n log n) algorithm:
/// (C - D) / sqrt((n0 - n1)(n0 - n2)), where n1 and n2 count pairs tied in x
/// and in y respectively.
inline double kendall_tau_b(const PairedSamples& samples) {
  const auto xs = samples.xs();
  const auto ys = samples.ys();
  const std::size_t n = samples.size();

  std::vector<std::pair<double, double>> points(n);
  for (std::size_t i = 0; i < n; ++i) points[i] = {xs[i], ys[i]};
  std::sort(points.begin(), points.end());

  const std::int64_t n0 =
      static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = detail::tied_pairs(
      points, [](const auto& a, const auto& b) { return a.first == b.first; });
  const std::int64_t n3 =
      detail::tied_pairs(points, [](const auto& a, const auto& b) { return a == b; });

  std::vector<double> y_order(n);
  for (std::size_t i = 0; i < n; ++i) y_order[i] = points[i].second;
  std::vector<double> scratch(n);
  const std::int64_t discordant = detail::merge_count(y_order, scratch, 0, n);
  const std::int64_t n2 = detail::tied_pairs(
      y_order, [](double a, double b) { return a == b; });

  const std::int64_t untied_x = n0 - n1;
  const std::int64_t untied_y = n0 - n2;
  if (untied_x == 0 && untied_y == 0)
    throw UndefinedCorrelation("kendall_tau_b", DegenerateSide::kBoth);
  if (untied_x == 0)
    throw UndefinedCorrelation("kendall_tau_b", DegenerateSide::kX);
  if (untied_y == 0)
    throw UndefinedCorrelation("kendall_tau_b", DegenerateSide::kY);

  const std::int64_t numerator = n0 - n1 - n2 + n3 - 2 * discordant;
  const double tau = static_cast<double>(numerator) /
                     std::sqrt(static_cast<double>(untied_x) *
                               static_cast<double>(untied_y));
  return std::clamp(tau, -1.0, 1.0);
}

}  // namespace evalcard
