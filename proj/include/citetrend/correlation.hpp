#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "citetrend/errors.hpp"
#include "citetrend/zscore.hpp"

namespace citetrend {

struct CorrelationPoint {
  std::size_t n = 0;
  double kendall_tau = 0.0;
  double spearman_rho = 0.0;
};

namespace detail {

inline void require_pairable(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("score vectors differ in length");
  if (a.size() < 2) throw DomainError("rank correlation needs at least 2 items");
}

// Number of tied pairs within runs of equal values in a sorted range.
template <class It, class Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t ties = 0;
  while (first != last) {
    auto run_end = std::find_if_not(first, last, [&](const auto& v) { return eq(v, *first); });
    auto k = static_cast<std::int64_t>(std::distance(first, run_end));
    ties += k * (k - 1) / 2;
    first = run_end;
  }
  return ties;
}

// Merge sort on y counting inversions (pairs with x-order opposite to y-order).
inline std::int64_t count_swaps(std::vector<double>& y, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_swaps(y, buf, lo, mid) + count_swaps(y, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            y.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

/// Kendall's tau-b (tie-corrected), Knight's O(n log n) algorithm.
inline double kendall_tau_b(std::span<const double> a, std::span<const double> b) {
  detail::require_pairable(a, b);
  const std::size_t n = a.size();
  std::vector<std::pair<double, double>> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = {a[i], b[i]};
  std::sort(pts.begin(), pts.end());

  const std::int64_t ties_a = detail::tied_pairs(pts.begin(), pts.end(), [](auto& p, auto& q) { return p.first == q.first; });
  const std::int64_t ties_joint = detail::tied_pairs(pts.begin(), pts.end(), [](auto& p, auto& q) { return p == q; });

  std::vector<double> y(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = pts[i].second;
  const std::int64_t swaps = detail::count_swaps(y, buf, 0, n);  // leaves y sorted
  const std::int64_t ties_b = detail::tied_pairs(y.begin(), y.end(), [](double p, double q) { return p == q; });

  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(total - ties_a) * static_cast<double>(total - ties_b));
  if (denom == 0.0) throw DomainError("Kendall tau-b undefined: a score vector is entirely tied");
  // concordant - discordant; pairs tied in a only are not inversions, tied in b only are not counted as swaps
  const double numer = static_cast<double>(total - ties_a - ties_b + ties_joint - 2 * swaps);
  return std::clamp(numer / denom, -1.0, 1.0);
}

/// 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

/// Pearson correlation of the average-rank vectors.
inline double spearman_rho(std::span<const double> a, std::span<const double> b) {
  detail::require_pairable(a, b);
  auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  const double ma = mean_of(ra), mb = mean_of(rb);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw DomainError("Spearman rho undefined: a score vector is entirely tied");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> gather(const ScoreMap& a, const ScoreMap& b,
                                                                  const std::vector<std::string>& ids) {
  std::vector<double> va, vb;
  va.reserve(ids.size());
  vb.reserve(ids.size());
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    auto ia = a.find(id);
    auto ib = b.find(id);
    if (ia == a.end() || ib == b.end()) {
      missing.push_back(id);
      continue;
    }
    va.push_back(ia->second);
    vb.push_back(ib->second);
  }
  if (!missing.empty()) throw DomainError("ids lack a score in one of the rankings: " + join_ids(missing));
  return {std::move(va), std::move(vb)};
}

}  // namespace detail

inline double kendall_tau(const ScoreMap& a, const ScoreMap& b, const std::vector<std::string>& ids) {
  auto [va, vb] = detail::gather(a, b, ids);
  return kendall_tau_b(va, vb);
}

inline double spearman_rho(const ScoreMap& a, const ScoreMap& b, const std::vector<std::string>& ids) {
  auto [va, vb] = detail::gather(a, b, ids);
  return spearman_rho(std::span<const double>(va), std::span<const double>(vb));
}

/// Ids ordered by score descending, ties by id ascending.
inline std::vector<std::string> ids_by_score(const ScoreMap& scores) {
  std::vector<std::pair<std::string, double>> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  std::vector<std::string> ids;
  ids.reserve(v.size());
  for (auto& [id, s] : v) ids.push_back(id);
  return ids;
}

/// 10, 20, ... up to `total`, ending at `total` itself.
inline std::vector<std::size_t> default_sweep_grid(std::size_t total, std::size_t step = 10) {
  std::vector<std::size_t> grid;
  for (std::size_t n = step; n < total; n += step) grid.push_back(n);
  if (total >= 2) grid.push_back(total);
  return grid;
}

/// Correlation of the two score variants over the top-n papers of the stable ranking.
inline std::vector<CorrelationPoint> prefix_sweep(const ScoreMap& single_split, const ScoreMap& stable,
                                                  const std::vector<std::size_t>& n_values) {
  auto order = ids_by_score(stable);
  std::vector<CorrelationPoint> out;
  for (auto n : n_values) {
    if (n < 2 || n > order.size())
      throw DomainError("prefix size " + std::to_string(n) + " outside [2, " + std::to_string(order.size()) + "]");
    std::vector<std::string> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
    out.push_back({n, kendall_tau(single_split, stable, top), spearman_rho(single_split, stable, top)});
  }
  return out;
}

inline std::size_t overlap_count(const std::vector<std::string>& list_a, const std::vector<std::string>& list_b) {
  std::set<std::string> a(list_a.begin(), list_a.end());
  std::set<std::string> seen;
  for (const auto& id : list_b)
    if (a.count(id)) seen.insert(id);
  return seen.size();
}

}  // namespace citetrend
