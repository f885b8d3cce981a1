#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citetrend/citations.hpp"
#include "citetrend/corpus.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/time.hpp"

namespace citetrend {

enum class StdConvention { population, sample };

inline std::string to_string(StdConvention c) { return c == StdConvention::population ? "population" : "sample"; }

inline StdConvention parse_std_convention(std::string_view s) {
  if (s == "population") return StdConvention::population;
  if (s == "sample") return StdConvention::sample;
  throw ValidationError("std convention must be 'population' or 'sample', got '" + std::string(s) + "'");
}

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

/// Two-pass standard deviation. The sample convention of a single value is 0.
inline double std_of(std::span<const double> xs, StdConvention conv = StdConvention::population) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double denom = conv == StdConvention::population ? static_cast<double>(n) : static_cast<double>(n - 1);
  return std::sqrt(ss / denom);
}

/// One of the seven week partitions: consecutive 7-day blocks starting on `start`.
struct SplitSpec {
  std::chrono::weekday start = std::chrono::Sunday;
  Date epoch{};

  /// Latest occurrence of `start` on or before the epoch.
  Date week_zero() const { return epoch - (std::chrono::weekday{epoch} - start); }
};

inline std::array<SplitSpec, 7> all_splits(Date epoch) {
  std::array<SplitSpec, 7> out{};
  for (std::size_t i = 0; i < 7; ++i) out[i] = SplitSpec{kWeekdays[i], epoch};
  return out;
}

inline std::int64_t assign_week(Date date, const SplitSpec& split) {
  auto days = (date - split.week_zero()).count();
  return days >= 0 ? days / 7 : -((-days + 6) / 7);
}

struct WeekRange {
  Date start{};
  Date end{};

  std::string label() const { return format_month_day(start) + "/" + format_month_day(end); }
  bool operator==(const WeekRange&) const = default;
};

inline WeekRange week_range(std::int64_t index, const SplitSpec& split) {
  Date start = split.week_zero() + std::chrono::days{7 * index};
  return {start, start + std::chrono::days{6}};
}

/// z_i = (c_i - mean(c)) / std(c) over one week's counts; all zeros when std == 0.
inline std::vector<double> week_zscores(std::span<const double> counts, StdConvention conv = StdConvention::population) {
  std::vector<double> z(counts.size(), 0.0);
  const double sd = std_of(counts, conv);
  if (sd == 0.0) return z;
  const double m = mean_of(counts);
  for (std::size_t i = 0; i < counts.size(); ++i) z[i] = (counts[i] - m) / sd;
  return z;
}

using ScoreMap = std::unordered_map<std::string, double>;

namespace detail {

inline void require_coverage(const Corpus& corpus, const SnapshotSet& snapshot) {
  std::vector<std::string> missing;
  for (const auto& [id, r] : corpus.records)
    if (!snapshot.find(id)) missing.push_back(id);
  if (!missing.empty())
    throw DataIntegrityError(std::to_string(missing.size()) + " papers have no citation snapshot: " +
                             join_ids(missing));
}

}  // namespace detail

/// Per-paper z-scores under one week split. Every paper needs a snapshot entry.
inline ScoreMap zscores_for_split(const Corpus& corpus, const SnapshotSet& snapshot, const SplitSpec& split,
                                  StdConvention conv = StdConvention::population) {
  detail::require_coverage(corpus, snapshot);
  std::map<std::int64_t, std::pair<std::vector<std::string>, std::vector<double>>> weeks;
  for (const auto& [id, r] : corpus.records) {
    auto& w = weeks[assign_week(r.submitted_date(), split)];
    w.first.push_back(id);
    w.second.push_back(static_cast<double>(snapshot.find(id)->count));
  }
  ScoreMap out;
  out.reserve(corpus.size());
  for (const auto& [week, members] : weeks) {
    auto z = week_zscores(members.second, conv);
    for (std::size_t i = 0; i < z.size(); ++i) out.emplace(members.first[i], z[i]);
  }
  return out;
}

/// Mean minus standard deviation of a paper's seven per-split z-scores.
inline double stable_zscore(std::span<const double> per_split_z, StdConvention conv = StdConvention::population) {
  if (per_split_z.size() != 7)
    throw DomainError("stable z-score needs exactly 7 split values, got " + std::to_string(per_split_z.size()));
  return mean_of(per_split_z) - std_of(per_split_z, conv);
}

struct ZScoreRecord {
  std::string base_id;
  std::array<double, 7> per_split_z{};  // Monday-first, see kWeekdays
  double mean_z = 0.0;
  double std_z = 0.0;
  double stable_z = 0.0;
};

/// Z-scores under all seven splits (epoch = corpus window start), keyed by id.
inline std::map<std::string, ZScoreRecord> compute_zscores(const Corpus& corpus, const SnapshotSet& snapshot,
                                                           StdConvention conv = StdConvention::population) {
  std::array<ScoreMap, 7> per_split;
  auto splits = all_splits(corpus.window.start);
  for (std::size_t d = 0; d < 7; ++d) per_split[d] = zscores_for_split(corpus, snapshot, splits[d], conv);
  std::map<std::string, ZScoreRecord> out;
  for (const auto& [id, r] : corpus.records) {
    ZScoreRecord rec;
    rec.base_id = id;
    for (std::size_t d = 0; d < 7; ++d) rec.per_split_z[d] = per_split[d].at(id);
    rec.mean_z = mean_of(rec.per_split_z);
    rec.std_z = std_of(rec.per_split_z, conv);
    rec.stable_z = rec.mean_z - rec.std_z;
    out.emplace(id, rec);
  }
  return out;
}

struct RankedEntry {
  int rank = 0;
  std::string base_id;
  std::int64_t citation_count = 0;
  double stable_z = 0.0;  // the single-split z in single-split mode
  std::string primary_category;
  WeekRange week;  // under the canonical Sunday split

  bool operator==(const RankedEntry&) const = default;
};

struct RankOptions {
  StdConvention convention = StdConvention::population;
  std::optional<std::chrono::weekday> single_split;  // rank by one split's z instead of the stable score
};

struct RankResult {
  std::vector<RankedEntry> entries;
  std::vector<std::string> warnings;
};

inline constexpr int kDefaultTopN = 40;
inline constexpr std::chrono::weekday kCanonicalSplitDay = std::chrono::Sunday;

/// The score each paper is ranked by: stable z, or one split's z in single-split mode.
inline ScoreMap ranking_scores(const Corpus& corpus, const SnapshotSet& snapshot, const RankOptions& opt = {}) {
  if (opt.single_split)
    return zscores_for_split(corpus, snapshot, SplitSpec{*opt.single_split, corpus.window.start}, opt.convention);
  ScoreMap out;
  for (auto& [id, rec] : compute_zscores(corpus, snapshot, opt.convention)) out.emplace(id, rec.stable_z);
  return out;
}

/// Orders by score descending, then citation count descending, then id ascending.
inline RankResult rank_top_n(const Corpus& corpus, const SnapshotSet& snapshot, int n, const RankOptions& opt = {}) {
  if (n < 1) throw ValidationError("top-n must be at least 1, got " + std::to_string(n));
  RankResult result;
  auto scores = ranking_scores(corpus, snapshot, opt);
  const SplitSpec canonical{kCanonicalSplitDay, corpus.window.start};
  std::vector<RankedEntry> all;
  all.reserve(corpus.size());
  for (const auto& [id, r] : corpus.records) {
    RankedEntry e;
    e.base_id = id;
    e.citation_count = snapshot.find(id)->count;
    e.stable_z = scores.at(id);
    e.primary_category = r.primary_category;
    e.week = week_range(assign_week(r.submitted_date(), canonical), canonical);
    all.push_back(std::move(e));
  }
  std::sort(all.begin(), all.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.stable_z != b.stable_z) return a.stable_z > b.stable_z;
    if (a.citation_count != b.citation_count) return a.citation_count > b.citation_count;
    return a.base_id < b.base_id;
  });
  if (static_cast<std::size_t>(n) > all.size()) {
    result.warnings.push_back("requested top " + std::to_string(n) + " but corpus has only " +
                              std::to_string(all.size()) + " papers; returning all");
  } else {
    all.resize(static_cast<std::size_t>(n));
  }
  for (std::size_t i = 0; i < all.size(); ++i) all[i].rank = static_cast<int>(i + 1);
  result.entries = std::move(all);
  return result;
}

/// Ranks must run 1..N in order.
inline void validate_ranking(const std::vector<RankedEntry>& list) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i].rank != static_cast<int>(i + 1))
      throw DataIntegrityError("ranking is not rank-valid at position " + std::to_string(i + 1));
}

/// previous_rank - current_rank per current id; nullopt marks an entry that is new.
inline std::map<std::string, std::optional<int>> rank_delta(const std::vector<RankedEntry>& current,
                                                            const std::vector<RankedEntry>& previous) {
  validate_ranking(current);
  validate_ranking(previous);
  std::unordered_map<std::string, int> before;
  for (const auto& e : previous) before.emplace(e.base_id, e.rank);
  std::map<std::string, std::optional<int>> out;
  for (const auto& e : current) {
    auto it = before.find(e.base_id);
    out[e.base_id] = it == before.end() ? std::nullopt : std::optional<int>{it->second - e.rank};
  }
  return out;
}

inline std::string format_delta(const std::optional<int>& d) {
  if (!d) return "new";
  if (*d > 0) return "+" + std::to_string(*d);
  return std::to_string(*d);
}

}  // namespace citetrend
