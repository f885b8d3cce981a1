#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "citetrend/citations.hpp"
#include "citetrend/corpus.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/text.hpp"
#include "citetrend/zscore.hpp"

namespace citetrend {

/// Primary categories broken out in weekly statistics by default.
inline const std::vector<std::string>& default_report_categories() {
  static const std::vector<std::string> cats = {"cs.CL", "cs.LG", "cs.CV", "cs.AI", "stat.ML"};
  return cats;
}

struct WeeklyStatsRow {
  WeekRange week;
  std::size_t papers = 0;
  double overall_mean = 0.0;
  double overall_std = 0.0;  // population
  std::map<std::string, std::optional<double>> per_category_means;  // nullopt: no paper of that category
  std::optional<double> others_mean;
};

/// Per-week citation mean/std over all papers plus means for each listed primary category
/// and a residual "others" column. Weeks without papers produce no row.
inline std::vector<WeeklyStatsRow> weekly_mean_std(const Corpus& corpus, const SnapshotSet& snapshot,
                                                   const SplitSpec& split, const std::vector<std::string>& categories) {
  detail::require_coverage(corpus, snapshot);
  struct Week {
    std::vector<double> all;
    std::map<std::string, std::vector<double>> by_cat;
    std::vector<double> others;
  };
  const std::set<std::string> listed(categories.begin(), categories.end());
  std::map<std::int64_t, Week> weeks;
  for (const auto& [id, r] : corpus.records) {
    auto& w = weeks[assign_week(r.submitted_date(), split)];
    const double c = static_cast<double>(snapshot.find(id)->count);
    w.all.push_back(c);
    if (listed.count(r.primary_category))
      w.by_cat[r.primary_category].push_back(c);
    else
      w.others.push_back(c);
  }
  std::vector<WeeklyStatsRow> rows;
  for (const auto& [index, w] : weeks) {
    WeeklyStatsRow row;
    row.week = week_range(index, split);
    row.papers = w.all.size();
    row.overall_mean = mean_of(w.all);
    row.overall_std = std_of(w.all, StdConvention::population);
    for (const auto& c : categories) {
      auto it = w.by_cat.find(c);
      row.per_category_means[c] = it == w.by_cat.end() ? std::nullopt : std::optional<double>{mean_of(it->second)};
    }
    if (!w.others.empty()) row.others_mean = mean_of(w.others);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Top-level archives merged into the "math+physics" main category.
inline bool is_math_or_physics(std::string_view category) {
  auto archive = category.substr(0, category.find('.'));
  static const std::set<std::string_view> physics = {"astro-ph", "cond-mat", "gr-qc",   "hep-ex",  "hep-lat",
                                                     "hep-ph",   "hep-th",   "math-ph", "nlin",    "nucl-ex",
                                                     "nucl-th",  "physics",  "quant-ph"};
  return archive == "math" || physics.count(archive) > 0;
}

inline std::string main_category(std::string_view primary) {
  return is_math_or_physics(primary) ? "math+physics" : std::string(primary);
}

/// Percentage of papers per main category (primary category, math/physics merged).
inline std::map<std::string, double> category_distribution(const Corpus& corpus) {
  if (corpus.empty()) throw ValidationError("category distribution needs a non-empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& [id, r] : corpus.records) ++counts[main_category(r.primary_category)];
  std::map<std::string, double> out;
  for (const auto& [cat, n] : counts) out[cat] = 100.0 * static_cast<double>(n) / static_cast<double>(corpus.size());
  return out;
}

struct CommentKeywordShare {
  std::size_t matching = 0;
  std::size_t with_comments = 0;
  std::size_t total = 0;
  double percent_of_total = 0.0;
  std::optional<double> percent_of_commented;
};

/// Papers first submitted in `week` whose lowercased comment contains `keyword`.
inline CommentKeywordShare comment_keyword_share(const Corpus& corpus, const WeekRange& week, std::string_view keyword) {
  if (keyword.empty()) throw ValidationError("comment keyword must not be empty");
  const auto needle = to_lower(keyword);
  CommentKeywordShare s;
  for (const auto& [id, r] : corpus.records) {
    const auto d = r.submitted_date();
    if (d < week.start || d > week.end) continue;
    ++s.total;
    if (!r.comment || r.comment->empty()) continue;
    ++s.with_comments;
    if (to_lower(*r.comment).find(needle) != std::string::npos) ++s.matching;
  }
  if (s.total) s.percent_of_total = 100.0 * static_cast<double>(s.matching) / static_cast<double>(s.total);
  if (s.with_comments)
    s.percent_of_commented = 100.0 * static_cast<double>(s.matching) / static_cast<double>(s.with_comments);
  return s;
}

}  // namespace citetrend
