#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citetrend/affiliations.hpp"
#include "citetrend/correlation.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/stats.hpp"
#include "citetrend/text.hpp"
#include "citetrend/trends.hpp"
#include "citetrend/zscore.hpp"

namespace citetrend {

inline constexpr std::string_view kRankingHeader = "rank,title,category,link,week,citations,stable_z,delta";

inline std::string arxiv_link(const std::string& id) { return "https://arxiv.org/abs/" + id; }

inline std::string format_week_iso(const WeekRange& w) { return format_date(w.start) + "/" + format_date(w.end); }

inline std::string opt_fixed(const std::optional<double>& v, int precision) {
  return v ? format_fixed(*v, precision) : std::string{};
}

/// Ranked list as CSV. `deltas` may be empty (no previous ranking): the column stays blank.
inline std::string ranking_csv(const std::vector<RankedEntry>& entries, const std::map<std::string, std::string>& titles,
                               const std::map<std::string, std::optional<int>>& deltas = {}) {
  std::string out = std::string(kRankingHeader) + "\n";
  for (const auto& e : entries) {
    auto t = titles.find(e.base_id);
    auto d = deltas.find(e.base_id);
    out += csv_row({std::to_string(e.rank), t == titles.end() ? std::string{} : t->second, e.primary_category,
                    arxiv_link(e.base_id), format_week_iso(e.week), std::to_string(e.citation_count),
                    format_fixed(e.stable_z, 6), d == deltas.end() ? std::string{} : format_delta(d->second)});
  }
  return out;
}

struct ParsedRanking {
  std::vector<RankedEntry> entries;
  std::map<std::string, std::string> titles;
};

inline ParsedRanking parse_ranking_csv(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty() || csv_row(rows[0]) != std::string(kRankingHeader) + "\n")
    throw ParseError("ranking CSV must start with header '" + std::string(kRankingHeader) + "'");
  ParsedRanking out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 8) throw ParseError("ranking CSV row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) + " fields");
    try {
      RankedEntry e;
      e.rank = std::stoi(r[0]);
      auto link = r[3];
      auto slash = link.find("/abs/");
      e.base_id = normalize_arxiv_id(slash == std::string::npos ? link : link.substr(slash + 5));
      e.primary_category = r[2];
      auto sep = r[4].find('/');
      if (sep == std::string::npos) throw ParseError("week '" + r[4] + "' is not START/END");
      e.week = {parse_date(r[4].substr(0, sep)), parse_date(r[4].substr(sep + 1))};
      e.citation_count = std::stoll(r[5]);
      e.stable_z = std::stod(r[6]);
      out.titles[e.base_id] = r[1];
      out.entries.push_back(std::move(e));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& ex) {
      throw ParseError("ranking CSV row " + std::to_string(i + 1) + ": " + ex.what());
    }
  }
  validate_ranking(out.entries);
  return out;
}

inline std::string weekly_stats_csv(const std::vector<WeeklyStatsRow>& rows, const std::vector<std::string>& categories) {
  std::vector<std::string> header = {"week_start", "week_end", "papers", "mean", "std", "mean_plus_half_std"};
  for (const auto& c : categories) header.push_back(c);
  header.push_back("others");
  std::string out = csv_row(header);
  for (const auto& r : rows) {
    std::vector<std::string> f = {format_date(r.week.start),         format_date(r.week.end),
                                  std::to_string(r.papers),          format_fixed(r.overall_mean, 6),
                                  format_fixed(r.overall_std, 6),    format_fixed(r.overall_mean + 0.5 * r.overall_std, 6)};
    for (const auto& c : categories) {
      auto it = r.per_category_means.find(c);
      f.push_back(it == r.per_category_means.end() ? std::string{} : opt_fixed(it->second, 6));
    }
    f.push_back(opt_fixed(r.others_mean, 6));
    out += csv_row(f);
  }
  return out;
}

inline std::string categories_csv(const std::map<std::string, double>& dist) {
  std::string out = "category,percent\n";
  for (const auto& [c, p] : dist) out += csv_row({c, format_fixed(p, 6)});
  return out;
}

inline std::string trends_csv(const std::vector<TrendSeries>& series) {
  std::string out = "week_start,topic,raw_percent,smoothed_percent\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.week_starts.size(); ++i)
      out += csv_row({format_date(s.week_starts[i]), s.topic, opt_fixed(s.raw_percent[i], 6),
                      opt_fixed(s.smoothed_percent[i], 6)});
  return out;
}

inline std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out = "group,score,papers,percent\n";
  for (const auto& r : rows)
    out += csv_row({r.group, format_fixed(r.score, 6), std::to_string(r.paper_count), format_fixed(r.percent, 6)});
  return out;
}

/// Sector x region percentages: academia, industry and a region-total row.
inline std::string sector_region_csv(const SectorRegionTable& t) {
  std::string out = "sector,sector_total,US,CN,Europe,Rest\n";
  const std::array<std::string, 2> names = {"academia", "industry"};
  double grand = 0.0;
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<std::string> f = {names[s], format_fixed(t.sector_total[s], 6)};
    for (double v : t.percent[s]) f.push_back(format_fixed(v, 6));
    out += csv_row(f);
    grand += t.sector_total[s];
  }
  std::vector<std::string> f = {"region_total", format_fixed(grand, 6)};
  for (double v : t.region_total) f.push_back(format_fixed(v, 6));
  out += csv_row(f);
  return out;
}

inline std::string collaboration_csv(const CollaborationBreakdown& b, const std::map<CollabClass, AuthorStats>& stats) {
  std::string out = "class,papers,mean_authors,std_authors\n";
  for (auto c : kCollabClasses) {
    auto it = stats.find(c);
    out += csv_row({to_string(c), std::to_string(b.counts.at(c)),
                    it == stats.end() ? std::string{} : format_fixed(it->second.mean, 6),
                    it == stats.end() ? std::string{} : format_fixed(it->second.std, 6)});
  }
  return out;
}

inline std::string correlations_csv(const std::vector<CorrelationPoint>& points) {
  std::string out = "n,kendall_tau,spearman_rho\n";
  for (const auto& p : points)
    out += csv_row({std::to_string(p.n), format_fixed(p.kendall_tau, 9), format_fixed(p.spearman_rho, 9)});
  return out;
}

/// Everything the report bundle can show; absent sections render as "no data".
struct ReportInputs {
  Timestamp generated_at{};
  std::optional<DateWindow> window;
  std::set<std::string> query_categories;
  std::size_t corpus_size = 0;
  std::optional<CitationSource> snapshot_source;
  std::optional<Timestamp> snapshot_time;

  std::vector<RankedEntry> ranking;
  std::map<std::string, std::string> titles;
  std::map<std::string, std::optional<int>> deltas;
  std::vector<std::string> not_found_ids;
  std::string score_label = "stable z-score";

  std::vector<std::string> report_categories;
  std::vector<WeeklyStatsRow> weekly;
  std::map<std::string, double> categories;

  std::vector<TrendSeries> trends;
  std::map<std::string, double> ranking_topic_shares;

  std::optional<Metric> institution_metric;
  std::vector<AggregateRow> institutions;
  std::optional<SectorRegionTable> sector_region;
  std::optional<CollaborationBreakdown> collaboration;
  std::map<CollabClass, AuthorStats> author_stats;

  std::vector<CorrelationPoint> correlations;
  std::optional<std::size_t> top_overlap;  // single-split vs stable top-N

  std::vector<std::string> notes;
};

namespace detail {

inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

inline std::string markdown_report(const ReportInputs& in) {
  std::string md = "# Citation trend report\n\n";
  md += "- Generated: " + format_timestamp(in.generated_at) + "\n";
  md += "- Citation snapshot: " +
        (in.snapshot_time ? to_string(*in.snapshot_source) + " as of " + format_timestamp(*in.snapshot_time)
                          : std::string("none")) +
        "\n";
  if (in.window) md += "- Window: " + format_date(in.window->start) + " to " + format_date(in.window->end) + "\n";
  if (!in.query_categories.empty()) {
    std::string cats;
    for (const auto& c : in.query_categories) cats += (cats.empty() ? "" : ", ") + c;
    md += "- Query categories: " + cats + "\n";
  }
  md += "- Papers: " + std::to_string(in.corpus_size) + "\n\n";

  md += "## Top " + std::to_string(in.ranking.size()) + " papers by " + in.score_label + "\n\n";
  if (in.ranking.empty()) {
    md += "_no data_\n\n";
  } else {
    md += "| No. | Title | Cat. | Link | Week | Cit | z-score | Delta |\n";
    md += "|---|---|---|---|---|---|---|---|\n";
    for (const auto& e : in.ranking) {
      auto t = in.titles.find(e.base_id);
      auto d = in.deltas.find(e.base_id);
      md += "| " + std::to_string(e.rank) + " | " + md_cell(t == in.titles.end() ? "" : t->second) + " | " +
            e.primary_category + " | " + arxiv_link(e.base_id) + " | " + e.week.label() + " | " +
            std::to_string(e.citation_count) + " | " + format_fixed(e.stable_z, 2) + " | " +
            (d == in.deltas.end() ? std::string{} : format_delta(d->second)) + " |\n";
    }
    md += "\n";
    if (!in.not_found_ids.empty())
      md += "Not found at the citation source (ranked with 0 citations): " + join_ids(in.not_found_ids, 1000) + "\n\n";
  }

  md += "## Weekly citation statistics\n\n";
  if (in.weekly.empty()) {
    md += "_no data_\n\n";
  } else {
    md += "| Week | Papers | Mean | Std |";
    for (const auto& c : in.report_categories) md += " " + c + " |";
    md += " others |\n|---|---|---|---|";
    for (std::size_t i = 0; i < in.report_categories.size(); ++i) md += "---|";
    md += "---|\n";
    for (const auto& r : in.weekly) {
      md += "| " + r.week.label() + " | " + std::to_string(r.papers) + " | " + format_fixed(r.overall_mean, 2) + " | " +
            format_fixed(r.overall_std, 2) + " |";
      for (const auto& c : in.report_categories) {
        auto it = r.per_category_means.find(c);
        md += " " + (it == r.per_category_means.end() || !it->second ? std::string("-") : format_fixed(*it->second, 2)) + " |";
      }
      md += " " + (r.others_mean ? format_fixed(*r.others_mean, 2) : std::string("-")) + " |\n";
    }
    md += "\n";
  }

  md += "## Main categories\n\n";
  if (in.categories.empty()) {
    md += "_no data_\n\n";
  } else {
    md += "| Category | Percent |\n|---|---|\n";
    for (const auto& [c, p] : in.categories) md += "| " + c + " | " + format_fixed(p, 2) + "% |\n";
    md += "\n";
  }

  md += "## Keyword trends\n\n";
  if (in.trends.empty()) {
    md += "_no data_\n\n";
  } else {
    md += "Weekly series are in trends.csv.\n\n| Topic | Weeks | Share of top list |\n|---|---|---|\n";
    for (const auto& s : in.trends) {
      auto it = in.ranking_topic_shares.find(s.topic);
      md += "| " + s.topic + " | " + std::to_string(s.week_starts.size()) + " | " +
            (it == in.ranking_topic_shares.end() ? std::string("-") : format_fixed(it->second, 1) + "%") + " |\n";
    }
    md += "\n";
  }

  md += "## Institutions\n\n";
  if (!in.sector_region && in.institutions.empty() && !in.collaboration) {
    md += "_no data_\n\n";
  } else {
    if (in.institution_metric) md += "Metric: " + to_string(*in.institution_metric) + "\n\n";
    if (in.sector_region) {
      const auto& t = *in.sector_region;
      md += "| Sector | Sector Total | US | CN | Europe | Rest |\n|---|---|---|---|---|---|\n";
      const std::array<std::string, 2> names = {"Academia", "Industry"};
      for (std::size_t s = 0; s < 2; ++s) {
        md += "| " + names[s] + " | " + format_fixed(t.sector_total[s], 2) + "% |";
        for (double v : t.percent[s]) md += " " + format_fixed(v, 2) + "% |";
        md += "\n";
      }
      md += "| Region Total | " + format_fixed(t.sector_total[0] + t.sector_total[1], 2) + "% |";
      for (double v : t.region_total) md += " " + format_fixed(v, 2) + "% |";
      md += "\n\n";
      if (t.excluded_other_score > 0)
        md += "Excluded sector \"other\" score: " + format_fixed(t.excluded_other_score, 4) + "\n\n";
    }
    if (in.collaboration) {
      md += "| Contribution | Papers | Mean authors | Std authors |\n|---|---|---|---|\n";
      for (auto c : kCollabClasses) {
        auto it = in.author_stats.find(c);
        md += "| " + to_string(c) + " | " + std::to_string(in.collaboration->counts.at(c)) + " | " +
              (it == in.author_stats.end() ? std::string("-") : format_fixed(it->second.mean, 2)) + " | " +
              (it == in.author_stats.end() ? std::string("-") : format_fixed(it->second.std, 2)) + " |\n";
      }
      md += "\n";
      if (!in.collaboration->excluded.empty())
        md += "Excluded (sector \"other\"): " + join_ids(in.collaboration->excluded, 1000) + "\n\n";
    }
  }

  md += "## Ranking agreement (single split vs stable)\n\n";
  if (in.correlations.empty()) {
    md += "_no data_\n\n";
  } else {
    if (in.top_overlap)
      md += "Top-" + std::to_string(in.ranking.size()) + " overlap: " + std::to_string(*in.top_overlap) + "\n\n";
    md += "| n | Kendall tau-b | Spearman rho |\n|---|---|---|\n";
    for (const auto& p : in.correlations)
      md += "| " + std::to_string(p.n) + " | " + format_fixed(p.kendall_tau, 4) + " | " + format_fixed(p.spearman_rho, 4) +
            " |\n";
    md += "\n";
  }

  if (!in.notes.empty()) {
    md += "## Notes\n\n";
    for (const auto& n : in.notes) md += "- " + n + "\n";
    md += "\n";
  }
  return md;
}

}  // namespace detail

inline const std::vector<std::string>& report_file_names() {
  static const std::vector<std::string> names = {"report.md",  "topN.csv",         "weekly_stats.csv", "categories.csv",
                                                 "trends.csv", "institutions.csv", "correlations.csv"};
  return names;
}

/// Writes report.md plus one CSV per dataset into `dir`. Output bytes depend only on `in`.
inline std::vector<std::filesystem::path> emit_report(const ReportInputs& in, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataIntegrityError("cannot create report directory " + dir.string() + ": " + ec.message());
  const std::string institutions =
      in.sector_region ? sector_region_csv(*in.sector_region) : aggregate_csv(in.institutions);
  const std::vector<std::pair<std::string, std::string>> files = {
      {"report.md", detail::markdown_report(in)},
      {"topN.csv", ranking_csv(in.ranking, in.titles, in.deltas)},
      {"weekly_stats.csv", weekly_stats_csv(in.weekly, in.report_categories)},
      {"categories.csv", categories_csv(in.categories)},
      {"trends.csv", trends_csv(in.trends)},
      {"institutions.csv", institutions},
      {"correlations.csv", correlations_csv(in.correlations)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, bytes] : files) {
    write_file((dir / name).string(), bytes);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace citetrend
