#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "citetrend/affiliations.hpp"
#include "citetrend/arxiv.hpp"
#include "citetrend/citations.hpp"
#include "citetrend/config.hpp"
#include "citetrend/corpus.hpp"
#include "citetrend/correlation.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/http.hpp"
#include "citetrend/report.hpp"
#include "citetrend/stats.hpp"
#include "citetrend/trends.hpp"
#include "citetrend/version.hpp"
#include "citetrend/zscore.hpp"

namespace citetrend::cli {

namespace fs = std::filesystem;

/// Typed, validated view of the merged settings.
struct RunConfig {
  std::set<std::string> categories;
  DateWindow window;
  int top_n = kDefaultTopN;
  StdConvention std_convention = StdConvention::population;
  std::optional<std::chrono::weekday> split_day;
  std::chrono::weekday trend_split_day = std::chrono::Sunday;
  std::string topics;
  int trend_window = 8;
  int trend_order = 3;
  fs::path cache_dir, snapshot_dir, output_dir;
  std::optional<fs::path> replay_dir;
  std::optional<Timestamp> timestamp;

  static RunConfig from(const Settings& s) {
    RunConfig c;
    auto cats = s.list("categories");
    c.categories = {cats.begin(), cats.end()};
    c.window = {s.date("from"), s.date("to")};
    if (c.window.start > c.window.end) throw ValidationError("window start 'from' is after 'to'");
    c.top_n = static_cast<int>(s.integer("top_n"));
    if (c.top_n < 1) throw ValidationError("top-n must be at least 1, got " + s.str("top_n"));
    c.std_convention = parse_std_convention(s.str("std_convention"));
    if (auto d = s.opt("split_day")) c.split_day = parse_weekday(*d);
    c.trend_split_day = parse_weekday(s.str("trend_split_day"));
    c.topics = s.str("topics");
    c.trend_window = static_cast<int>(s.integer("trend_window"));
    c.trend_order = static_cast<int>(s.integer("trend_order"));
    if (c.trend_order < 0 || c.trend_window < 1 || c.trend_order >= c.trend_window)
      throw ValidationError("trend order must be in [0, window)");
    c.cache_dir = s.str("cache_dir");
    c.snapshot_dir = s.str("snapshot_dir");
    c.output_dir = s.str("output_dir");
    if (auto r = s.opt("replay_dir")) c.replay_dir = *r;
    const std::vector<fs::path> dirs = {c.cache_dir, c.snapshot_dir, c.output_dir};
    for (std::size_t i = 0; i < dirs.size(); ++i)
      for (std::size_t j = i + 1; j < dirs.size(); ++j)
        if (fs::weakly_canonical(dirs[i]) == fs::weakly_canonical(dirs[j]))
          throw ValidationError("cache, snapshot and output directories must be distinct");
    if (auto t = s.opt("timestamp")) {
      try {
        c.timestamp = parse_timestamp(*t);
      } catch (const ParseError& e) {
        throw ValidationError(std::string("timestamp: ") + e.what());
      }
    }
    return c;
  }

  Timestamp now() const { return timestamp ? *timestamp : now_utc(); }
};

struct Context {
  Settings settings;
  RunConfig config;
  std::ostream& out;
  std::ostream& err;

  void warn(const std::string& msg) const { err << "warning: " << msg << "\n"; }

  fs::path corpus_path() const {
    auto p = settings.opt("corpus");
    return p ? fs::path(*p) : config.output_dir / "corpus.jsonl";
  }

  fs::path output_file(const std::string& default_name) const {
    auto p = settings.opt("out");
    fs::path path = p ? fs::path(*p) : config.output_dir / default_name;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    return path;
  }

  Fetcher make_fetcher(const std::string& interval_key) const {
    RequestPolicy policy;
    policy.min_interval = std::chrono::milliseconds{settings.integer(interval_key)};
    policy.max_retries = static_cast<int>(settings.integer("max_retries"));
    if (policy.max_retries < 0) throw ValidationError("max retries must be non-negative");
    CacheOptions cache;
    if (config.replay_dir) {
      cache = {*config.replay_dir, true};
    } else {
      cache = {config.cache_dir, false};
    }
    return Fetcher(std::make_shared<HttplibTransport>(), policy, cache);
  }

  Corpus load_filtered_corpus() const {
    Corpus corpus = load_corpus(corpus_path().string());
    if (auto ex = settings.opt("exclusions")) {
      auto res = apply_exclusions(corpus, load_exclusions(*ex));
      for (const auto& id : res.missing) warn("excluded id " + id + " is not in the corpus");
      corpus = std::move(res.corpus);
    }
    return corpus;
  }

  SnapshotSet load_selected_snapshot() const {
    if (auto p = settings.opt("snapshot")) return load_snapshot(*p);
    if (!fs::is_directory(config.snapshot_dir))
      throw ValidationError("no --snapshot given and snapshot directory " + config.snapshot_dir.string() + " is missing");
    std::vector<fs::path> candidates;
    for (const auto& e : fs::directory_iterator(config.snapshot_dir)) {
      auto name = e.path().filename().string();
      if (e.is_regular_file() && name.ends_with(".jsonl") && name.find(".partial") == std::string::npos)
        candidates.push_back(e.path());
    }
    if (candidates.empty()) throw ValidationError("no complete snapshot in " + config.snapshot_dir.string());
    std::vector<SnapshotSet> sets;
    std::size_t best = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      sets.push_back(load_snapshot(candidates[i].string()));
      if (sets[i].retrieved_at > sets[best].retrieved_at ||
          (sets[i].retrieved_at == sets[best].retrieved_at && candidates[i] > candidates[best]))
        best = i;
    }
    return sets[best];
  }

  RankOptions rank_options() const { return {config.std_convention, config.split_day}; }
};

inline std::map<std::string, std::string> titles_of(const Corpus& c) {
  std::map<std::string, std::string> t;
  for (const auto& [id, r] : c.records) t[id] = r.title;
  return t;
}

inline std::vector<std::size_t> parse_grid(const Settings& s, std::size_t total) {
  auto items = s.list("grid");
  if (items.empty()) return default_sweep_grid(total);
  std::vector<std::size_t> grid;
  for (const auto& i : items) {
    try {
      grid.push_back(static_cast<std::size_t>(std::stoul(i)));
    } catch (const std::exception&) {
      throw ValidationError("grid entry '" + i + "' is not a positive integer");
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

inline int cmd_fetch(Context& ctx) {
  QuerySpec spec{ctx.config.categories, ctx.config.window, static_cast<int>(ctx.settings.integer("page_size")),
                 static_cast<int>(ctx.settings.integer("max_retries"))};
  auto fetcher = ctx.make_fetcher("request_interval_ms");
  auto report = fetch_corpus(spec, fetcher, ctx.settings.str("arxiv_url"), ctx.config.now());
  for (const auto& e : report.entry_errors) ctx.warn(e);
  auto path = ctx.corpus_path();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_corpus(report.corpus, path.string());
  ctx.out << "fetched " << report.corpus.size() << " papers from " << report.pages << " pages (" << report.duplicates
          << " duplicates, " << report.filtered_out << " outside window/categories, " << report.entry_errors.size()
          << " malformed entries) -> " << path.string() << "\n";
  return 0;
}

inline int cmd_snapshot(Context& ctx) {
  auto corpus = load_corpus(ctx.corpus_path().string());
  std::vector<std::string> ids;
  for (const auto& [id, r] : corpus.records) ids.push_back(id);
  if (ids.empty()) throw ValidationError("corpus is empty; nothing to snapshot");
  CitationQuery q;
  q.base_url = ctx.settings.str("citation_url");
  auto batch = ctx.settings.integer("batch_size");
  if (batch < 1) throw ValidationError("batch size must be positive");
  q.batch_size = static_cast<std::size_t>(batch);
  if (const char* key = std::getenv("SEMANTIC_SCHOLAR_API_KEY"); key && *key) q.api_key = key;
  auto fetcher = ctx.make_fetcher("citation_interval_ms");
  auto res = fetch_citations(ids, parse_citation_source(ctx.settings.str("source")), fetcher, q, ctx.config.now(),
                             ctx.config.snapshot_dir);
  auto missing = res.snapshot.not_found();
  if (!missing.empty()) ctx.warn(std::to_string(missing.size()) + " papers not found at source: " + join_ids(missing));
  ctx.out << "snapshot of " << res.snapshot.snapshots.size() << " papers -> " << res.path.string() << "\n";
  return 0;
}

inline std::map<std::string, std::optional<int>> load_deltas(const Context& ctx, const std::vector<RankedEntry>& current) {
  auto prev = ctx.settings.opt("previous");
  if (!prev) return {};
  return rank_delta(current, parse_ranking_csv(read_file(*prev)).entries);
}

inline int cmd_rank(Context& ctx) {
  auto corpus = ctx.load_filtered_corpus();
  auto snapshot = ctx.load_selected_snapshot();
  auto result = rank_top_n(corpus, snapshot, ctx.config.top_n, ctx.rank_options());
  for (const auto& w : result.warnings) ctx.warn(w);
  for (const auto& e : result.entries)
    if (!snapshot.find(e.base_id)->found) ctx.warn(e.base_id + " was not found at the citation source (count 0)");
  auto path = ctx.output_file("topN.csv");
  write_file(path.string(), ranking_csv(result.entries, titles_of(corpus), load_deltas(ctx, result.entries)));
  ctx.out << "ranked " << result.entries.size() << " of " << corpus.size() << " papers -> " << path.string() << "\n";
  return 0;
}

inline ScoreMap scores_from_ranking(const ParsedRanking& r) {
  ScoreMap m;
  for (const auto& e : r.entries) m[e.base_id] = e.stable_z;
  return m;
}

inline int cmd_correlate(Context& ctx) {
  auto single_path = ctx.settings.opt("single");
  auto stable_path = ctx.settings.opt("stable");
  if (!single_path || !stable_path) throw ValidationError("correlate needs --single and --stable ranking CSVs");
  auto single = parse_ranking_csv(read_file(*single_path));
  auto stable = parse_ranking_csv(read_file(*stable_path));
  auto a = scores_from_ranking(single);
  auto b = scores_from_ranking(stable);
  auto points = prefix_sweep(a, b, parse_grid(ctx.settings, b.size()));
  auto path = ctx.output_file("correlations.csv");
  write_file(path.string(), correlations_csv(points));
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(ctx.config.top_n),
                                              std::min(single.entries.size(), stable.entries.size()));
  std::vector<std::string> ta, tb;
  for (std::size_t i = 0; i < n; ++i) {
    ta.push_back(single.entries[i].base_id);
    tb.push_back(stable.entries[i].base_id);
  }
  ctx.out << "top-" << n << " overlap: " << overlap_count(ta, tb) << " of " << n << "; " << points.size()
          << " sweep points -> " << path.string() << "\n";
  return 0;
}

inline std::vector<TrendSeries> build_trends(const Context& ctx, const Corpus& corpus,
                                             const std::vector<TopicRule>& rules) {
  std::vector<TrendSeries> out;
  if (corpus.empty()) return out;
  SavitzkyGolayFilter filter(ctx.config.trend_window, ctx.config.trend_order);
  const SplitSpec split{ctx.config.trend_split_day, corpus.window.start};
  for (const auto& rule : rules) {
    auto s = weekly_topic_share(corpus, rule, split);
    smooth_trend(s, filter);
    out.push_back(std::move(s));
  }
  return out;
}

inline int cmd_trends(Context& ctx) {
  auto corpus = ctx.load_filtered_corpus();
  if (corpus.empty()) throw ValidationError("corpus is empty; no trends to compute");
  auto series = build_trends(ctx, corpus, resolve_topics(ctx.config.topics));
  auto path = ctx.output_file("trends.csv");
  write_file(path.string(), trends_csv(series));
  ctx.out << series.size() << " topic series -> " << path.string() << "\n";
  return 0;
}

struct InstitutionData {
  std::vector<PaperAffiliationMap> papers;
  AffiliationRegistry registry;
};

inline std::optional<InstitutionData> load_institutions(const Context& ctx,
                                                        const std::optional<std::vector<std::string>>& restrict_to) {
  auto maps_path = ctx.settings.opt("affiliations");
  auto reg_path = ctx.settings.opt("registry");
  if (!maps_path && !reg_path) return std::nullopt;
  if (!maps_path || !reg_path) throw ValidationError("institution analysis needs both --affiliations and --registry");
  RegionMap regions;
  if (auto rm = ctx.settings.opt("region_map")) regions = RegionMap::parse(read_file(*rm));
  InstitutionData d{parse_affiliation_maps(read_file(*maps_path)), parse_registry(read_file(*reg_path), regions)};
  if (restrict_to) {
    std::vector<std::string> missing;
    d.papers = select_papers(d.papers, *restrict_to, &missing);
    if (!missing.empty()) ctx.warn(std::to_string(missing.size()) + " ranked papers lack affiliation data: " + join_ids(missing));
  }
  return d;
}

inline int cmd_institutions(Context& ctx) {
  std::optional<std::vector<std::string>> ids;
  if (auto r = ctx.settings.opt("ranking")) {
    ids.emplace();
    for (const auto& e : parse_ranking_csv(read_file(*r)).entries) ids->push_back(e.base_id);
  }
  auto data = load_institutions(ctx, ids);
  if (!data) throw ValidationError("institutions needs --affiliations and --registry");
  auto metric = parse_metric(ctx.settings.str("metric"));
  auto group = ctx.settings.str("group_by");
  auto path = ctx.output_file("institutions.csv");
  if (group == "sector-region") {
    auto table = sector_region_table(data->papers, metric, data->registry);
    if (table.excluded_other_score > 0)
      ctx.warn("sector 'other' excluded from the sector/region table (score " + format_fixed(table.excluded_other_score, 4) + ")");
    write_file(path.string(), sector_region_csv(table));
  } else {
    write_file(path.string(), aggregate_csv(aggregate(data->papers, metric, data->registry, parse_group_by(group))));
  }
  auto breakdown = collaboration_breakdown(data->papers, data->registry);
  auto collab_path = path.parent_path() / "collaboration.csv";
  write_file(collab_path.string(), collaboration_csv(breakdown, author_count_stats(data->papers, data->registry)));
  if (!breakdown.excluded.empty())
    ctx.warn(std::to_string(breakdown.excluded.size()) + " papers involve sector 'other' and are excluded from the collaboration table");
  ctx.out << data->papers.size() << " papers -> " << path.string() << ", " << collab_path.string() << "\n";
  return 0;
}

inline int cmd_report(Context& ctx) {
  auto corpus = ctx.load_filtered_corpus();
  auto snapshot = ctx.load_selected_snapshot();
  ReportInputs in;
  in.generated_at = ctx.config.now();
  in.window = corpus.window;
  in.query_categories = corpus.query_categories;
  in.corpus_size = corpus.size();
  in.snapshot_source = snapshot.source;
  in.snapshot_time = snapshot.retrieved_at;
  in.report_categories = ctx.settings.list("report_categories");
  if (ctx.config.split_day) in.score_label = "z-score (" + weekday_name(*ctx.config.split_day) + " split)";

  if (!corpus.empty()) {
    auto ranked = rank_top_n(corpus, snapshot, ctx.config.top_n, ctx.rank_options());
    in.notes.insert(in.notes.end(), ranked.warnings.begin(), ranked.warnings.end());
    in.ranking = ranked.entries;
    in.titles = titles_of(corpus);
    for (auto& [id, t] : std::map<std::string, std::string>(in.titles))
      if (std::none_of(in.ranking.begin(), in.ranking.end(), [&](const RankedEntry& e) { return e.base_id == id; }))
        in.titles.erase(id);
    in.deltas = load_deltas(ctx, in.ranking);
    for (const auto& e : in.ranking)
      if (!snapshot.find(e.base_id)->found) in.not_found_ids.push_back(e.base_id);

    const SplitSpec weekly_split{ctx.config.trend_split_day, corpus.window.start};
    in.weekly = weekly_mean_std(corpus, snapshot, weekly_split, in.report_categories);
    in.categories = category_distribution(corpus);

    auto rules = resolve_topics(ctx.config.topics);
    in.trends = build_trends(ctx, corpus, rules);
    std::vector<std::string> ranked_ids;
    for (const auto& e : in.ranking) ranked_ids.push_back(e.base_id);
    in.ranking_topic_shares = topic_share_of_list(ranked_ids, corpus, rules);

    if (auto inst = load_institutions(ctx, ranked_ids)) {
      auto metric = parse_metric(ctx.settings.str("metric"));
      in.institution_metric = metric;
      auto group = ctx.settings.str("group_by");
      if (group == "sector-region")
        in.sector_region = sector_region_table(inst->papers, metric, inst->registry);
      else
        in.institutions = aggregate(inst->papers, metric, inst->registry, parse_group_by(group));
      in.collaboration = collaboration_breakdown(inst->papers, inst->registry);
      in.author_stats = author_count_stats(inst->papers, inst->registry);
    }

    if (corpus.size() >= 2) {
      const auto single_day = ctx.config.split_day.value_or(kCanonicalSplitDay);
      auto single = zscores_for_split(corpus, snapshot, SplitSpec{single_day, corpus.window.start}, ctx.config.std_convention);
      auto stable = ranking_scores(corpus, snapshot, {ctx.config.std_convention, std::nullopt});
      for (auto n : parse_grid(ctx.settings, corpus.size())) {
        try {
          auto pts = prefix_sweep(single, stable, {n});
          in.correlations.push_back(pts.front());
        } catch (const DomainError& e) {
          in.notes.push_back("correlation at n=" + std::to_string(n) + " skipped: " + e.what());
        }
      }
      auto top_single = rank_top_n(corpus, snapshot, ctx.config.top_n, {ctx.config.std_convention, single_day}).entries;
      auto top_stable = rank_top_n(corpus, snapshot, ctx.config.top_n, {ctx.config.std_convention, std::nullopt}).entries;
      std::vector<std::string> a, b;
      for (const auto& e : top_single) a.push_back(e.base_id);
      for (const auto& e : top_stable) b.push_back(e.base_id);
      in.top_overlap = overlap_count(a, b);
    }

    if (auto kw = ctx.settings.opt("comment_keyword")) {
      const Date start = ctx.settings.opt("comment_week") ? ctx.settings.date("comment_week") : corpus.window.start;
      const WeekRange week{start, start + std::chrono::days{6}};
      auto share = comment_keyword_share(corpus, week, *kw);
      in.notes.push_back("comment keyword \"" + *kw + "\" in week " + format_date(week.start) + "/" + format_date(week.end) +
                         ": " + std::to_string(share.matching) + " of " + std::to_string(share.total) + " papers (" +
                         format_fixed(share.percent_of_total, 1) + "%), " + std::to_string(share.with_comments) +
                         " with comments");
    }
  }
  auto written = emit_report(in, ctx.config.output_dir);
  ctx.out << "report bundle (" << written.size() << " files) -> " << ctx.config.output_dir.string() << "\n";
  return 0;
}

inline int cmd_discrepancy(Context& ctx) {
  auto ref_path = ctx.settings.opt("reference");
  auto other_path = ctx.settings.opt("other");
  if (!ref_path || !other_path) throw ValidationError("discrepancy needs --reference and --other snapshot files");
  auto ref = load_snapshot(*ref_path);
  auto other = load_snapshot(*other_path);
  std::string csv = "base_id,reference,other,relative_discrepancy\n";
  std::size_t compared = 0;
  double sum = 0.0;
  for (const auto& [id, s] : ref.snapshots) {
    auto* o = other.find(id);
    if (!o) continue;
    std::string rel;
    if (s.count > 0) {
      double d = relative_discrepancy(s.count, o->count);
      rel = format_fixed(d, 6);
      sum += d;
      ++compared;
    }
    csv += csv_row({id, std::to_string(s.count), std::to_string(o->count), rel});
  }
  auto path = ctx.output_file("discrepancy.csv");
  write_file(path.string(), csv);
  ctx.out << compared << " papers compared; mean relative discrepancy "
          << (compared ? format_fixed(100.0 * sum / static_cast<double>(compared), 1) + "%" : std::string("n/a"))
          << " -> " << path.string() << "\n";
  return 0;
}

inline void report_error(std::ostream& err, std::string_view kind, const std::string& message, int code) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
  err << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
}

/// Runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Citation-trend pipeline: fetch, snapshot, rank, correlate, trends, institutions, report"};
  app.require_subcommand(1, 1);
  std::string config_path;
  bool show_version = false;
  app.add_option("--config", config_path, "JSON config file; flags override its fields");
  app.add_flag("--version", show_version, "print version and schema versions");
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& k : setting_keys()) {
    std::string flag = "--" + std::string(k.key);
    std::replace(flag.begin(), flag.end(), '_', '-');
    flag_options[std::string(k.key)] =
        app.add_option(flag, flag_values[std::string(k.key)], std::string(k.help) + " [default: " + std::string(k.default_value) + "]");
  }
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fetch", "download arXiv metadata into a corpus file"},
      {"snapshot", "fetch citation counts for the corpus into a dated snapshot"},
      {"rank", "rank papers by stable z-score (or one split) into a CSV"},
      {"correlate", "Kendall/Spearman sweep between two ranking CSVs"},
      {"trends", "weekly keyword-topic shares with Savitzky-Golay smoothing"},
      {"institutions", "institution contribution tables from curated affiliations"},
      {"report", "full Markdown + CSV report bundle"},
      {"discrepancy", "relative citation-count discrepancy between two snapshots"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  for (int i = 1; i < argc; ++i) {
    if (std::string_view(argv[i]) == "--version") {
      out << "citetrend " << kVersion << "\ncorpus schema: " << kCorpusSchema << "\nsnapshot schema: " << kSnapshotSchema << "\n";
      return 0;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what(), static_cast<int>(ExitCode::validation));
    return static_cast<int>(ExitCode::validation);
  }

  try {
    Settings settings;
    if (!config_path.empty()) settings.merge_config(read_file(config_path));
    for (const auto& [key, opt] : flag_options)
      if (opt->count() > 0) settings.set(key, flag_values[key]);
    Context ctx{settings, RunConfig::from(settings), out, err};
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "fetch") return cmd_fetch(ctx);
    if (name == "snapshot") return cmd_snapshot(ctx);
    if (name == "rank") return cmd_rank(ctx);
    if (name == "correlate") return cmd_correlate(ctx);
    if (name == "trends") return cmd_trends(ctx);
    if (name == "institutions") return cmd_institutions(ctx);
    if (name == "report") return cmd_report(ctx);
    if (name == "discrepancy") return cmd_discrepancy(ctx);
    throw ValidationError("unknown subcommand " + name);
  } catch (const Error& e) {
    report_error(err, e.kind(), e.what(), static_cast<int>(e.exit_code()));
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    report_error(err, "io", e.what(), static_cast<int>(ExitCode::data_integrity));
    return static_cast<int>(ExitCode::data_integrity);
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what(), static_cast<int>(ExitCode::data_integrity));
    return static_cast<int>(ExitCode::data_integrity);
  }
}

}  // namespace citetrend::cli
