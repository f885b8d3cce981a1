#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citetrend/corpus.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/text.hpp"
#include "citetrend/zscore.hpp"

namespace citetrend {

enum class Sector { academia, industry, other };
enum class Region { US, CN, Europe, Rest };

inline constexpr std::array<Sector, 3> kSectors = {Sector::academia, Sector::industry, Sector::other};
inline constexpr std::array<Region, 4> kRegions = {Region::US, Region::CN, Region::Europe, Region::Rest};

inline std::string to_string(Sector s) {
  switch (s) {
    case Sector::academia: return "academia";
    case Sector::industry: return "industry";
    case Sector::other: return "other";
  }
  return "other";
}

inline std::string to_string(Region r) {
  switch (r) {
    case Region::US: return "US";
    case Region::CN: return "CN";
    case Region::Europe: return "Europe";
    case Region::Rest: return "Rest";
  }
  return "Rest";
}

inline Sector parse_sector(std::string_view s) {
  for (auto x : kSectors)
    if (to_string(x) == s) return x;
  throw ValidationError("unknown sector '" + std::string(s) + "' (expected academia, industry or other)");
}

inline Region parse_region(std::string_view s) {
  for (auto x : kRegions)
    if (to_string(x) == s) return x;
  throw ValidationError("unknown region '" + std::string(s) + "' (expected US, CN, Europe or Rest)");
}

/// ISO 3166-1 alpha-2 country code -> reporting region.
class RegionMap {
 public:
  RegionMap() {
    // Keep in sync with data/country_regions.csv.
    static constexpr std::array<std::string_view, 46> europe = {
        "AD", "AL", "AT", "BA", "BE", "BG", "BY", "CH", "CY", "CZ", "DE", "DK", "EE", "ES", "FI", "FR",
        "GB", "GR", "HR", "HU", "IE", "IS", "IT", "LI", "LT", "LU", "LV", "MC", "MD", "ME", "MK", "MT",
        "NL", "NO", "PL", "PT", "RO", "RS", "SE", "SI", "SK", "SM", "UA", "VA", "XK", "UK"};
    for (auto c : europe) map_[std::string(c)] = Region::Europe;
    map_["US"] = Region::US;
    map_["CN"] = Region::CN;
    map_["HK"] = Region::CN;
    map_["MO"] = Region::CN;
  }

  /// CSV with a "country,region" header.
  static RegionMap parse(std::string_view csv) {
    RegionMap m;
    m.map_.clear();
    auto rows = parse_csv(csv);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 2) throw ParseError("region map row " + std::to_string(i + 1) + " needs 2 fields");
      m.map_[rows[i][0]] = parse_region(rows[i][1]);
    }
    return m;
  }

  Region region_for(const std::string& country) const {
    auto it = map_.find(country);
    return it == map_.end() ? Region::Rest : it->second;
  }

  const std::map<std::string, Region>& explicit_entries() const { return map_; }

 private:
  std::map<std::string, Region> map_;
};

struct AffiliationRecord {
  std::string institution_id;
  std::string display_name;
  Sector sector = Sector::other;
  std::string country;
  Region region = Region::Rest;
};

struct AffiliationRegistry {
  std::map<std::string, AffiliationRecord> records;

  const AffiliationRecord& at(const std::string& id) const {
    auto it = records.find(id);
    if (it == records.end()) throw DataIntegrityError("institution '" + id + "' not in registry");
    return it->second;
  }
  bool contains(const std::string& id) const { return records.count(id) > 0; }
};

/// Registry JSONL: {"institution_id", "display_name", "sector", "country", "region"?}.
/// A missing region is derived from the country; a present one must agree with it.
inline AffiliationRegistry parse_registry(std::string_view text, const RegionMap& regions = {}) {
  using detail::field;
  AffiliationRegistry reg;
  std::size_t lineno = 0;
  for (auto line : detail::lines_of(text)) {
    ++lineno;
    auto j = detail::parse_json_line(line, lineno, "registry");
    AffiliationRecord r;
    r.institution_id = field<std::string>(j, "institution_id", lineno);
    r.display_name = j.value("display_name", r.institution_id);
    r.sector = parse_sector(field<std::string>(j, "sector", lineno));
    r.country = field<std::string>(j, "country", lineno);
    const Region derived = regions.region_for(r.country);
    r.region = j.contains("region") ? parse_region(field<std::string>(j, "region", lineno)) : derived;
    if (r.region != derived)
      throw DataIntegrityError("registry line " + std::to_string(lineno) + ": region " + to_string(r.region) +
                               " inconsistent with country " + r.country + " (" + to_string(derived) + ")");
    if (reg.records.count(r.institution_id))
      throw DataIntegrityError("duplicate institution id '" + r.institution_id + "' in registry");
    reg.records.emplace(r.institution_id, std::move(r));
  }
  return reg;
}

/// Per-author affiliation sets of one paper.
struct PaperAffiliationMap {
  std::string base_id;
  std::vector<std::vector<std::string>> author_affiliations;

  void validate() const {
    if (author_affiliations.empty()) throw DataIntegrityError(base_id + ": no authors in affiliation map");
    for (std::size_t a = 0; a < author_affiliations.size(); ++a) {
      const auto& set = author_affiliations[a];
      if (set.empty())
        throw DataIntegrityError(base_id + ": author " + std::to_string(a + 1) + " has no affiliation (curation gap)");
      if (std::set<std::string>(set.begin(), set.end()).size() != set.size())
        throw DataIntegrityError(base_id + ": author " + std::to_string(a + 1) + " lists an affiliation twice");
    }
  }

  std::size_t author_count() const { return author_affiliations.size(); }

  std::set<std::string> institutions() const {
    std::set<std::string> out;
    for (const auto& s : author_affiliations) out.insert(s.begin(), s.end());
    return out;
  }
};

/// Map JSONL: {"base_id": "...", "authors": [["inst", ...], ...]}.
inline std::vector<PaperAffiliationMap> parse_affiliation_maps(std::string_view text) {
  using detail::field;
  std::vector<PaperAffiliationMap> out;
  std::set<std::string> seen;
  std::size_t lineno = 0;
  for (auto line : detail::lines_of(text)) {
    ++lineno;
    auto j = detail::parse_json_line(line, lineno, "affiliation map");
    PaperAffiliationMap m{normalize_arxiv_id(field<std::string>(j, "base_id", lineno)),
                          field<std::vector<std::vector<std::string>>>(j, "authors", lineno)};
    m.validate();
    if (!seen.insert(m.base_id).second) throw DataIntegrityError("duplicate affiliation map for " + m.base_id);
    out.push_back(std::move(m));
  }
  return out;
}

/// Each author is worth 1/(author count), split equally over the author's affiliations.
inline std::map<std::string, double> fractional_scores(const PaperAffiliationMap& m) {
  m.validate();
  std::map<std::string, double> out;
  for (const auto& set : m.author_affiliations)
    for (const auto& inst : set) out[inst] += 1.0 / static_cast<double>(set.size());
  for (auto& [inst, authors] : out) authors /= static_cast<double>(m.author_count());
  return out;
}

/// Each distinct institution on the paper gets 1/(number of distinct institutions).
inline std::map<std::string, double> proportional_counts(const PaperAffiliationMap& m) {
  m.validate();
  auto insts = m.institutions();
  std::map<std::string, double> out;
  for (const auto& inst : insts) out[inst] = 1.0 / static_cast<double>(insts.size());
  return out;
}

enum class Metric { fractional, proportional };

inline Metric parse_metric(std::string_view s) {
  if (s == "fractional") return Metric::fractional;
  if (s == "proportional") return Metric::proportional;
  throw ValidationError("metric must be 'fractional' or 'proportional', got '" + std::string(s) + "'");
}

inline std::string to_string(Metric m) { return m == Metric::fractional ? "fractional" : "proportional"; }

inline std::map<std::string, double> paper_scores(const PaperAffiliationMap& m, Metric metric) {
  return metric == Metric::fractional ? fractional_scores(m) : proportional_counts(m);
}

enum class GroupBy { sector, region, country, institution };

inline GroupBy parse_group_by(std::string_view s) {
  if (s == "sector") return GroupBy::sector;
  if (s == "region") return GroupBy::region;
  if (s == "country") return GroupBy::country;
  if (s == "institution") return GroupBy::institution;
  throw ValidationError("group-by must be sector, region, country or institution, got '" + std::string(s) + "'");
}

struct AggregateRow {
  std::string group;
  double score = 0.0;
  std::size_t paper_count = 0;
  double percent = 0.0;  // of the grand total score
};

namespace detail {

inline void require_registered(const std::vector<PaperAffiliationMap>& papers, const AffiliationRegistry& reg) {
  std::set<std::string> missing;
  for (const auto& p : papers)
    for (const auto& inst : p.institutions())
      if (!reg.contains(inst)) missing.insert(inst);
  if (!missing.empty())
    throw DataIntegrityError("institutions missing from registry: " +
                             join_ids(std::vector<std::string>(missing.begin(), missing.end())));
}

inline std::string group_key(const AffiliationRecord& r, GroupBy g) {
  switch (g) {
    case GroupBy::sector: return to_string(r.sector);
    case GroupBy::region: return to_string(r.region);
    case GroupBy::country: return r.country;
    case GroupBy::institution: return r.institution_id;
  }
  return {};
}

}  // namespace detail

/// Sums the metric per group over a paper set. Sector and region tables list every member
/// of the closed set in fixed order; country and institution tables are sorted by score.
inline std::vector<AggregateRow> aggregate(const std::vector<PaperAffiliationMap>& papers, Metric metric,
                                           const AffiliationRegistry& registry, GroupBy group_by) {
  detail::require_registered(papers, registry);
  std::map<std::string, AggregateRow> rows;
  if (group_by == GroupBy::sector)
    for (auto s : kSectors) rows[to_string(s)].group = to_string(s);
  if (group_by == GroupBy::region)
    for (auto r : kRegions) rows[to_string(r)].group = to_string(r);
  double total = 0.0;
  for (const auto& p : papers) {
    std::set<std::string> touched;
    for (const auto& [inst, score] : paper_scores(p, metric)) {
      auto key = detail::group_key(registry.at(inst), group_by);
      auto& row = rows[key];
      row.group = key;
      row.score += score;
      total += score;
      touched.insert(key);
    }
    for (const auto& key : touched) ++rows[key].paper_count;
  }
  std::vector<AggregateRow> out;
  for (auto& [k, row] : rows) {
    row.percent = total > 0 ? 100.0 * row.score / total : 0.0;
    out.push_back(row);
  }
  auto rank_of = [&](const std::string& g) -> int {
    if (group_by == GroupBy::sector) return static_cast<int>(parse_sector(g));
    if (group_by == GroupBy::region) return static_cast<int>(parse_region(g));
    return 0;
  };
  std::sort(out.begin(), out.end(), [&](const AggregateRow& a, const AggregateRow& b) {
    if (group_by == GroupBy::sector || group_by == GroupBy::region) return rank_of(a.group) < rank_of(b.group);
    if (a.score != b.score) return a.score > b.score;
    return a.group < b.group;
  });
  return out;
}

/// Sector x region percentage table over academia and industry. Institutions in sector
/// "other" are left out of the table and their score reported separately.
struct SectorRegionTable {
  std::array<std::array<double, 4>, 2> percent{};  // [academia, industry][US, CN, Europe, Rest]
  std::array<double, 2> sector_total{};
  std::array<double, 4> region_total{};
  double excluded_other_score = 0.0;
  double included_score = 0.0;
};

inline SectorRegionTable sector_region_table(const std::vector<PaperAffiliationMap>& papers, Metric metric,
                                             const AffiliationRegistry& registry) {
  detail::require_registered(papers, registry);
  SectorRegionTable t;
  std::array<std::array<double, 4>, 2> raw{};
  for (const auto& p : papers) {
    for (const auto& [inst, score] : paper_scores(p, metric)) {
      const auto& r = registry.at(inst);
      if (r.sector == Sector::other) {
        t.excluded_other_score += score;
        continue;
      }
      raw[static_cast<std::size_t>(r.sector)][static_cast<std::size_t>(r.region)] += score;
      t.included_score += score;
    }
  }
  if (t.included_score == 0.0) return t;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t g = 0; g < 4; ++g) {
      t.percent[s][g] = 100.0 * raw[s][g] / t.included_score;
      t.sector_total[s] += t.percent[s][g];
      t.region_total[g] += t.percent[s][g];
    }
  return t;
}

enum class CollabClass {
  industry_independent,
  academia_independent,
  industry_with_academia,
  academia_with_academia,
  industry_with_industry,
};

inline constexpr std::array<CollabClass, 5> kCollabClasses = {
    CollabClass::industry_independent, CollabClass::academia_independent, CollabClass::industry_with_academia,
    CollabClass::academia_with_academia, CollabClass::industry_with_industry};

inline std::string to_string(CollabClass c) {
  switch (c) {
    case CollabClass::industry_independent: return "industry-independent";
    case CollabClass::academia_independent: return "academia-independent";
    case CollabClass::industry_with_academia: return "industry-with-academia";
    case CollabClass::academia_with_academia: return "academia-with-academia";
    case CollabClass::industry_with_industry: return "industry-with-industry";
  }
  return {};
}

/// nullopt when the paper involves a sector-"other" institution (kept out of the
/// two-sector tables).
inline std::optional<CollabClass> classify_collaboration(const PaperAffiliationMap& p,
                                                         const AffiliationRegistry& registry) {
  auto insts = p.institutions();
  std::set<Sector> sectors;
  for (const auto& i : insts) sectors.insert(registry.at(i).sector);
  if (sectors.count(Sector::other)) return std::nullopt;
  const bool industry = sectors.count(Sector::industry) > 0;
  const bool academia = sectors.count(Sector::academia) > 0;
  if (insts.size() == 1) return industry ? CollabClass::industry_independent : CollabClass::academia_independent;
  if (industry && academia) return CollabClass::industry_with_academia;
  return industry ? CollabClass::industry_with_industry : CollabClass::academia_with_academia;
}

struct CollaborationBreakdown {
  std::map<CollabClass, std::size_t> counts;
  std::map<std::string, CollabClass> by_paper;
  std::vector<std::string> excluded;  // papers touching sector "other"
};

inline CollaborationBreakdown collaboration_breakdown(const std::vector<PaperAffiliationMap>& papers,
                                                      const AffiliationRegistry& registry) {
  detail::require_registered(papers, registry);
  CollaborationBreakdown b;
  for (auto c : kCollabClasses) b.counts[c] = 0;
  for (const auto& p : papers) {
    p.validate();
    auto cls = classify_collaboration(p, registry);
    if (!cls) {
      b.excluded.push_back(p.base_id);
      continue;
    }
    ++b.counts[*cls];
    b.by_paper[p.base_id] = *cls;
  }
  return b;
}

struct AuthorStats {
  std::size_t papers = 0;
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Mean and population std of author counts per collaboration class; empty classes omitted.
inline std::map<CollabClass, AuthorStats> author_count_stats(const std::vector<PaperAffiliationMap>& papers,
                                                             const AffiliationRegistry& registry) {
  auto breakdown = collaboration_breakdown(papers, registry);
  std::map<CollabClass, std::vector<double>> sizes;
  for (const auto& p : papers) {
    auto it = breakdown.by_paper.find(p.base_id);
    if (it != breakdown.by_paper.end()) sizes[it->second].push_back(static_cast<double>(p.author_count()));
  }
  std::map<CollabClass, AuthorStats> out;
  for (const auto& [cls, v] : sizes) out[cls] = {v.size(), mean_of(v), std_of(v, StdConvention::population)};
  return out;
}

/// Restricts maps to the given ids, in that order; ids without a map are returned in `missing`.
inline std::vector<PaperAffiliationMap> select_papers(const std::vector<PaperAffiliationMap>& maps,
                                                      const std::vector<std::string>& ids,
                                                      std::vector<std::string>* missing = nullptr) {
  std::map<std::string, const PaperAffiliationMap*> index;
  for (const auto& m : maps) index[m.base_id] = &m;
  std::vector<PaperAffiliationMap> out;
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it != index.end())
      out.push_back(*it->second);
    else if (missing)
      missing->push_back(id);
  }
  return out;
}

}  // namespace citetrend
