#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citetrend/errors.hpp"
#include "citetrend/text.hpp"
#include "citetrend/time.hpp"

namespace citetrend {

struct SettingKey {
  std::string_view key;  // config-file key; the flag is --key with '_' -> '-'
  std::string_view default_value;
  std::string_view help;
};

// Every setting is reachable both from the config file and as a flag.
inline const std::vector<SettingKey>& setting_keys() {
  static const std::vector<SettingKey> keys = {
      {"categories", "cs.AI,cs.CL,cs.CV,cs.LG", "query categories, comma-separated"},
      {"from", "2023-01-01", "window start (UTC date, inclusive)"},
      {"to", "2023-09-30", "window end (UTC date, inclusive)"},
      {"page_size", "200", "entries per arXiv API page, 1..2000"},
      {"max_retries", "5", "retries on transport errors"},
      {"request_interval_ms", "3000", "minimum spacing of arXiv requests"},
      {"citation_interval_ms", "1000", "minimum spacing of citation API requests"},
      {"arxiv_url", "http://export.arxiv.org/api/query", "arXiv query endpoint"},
      {"citation_url", "https://api.semanticscholar.org/graph/v1", "citation API base URL"},
      {"source", "semantic_scholar", "citation source label"},
      {"batch_size", "100", "ids per citation request"},
      {"cache_dir", "cache", "raw response cache directory"},
      {"replay_dir", "", "serve network requests only from this cache directory"},
      {"snapshot_dir", "snapshots", "citation snapshot directory"},
      {"output_dir", "out", "output directory"},
      {"corpus", "", "corpus file (default: <output_dir>/corpus.jsonl)"},
      {"snapshot", "", "snapshot file (default: newest complete one in <snapshot_dir>)"},
      {"exclusions", "", "manual exclusion list"},
      {"previous", "", "previous ranking CSV for rank deltas"},
      {"top_n", "40", "ranking length"},
      {"std_convention", "population", "population or sample"},
      {"split_day", "", "rank by a single week split starting on this weekday"},
      {"topics", "builtin", "built-in topic names (comma-separated) or a rules file"},
      {"trend_window", "8", "Savitzky-Golay window length"},
      {"trend_order", "3", "Savitzky-Golay polynomial order"},
      {"trend_split_day", "sun", "week split for trend series and weekly statistics"},
      {"affiliations", "", "per-paper affiliation map (JSONL)"},
      {"registry", "", "institution registry (JSONL)"},
      {"region_map", "", "country,region CSV (default: built-in map)"},
      {"metric", "proportional", "fractional or proportional"},
      {"group_by", "sector-region", "sector-region, sector, region, country or institution"},
      {"ranking", "", "ranking CSV restricting the institution analysis"},
      {"timestamp", "", "pinned UTC timestamp for retrieval/report times"},
      {"report_categories", "cs.CL,cs.LG,cs.CV,cs.AI,stat.ML", "primary categories in weekly statistics"},
      {"grid", "", "prefix sizes for correlation sweeps (default 10,20,...,N)"},
      {"single", "", "single-split ranking CSV (correlate)"},
      {"stable", "", "stable ranking CSV (correlate)"},
      {"reference", "", "reference snapshot (discrepancy)"},
      {"other", "", "other snapshot (discrepancy)"},
      {"out", "", "output file for single-file subcommands"},
      {"comment_keyword", "", "keyword searched in author comments (report)"},
      {"comment_week", "", "start date of the week searched for the comment keyword"},
  };
  return keys;
}

/// String-valued settings merged from defaults, a config file, then flags.
class Settings {
 public:
  Settings() {
    for (const auto& k : setting_keys()) values_[std::string(k.key)] = std::string(k.default_value);
  }

  /// Config file: a JSON object whose keys are setting keys. Arrays become comma lists.
  void merge_config(std::string_view json_text) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (!values_.count(key)) throw ValidationError("unknown config key '" + key + "'");
      set(key, scalar(key, value));
    }
  }

  void set(const std::string& key, std::string value) {
    if (!values_.count(key)) throw ValidationError("unknown setting '" + key + "'");
    values_[key] = std::move(value);
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }

  std::optional<std::string> opt(const std::string& key) const {
    const auto& v = values_.at(key);
    return v.empty() ? std::nullopt : std::optional<std::string>{v};
  }

  long integer(const std::string& key) const {
    const auto& v = values_.at(key);
    try {
      std::size_t used = 0;
      long out = std::stol(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ValidationError("setting '" + key + "' must be an integer, got '" + v + "'");
    }
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& s : split(values_.at(key), ','))
      if (!s.empty()) out.push_back(s);
    return out;
  }

  Date date(const std::string& key) const {
    try {
      return parse_date(values_.at(key));
    } catch (const ParseError& e) {
      throw ValidationError("setting '" + key + "': " + e.what());
    }
  }

 private:
  static std::string scalar(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_null()) return {};
    if (v.is_array()) {
      std::string out;
      for (const auto& x : v) {
        if (!out.empty()) out += ',';
        out += scalar(key, x);
      }
      return out;
    }
    throw ValidationError("config key '" + key + "' has an unsupported value type");
  }

  std::map<std::string, std::string> values_;
};

}  // namespace citetrend
