#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citetrend/corpus.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/savitzky_golay.hpp"
#include "citetrend/text.hpp"
#include "citetrend/zscore.hpp"

namespace citetrend {

struct TopicRule {
  std::string name;
  std::vector<std::string> patterns;  // lowercase substrings

  void validate() const {
    if (name.empty()) throw ValidationError("topic rule without a name");
    if (patterns.empty()) throw ValidationError("topic '" + name + "' has no patterns");
    for (const auto& p : patterns) {
      if (p.empty()) throw ValidationError("topic '" + name + "' has an empty pattern");
      if (p != to_lower(p)) throw ValidationError("topic '" + name + "' pattern '" + p + "' is not lowercase");
    }
  }
};

/// The five keyword topics tracked by default.
inline std::vector<TopicRule> builtin_topics() {
  return {
      {"LLM", {"llm", "llms", "large language model", "large language models"}},
      {"ChatGPT", {"chatgpt", "chat-gpt"}},
      {"GPT", {"gpt"}},
      {"LLaMA", {"llama"}},
      {"Multimodality",
       {"multimodal", "multimodality", "multi-modal", "multi-modality", "text-to-image", "visual-language",
        "captioning", "image-to-text"}},
  };
}

/// Rules file: {"topics": [{"name": "...", "patterns": ["...", ...]}, ...]}
inline std::vector<TopicRule> parse_topic_rules(std::string_view text) {
  std::vector<TopicRule> rules;
  try {
    auto j = nlohmann::json::parse(text);
    for (const auto& t : j.at("topics"))
      rules.push_back({t.at("name").get<std::string>(), t.at("patterns").get<std::vector<std::string>>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("topic rules: ") + e.what());
  }
  for (const auto& r : rules) r.validate();
  return rules;
}

/// Comma-separated built-in names ("LLM,GPT") or a path to a rules file.
inline std::vector<TopicRule> resolve_topics(const std::string& spec) {
  if (spec.empty() || spec == "builtin" || spec == "all") return builtin_topics();
  auto builtins = builtin_topics();
  std::vector<TopicRule> out;
  for (const auto& name : split(spec, ',')) {
    auto it = std::find_if(builtins.begin(), builtins.end(),
                           [&](const TopicRule& r) { return to_lower(r.name) == to_lower(name); });
    if (it == builtins.end()) return parse_topic_rules(read_file(spec));
    out.push_back(*it);
  }
  return out;
}

/// Substring match on lowercased title or abstract.
inline bool matches_topic(const PaperRecord& record, const TopicRule& rule) {
  const auto title = to_lower(record.title);
  const auto abstract = to_lower(record.abstract);
  return std::any_of(rule.patterns.begin(), rule.patterns.end(), [&](const std::string& p) {
    return title.find(p) != std::string::npos || abstract.find(p) != std::string::npos;
  });
}

/// One weekly curve. Weeks without papers carry no value (nullopt), never 0.
struct TrendSeries {
  std::string topic;
  std::vector<Date> week_starts;
  std::vector<std::optional<double>> raw_percent;
  std::vector<std::optional<double>> smoothed_percent;
};

/// Share of papers per week (under `split`) matching the rule, over the corpus window.
inline TrendSeries weekly_topic_share(const Corpus& corpus, const TopicRule& rule, const SplitSpec& split) {
  if (corpus.empty()) throw ValidationError("weekly topic share needs a non-empty corpus");
  const auto first = assign_week(corpus.window.start, split);
  const auto last = assign_week(corpus.window.end, split);
  std::map<std::int64_t, std::pair<std::size_t, std::size_t>> counts;  // week -> (matching, total)
  for (const auto& [id, r] : corpus.records) {
    auto& c = counts[assign_week(r.submitted_date(), split)];
    ++c.second;
    if (matches_topic(r, rule)) ++c.first;
  }
  TrendSeries s;
  s.topic = rule.name;
  for (auto w = std::min(first, counts.begin()->first); w <= std::max(last, counts.rbegin()->first); ++w) {
    s.week_starts.push_back(week_range(w, split).start);
    auto it = counts.find(w);
    if (it == counts.end() || it->second.second == 0) {
      s.raw_percent.push_back(std::nullopt);
    } else {
      s.raw_percent.push_back(100.0 * static_cast<double>(it->second.first) / static_cast<double>(it->second.second));
    }
  }
  s.smoothed_percent.assign(s.raw_percent.size(), std::nullopt);
  return s;
}

/// Smooths each gap-free run of the raw curve. Runs shorter than the window stay unsmoothed
/// (nullopt), since a full-window fit is impossible there.
inline void smooth_trend(TrendSeries& s, const SavitzkyGolayFilter& filter) {
  s.smoothed_percent.assign(s.raw_percent.size(), std::nullopt);
  std::size_t i = 0;
  while (i < s.raw_percent.size()) {
    if (!s.raw_percent[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::vector<double> run;
    while (j < s.raw_percent.size() && s.raw_percent[j]) run.push_back(*s.raw_percent[j++]);
    if (run.size() >= static_cast<std::size_t>(filter.window())) {
      auto smoothed = filter.apply(run);
      for (std::size_t k = 0; k < smoothed.size(); ++k) s.smoothed_percent[i + k] = smoothed[k];
    }
    i = j;
  }
}

/// Percentage of the listed papers that match each topic.
inline std::map<std::string, double> topic_share_of_list(const std::vector<std::string>& ranked_ids,
                                                         const Corpus& corpus, const std::vector<TopicRule>& rules) {
  std::vector<std::string> missing;
  for (const auto& id : ranked_ids)
    if (!corpus.find(id)) missing.push_back(id);
  if (!missing.empty()) throw DataIntegrityError("ranked ids not in corpus: " + join_ids(missing));
  std::map<std::string, double> out;
  for (const auto& rule : rules) {
    std::size_t hits = 0;
    for (const auto& id : ranked_ids)
      if (matches_topic(*corpus.find(id), rule)) ++hits;
    out[rule.name] = ranked_ids.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(ranked_ids.size());
  }
  return out;
}

}  // namespace citetrend
