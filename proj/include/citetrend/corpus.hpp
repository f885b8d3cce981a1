#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citetrend/errors.hpp"
#include "citetrend/text.hpp"
#include "citetrend/time.hpp"

namespace citetrend {

inline constexpr std::string_view kCorpusSchema = "citetrend.corpus/1";

/// Strips a trailing version suffix ("v3") from an arXiv identifier.
///
/// Accepts new-style ids ("2303.08774") and old-style archive ids ("hep-th/9901001").
/// Throws ParseError for empty input, a bare "v" suffix, "v0", or anything that is not
/// shaped like an arXiv id.
inline std::string normalize_arxiv_id(std::string_view raw) {
  static const std::regex pattern(
      R"(^(\d{4}\.\d{4,5}|[a-z]+(?:-[a-z]+)*(?:\.[A-Z]{2})?/\d{7})(v(\d*))?$)");
  std::string id(trim(raw));
  if (id.empty()) throw ParseError("empty arXiv identifier");
  std::smatch m;
  if (!std::regex_match(id, m, pattern)) throw ParseError("malformed arXiv identifier '" + id + "'");
  if (m[2].matched) {
    const std::string digits = m[3].str();
    if (digits.empty()) throw ParseError("arXiv identifier '" + id + "' has a version suffix with no digits");
    if (digits.find_first_not_of('0') == std::string::npos)
      throw ParseError("arXiv identifier '" + id + "' has version 0");
  }
  // Four-digit sequence numbers end with 1412; five digits start with 1501.
  const std::string base = m[1].str();
  if (const auto dot = base.find('.'); std::isdigit(static_cast<unsigned char>(base[0])) && dot == 4) {
    const bool five = base.size() == 10;
    if (five != (base.substr(0, 4) >= "1501"))
      throw ParseError("arXiv identifier '" + id + "' has the wrong sequence length for its month");
  }
  return base;
}

struct AuthorRef {
  std::string name;
  std::vector<std::string> affiliation_ids;

  bool operator==(const AuthorRef&) const = default;
};

struct PaperRecord {
  std::string base_id;
  std::string title;
  std::string abstract;
  std::string primary_category;
  std::vector<std::string> categories;  // listing order, no duplicates
  Timestamp first_submitted{};
  std::optional<std::string> comment;
  std::vector<AuthorRef> authors;

  Date submitted_date() const { return utc_date(first_submitted); }
  bool has_category(std::string_view c) const {
    return std::find(categories.begin(), categories.end(), c) != categories.end();
  }
  bool operator==(const PaperRecord&) const = default;
};

enum class CitationSource { semantic_scholar, google_scholar, other };

inline std::string to_string(CitationSource s) {
  switch (s) {
    case CitationSource::semantic_scholar: return "semantic_scholar";
    case CitationSource::google_scholar: return "google_scholar";
    case CitationSource::other: return "other";
  }
  return "other";
}

inline CitationSource parse_citation_source(std::string_view s) {
  if (s == "semantic_scholar") return CitationSource::semantic_scholar;
  if (s == "google_scholar") return CitationSource::google_scholar;
  if (s == "other") return CitationSource::other;
  throw ValidationError("unknown citation source '" + std::string(s) +
                        "' (expected semantic_scholar, google_scholar or other)");
}

struct CitationSnapshot {
  std::string base_id;
  std::int64_t count = 0;
  CitationSource source = CitationSource::semantic_scholar;
  Timestamp retrieved_at{};
  bool found = true;  // false when the source has no record of the paper (count is then 0)

  bool operator==(const CitationSnapshot&) const = default;
};

/// Inclusive range of UTC calendar dates.
struct DateWindow {
  Date start{};
  Date end{};

  bool contains(Date d) const { return start <= d && d <= end; }
  bool operator==(const DateWindow&) const = default;
};

struct Corpus {
  std::map<std::string, PaperRecord> records;
  DateWindow window;
  std::set<std::string> query_categories;
  Timestamp retrieval_time{};

  /// Why `r` cannot enter this corpus, or nullopt when it can.
  std::optional<std::string> rejection_reason(const PaperRecord& r) const {
    if (r.base_id.empty() || normalize_arxiv_id(r.base_id) != r.base_id)
      return "base_id '" + r.base_id + "' is not a versionless arXiv id";
    if (!r.has_category(r.primary_category))
      return "primary category '" + r.primary_category + "' not among categories of " + r.base_id;
    if (!window.contains(r.submitted_date()))
      return r.base_id + " first submitted " + format_date(r.submitted_date()) + " outside window";
    bool intersects = std::any_of(r.categories.begin(), r.categories.end(),
                                  [&](const std::string& c) { return query_categories.count(c) > 0; });
    if (!intersects) return r.base_id + " lists none of the query categories";
    return std::nullopt;
  }

  /// Adds a record; the first record seen for a base_id wins. Returns false for a duplicate.
  bool add(PaperRecord r) {
    if (auto why = rejection_reason(r)) throw DataIntegrityError(*why);
    if (records.count(r.base_id)) return false;
    auto id = r.base_id;
    records.emplace(std::move(id), std::move(r));
    return true;
  }

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  const PaperRecord* find(const std::string& id) const {
    auto it = records.find(id);
    return it == records.end() ? nullptr : &it->second;
  }

  bool operator==(const Corpus&) const = default;
};

// ---------------------------------------------------------------------------
// Persistence: one header line, then one JSON object per paper, ordered by id.

namespace detail {

inline std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

inline nlohmann::json parse_json_line(std::string_view line, std::size_t lineno, std::string_view what) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
  }
}

template <class T>
T field(const nlohmann::json& j, const char* key, std::size_t lineno) {
  if (!j.contains(key)) throw ParseError("line " + std::to_string(lineno) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("line " + std::to_string(lineno) + ": field '" + key + "': " + e.what());
  }
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    auto line = text.substr(start, pos == text.npos ? text.npos : pos - start);
    if (!trim(line).empty()) out.push_back(line);
    if (pos == text.npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const PaperRecord& r) {
  nlohmann::json authors = nlohmann::json::array();
  for (const auto& a : r.authors) authors.push_back({{"name", a.name}, {"affiliation_ids", a.affiliation_ids}});
  return {{"base_id", r.base_id},
          {"title", r.title},
          {"abstract", r.abstract},
          {"primary_category", r.primary_category},
          {"categories", r.categories},
          {"first_submitted", format_timestamp(r.first_submitted)},
          {"comment", r.comment ? nlohmann::json(*r.comment) : nlohmann::json(nullptr)},
          {"authors", authors}};
}

inline PaperRecord paper_from_json(const nlohmann::json& j, std::size_t lineno) {
  using detail::field;
  PaperRecord r;
  r.base_id = field<std::string>(j, "base_id", lineno);
  r.title = field<std::string>(j, "title", lineno);
  r.abstract = field<std::string>(j, "abstract", lineno);
  r.primary_category = field<std::string>(j, "primary_category", lineno);
  r.categories = field<std::vector<std::string>>(j, "categories", lineno);
  r.first_submitted = parse_timestamp(field<std::string>(j, "first_submitted", lineno));
  if (j.contains("comment") && !j.at("comment").is_null()) r.comment = field<std::string>(j, "comment", lineno);
  if (j.contains("authors")) {
    for (const auto& a : j.at("authors")) {
      AuthorRef ref{field<std::string>(a, "name", lineno),
                    a.contains("affiliation_ids") ? field<std::vector<std::string>>(a, "affiliation_ids", lineno)
                                                  : std::vector<std::string>{}};
      std::set<std::string> uniq(ref.affiliation_ids.begin(), ref.affiliation_ids.end());
      if (uniq.size() != ref.affiliation_ids.size())
        throw DataIntegrityError("line " + std::to_string(lineno) + ": duplicate affiliation id for author '" +
                                 ref.name + "'");
      r.authors.push_back(std::move(ref));
    }
  }
  return r;
}

inline std::string serialize_corpus(const Corpus& c) {
  nlohmann::json header = {{"schema", kCorpusSchema},
                           {"window_start", format_date(c.window.start)},
                           {"window_end", format_date(c.window.end)},
                           {"query_categories", c.query_categories},
                           {"retrieval_time", format_timestamp(c.retrieval_time)},
                           {"records", c.records.size()}};
  std::string out = detail::dump_line(header);
  for (const auto& [id, r] : c.records) out += detail::dump_line(to_json(r));
  return out;
}

inline Corpus parse_corpus(std::string_view text) {
  auto lines = detail::lines_of(text);
  if (lines.empty()) throw ParseError("corpus file is empty (missing header record)");
  auto header = detail::parse_json_line(lines[0], 1, "corpus");
  auto schema = detail::field<std::string>(header, "schema", 1);
  if (schema != kCorpusSchema)
    throw DataIntegrityError("corpus schema '" + schema + "' does not match '" + std::string(kCorpusSchema) + "'");
  Corpus c;
  c.window = {parse_date(detail::field<std::string>(header, "window_start", 1)),
              parse_date(detail::field<std::string>(header, "window_end", 1))};
  auto cats = detail::field<std::vector<std::string>>(header, "query_categories", 1);
  c.query_categories = {cats.begin(), cats.end()};
  c.retrieval_time = parse_timestamp(detail::field<std::string>(header, "retrieval_time", 1));
  auto expected = detail::field<std::size_t>(header, "records", 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto r = paper_from_json(detail::parse_json_line(lines[i], i + 1, "corpus"), i + 1);
    if (c.records.count(r.base_id))
      throw DataIntegrityError("duplicate base_id '" + r.base_id + "' on line " + std::to_string(i + 1));
    if (auto why = c.rejection_reason(r)) throw DataIntegrityError("line " + std::to_string(i + 1) + ": " + *why);
    c.records.emplace(r.base_id, std::move(r));
  }
  if (c.records.size() != expected)
    throw DataIntegrityError("corpus header declares " + std::to_string(expected) + " records, found " +
                             std::to_string(c.records.size()));
  return c;
}

inline void save_corpus(const Corpus& c, const std::string& path) { write_file(path, serialize_corpus(c)); }
inline Corpus load_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

// ---------------------------------------------------------------------------
// Manual exclusions

/// One id per line; '#' starts a comment; blank lines ignored; ids are normalized.
inline std::set<std::string> parse_exclusions(std::string_view text) {
  std::set<std::string> ids;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      ids.insert(normalize_arxiv_id(line));
    } catch (const ParseError& e) {
      throw ParseError("exclusions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ids;
}

inline std::set<std::string> load_exclusions(const std::string& path) { return parse_exclusions(read_file(path)); }

struct ExclusionResult {
  Corpus corpus;
  std::vector<std::string> missing;  // listed ids that were not in the corpus
};

inline ExclusionResult apply_exclusions(const Corpus& corpus, const std::set<std::string>& exclusions) {
  ExclusionResult out{corpus, {}};
  for (const auto& id : exclusions) {
    if (out.corpus.records.erase(id) == 0) out.missing.push_back(id);
  }
  return out;
}

}  // namespace citetrend
