#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "citetrend/corpus.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/http.hpp"
#include "citetrend/time.hpp"

namespace citetrend {

inline constexpr std::string_view kSnapshotSchema = "citetrend.snapshot/1";
inline constexpr std::string_view kDefaultCitationUrl = "https://api.semanticscholar.org/graph/v1";

/// Citation counts of one source at one retrieval instant. Immutable once persisted.
struct SnapshotSet {
  std::map<std::string, CitationSnapshot> snapshots;
  CitationSource source = CitationSource::semantic_scholar;
  Timestamp retrieved_at{};
  bool complete = true;

  const CitationSnapshot* find(const std::string& id) const {
    auto it = snapshots.find(id);
    return it == snapshots.end() ? nullptr : &it->second;
  }

  std::vector<std::string> not_found() const {
    std::vector<std::string> ids;
    for (const auto& [id, s] : snapshots)
      if (!s.found) ids.push_back(id);
    return ids;
  }

  void add(const std::string& id, std::int64_t count, bool found = true) {
    if (count < 0) throw DataIntegrityError("negative citation count for " + id);
    snapshots[id] = CitationSnapshot{id, count, source, retrieved_at, found};
  }

  bool operator==(const SnapshotSet&) const = default;
};

inline std::string serialize_snapshot(const SnapshotSet& s) {
  nlohmann::json header = {{"schema", kSnapshotSchema},
                           {"source", to_string(s.source)},
                           {"retrieved_at", format_timestamp(s.retrieved_at)},
                           {"complete", s.complete},
                           {"records", s.snapshots.size()}};
  std::string out = detail::dump_line(header);
  for (const auto& [id, snap] : s.snapshots)
    out += detail::dump_line({{"base_id", id}, {"count", snap.count}, {"found", snap.found}});
  return out;
}

inline SnapshotSet parse_snapshot(std::string_view text) {
  using detail::field;
  auto lines = detail::lines_of(text);
  if (lines.empty()) throw ParseError("snapshot file is empty (missing header record)");
  auto header = detail::parse_json_line(lines[0], 1, "snapshot");
  auto schema = field<std::string>(header, "schema", 1);
  if (schema != kSnapshotSchema)
    throw DataIntegrityError("snapshot schema '" + schema + "' does not match '" + std::string(kSnapshotSchema) + "'");
  SnapshotSet s;
  s.source = parse_citation_source(field<std::string>(header, "source", 1));
  s.retrieved_at = parse_timestamp(field<std::string>(header, "retrieved_at", 1));
  s.complete = header.value("complete", true);
  auto expected = field<std::size_t>(header, "records", 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto j = detail::parse_json_line(lines[i], i + 1, "snapshot");
    auto id = normalize_arxiv_id(field<std::string>(j, "base_id", i + 1));
    if (s.snapshots.count(id)) throw DataIntegrityError("duplicate snapshot entry for " + id);
    s.add(id, field<std::int64_t>(j, "count", i + 1), j.value("found", true));
  }
  if (s.snapshots.size() != expected)
    throw DataIntegrityError("snapshot header declares " + std::to_string(expected) + " records, found " +
                             std::to_string(s.snapshots.size()));
  return s;
}

inline SnapshotSet load_snapshot(const std::string& path) { return parse_snapshot(read_file(path)); }

inline std::string snapshot_file_name(const SnapshotSet& s) {
  std::string stamp = format_timestamp(s.retrieved_at);
  std::erase(stamp, '-');
  std::erase(stamp, ':');
  return to_string(s.source) + "_" + stamp + (s.complete ? "" : ".partial") + ".jsonl";
}

/// Writes the set into `dir` under a dated name. Existing snapshots are never overwritten.
inline std::filesystem::path persist_snapshot(const SnapshotSet& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto path = dir / snapshot_file_name(s);
  if (std::filesystem::exists(path))
    throw DataIntegrityError("snapshot " + path.string() + " already exists; snapshots are immutable");
  write_file(path.string(), serialize_snapshot(s));
  return path;
}

struct CitationQuery {
  std::string base_url{kDefaultCitationUrl};
  std::size_t batch_size = 100;
  std::optional<std::string> api_key;
};

struct CitationFetchResult {
  SnapshotSet snapshot;
  std::filesystem::path path;
};

namespace detail {

inline HttpRequest citation_batch_request(const CitationQuery& q, const std::vector<std::string>& batch) {
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& id : batch) ids.push_back("ARXIV:" + id);
  HttpRequest req;
  req.method = "POST";
  req.url = q.base_url + "/paper/batch?fields=citationCount";
  req.body = nlohmann::json{{"ids", ids}}.dump();
  req.content_type = "application/json";
  if (q.api_key) req.headers.emplace_back("x-api-key", *q.api_key);
  return req;
}

}  // namespace detail

/// Fetches citation counts in batches and persists the snapshot before returning.
///
/// Ids unknown upstream are kept with count 0 and `found == false`. On a transport failure
/// the partial snapshot is persisted and a NetworkError lists the ids still missing.
inline CitationFetchResult fetch_citations(const std::vector<std::string>& ids, CitationSource source,
                                           Fetcher& fetcher, const CitationQuery& query, Timestamp retrieved_at,
                                           const std::filesystem::path& snapshot_dir) {
  if (ids.empty()) throw ValidationError("fetch_citations needs at least one id");
  if (source != CitationSource::semantic_scholar)
    throw ValidationError("only semantic_scholar can be fetched; supply other sources as snapshot files");
  if (query.batch_size == 0) throw ValidationError("batch size must be positive");
  std::set<std::string> unique(ids.begin(), ids.end());
  std::vector<std::string> sorted(unique.begin(), unique.end());

  SnapshotSet snap;
  snap.source = source;
  snap.retrieved_at = retrieved_at;
  for (std::size_t begin = 0; begin < sorted.size(); begin += query.batch_size) {
    std::vector<std::string> batch(sorted.begin() + static_cast<std::ptrdiff_t>(begin),
                                   sorted.begin() + static_cast<std::ptrdiff_t>(std::min(sorted.size(), begin + query.batch_size)));
    std::string body;
    try {
      body = fetcher.fetch(detail::citation_batch_request(query, batch));
    } catch (const NetworkError& e) {
      snap.complete = false;
      auto path = persist_snapshot(snap, snapshot_dir);
      std::vector<std::string> missing(sorted.begin() + static_cast<std::ptrdiff_t>(begin), sorted.end());
      throw NetworkError(std::string(e.what()) + " [partial snapshot " + path.string() + "; missing " +
                         std::to_string(missing.size()) + " ids: " + join_ids(missing) + "]");
    }
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("citation response is not JSON: ") + e.what());
    }
    if (!arr.is_array() || arr.size() != batch.size())
      throw DataIntegrityError("citation response has " + std::to_string(arr.is_array() ? arr.size() : 0) +
                               " entries for a batch of " + std::to_string(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& item = arr[i];
      if (item.is_null()) {
        snap.add(batch[i], 0, false);
        continue;
      }
      std::int64_t count = 0;
      if (item.contains("citationCount") && item["citationCount"].is_number_integer())
        count = item["citationCount"].get<std::int64_t>();
      snap.add(batch[i], count, true);
    }
  }
  auto path = persist_snapshot(snap, snapshot_dir);
  return {std::move(snap), std::move(path)};
}

/// |reference - other| / reference. The reference count is the denominator.
inline double relative_discrepancy(std::int64_t reference_count, std::int64_t other_count) {
  if (reference_count < 0 || other_count < 0) throw DomainError("citation counts must be non-negative");
  if (reference_count == 0) throw DomainError("relative discrepancy is undefined for a zero reference count");
  return static_cast<double>(std::llabs(reference_count - other_count)) / static_cast<double>(reference_count);
}

}  // namespace citetrend
