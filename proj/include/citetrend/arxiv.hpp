#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/detail/rapidxml.hpp>

#include "citetrend/corpus.hpp"
#include "citetrend/errors.hpp"
#include "citetrend/http.hpp"
#include "citetrend/text.hpp"
#include "citetrend/time.hpp"

namespace citetrend {

inline constexpr std::string_view kDefaultArxivUrl = "http://export.arxiv.org/api/query";

struct QuerySpec {
  std::set<std::string> categories;
  DateWindow window;
  int page_size = 200;
  int max_retries = 5;

  void validate() const {
    if (categories.empty()) throw ValidationError("query needs at least one category");
    if (window.start > window.end) throw ValidationError("query window start is after its end");
    if (page_size < 1 || page_size > 2000) throw ValidationError("page size must be in [1, 2000]");
    if (max_retries < 0) throw ValidationError("max retries must be non-negative");
  }
};

/// Disjunction over exact category codes plus a submission-date range clause.
inline std::string build_query(const QuerySpec& spec) {
  spec.validate();
  std::string cats;
  for (const auto& c : spec.categories) {
    if (!cats.empty()) cats += " OR ";
    cats += "cat:" + c;
  }
  auto stamp = [](Date d) {
    auto s = format_date(d);
    s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
    return s;
  };
  return "(" + cats + ") AND submittedDate:[" + stamp(spec.window.start) + "0000 TO " + stamp(spec.window.end) +
         "2359]";
}

inline std::string build_page_url(std::string_view base_url, const QuerySpec& spec, std::int64_t start) {
  return std::string(base_url) + "?search_query=" + url_encode(build_query(spec)) + "&start=" + std::to_string(start) +
         "&max_results=" + std::to_string(spec.page_size) + "&sortBy=submittedDate&sortOrder=ascending";
}

struct FeedPage {
  std::vector<PaperRecord> records;
  std::vector<std::string> entry_errors;  // one per entry that lacked required fields
  std::int64_t total_results = 0;
  std::int64_t start_index = 0;
  std::size_t entry_count = 0;  // entries seen, including failed ones

  /// Offset of the next page, or nullopt once the result set is exhausted.
  std::optional<std::int64_t> next_start() const {
    auto next = start_index + static_cast<std::int64_t>(entry_count);
    if (entry_count == 0 || next >= total_results) return std::nullopt;
    return next;
  }
};

namespace detail {

using XmlNode = boost::property_tree::detail::rapidxml::xml_node<char>;

inline std::string_view local_name(const XmlNode* n) {
  std::string_view name(n->name(), n->name_size());
  auto colon = name.find(':');
  return colon == name.npos ? name : name.substr(colon + 1);
}

inline const XmlNode* child(const XmlNode* parent, std::string_view name) {
  for (auto* c = parent->first_node(); c; c = c->next_sibling())
    if (c->type() == boost::property_tree::detail::rapidxml::node_element && local_name(c) == name) return c;
  return nullptr;
}

inline std::string text_of(const XmlNode* n) {
  std::string out;
  for (auto* c = n->first_node(); c; c = c->next_sibling()) {
    auto t = c->type();
    if (t == boost::property_tree::detail::rapidxml::node_data || t == boost::property_tree::detail::rapidxml::node_cdata)
      out.append(c->value(), c->value_size());
  }
  return out;
}

inline std::string attr(const XmlNode* n, const char* name) {
  auto* a = n->first_attribute(name);
  return a ? std::string(a->value(), a->value_size()) : std::string{};
}

inline std::string id_from_entry_url(std::string_view url) {
  auto pos = url.find("/abs/");
  return std::string(pos == url.npos ? url : url.substr(pos + 5));
}

inline PaperRecord parse_entry(const XmlNode* entry) {
  auto required = [&](std::string_view name) {
    auto* n = child(entry, name);
    if (!n) throw ParseError("missing <" + std::string(name) + ">");
    return n;
  };
  PaperRecord r;
  r.base_id = normalize_arxiv_id(id_from_entry_url(trim(text_of(required("id")))));
  r.title = collapse_whitespace(text_of(required("title")));
  r.abstract = collapse_whitespace(text_of(required("summary")));
  r.first_submitted = parse_timestamp(trim(text_of(required("published"))));
  if (auto* pc = child(entry, "primary_category")) r.primary_category = attr(pc, "term");
  for (auto* c = entry->first_node(); c; c = c->next_sibling()) {
    if (c->type() != boost::property_tree::detail::rapidxml::node_element) continue;
    auto name = local_name(c);
    if (name == "category") {
      auto term = attr(c, "term");
      if (!term.empty() && !r.has_category(term)) r.categories.push_back(term);
    } else if (name == "author") {
      AuthorRef a;
      if (auto* nm = child(c, "name")) a.name = collapse_whitespace(text_of(nm));
      r.authors.push_back(std::move(a));
    } else if (name == "comment") {
      auto text = collapse_whitespace(text_of(c));
      if (!text.empty()) r.comment = text;
    }
  }
  if (r.primary_category.empty()) {
    if (r.categories.empty()) throw ParseError("entry has no categories");
    r.primary_category = r.categories.front();
  }
  if (!r.has_category(r.primary_category)) r.categories.insert(r.categories.begin(), r.primary_category);
  return r;
}

}  // namespace detail

/// Parses one Atom page of the arXiv query API.
///
/// Malformed XML aborts with the byte offset of the failure. Entries missing required
/// fields are reported in `entry_errors` and skipped; parsing continues.
inline FeedPage parse_feed(std::string_view feed_bytes) {
  namespace rx = boost::property_tree::detail::rapidxml;
  std::vector<char> buffer(feed_bytes.begin(), feed_bytes.end());
  buffer.push_back('\0');
  rx::xml_document<char> doc;
  try {
    doc.parse<rx::parse_validate_closing_tags>(buffer.data());
  } catch (const rx::parse_error& e) {
    auto offset = e.where<char>() - buffer.data();
    throw ParseError("malformed XML at byte offset " + std::to_string(offset) + ": " + e.what());
  }
  auto* feed = doc.first_node();
  while (feed && (feed->type() != rx::node_element || detail::local_name(feed) != "feed")) feed = feed->next_sibling();
  if (!feed) throw ParseError("document has no <feed> root element");

  FeedPage page;
  auto int_child = [&](std::string_view name, std::int64_t fallback) -> std::int64_t {
    auto* n = detail::child(feed, name);
    if (!n) return fallback;
    try {
      return std::stoll(std::string(trim(detail::text_of(n))));
    } catch (const std::exception&) {
      throw ParseError("non-numeric <" + std::string(name) + ">");
    }
  };
  std::size_t index = 0;
  for (auto* e = feed->first_node(); e; e = e->next_sibling()) {
    if (e->type() != rx::node_element || detail::local_name(e) != "entry") continue;
    ++index;
    try {
      page.records.push_back(detail::parse_entry(e));
    } catch (const ParseError& err) {
      page.entry_errors.push_back("entry " + std::to_string(index) + ": " + err.what());
    }
  }
  page.entry_count = index;
  page.start_index = int_child("startIndex", 0);
  page.total_results = int_child("totalResults", page.start_index + static_cast<std::int64_t>(index));
  return page;
}

struct FetchReport {
  Corpus corpus;
  std::size_t pages = 0;
  std::size_t entries_seen = 0;
  std::size_t duplicates = 0;
  std::size_t filtered_out = 0;
  std::vector<std::string> entry_errors;
};

/// Pages through the query API until exhaustion and builds a corpus.
///
/// Records are filtered client-side to version-1 submission dates inside the window and
/// to exact category matches; the first record seen for a base_id wins.
inline FetchReport fetch_corpus(const QuerySpec& spec, Fetcher& fetcher, std::string_view base_url,
                                Timestamp retrieval_time) {
  spec.validate();
  FetchReport report;
  report.corpus.window = spec.window;
  report.corpus.query_categories = spec.categories;
  report.corpus.retrieval_time = retrieval_time;
  std::optional<std::int64_t> start = 0;
  while (start) {
    std::string body;
    HttpRequest req;
    req.url = build_page_url(base_url, spec, *start);
    try {
      body = fetcher.fetch(req);
    } catch (const NetworkError& e) {
      throw NetworkError(std::string(e.what()) + " [partial progress: " + std::to_string(report.pages) +
                         " pages, " + std::to_string(report.corpus.size()) + " records before offset " +
                         std::to_string(*start) + "]");
    }
    FeedPage page = parse_feed(body);
    ++report.pages;
    report.entries_seen += page.entry_count;
    for (auto& e : page.entry_errors) report.entry_errors.push_back("offset " + std::to_string(*start) + " " + e);
    for (auto& r : page.records) {
      if (report.corpus.rejection_reason(r)) {
        ++report.filtered_out;
        continue;
      }
      if (!report.corpus.add(std::move(r))) ++report.duplicates;
    }
    auto next = *start + static_cast<std::int64_t>(page.entry_count);
    start = (page.entry_count == 0 || next >= page.total_results) ? std::nullopt : std::optional{next};
  }
  return report;
}

}  // namespace citetrend
