#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include <httplib.h>

#include "citetrend/errors.hpp"
#include "citetrend/text.hpp"

namespace citetrend {

struct HttpRequest {
  std::string method = "GET";
  std::string url;
  std::string body;
  std::string content_type;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
  int status = 0;  // 0 means the transport failed before a status arrived
  std::string body;
  std::string error;  // transport failure description
  std::optional<int> retry_after_seconds;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// Percent-encodes everything outside the RFC 3986 unreserved set.
inline std::string url_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

/// Splits "scheme://host[:port]/path?query" into origin and path-with-query.
inline std::pair<std::string, std::string> split_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == url.npos) throw ValidationError("URL without scheme: '" + std::string(url) + "'");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == url.npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

/// cpp-httplib backed transport. One connection per request; redirects followed.
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds{60}) : timeout_(timeout) {}

  HttpResponse send(const HttpRequest& request) override {
    auto [origin, target] = split_url(request.url);
    HttpResponse out;
    try {
      httplib::Client client(origin);
      client.set_follow_location(true);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_).count(), 0);
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_).count(), 0);
      httplib::Headers headers{{"User-Agent", "citetrend/1.0"}};
      for (const auto& [k, v] : request.headers) headers.emplace(k, v);
      httplib::Result res = request.method == "POST"
                                ? client.Post(target, headers, request.body, request.content_type)
                                : client.Get(target, headers);
      if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
      }
      out.status = res->status;
      out.body = res->body;
      if (res->has_header("Retry-After")) {
        try {
          out.retry_after_seconds = std::stoi(res->get_header_value("Retry-After"));
        } catch (const std::exception&) {
        }
      }
    } catch (const std::exception& e) {
      out.status = 0;
      out.error = e.what();
    }
    return out;
  }

 private:
  std::chrono::seconds timeout_;
};

/// Client etiquette: pacing between requests plus exponential backoff on failures.
struct RequestPolicy {
  std::chrono::milliseconds min_interval{3000};
  int max_retries = 5;
  std::chrono::milliseconds initial_backoff{1000};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_backoff{60000};
  int max_rate_limit_waits = 10;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    if (d.count() > 0) std::this_thread::sleep_for(d);
  };
};

struct CacheOptions {
  std::optional<std::filesystem::path> dir;
  bool replay_only = false;  // serve exclusively from `dir`, never touch the network
};

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

/// Stable cache key: one file per distinct request.
inline std::string cache_key(const HttpRequest& r) { return sha256_hex(r.method + " " + r.url + "\n" + r.body); }

/// Sequential request loop with pacing, retries and a raw-bytes cache.
///
/// Every successful body is written to the cache directory before it is returned, so a
/// later run with `replay_only` reproduces the same bytes offline.
class Fetcher {
 public:
  Fetcher(std::shared_ptr<HttpTransport> transport, RequestPolicy policy, CacheOptions cache = {})
      : transport_(std::move(transport)), policy_(std::move(policy)), cache_(std::move(cache)) {
    if (cache_.replay_only && !cache_.dir) throw ValidationError("replay mode needs a cache directory");
    if (cache_.dir && !cache_.replay_only) std::filesystem::create_directories(*cache_.dir);
  }

  std::string fetch(const HttpRequest& request) {
    if (cache_.replay_only) return replay(request);
    int failures = 0;
    int rate_limited = 0;
    auto backoff = policy_.initial_backoff;
    std::string last_error;
    while (true) {
      pace();
      HttpResponse res = transport_->send(request);
      ++requests_sent_;
      last_sent_ = std::chrono::steady_clock::now();
      if (res.status >= 200 && res.status < 300) {
        store(request, res.body);
        return res.body;
      }
      if (res.status == 429) {
        if (++rate_limited > policy_.max_rate_limit_waits)
          throw NetworkError("rate limited " + std::to_string(rate_limited - 1) + " times: " + request.url);
        auto wait = res.retry_after_seconds ? std::chrono::milliseconds{*res.retry_after_seconds * 1000} : backoff;
        policy_.sleep(wait);
        backoff = next_backoff(backoff);
        continue;
      }
      if (res.status >= 400 && res.status < 500) {
        throw NetworkError("HTTP " + std::to_string(res.status) + " from " + request.url + ": " +
                           std::string(trim(res.body.substr(0, 500))));
      }
      last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
      if (failures >= policy_.max_retries)
        throw NetworkError("giving up on " + request.url + " after " + std::to_string(failures + 1) +
                           " attempts: " + last_error);
      ++failures;
      policy_.sleep(backoff);
      backoff = next_backoff(backoff);
    }
  }

  std::size_t requests_sent() const { return requests_sent_; }

 private:
  std::chrono::milliseconds next_backoff(std::chrono::milliseconds b) const {
    auto next = std::chrono::milliseconds{static_cast<long long>(static_cast<double>(b.count()) * policy_.backoff_factor)};
    return std::min(next, policy_.max_backoff);
  }

  void pace() {
    if (!last_sent_) return;
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - *last_sent_);
    if (elapsed < policy_.min_interval) policy_.sleep(policy_.min_interval - elapsed);
  }

  std::filesystem::path path_for(const HttpRequest& r) const { return *cache_.dir / (cache_key(r) + ".body"); }

  void store(const HttpRequest& r, const std::string& body) const {
    if (!cache_.dir) return;
    auto path = path_for(r);
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp.string(), body);
    std::filesystem::rename(tmp, path);
    auto req_path = path;
    req_path.replace_extension(".request");
    write_file(req_path.string(), r.method + " " + r.url + "\n" + r.body + (r.body.empty() ? "" : "\n"));
  }

  std::string replay(const HttpRequest& r) const {
    auto path = path_for(r);
    if (!std::filesystem::exists(path))
      throw NetworkError("request not present in replay cache " + cache_.dir->string() + ": " + r.method + " " +
                         r.url);
    return read_file(path.string());
  }

  std::shared_ptr<HttpTransport> transport_;
  RequestPolicy policy_;
  CacheOptions cache_;
  std::size_t requests_sent_ = 0;
  std::optional<std::chrono::steady_clock::time_point> last_sent_;
};

}  // namespace citetrend
