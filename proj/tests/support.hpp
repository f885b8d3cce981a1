#pragma once

// Generators and brute-force oracles shared by the unit tests and the acceptance binary.
// The oracles deliberately avoid the library's numeric helpers.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "citetrend/citetrend.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using namespace citetrend;
using namespace std::chrono;

inline fs::path fixture_dir() { return fs::path(CITETREND_FIXTURES); }

/// Fresh, empty directory under the system temp dir.
inline fs::path temp_dir(const std::string& name) {
  static std::mt19937_64 rng{std::random_device{}()};
  auto dir = fs::temp_directory_path() / ("citetrend-" + name + "-" + std::to_string(rng()));
  fs::create_directories(dir);
  return dir;
}

inline Date D(int y, unsigned m, unsigned d) { return sys_days{year{y} / month{m} / day{d}}; }

inline Timestamp at_noon(Date d) { return Timestamp{d} + hours{12}; }

inline PaperRecord paper(const std::string& id, Date d, std::string primary = "cs.CL", std::string title = "t",
                         std::string abstract = "a") {
  PaperRecord r;
  r.base_id = id;
  r.title = std::move(title);
  r.abstract = std::move(abstract);
  r.primary_category = primary;
  r.categories = {primary};
  r.first_submitted = at_noon(d);
  return r;
}

inline std::string synth_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "2301.%05zu", i + 1);
  return buf;
}

struct Generated {
  Corpus corpus;
  SnapshotSet snapshot;
};

/// Random corpus over `weeks` weeks starting at a random date, with heavy-tailed counts and
/// frequent ties.
inline Generated random_corpus(std::mt19937_64& rng, std::size_t papers, int weeks) {
  Generated g;
  const Date start = D(2023, 1, 1) + days{std::uniform_int_distribution<int>(0, 300)(rng)};
  g.corpus.window = {start, start + days{7 * weeks - 1}};
  g.corpus.query_categories = {"cs.CL", "cs.LG"};
  g.snapshot.retrieved_at = at_noon(D(2023, 12, 1));
  std::uniform_int_distribution<int> day(0, 7 * weeks - 1);
  std::lognormal_distribution<double> heavy(1.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 9);
  for (std::size_t i = 0; i < papers; ++i) {
    auto r = paper(synth_id(i), start + days{day(rng)}, coin(rng) < 6 ? "cs.CL" : "cs.LG");
    g.corpus.records.emplace(r.base_id, r);
    std::int64_t c = coin(rng) < 2 ? std::uniform_int_distribution<int>(0, 3)(rng) : static_cast<std::int64_t>(heavy(rng));
    g.snapshot.add(r.base_id, c);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Z-score oracle. Week blocks are found by walking back day by day to the split weekday,
// and keyed by the block's start date rather than an index.

inline Date block_start_by_walking(Date d, weekday split) {
  while (weekday{d} != split) d -= days{1};
  return d;
}

inline std::map<std::string, double> oracle_split_z(const Corpus& c, const SnapshotSet& s, weekday split,
                                                    bool sample = false) {
  std::map<Date, std::vector<std::string>> blocks;
  for (const auto& [id, r] : c.records) blocks[block_start_by_walking(r.submitted_date(), split)].push_back(id);
  std::map<std::string, double> z;
  for (const auto& [start, ids] : blocks) {
    double sum = 0;
    for (const auto& id : ids) sum += static_cast<double>(s.find(id)->count);
    const double n = static_cast<double>(ids.size());
    const double mean = sum / n;
    double ss = 0;
    for (const auto& id : ids) ss += std::pow(static_cast<double>(s.find(id)->count) - mean, 2);
    double sd = 0;
    if (ids.size() > 1) sd = std::sqrt(ss / (sample ? n - 1 : n));
    for (const auto& id : ids) z[id] = sd == 0 ? 0.0 : (static_cast<double>(s.find(id)->count) - mean) / sd;
  }
  return z;
}

inline double oracle_stable(const std::array<double, 7>& zs) {
  double m = 0;
  for (double z : zs) m += z / 7.0;
  double v = 0;
  for (double z : zs) v += (z - m) * (z - m) / 7.0;
  return m - std::sqrt(v);
}

inline std::map<std::string, std::array<double, 7>> oracle_all_splits(const Corpus& c, const SnapshotSet& s) {
  const std::array<weekday, 7> order = {Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday};
  std::map<std::string, std::array<double, 7>> out;
  for (std::size_t k = 0; k < 7; ++k)
    for (const auto& [id, z] : oracle_split_z(c, s, order[k])) out[id][k] = z;
  return out;
}

/// Brute-force ranking: every pair compared through an explicit tuple ordering.
inline std::vector<std::string> oracle_ranking(const Corpus& c, const SnapshotSet& s, std::size_t n) {
  struct Row {
    double score;
    std::int64_t count;
    std::string id;
  };
  std::vector<Row> rows;
  for (const auto& [id, zs] : oracle_all_splits(c, s)) rows.push_back({oracle_stable(zs), s.find(id)->count, id});
  // Selection sort: O(n^2) but independent of std::sort's comparator contract.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const auto& a = rows[j];
      const auto& b = rows[best];
      if (std::tie(b.score, b.count, a.id) < std::tie(a.score, a.count, b.id)) best = j;
    }
    std::swap(rows[i], rows[best]);
  }
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(n, rows.size()); ++i) ids.push_back(rows[i].id);
  return ids;
}

// ---------------------------------------------------------------------------
// Rank-correlation oracles by pairwise enumeration.

inline int sgn(double x) { return (x > 0) - (x < 0); }

inline double oracle_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
  double concordant_minus_discordant = 0, ties_a = 0, ties_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const int sa = sgn(a[i] - a[j]);
      const int sb = sgn(b[i] - b[j]);
      concordant_minus_discordant += sa * sb;
      ties_a += sa == 0;
      ties_b += sb == 0;
      pairs += 1;
    }
  return concordant_minus_discordant / std::sqrt((pairs - ties_a) * (pairs - ties_b));
}

/// Average rank by counting: rank = 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> oracle_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : x) {
      less += y < x[i];
      equal += y == x[i];
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double oracle_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ra = oracle_ranks(a);
  auto rb = oracle_ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Random score vector with a controllable share of ties.
inline std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, int distinct) {
  std::uniform_int_distribution<int> pick(0, distinct - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = pick(rng) * 0.37 - 3.0;
  return v;
}

// ---------------------------------------------------------------------------
// Savitzky-Golay oracle: normal equations (V^T V) c = V^T y per window, solved by Gaussian
// elimination with partial pivoting, polynomial evaluated at the target position.

inline std::vector<double> solve_gauss(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<double> oracle_savgol(const std::vector<double>& y, int window, int order) {
  const long n = static_cast<long>(y.size());
  std::vector<double> out(y.size());
  for (long i = 0; i < n; ++i) {
    long start = i - window / 2;
    if (start < 0) start = 0;
    if (start > n - window) start = n - window;
    const std::size_t m = static_cast<std::size_t>(order) + 1;
    std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
    std::vector<double> aty(m, 0.0);
    for (long j = start; j < start + window; ++j) {
      const double t = static_cast<double>(j - i);
      for (std::size_t p = 0; p < m; ++p) {
        aty[p] += std::pow(t, static_cast<double>(p)) * y[static_cast<std::size_t>(j)];
        for (std::size_t q = 0; q < m; ++q) ata[p][q] += std::pow(t, static_cast<double>(p + q));
      }
    }
    out[static_cast<std::size_t>(i)] = solve_gauss(ata, aty)[0];  // polynomial in (x - i) evaluated at 0
  }
  return out;
}

// ---------------------------------------------------------------------------
// Affiliation fixtures.

inline AffiliationRegistry registry_of(const std::vector<AffiliationRecord>& rows) {
  AffiliationRegistry r;
  for (const auto& row : rows) r.records[row.institution_id] = row;
  return r;
}

inline PaperAffiliationMap amap(std::string id, std::vector<std::vector<std::string>> authors) {
  return {std::move(id), std::move(authors)};
}

}  // namespace testsupport
