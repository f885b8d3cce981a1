#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace citetrend;
using namespace testsupport;
using namespace std::chrono;

namespace {

TopicRule topic(const std::string& name) {
  for (auto& r : builtin_topics())
    if (r.name == name) return r;
  throw std::runtime_error("no topic " + name);
}

std::vector<double> poly_samples(int n, double a0, double a1, double a2, double a3, double x0 = 0) {
  std::vector<double> y;
  for (int i = 0; i < n; ++i) {
    const double x = x0 + i;
    y.push_back(a0 + a1 * x + a2 * x * x + a3 * x * x * x);
  }
  return y;
}

}  // namespace

TEST(TopicRules, BuiltinShapes) {
  EXPECT_EQ(topic("GPT").patterns, std::vector<std::string>{"gpt"});
  EXPECT_EQ(topic("ChatGPT").patterns.size(), 2u);
  for (const auto& r : builtin_topics()) {
    r.validate();
    for (const auto& p : r.patterns) EXPECT_EQ(p, to_lower(p));
  }
  for (const auto& p : topic("ChatGPT").patterns) EXPECT_NE(p.find("gpt"), std::string::npos);
}

TEST(TopicRules, ParseAndResolve) {
  auto rules = parse_topic_rules(R"({"topics":[{"name":"RAG","patterns":["retrieval-augmented","rag"]}]})");
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].name, "RAG");
  EXPECT_THROW(parse_topic_rules(R"({"topics":[{"name":"X","patterns":["Upper"]}]})"), ValidationError);
  EXPECT_THROW(parse_topic_rules("{}"), ParseError);
  EXPECT_EQ(resolve_topics("gpt,LLaMA").size(), 2u);
  EXPECT_EQ(resolve_topics("builtin").size(), 5u);
}

TEST(MatchesTopic, Examples) {
  auto chat = paper("2301.00001", D(2023, 1, 2), "cs.CL", "ChatGPT is not all you need. A State of the Art Review");
  EXPECT_TRUE(matches_topic(chat, topic("ChatGPT")));
  EXPECT_TRUE(matches_topic(chat, topic("GPT")));
  auto empty = paper("2301.00002", D(2023, 1, 2), "cs.CL", "", "");
  for (const auto& r : builtin_topics()) EXPECT_FALSE(matches_topic(empty, r));
  auto llama = paper("2302.13971", D(2023, 2, 27), "cs.CL", "LLaMA: Open and Efficient Foundation Language Models", "");
  EXPECT_TRUE(matches_topic(llama, topic("LLaMA")));
  EXPECT_FALSE(matches_topic(llama, topic("ChatGPT")));
  auto abstract_only = paper("2301.00003", D(2023, 1, 2), "cs.CL", "Untitled", "We evaluate Large Language Models.");
  EXPECT_TRUE(matches_topic(abstract_only, topic("LLM")));
}

TEST(MatchesTopic, CaseInsensitive) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> words = {"chatgpt", "gpt-4", "llama", "multimodal", "llm", "vision", "graph"};
  for (int i = 0; i < 500; ++i) {
    std::string title;
    for (int k = 0; k < 4; ++k) title += words[rng() % words.size()] + " ";
    auto upper = title;
    for (auto& c : upper)
      if (rng() % 2) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    auto a = paper("2301.00001", D(2023, 1, 2), "cs.CL", title, "");
    auto b = paper("2301.00001", D(2023, 1, 2), "cs.CL", upper, "");
    for (const auto& r : builtin_topics()) EXPECT_EQ(matches_topic(a, r), matches_topic(b, r));
  }
}

TEST(WeeklyTopicShare, CountingOracle) {
  Corpus c;
  c.window = {D(2023, 1, 1), D(2023, 1, 21)};  // three Sunday weeks
  c.query_categories = {"cs.CL"};
  std::size_t next = 0;
  for (int week = 0; week < 3; ++week)
    for (int k = 0; k < 4; ++k)
      c.add(paper(synth_id(next++), D(2023, 1, 1) + days{7 * week + k}, "cs.CL", k <= week ? "a GPT paper" : "other"));
  auto s = weekly_topic_share(c, topic("GPT"), {Sunday, c.window.start});
  ASSERT_EQ(s.raw_percent.size(), 3u);
  EXPECT_EQ(*s.raw_percent[0], 25.0);
  EXPECT_EQ(*s.raw_percent[1], 50.0);
  EXPECT_EQ(*s.raw_percent[2], 75.0);
  auto none = weekly_topic_share(c, topic("LLaMA"), {Sunday, c.window.start});
  for (auto v : none.raw_percent) EXPECT_EQ(*v, 0.0);
  TopicRule everything{"all", {"a", "o"}};
  for (auto v : weekly_topic_share(c, everything, {Sunday, c.window.start}).raw_percent) EXPECT_EQ(*v, 100.0);
}

TEST(WeeklyTopicShare, GapsAreMarkedNotZero) {
  Corpus c;
  c.window = {D(2023, 1, 1), D(2023, 1, 28)};
  c.query_categories = {"cs.CL"};
  c.add(paper("2301.00001", D(2023, 1, 2), "cs.CL", "gpt"));
  c.add(paper("2301.00002", D(2023, 1, 23), "cs.CL", "no"));
  auto s = weekly_topic_share(c, topic("GPT"), {Sunday, c.window.start});
  ASSERT_EQ(s.raw_percent.size(), 4u);
  EXPECT_FALSE(s.raw_percent[1].has_value());
  EXPECT_FALSE(s.raw_percent[2].has_value());
  EXPECT_EQ(*s.raw_percent[3], 0.0);
}

TEST(SavitzkyGolay, ConstantAndCubicAreFixedPoints) {
  std::vector<double> flat(20, 3.5);
  for (int w = 1; w <= 12; ++w)
    for (int o = 0; o < std::min(w, 5); ++o) {
      auto out = savitzky_golay(flat, w, o);
      for (double v : out) EXPECT_NEAR(v, 3.5, 1e-12);
    }
  auto cubic = poly_samples(30, 0, -2, 0, 1);  // x^3 - 2x
  auto out = savitzky_golay(cubic, 8, 3);
  for (std::size_t i = 0; i < cubic.size(); ++i)
    EXPECT_NEAR(out[i], cubic[i], 1e-9 * std::max(1.0, std::abs(cubic[i])));
}

TEST(SavitzkyGolay, MatchesNormalEquationsOracle) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(20);
    for (auto& v : y) v = n(rng);
    auto got = savitzky_golay(y, 5, 2);
    auto want = oracle_savgol(y, 5, 2);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
  }
}

TEST(SavitzkyGolay, RejectsBadParameters) {
  std::vector<double> y(5, 1.0);
  EXPECT_THROW(savitzky_golay(y, 8, 3), DomainError);
  EXPECT_THROW(SavitzkyGolayFilter(4, 4), DomainError);
  EXPECT_THROW(SavitzkyGolayFilter(4, -1), DomainError);
  EXPECT_THROW(SavitzkyGolayFilter(0, 0), DomainError);
}

TEST(SmoothTrend, SmoothsGapFreeRunsOnly) {
  TrendSeries s;
  for (int i = 0; i < 12; ++i) s.raw_percent.push_back(i == 3 ? std::nullopt : std::optional<double>{10.0 * i});
  s.week_starts.assign(12, Date{});
  smooth_trend(s, SavitzkyGolayFilter(5, 1));
  for (int i = 0; i < 4; ++i) EXPECT_FALSE(s.smoothed_percent[static_cast<std::size_t>(i)].has_value());
  for (int i = 4; i < 12; ++i) EXPECT_NEAR(*s.smoothed_percent[static_cast<std::size_t>(i)], 10.0 * i, 1e-9);
}

TEST(TopicShareOfList, Examples) {
  Corpus c;
  c.window = {D(2023, 1, 1), D(2023, 12, 31)};
  c.query_categories = {"cs.CL"};
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < 40; ++i) {
    std::string title = i < 27 ? "Large Language Models at scale" : "Vision";
    if (i >= 34) title += " with LLaMA";
    c.add(paper(synth_id(i), D(2023, 3, 1), "cs.CL", title));
    ids.push_back(synth_id(i));
  }
  auto shares = topic_share_of_list(ids, c, builtin_topics());
  EXPECT_DOUBLE_EQ(shares["LLM"], 67.5);
  EXPECT_DOUBLE_EQ(shares["LLaMA"], 15.0);
  std::vector<std::string> llm(ids.begin(), ids.begin() + 27);
  EXPECT_DOUBLE_EQ(topic_share_of_list(llm, c, {topic("LLM")})["LLM"], 100.0);
  EXPECT_THROW(topic_share_of_list({"2212.00001"}, c, builtin_topics()), DataIntegrityError);
}
