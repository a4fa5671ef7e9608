#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "bufferattack/buffer.hpp"
#include "oracles.hpp"

namespace bufferattack {
namespace {

SynonymSet fallback(std::vector<std::string> words) {
  SynonymSet s{"w", {}};
  double c = 0.99;
  for (auto& w : words) s.candidates.emplace_back(std::move(w), c -= 0.01);
  return s;
}

void record_all(HistoryTable& t, const std::string& cand, std::vector<double> xs,
                const std::string& word = "w", ClassIndex y = 0) {
  for (double x : xs) t.record(word, y, cand, x);
}

TEST(History, RecordKeepsMultisetInOrder) {
  HistoryTable t;
  t.record("w", 0, "c", 0.2);
  t.record("w", 0, "c", 0.2);
  t.record("w", 0, "c", -0.1);
  t.record("w", 1, "c", 0.5);
  EXPECT_EQ(*t.samples("w", 0, "c"), (std::vector<double>{0.2, 0.2, -0.1}));
  EXPECT_EQ(t.key_count(), 2u);
  EXPECT_EQ(t.sample_count(), 4u);
  EXPECT_EQ(t.lookup("w", 2), nullptr);
  EXPECT_EQ(t.samples("w", 0, "d"), nullptr);
}

TEST(History, RejectsBadRecords) {
  HistoryTable t;
  EXPECT_THROW(t.record("w", 0, "c", 1.5), std::invalid_argument);
  EXPECT_THROW(t.record("w", 0, "c", std::nan("")), std::invalid_argument);
  EXPECT_THROW(t.record("w\x1fz", 0, "c", 0.1), std::invalid_argument);
  EXPECT_NO_THROW(t.record("w", 0, "c", -1.0));
  EXPECT_TRUE(t.samples("w", 0, "c"));
}

TEST(CandidateList, UnseenWordUsesFallback) {
  HistoryTable t;
  record_all(t, "c", {0.1, 0.2}, "other");
  const auto l = candidate_list("w", t, 0, 0.3, 0.3, fallback({"b", "a"}));
  EXPECT_EQ(l.source, CandidateList::Source::kDefault);
  EXPECT_EQ(l.candidates, (std::vector<std::string>{"b", "a"}));
  EXPECT_FALSE(l.pivot);
  EXPECT_TRUE(candidate_list("w", t, 0, 0.3, 0.3, fallback({})).candidates.empty());
}

TEST(CandidateList, PivotSecondOfThree) {
  HistoryTable t;
  record_all(t, "c1", {0.60, 0.62, 0.58, 0.61});
  record_all(t, "c2", {0.20, 0.22, 0.18, 0.21});
  record_all(t, "c3", {0.05, 0.02, 0.04, 0.03});
  const auto l = candidate_list("w", t, 0, 0.34, 0.3, fallback({"x"}));
  EXPECT_EQ(l.source, CandidateList::Source::kHistory);
  ASSERT_TRUE(l.pivot);
  EXPECT_EQ(*l.pivot, "c2");
  EXPECT_EQ(l.candidates, std::vector<std::string>{"c1"});
}

TEST(CandidateList, IdenticalHistoriesCollapseToPivot) {
  HistoryTable t;
  for (auto c : {"a", "b", "c", "d"}) record_all(t, c, {0.1, 0.3, 0.2});
  const auto l = candidate_list("w", t, 0, 0.5, 0.3, fallback({}));
  EXPECT_EQ(*l.pivot, "b");
  EXPECT_EQ(l.candidates, std::vector<std::string>{"b"});
}

TEST(CandidateList, ThinHistoriesAreKeptUntested) {
  HistoryTable t;
  record_all(t, "a", {0.5, 0.4});
  record_all(t, "b", {0.1});
  record_all(t, "c", {0.0, 0.01});
  const auto l = candidate_list("w", t, 0, 0.3, 0.3, fallback({}));
  // The pivot is "a"; "b" has one sample and stays, "c" is tested and dropped.
  EXPECT_EQ(*l.pivot, "a");
  EXPECT_EQ(l.candidates, std::vector<std::string>{"b"});

  HistoryTable thin;
  record_all(thin, "a", {0.5});
  record_all(thin, "b", {0.1, 0.2});
  const auto t2 = candidate_list("w", thin, 0, 0.3, 0.3, fallback({}));
  EXPECT_EQ(t2.candidates, (std::vector<std::string>{"a", "b"}));
}

TEST(CandidateList, PivotExcludedWhenTestable) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    HistoryTable t;
    for (int c = 0; c < 8; ++c)
      for (int i = 0; i < 5; ++i)
        t.record("w", 0, "c" + std::to_string(c), std::clamp(0.1 * c + noise(rng), -1.0, 1.0));
    const auto l = candidate_list("w", t, 0, 0.3, 0.3, fallback({}));
    const bool collapsed = l.candidates == std::vector<std::string>{*l.pivot};
    if (!collapsed)
      EXPECT_EQ(std::count(l.candidates.begin(), l.candidates.end(), *l.pivot), 0);
  }
}

TEST(CandidateList, PruningBound) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.2, 0.8);
  for (int trial = 0; trial < 100; ++trial) {
    HistoryTable t;
    const int n = 2 + trial % 15;
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < 4; ++i) t.record("w", 0, "c" + std::to_string(c), u(rng));
    for (double gamma : {0.1, 0.3, 0.7, 1.0}) {
      const auto l = candidate_list("w", t, 0, gamma, 0.3, fallback({}));
      const auto k = static_cast<std::size_t>(std::ceil(gamma * n));
      EXPECT_LE(l.candidates.size(), std::max<std::size_t>(1, k - 1));
      EXPECT_GE(l.candidates.size(), 1u);
    }
  }
}

TEST(CandidateList, MoreEvidenceNeverDropsAClearWinner) {
  HistoryTable t;
  record_all(t, "lo", {0.0, 0.01, 0.02});
  record_all(t, "hi", {0.5, 0.52});
  record_all(t, "mid", {0.1, 0.12, 0.11});
  std::size_t prev = 0;
  for (int i = 0; i < 10; ++i) {
    t.record("w", 0, "hi", 0.5 + 0.002 * i);
    const auto l = candidate_list("w", t, 0, 0.5, 0.3, fallback({}));
    const bool kept = std::count(l.candidates.begin(), l.candidates.end(), "hi") > 0;
    EXPECT_TRUE(kept);
    EXPECT_GE(static_cast<std::size_t>(kept), prev);
    prev = kept;
  }
}

TEST(CandidateList, DeterministicAndLabelScoped) {
  HistoryTable t;
  record_all(t, "a", {0.4, 0.5, 0.45});
  record_all(t, "b", {0.1, 0.15, 0.12});
  record_all(t, "z", {0.9, 0.8}, "w", 1);
  const auto first = candidate_list("w", t, 0, 0.3, 0.3, fallback({}));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(candidate_list("w", t, 0, 0.3, 0.3, fallback({})), first);
  EXPECT_EQ(candidate_list("w", t, 1, 0.3, 0.3, fallback({})).candidates,
            std::vector<std::string>{"z"});
  EXPECT_THROW(candidate_list("w", t, 0, 0.0, 0.3, fallback({})), std::invalid_argument);
}

TEST(CandidateList, MatchesStraightLineReference) {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> ncand(1, 12), nsamp(1, 7);
  std::uniform_real_distribution<double> mu(-0.3, 0.6), sd(0.0, 0.2), g(0.05, 1.0), a(0.05, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    HistoryTable t;
    const int n = ncand(rng);
    for (int c = 0; c < n; ++c) {
      std::normal_distribution<double> d(mu(rng), sd(rng));
      const int m = nsamp(rng);
      for (int i = 0; i < m; ++i)
        t.record("w", 0, "c" + std::to_string(c), std::clamp(d(rng), -1.0, 1.0));
    }
    const double gamma = g(rng), alpha = a(rng);
    EXPECT_EQ(candidate_list("w", t, 0, gamma, alpha, fallback({"f"})).candidates,
              oracle::candidate_list("w", t, 0, gamma, alpha, {"f"}))
        << "trial " << trial;
  }
}

class TableFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "bufferattack_buffer_test";
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(TableFiles, RoundTripPreservesEverything) {
  HistoryTable t;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i)
    t.record("w" + std::to_string(i % 37), i % 3, "c" + std::to_string(i % 11), u(rng));
  t.metadata() = {"tester", "cfg"};
  t.save(dir_ / "t.json");
  const auto back = HistoryTable::load(dir_ / "t.json");
  EXPECT_EQ(back, t);
  EXPECT_EQ(back.to_json(), t.to_json());
}

TEST_F(TableFiles, TruncatedFileIsRejected) {
  HistoryTable t;
  record_all(t, "a", {0.1, 0.2});
  const auto text = t.to_json();
  {
    std::ofstream(dir_ / "cut.json") << text.substr(0, text.size() / 2);
  }
  EXPECT_THROW(HistoryTable::load(dir_ / "cut.json"), FormatError);
  EXPECT_THROW(HistoryTable::load(dir_ / "missing.json"), IoError);
}

TEST(TableJson, VersionAndShapeChecks) {
  EXPECT_THROW(HistoryTable::from_json(R"({"version":2,"metadata":{},"entries":{}})"),
               FormatError);
  EXPECT_THROW(HistoryTable::from_json(R"({"version":1,"metadata":{},"entries":{"bad":[0.1]}})"),
               FormatError);
  EXPECT_THROW(
      HistoryTable::from_json("{\"version\":1,\"metadata\":{},\"entries\":{\"w\\u001f0\\u001fc\":[3.0]}}"),
      FormatError);
  const auto ok = HistoryTable::from_json(
      "{\"version\":1,\"metadata\":{\"created_by\":\"x\",\"config_fingerprint\":\"y\"},"
      "\"entries\":{\"w\\u001f1\\u001fc\":[0.25,0.5]}}");
  EXPECT_EQ(*ok.samples("w", 1, "c"), (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(ok.metadata().created_by, "x");
}

}  // namespace
}  // namespace bufferattack
