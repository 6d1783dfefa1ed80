#include <algorithm>
#include <random>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "diachron/error.hpp"
#include "diachron/evidence.hpp"
#include "diachron/report.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace diachron;
using fixtures::rec;

namespace {

SliceSeries series_of(std::vector<int> years, std::vector<double> values) {
  SliceSeries s;
  s.years = std::move(years);
  s.values = std::move(values);
  s.counts.assign(s.years.size(), 1);
  return s;
}

std::vector<ActivationRecord> units_in_years(const std::vector<std::pair<int, int>>& year_counts, FeatureId f) {
  std::vector<ActivationRecord> out;
  int u = 0;
  for (const auto& [year, n] : year_counts) {
    for (int i = 0; i < n; ++i, ++u) {
      out.push_back(rec(fmt::format("u{:03d}", u), year, "c", fmt::format("text {}", u), 8, {{f, 1.0 + u}}));
    }
  }
  sort_canonical(out);
  return out;
}

}  // namespace

TEST(PeakPair, Examples) {
  EXPECT_EQ(peak_adjacent_pair(series_of({1915, 1918, 1919}, {0.0, 5.0, 4.0})), std::make_pair(1915, 1918));
  EXPECT_EQ(peak_adjacent_pair(series_of({1, 2, 3, 4}, {1, 2, 9, 9})), std::make_pair(2, 3));
  EXPECT_EQ(peak_adjacent_pair(series_of({1, 2, 3}, {0, 1, 2})), std::make_pair(1, 2));
  EXPECT_THROW(peak_adjacent_pair(series_of({1}, {1})), Error);
}

TEST(PeakPair, MatchesScanOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0.0, 4.0);
  std::bernoulli_distribution absent(0.2);
  for (int trial = 0; trial < 100; ++trial) {
    SliceSeries s = series_of({1915, 1916, 1917, 1918, 1919, 1920}, {});
    std::vector<std::optional<double>> opt;
    for (std::size_t t = 0; t < s.years.size(); ++t) {
      s.values.push_back(v(rng));
      if (absent(rng)) s.counts[t] = 0;
      opt.push_back(s.counts[t] ? std::optional<double>(s.values[t]) : std::nullopt);
    }
    if (s.present_count() < 2) continue;
    EXPECT_EQ(peak_adjacent_pair(s), oracle::peak_pair(s.years, opt));
  }
}

TEST(TopActivating, Examples) {
  const std::vector<ActivationRecord> records{rec("a", 1915, "c", "", 4, {{1, 0.1}}),
                                              rec("b", 1915, "c", "", 4, {{1, 0.9}}),
                                              rec("c", 1915, "c", "", 4, {{1, 0.5}})};
  const auto top = top_activating(view_of(records), EvidenceTarget::of_feature(1), 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].unit_id, "b");
  EXPECT_EQ(top[1].unit_id, "c");
  EXPECT_EQ(top_activating(view_of(records), EvidenceTarget::of_feature(1), 10).size(), 3u);
  EXPECT_TRUE(top_activating(view_of(records), EvidenceTarget::of_feature(2), 10).empty());
  EXPECT_THROW(top_activating(view_of(records), EvidenceTarget::of_feature(1), 0), Error);
}

TEST(TopActivating, MatchesFullSort) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = fixtures::random_case(seed);
    const auto dense = oracle::densify(c.records);
    std::vector<std::size_t> all(dense.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    for (FeatureId f = 0; f < c.dim; f += 3) {
      const auto got = top_activating(view_of(c.records), EvidenceTarget::of_feature(f), 30);
      const auto want = oracle::top_rows(dense, all, f, 30);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].unit_id, dense.unit_ids[want[i]]);
        EXPECT_EQ(got[i].corpus, dense.corpora[want[i]]);
        EXPECT_EQ(got[i].activation, dense.z[want[i]][f]);
      }
    }
  }
}

TEST(DiachronicEvidence, CapsPerYear) {
  const auto records = units_in_years({{1917, 7}, {1918, 3}}, 2);
  const auto mu = feature_series(view_of(records), 2, std::vector<int>{1917, 1918});
  const EvidenceBundle b = diachronic_evidence(view_of(records), EvidenceTarget::of_feature(2), mu);
  ASSERT_EQ(b.items.size(), 8u);
  EXPECT_EQ(b.display_count, 8u);
  EXPECT_EQ(b.rule, EvidenceRule::diachronic_peak_pair);
  EXPECT_EQ(b.year_pair, std::make_pair(1917, 1918));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(b.items[i].year, 1917);
  for (int i = 5; i < 8; ++i) EXPECT_EQ(b.items[i].year, 1918);
  for (int i = 1; i < 5; ++i) EXPECT_GE(b.items[i - 1].activation, b.items[i].activation);
  EXPECT_EQ(b.items[0].unit_id, "u006");
}

TEST(DiachronicEvidence, ZeroActivationYearContributesNothing) {
  std::vector<ActivationRecord> records{rec("a", 1915, "c", "", 4, {}), rec("b", 1916, "c", "", 4, {{1, 3.0}})};
  const auto mu = feature_series(view_of(records), 1, std::vector<int>{1915, 1916});
  const EvidenceBundle b = diachronic_evidence(view_of(records), EvidenceTarget::of_feature(1), mu);
  ASSERT_EQ(b.items.size(), 1u);
  EXPECT_EQ(b.items[0].year, 1916);
}

TEST(DiachronicEvidence, PlantedBundle) {
  // feature 3 peaks between 1916 and 1917; the bundle is the top-5 of each
  std::vector<ActivationRecord> records;
  for (int i = 0; i < 6; ++i) records.push_back(rec(fmt::format("a{}", i), 1915, "c", "x", 8, {{3, 1.0}}));
  for (int i = 0; i < 6; ++i) records.push_back(rec(fmt::format("b{}", i), 1916, "c", "y", 8, {{3, 1.0 + i * 0.1}}));
  for (int i = 0; i < 6; ++i) records.push_back(rec(fmt::format("c{}", i), 1917, "c", "z", 8, {{3, 9.0 - i}}));
  sort_canonical(records);
  const auto mu = feature_series(view_of(records), 3, std::vector<int>{1915, 1916, 1917});
  const EvidenceBundle b = diachronic_evidence(view_of(records), EvidenceTarget::of_feature(3), mu);
  std::vector<std::string> ids;
  for (const auto& it : b.items) ids.push_back(it.unit_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"b5", "b4", "b3", "b2", "b1", "c0", "c1", "c2", "c3", "c4"}));
}

TEST(DiachronicEvidence, ComponentTargetUsesSummedActivation) {
  const std::vector<ActivationRecord> records{rec("a", 1915, "c", "", 8, {{1, 1.0}, {2, 1.0}}),
                                              rec("b", 1915, "c", "", 8, {{1, 1.5}}),
                                              rec("c", 1916, "c", "", 8, {{2, 0.5}})};
  const auto target = EvidenceTarget::of_component({"pair", {1, 2}});
  EXPECT_EQ(target.describe(), "component:pair");
  const auto top = top_activating(view_of(records), target, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].unit_id, "a");
  EXPECT_EQ(top[0].activation, 2.0);
}

TEST(CrossCorpusEvidence, PoolAndDisplay) {
  const auto forty = units_in_years({{1915, 20}, {1920, 20}}, 1);
  const EvidenceBundle b = cross_corpus_evidence(view_of(forty), EvidenceTarget::of_feature(1));
  EXPECT_EQ(b.items.size(), 30u);
  EXPECT_EQ(b.display_count, 8u);
  EXPECT_EQ(b.rule, EvidenceRule::cross_corpus_top30);
  EXPECT_FALSE(b.year_pair.has_value());
  EXPECT_EQ(b.items[0].activation, 40.0);

  const auto five = units_in_years({{1915, 5}}, 1);
  const EvidenceBundle small = cross_corpus_evidence(view_of(five), EvidenceTarget::of_feature(1));
  EXPECT_EQ(small.items.size(), 5u);
  EXPECT_EQ(small.display_count, 5u);
}

TEST(CrossCorpusEvidence, ItemsVerifiableAgainstStore) {
  const auto c = fixtures::random_case(17);
  const auto target = EvidenceTarget::of_component(c.concepts[0].components[0]);
  const EvidenceBundle b = cross_corpus_evidence(view_of(c.records), target);
  for (const auto& it : b.items) {
    const auto found = std::find_if(c.records.begin(), c.records.end(), [&](const ActivationRecord& r) {
      return r.meta.unit_id == it.unit_id && r.meta.corpus == it.corpus;
    });
    ASSERT_NE(found, c.records.end());
    EXPECT_EQ(target.score(*found), it.activation);
    EXPECT_EQ(found->meta.text, it.text);
  }
  EXPECT_EQ(evidence_json({b}).dump(), evidence_json({cross_corpus_evidence(view_of(c.records), target)}).dump());
}
