#include <fmt/format.h>
#include <gtest/gtest.h>

#include "diachron/activation_store.hpp"
#include "diachron/error.hpp"
#include "fixtures.hpp"

using namespace diachron;
using fixtures::TempDir;

namespace {

std::string manifest_json(std::uint32_t dim, std::uint64_t unit_count, int year_min = 1915, int year_max = 1925,
                          const std::string& level = "sentence") {
  return fmt::format(
      R"({{"store_id":"s1","corpus":"newyouth","layer_tag":"L29","dim":{},"kappa":64,)"
      R"("year_min":{},"year_max":{},"unit_count":{},"level":"{}"}})",
      dim, year_min, year_max, unit_count, level);
}

std::string unit_line(const std::string& id, int year, const std::string& indices, const std::string& values,
                      const std::string& corpus = "newyouth") {
  return fmt::format(R"({{"unit_id":"{}","corpus":"{}","year":{},"text":"t {}","indices":[{}],"values":[{}]}})",
                     id, corpus, year, id, indices, values);
}

void write_store_files(const TempDir& dir, const std::string& manifest, const std::vector<std::string>& lines) {
  fixtures::write_file(dir / "manifest.json", manifest);
  std::string body;
  for (const auto& l : lines) body += l + "\n";
  fixtures::write_file(dir / "units.jsonl", body);
}

std::vector<std::string> described(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& e : r.errors) out.push_back(e.describe());
  return out;
}

}  // namespace

TEST(ValidateStore, WellFormedStore) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 3),
                    {unit_line("a", 1917, "1,3", "0.5,2"), unit_line("b", 1915, "", ""),
                     unit_line("c", 1918, "15", "1.25")});
  const ValidationReport r = validate_store(dir.path());
  EXPECT_TRUE(r.errors.empty()) << ::testing::PrintToString(described(r));
  EXPECT_EQ(r.unit_count, 3u);
  EXPECT_EQ(r.year_histogram.at(1915), 1u);
  EXPECT_EQ(r.year_histogram.at(1917), 1u);
}

TEST(ValidateStore, DuplicateIndicesReportLineNumber) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 2), {unit_line("a", 1917, "1", "1"), unit_line("b", 1917, "5,5", "1,2")});
  const auto errors = described(validate_store(dir.path()));
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0], "non-ascending indices at line 2");
}

TEST(ValidateStore, IndexOutOfRangeAtFullDim) {
  TempDir dir;
  write_store_files(dir, manifest_json(262144, 1), {unit_line("a", 1917, "262144", "1")});
  const auto errors = described(validate_store(dir.path()));
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_NE(errors[0].find("index out of range"), std::string::npos);
  EXPECT_NE(errors[0].find("at line 1"), std::string::npos);
}

TEST(ValidateStore, CollectsEveryViolation) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 9, 1915, 1920),
                    {unit_line("a", 1917, "1", "1"), unit_line("a", 1917, "2", "1"),  // duplicate id
                     unit_line("b", 1930, "1", "1"),                                  // year out of range
                     unit_line("c", 1917, "1", "0"),                                  // zero stored
                     unit_line("d", 1917, "1,2", "1"),                                // length mismatch
                     "{not json", R"({"unit_id":"e","corpus":"x","text":"t"})",       // no year
                     unit_line("f", 1917, "3,1", "1,1"), unit_line("g", 1917, "1", "-2")});
  const ValidationReport r = validate_store(dir.path());
  const auto errors = described(r);
  ASSERT_EQ(errors.size(), 8u) << ::testing::PrintToString(errors);
  EXPECT_EQ(errors[0], "duplicate unit_id 'a' at line 2");
  EXPECT_EQ(errors[1], "year 1930 outside manifest range [1915, 1920] at line 3");
  EXPECT_EQ(errors[2], "non-positive value at line 4");
  EXPECT_NE(errors[3].find("length mismatch"), std::string::npos);
  EXPECT_NE(errors[4].find("malformed JSON"), std::string::npos);
  EXPECT_EQ(errors[5], "missing field 'year' at line 7");
  EXPECT_EQ(errors[6], "non-ascending indices at line 8");
  EXPECT_EQ(errors[7], "non-positive value at line 9");
}

TEST(ValidateStore, UnitCountMismatch) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 5), {unit_line("a", 1917, "1", "1")});
  const auto errors = described(validate_store(dir.path()));
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0], "manifest.json: unit_count 5 does not match 1 records");
}

TEST(ValidateStore, MissingFilesThrow) {
  TempDir dir;
  EXPECT_THROW(validate_store(dir.path()), Error);
  fixtures::write_file(dir / "manifest.json", manifest_json(16, 0));
  EXPECT_THROW(validate_store(dir.path()), Error);
  fixtures::write_file(dir / "manifest.json", "{");
  fixtures::write_file(dir / "units.jsonl", "");
  EXPECT_THROW(validate_store(dir.path()), Error);
}

TEST(LoadStore, CanonicalOrder) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 3),
                    {unit_line("b", 1918, "1", "1"), unit_line("z", 1917, "2", "1"), unit_line("a", 1918, "3", "1")});
  const Store s = load_store(dir.path());
  ASSERT_EQ(s.records.size(), 3u);
  EXPECT_EQ(s.records[0].meta.unit_id, "z");
  EXPECT_EQ(s.records[1].meta.unit_id, "a");
  EXPECT_EQ(s.records[2].meta.unit_id, "b");
}

TEST(LoadStore, YearAndCorpusFilters) {
  TempDir dir;
  std::vector<std::string> lines;
  for (int y = 1915; y <= 1922; ++y) lines.push_back(unit_line("u" + std::to_string(y), y, "1", "1"));
  write_store_files(dir, manifest_json(16, lines.size()), lines);

  RecordFilter years;
  years.year_min = 1917;
  years.year_max = 1919;
  const Store s = load_store(dir.path(), years);
  ASSERT_EQ(s.records.size(), 3u);
  for (const auto& r : s.records) EXPECT_TRUE(r.meta.year >= 1917 && r.meta.year <= 1919);

  RecordFilter guide;
  guide.corpus = "guide";
  EXPECT_TRUE(load_store(dir.path(), guide).records.empty());
}

TEST(LoadStore, RefusesInvalidStore) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 1), {unit_line("a", 1917, "5,5", "1,1")});
  try {
    load_store(dir.path());
    FAIL() << "expected refusal";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-ascending indices at line 1"), std::string::npos);
  }
}

TEST(LoadStore, WriteLoadRoundTripIsDeterministic) {
  const auto c = fixtures::random_case(5);
  TempDir dir;
  StoreManifest m;
  m.store_id = "rt";
  m.corpus = "mixed";
  m.layer_tag = "L29";
  m.dim = c.dim;
  m.year_min = 1915;
  m.year_max = 1924;
  write_store(dir / "a", m, c.records);
  const Store first = load_store(dir / "a");
  const Store second = load_store(dir / "a");
  ASSERT_EQ(first.records.size(), c.records.size());
  for (std::size_t i = 0; i < c.records.size(); ++i) {
    EXPECT_EQ(first.records[i].meta.unit_id, c.records[i].meta.unit_id);
    EXPECT_EQ(first.records[i].meta.text, c.records[i].meta.text);
    EXPECT_EQ(first.records[i].z, c.records[i].z);
    EXPECT_EQ(second.records[i].z, first.records[i].z);
  }
  write_store(dir / "b", m, first.records);
  EXPECT_EQ(fixtures::read_file(dir / "a" / "units.jsonl"), fixtures::read_file(dir / "b" / "units.jsonl"));
  EXPECT_EQ(fixtures::read_file(dir / "a" / "manifest.json"), fixtures::read_file(dir / "b" / "manifest.json"));
}

TEST(LoadStore, ValuesAreRoundedToFloat) {
  TempDir dir;
  write_store_files(dir, manifest_json(16, 1), {unit_line("a", 1917, "1", "0.1")});
  const Store s = load_store(dir.path());
  EXPECT_EQ(s.records[0].z.values[0], static_cast<double>(0.1f));
}

TEST(TokenStore, PoolingMatchesMaxPool) {
  TempDir dir;
  StoreManifest m;
  m.store_id = "tok";
  m.corpus = "c";
  m.layer_tag = "L29";
  m.dim = 8;
  m.year_min = 1915;
  m.year_max = 1920;
  m.level = StoreLevel::token;
  std::vector<UnitMeta> units{{"u1", "c", 1916, "甲乙"}, {"u0", "c", 1915, "丙"}};
  std::vector<TokenRecord> tokens{{"u1", 0, {8, {1, 3}, {0.5, 2.0}}},
                                  {"u1", 1, {8, {1}, {0.75}}},
                                  {"u0", 0, {8, {2}, {1.0}}}};
  write_token_store(dir.path(), m, units, tokens);
  EXPECT_TRUE(validate_store(dir.path()).ok());
  EXPECT_THROW(load_store(dir.path()), Error);

  const TokenStore ts = load_token_store(dir.path());
  const auto pooled = pool_token_store(ts);
  ASSERT_EQ(pooled.size(), 2u);
  EXPECT_EQ(pooled[0].meta.unit_id, "u0");
  EXPECT_EQ(pooled[1].z, (SparseVector{8, {1, 3}, {0.75, 2.0}}));
}

TEST(TokenStore, UnitWithoutTokensIsAnError) {
  TempDir dir;
  fixtures::write_file(dir / "manifest.json", manifest_json(8, 2, 1915, 1925, "token"));
  fixtures::write_file(dir / "units.jsonl",
                       R"({"unit_id":"a","corpus":"c","year":1915,"text":""})"
                       "\n"
                       R"({"unit_id":"b","corpus":"c","year":1915,"text":""})"
                       "\n");
  fixtures::write_file(dir / "tokens.jsonl", R"({"unit_id":"a","token_index":0,"indices":[9],"values":[1]})"
                                             "\n"
                                             R"({"unit_id":"b","token_index":0,"indices":[2],"values":[1]})"
                                             "\n");
  const auto errors = described(validate_store(dir.path()));
  ASSERT_EQ(errors.size(), 2u) << ::testing::PrintToString(errors);
  EXPECT_EQ(errors[0], "index out of range (9 >= dim 8) at tokens.jsonl line 1");
  EXPECT_EQ(errors[1], "tokens.jsonl: unit 'a' has no tokens");
}

TEST(MergeRecords, RestoresCanonicalOrder) {
  Store a;
  a.records = {fixtures::rec("x", 1916, "A", "", 4, {{1, 1.0}})};
  Store b;
  b.records = {fixtures::rec("x", 1915, "B", "", 4, {{1, 1.0}}), fixtures::rec("x", 1916, "B", "", 4, {})};
  const std::vector<Store> stores{a, b};
  const auto merged = merge_records(stores);
  ASSERT_EQ(merged.size(), 3u);
  EXPECT_EQ(merged[0].meta.corpus, "B");
  EXPECT_EQ(merged[1].meta.corpus, "A");
  EXPECT_EQ(merged[2].meta.corpus, "B");
}
