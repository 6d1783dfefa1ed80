#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "diachron/error.hpp"
#include "diachron/sparse_vector.hpp"

using namespace diachron;

namespace {

SparseVector sv(std::uint32_t dim, std::vector<FeatureId> idx, std::vector<double> val) {
  return {dim, std::move(idx), std::move(val)};
}

SparseVector random_sparse(std::mt19937_64& rng, std::uint32_t dim) {
  std::bernoulli_distribution on(0.2);
  std::uniform_real_distribution<double> value(0.01, 5.0);
  SparseVector v{dim, {}, {}};
  for (FeatureId f = 0; f < dim; ++f) {
    if (on(rng)) {
      v.indices.push_back(f);
      v.values.push_back(value(rng));
    }
  }
  return v;
}

}  // namespace

TEST(SparseVector, AtAndContains) {
  const auto v = sv(10, {1, 4, 7}, {0.5, 2.0, 1.5});
  EXPECT_DOUBLE_EQ(v.at(4), 2.0);
  EXPECT_DOUBLE_EQ(v.at(5), 0.0);
  EXPECT_TRUE(v.contains(7));
  EXPECT_FALSE(v.contains(0));
  EXPECT_EQ(v.nnz(), 3u);
}

TEST(SparseVector, CheckFlagsInvariantViolations) {
  EXPECT_FALSE(sv(8, {1, 3}, {1.0, 2.0}).check());
  EXPECT_TRUE(sv(8, {5, 5}, {1.0, 2.0}).check());
  EXPECT_TRUE(sv(8, {3, 1}, {1.0, 2.0}).check());
  EXPECT_TRUE(sv(8, {8}, {1.0}).check());
  EXPECT_TRUE(sv(8, {1}, {0.0}).check());
  EXPECT_TRUE(sv(8, {1}, {-1.0}).check());
  EXPECT_TRUE(sv(8, {1, 2}, {1.0}).check());
  EXPECT_TRUE(sv(0, {}, {}).check());
  EXPECT_THROW(sv(8, {5, 5}, {1.0, 2.0}).validate(), Error);
}

TEST(SparseVector, DenseRoundTrip) {
  const auto v = sv(6, {0, 5}, {1.25, 3.0});
  const auto dense = v.to_dense();
  EXPECT_EQ(dense, (std::vector<double>{1.25, 0, 0, 0, 0, 3.0}));
  EXPECT_EQ(SparseVector::from_dense(dense), v);
  const std::vector<double> with_negative{0.0, -2.0, 1.0};
  EXPECT_EQ(SparseVector::from_dense(with_negative), sv(3, {2}, {1.0}));
}

TEST(MaxPool, ElementwiseMax) {
  const std::vector<SparseVector> tokens{sv(8, {1, 3}, {0.5, 2.0}), sv(8, {1}, {0.7})};
  EXPECT_EQ(max_pool_tokens(tokens), sv(8, {1, 3}, {0.7, 2.0}));
}

TEST(MaxPool, SingletonIsIdentity) {
  const std::vector<SparseVector> tokens{sv(8, {2}, {1.0})};
  EXPECT_EQ(max_pool_tokens(tokens), tokens[0]);
}

TEST(MaxPool, Errors) {
  EXPECT_THROW(
      {
        try {
          max_pool_tokens({});
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "no tokens");
          throw;
        }
      },
      Error);
  const std::vector<SparseVector> mixed{sv(8, {1}, {1.0}), sv(9, {1}, {1.0})};
  EXPECT_THROW(max_pool_tokens(mixed), Error);
}

TEST(MaxPool, MatchesDenseOracle) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SparseVector> tokens;
    for (int j = 0; j < 10; ++j) tokens.push_back(random_sparse(rng, 64));
    std::vector<double> dense(64, 0.0);
    for (const auto& t : tokens) {
      const auto d = t.to_dense();
      for (std::size_t m = 0; m < 64; ++m) dense[m] = std::max(dense[m], d[m]);
    }
    const SparseVector pooled = max_pool_tokens(tokens);
    EXPECT_EQ(pooled.to_dense(), dense);
    EXPECT_FALSE(pooled.check());
  }
}

TEST(MaxPool, PropertiesIdempotentOrderInvariantDominant) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const SparseVector v = random_sparse(rng, 32);
    const std::vector<SparseVector> one{v};
    EXPECT_EQ(max_pool_tokens(one), v);

    std::vector<SparseVector> tokens;
    for (int j = 0; j < 6; ++j) tokens.push_back(random_sparse(rng, 32));
    const SparseVector pooled = max_pool_tokens(tokens);
    auto shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(max_pool_tokens(shuffled), pooled);
    for (const auto& t : tokens) {
      for (std::size_t i = 0; i < t.nnz(); ++i) EXPECT_GE(pooled.at(t.indices[i]), t.values[i]);
    }
  }
}
