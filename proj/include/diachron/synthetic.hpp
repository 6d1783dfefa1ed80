#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diachron/activation_store.hpp"
#include "diachron/concepts.hpp"
#include "diachron/sae.hpp"

namespace diachron {

// Desk-scale fixtures: random sparse records with Chinese-like texts, and
// concept configs whose bases are "hot" (activated far more often than the
// background) so salient sets are non-trivial.

struct SyntheticSpec {
  std::uint32_t dim = 64;
  std::uint32_t kappa = 8;  // background nnz per record
  std::size_t units = 200;
  int year_min = 1915;
  int year_max = 1924;
  std::vector<std::string> corpora{"synthetic"};
  std::vector<FeatureId> hot_features;  // each included with probability hot_probability
  double hot_probability = 0.3;
  double value_min = 0.05;
  double value_max = 10.0;
  std::vector<std::string> lexemes;  // inserted into texts with probability lexeme_probability
  double lexeme_probability = 0.3;
  std::uint64_t seed = 1;
};

std::vector<ActivationRecord> synthetic_records(const SyntheticSpec& spec);

/// `n_concepts` concepts with 1..4 components of 1..3 bases each, drawn
/// without reuse from [0, dim). Lexemes are two-character strings.
std::vector<ConceptDef> synthetic_concepts(std::uint32_t dim, std::size_t n_concepts, std::uint64_t seed);

/// Serializes concepts in the config format read by load_concepts.
std::string concepts_to_json(const std::vector<ConceptDef>& concepts);

/// Random text of `length` scalar values drawn from a fixed CJK pool.
std::string synthetic_text(std::uint64_t seed, std::size_t length);

/// Token-level fixture produced by running random hidden states through an
/// SAE; pooling it yields a sentence-level store.
struct SaeFixture {
  std::vector<UnitMeta> units;
  std::vector<TokenRecord> tokens;
};

SaeFixture sae_token_fixture(const SaeWeights& weights, const SaeConfig& config,
                             const SyntheticSpec& spec, std::size_t tokens_per_unit);

}  // namespace diachron
