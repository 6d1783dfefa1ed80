#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "diachron/diachronic.hpp"

namespace diachron {

inline constexpr std::size_t kDefaultTopK = 30;

/// Top-K drifting bases of one (concept, corpus) cell, D non-increasing.
struct DriftTopSet {
  std::string concept_id;
  std::string corpus;
  std::size_t k = kDefaultTopK;
  std::vector<DriftEntry> features;

  std::set<FeatureId> ids() const;
};

/// Ranks drift over the cell's salient set and keeps the top k.
DriftTopSet drift_top_set(std::span<const ActivationRecord* const> records,
                          const ConceptDef& concept_def, const std::string& corpus,
                          std::size_t k = kDefaultTopK, double q = kDefaultQuantile);

/// |A n B| / |A u B|; throws "no drifting bases" when both are empty or
/// the concepts differ.
double jaccard_at_k(const DriftTopSet& a, const DriftTopSet& b);

struct OverlapDecomposition {
  std::set<FeatureId> shared;
  std::set<FeatureId> only_a;
  std::set<FeatureId> only_b;
};

OverlapDecomposition decompose_overlap(const DriftTopSet& a, const DriftTopSet& b);

/// Character 2-gram set of one layer's evidence texts.
struct Fingerprint {
  std::string layer_tag;
  std::string concept_id;
  std::string corpus;
  std::set<std::string> grams;  // each gram is two UTF-8 encoded scalar values
};

/// Decodes UTF-8 into scalar values; throws on malformed input.
std::vector<char32_t> decode_utf8(std::string_view text);
std::string encode_utf8(std::span<const char32_t> scalars);

/// Unicode White_Space property.
bool is_unicode_whitespace(char32_t c);

/// Per text: drop whitespace, then take every consecutive scalar pair.
/// Grams never span two texts.
Fingerprint char_2gram_fingerprint(std::span<const std::string> evidence_texts);

/// Jaccard of gram sets; throws when both are empty.
double jaccard_2gram(const Fingerprint& a, const Fingerprint& b);

/// Mean Jaccard of fingerprints[target] against every other fingerprint.
double avg_jaccard(std::size_t target, std::span<const Fingerprint> fingerprints);

}  // namespace diachron
