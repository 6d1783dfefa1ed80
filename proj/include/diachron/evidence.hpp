#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diachron/diachronic.hpp"

namespace diachron {

inline constexpr std::size_t kEvidencePerYear = 5;
inline constexpr std::size_t kEvidencePool = 30;
inline constexpr std::size_t kEvidenceDisplay = 8;

enum class EvidenceRule { diachronic_peak_pair, cross_corpus_top30 };

std::string to_string(EvidenceRule rule);

/// What evidence is ranked by: one feature, or a concept component whose
/// score is its summed activation.
struct EvidenceTarget {
  std::optional<FeatureId> feature;
  std::optional<ConceptComponent> component;

  static EvidenceTarget of_feature(FeatureId feature);
  static EvidenceTarget of_component(ConceptComponent component);

  double score(const ActivationRecord& record) const;
  std::string describe() const;  // "feature:90370" or "component:Actorhood"
};

struct EvidenceItem {
  std::string unit_id;
  std::string corpus;
  int year = 0;
  double activation = 0.0;
  std::string text;
};

struct EvidenceBundle {
  std::string target;
  EvidenceRule rule = EvidenceRule::diachronic_peak_pair;
  std::optional<std::pair<int, int>> year_pair;
  std::vector<EvidenceItem> items;  // the full pool
  std::size_t display_count = 0;    // items[0, display_count) are displayed
};

struct EvidenceFilter {
  std::optional<int> year_min;
  std::optional<int> year_max;
  std::optional<std::string> corpus;
};

/// Consecutive present pair with the largest |delta mu|, ties to the earliest.
std::pair<int, int> peak_adjacent_pair(const SliceSeries& series);

/// Top-n records by score (> 0 only), activation descending then unit_id.
std::vector<EvidenceItem> top_activating(std::span<const ActivationRecord* const> records,
                                         const EvidenceTarget& target, std::size_t n,
                                         const EvidenceFilter& filter = {});

/// Up to `per_year` items from y1 followed by up to `per_year` from y2, where
/// (y1, y2) is the peak adjacent pair of `series`.
EvidenceBundle diachronic_evidence(std::span<const ActivationRecord* const> records,
                                   const EvidenceTarget& target, const SliceSeries& series,
                                   std::size_t per_year = kEvidencePerYear);

/// Full-range top-`pool` items; the first `display` of them are displayed.
EvidenceBundle cross_corpus_evidence(std::span<const ActivationRecord* const> records,
                                     const EvidenceTarget& target, std::size_t pool = kEvidencePool,
                                     std::size_t display = kEvidenceDisplay);

}  // namespace diachron
