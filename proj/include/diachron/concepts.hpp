#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "diachron/activation_store.hpp"

namespace diachron {

/// A labeled base cluster. Its activation is the sum over member bases.
struct ConceptComponent {
  std::string label;
  std::vector<FeatureId> bases;  // sorted, unique, non-empty
};

/// Operational concept: anchor lexemes plus a partition of bases into
/// labeled components.
struct ConceptDef {
  std::string concept_id;
  std::string name;
  std::vector<std::string> lexemes;
  std::vector<ConceptComponent> components;

  /// Union of all component bases, sorted.
  std::vector<FeatureId> all_bases() const;

  const ConceptComponent& component(const std::string& label) const;

  /// Throws diachron::Error on an invariant violation.
  void validate() const;

  /// Throws when any base id is >= dim.
  void check_dim(std::uint32_t dim) const;
};

/// Parses {"concepts": [{"id", "name", "lexemes", "components": [{"label", "bases"}]}]}.
std::vector<ConceptDef> parse_concepts(const std::string& json_text);
std::vector<ConceptDef> load_concepts(const std::filesystem::path& path);

const ConceptDef& find_concept(std::span<const ConceptDef> concepts, const std::string& id);

double component_activation(const ActivationRecord& record, const ConceptComponent& component);

/// m_i: sum of component activations.
double concept_magnitude(const ActivationRecord& record, const ConceptDef& concept_def);

/// True when any lexeme occurs as a contiguous substring of `text`. Lexemes
/// and text are valid UTF-8, so a byte match is a code-point match.
bool has_anchor(const std::string& text, const ConceptDef& concept_def);

struct AnchorSplit {
  std::unordered_set<std::string> anchored;
  std::unordered_set<std::string> implicit;
};

AnchorSplit split_by_anchor(std::span<const ActivationRecord* const> records,
                            const ConceptDef& concept_def);

}  // namespace diachron
