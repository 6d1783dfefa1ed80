#include "diachron/concepts.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "diachron/error.hpp"

namespace diachron {

std::vector<FeatureId> ConceptDef::all_bases() const {
  std::vector<FeatureId> out;
  for (const auto& c : components) out.insert(out.end(), c.bases.begin(), c.bases.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const ConceptComponent& ConceptDef::component(const std::string& label) const {
  for (const auto& c : components) {
    if (c.label == label) return c;
  }
  throw Error(fmt::format("concept '{}' has no component '{}'", concept_id, label));
}

void ConceptDef::validate() const {
  if (concept_id.empty()) throw Error("concept id must be non-empty");
  if (lexemes.empty()) throw Error(fmt::format("concept '{}': lexemes must be non-empty", concept_id));
  for (const auto& lex : lexemes) {
    if (lex.empty()) throw Error(fmt::format("concept '{}': empty lexeme", concept_id));
  }
  if (components.empty()) {
    throw Error(fmt::format("concept '{}': components must be non-empty", concept_id));
  }
  std::set<std::string> labels;
  std::set<FeatureId> used;
  for (const auto& c : components) {
    if (!labels.insert(c.label).second) {
      throw Error(fmt::format("concept '{}': duplicate component label '{}'", concept_id, c.label));
    }
    if (c.bases.empty()) {
      throw Error(fmt::format("concept '{}': component '{}' has no bases", concept_id, c.label));
    }
    for (FeatureId b : c.bases) {
      if (!used.insert(b).second) {
        throw Error(fmt::format("concept '{}': components must partition (base {} reused)",
                                concept_id, b));
      }
    }
  }
}

void ConceptDef::check_dim(std::uint32_t dim) const {
  for (const auto& c : components) {
    for (FeatureId b : c.bases) {
      if (b >= dim) {
        throw Error(fmt::format("concept '{}': base {} outside feature space of size {}",
                                concept_id, b, dim));
      }
    }
  }
}

std::vector<ConceptDef> parse_concepts(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("malformed concept config: {}", e.what()));
  }
  std::vector<ConceptDef> out;
  std::set<std::string> ids;
  try {
    for (const auto& jc : doc.at("concepts")) {
      ConceptDef def;
      def.concept_id = jc.at("id").get<std::string>();
      def.name = jc.value("name", def.concept_id);
      def.lexemes = jc.at("lexemes").get<std::vector<std::string>>();
      for (const auto& jcomp : jc.at("components")) {
        ConceptComponent comp;
        comp.label = jcomp.at("label").get<std::string>();
        comp.bases = jcomp.at("bases").get<std::vector<FeatureId>>();
        std::sort(comp.bases.begin(), comp.bases.end());
        if (std::adjacent_find(comp.bases.begin(), comp.bases.end()) != comp.bases.end()) {
          throw Error(fmt::format("concept '{}': component '{}' lists a base twice",
                                  def.concept_id, comp.label));
        }
        def.components.push_back(std::move(comp));
      }
      def.validate();
      if (!ids.insert(def.concept_id).second) {
        throw Error(fmt::format("duplicate concept id '{}'", def.concept_id));
      }
      out.push_back(std::move(def));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("invalid concept config: {}", e.what()));
  }
  return out;
}

std::vector<ConceptDef> load_concepts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open concept config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_concepts(ss.str());
}

const ConceptDef& find_concept(std::span<const ConceptDef> concepts, const std::string& id) {
  for (const auto& c : concepts) {
    if (c.concept_id == id) return c;
  }
  throw Error(fmt::format("unknown concept '{}'", id));
}

double component_activation(const ActivationRecord& record, const ConceptComponent& component) {
  double total = 0.0;
  for (FeatureId b : component.bases) total += record.z.at(b);
  return total;
}

double concept_magnitude(const ActivationRecord& record, const ConceptDef& concept_def) {
  double total = 0.0;
  for (const auto& c : concept_def.components) total += component_activation(record, c);
  return total;
}

bool has_anchor(const std::string& text, const ConceptDef& concept_def) {
  return std::any_of(concept_def.lexemes.begin(), concept_def.lexemes.end(),
                     [&](const std::string& lex) { return text.find(lex) != std::string::npos; });
}

AnchorSplit split_by_anchor(std::span<const ActivationRecord* const> records,
                            const ConceptDef& concept_def) {
  AnchorSplit split;
  for (const auto* rec : records) {
    if (has_anchor(rec->meta.text, concept_def)) {
      split.anchored.insert(rec->meta.unit_id);
    } else {
      split.implicit.insert(rec->meta.unit_id);
    }
  }
  return split;
}

}  // namespace diachron
