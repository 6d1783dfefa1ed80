#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diachron/comparative.hpp"
#include "diachron/evidence.hpp"

namespace diachron {

/// Tunables shared by the analysis commands.
struct AnalysisOptions {
  double q = kDefaultQuantile;
  double epsilon = kDefaultEpsilon;
  std::size_t top_k = kDefaultTopK;
  std::size_t evidence_per_year = kEvidencePerYear;
  std::size_t pool = kEvidencePool;
  std::size_t display = kEvidenceDisplay;
};

/// Summary statistics of one (concept, corpus) cell.
struct AtlasRow {
  std::string concept_id;
  std::string corpus;
  double implicit_ratio = 0.0;
  double diversity = 0.0;  // H of the shares pooled over the full range
  int peak_year = 0;
  std::optional<int> turn_year;
  std::optional<double> turn_intensity;
  double salient_threshold = 0.0;
  std::size_t salient_units = 0;
};

AtlasRow atlas_cell(std::span<const ActivationRecord* const> records, const ConceptDef& concept_def,
                    const std::string& corpus, const AnalysisOptions& options = {});

/// One row per (concept, corpus); concepts in config order, corpora sorted.
std::vector<AtlasRow> build_atlas(std::span<const ActivationRecord* const> records,
                                  std::span<const ConceptDef> concepts,
                                  const AnalysisOptions& options = {});

/// Evidence collected for one layer: diachronic bundles of the top drifting
/// bases and their 2-gram fingerprint.
struct LayerEvidence {
  std::vector<DriftEntry> bases;
  std::vector<EvidenceBundle> bundles;
  Fingerprint fingerprint;
};

LayerEvidence collect_layer_evidence(std::span<const ActivationRecord* const> records,
                                     const ConceptDef& concept_def, const std::string& corpus,
                                     const AnalysisOptions& options = {});

struct LayerInput {
  std::string layer_tag;
  RecordView records;
};

struct LayerRow {
  std::string layer_tag;
  int peak_year = 0;
  std::optional<int> turn_year;
  std::optional<double> turn_intensity;
  double avg_jaccard = 0.0;
  std::size_t evidence_items = 0;
  std::size_t grams = 0;
};

/// Reruns peak/turn and evidence fingerprinting per layer, then scores each
/// layer's fingerprint against the others. Needs at least two layers.
std::vector<LayerRow> run_cross_layer(std::span<const LayerInput> layers, const ConceptDef& concept_def,
                                      const std::string& corpus, const AnalysisOptions& options = {});

}  // namespace diachron
