#include "diachron/analysis.hpp"

#include <fmt/format.h>

#include "diachron/error.hpp"

namespace diachron {

AtlasRow atlas_cell(std::span<const ActivationRecord* const> records, const ConceptDef& concept_def,
                    const std::string& corpus, const AnalysisOptions& options) {
  const RecordView in_corpus = filter_corpus(records, corpus);
  const SalientSet salient = build_salient_set(in_corpus, concept_def, corpus, options.q);
  const RecordView members = salient.members(in_corpus);
  const auto years = distinct_years(in_corpus);

  AtlasRow row;
  row.concept_id = concept_def.concept_id;
  row.corpus = corpus;
  row.salient_threshold = salient.threshold;
  row.salient_units = members.size();

  const SliceSeries a = magnitude_series(members, concept_def, years);
  row.peak_year = peak_year(a);
  if (a.present_count() >= 2) {
    const TurningPoint tp = turning_point(a);
    row.turn_year = tp.year;
    row.turn_intensity = tp.intensity;
  }
  row.diversity = diversity_entropy(pooled_shares(members, concept_def, options.epsilon));
  try {
    row.implicit_ratio = implicit_ratio(salient, in_corpus, concept_def);
  } catch (const Error& e) {
    throw Error(fmt::format("concept '{}' in corpus '{}': {}", concept_def.concept_id, corpus, e.what()));
  }
  return row;
}

std::vector<AtlasRow> build_atlas(std::span<const ActivationRecord* const> records,
                                  std::span<const ConceptDef> concepts, const AnalysisOptions& options) {
  std::vector<AtlasRow> rows;
  const auto corpora = distinct_corpora(records);
  for (const auto& concept_def : concepts) {
    for (const auto& corpus : corpora) rows.push_back(atlas_cell(records, concept_def, corpus, options));
  }
  return rows;
}

LayerEvidence collect_layer_evidence(std::span<const ActivationRecord* const> records,
                                     const ConceptDef& concept_def, const std::string& corpus,
                                     const AnalysisOptions& options) {
  const SalientSet salient = build_salient_set(records, concept_def, corpus, options.q);
  const RecordView members = salient.members(records);
  const auto years = distinct_years(members);

  LayerEvidence out;
  out.bases = select_top_drifting(members, options.top_k);
  std::vector<std::string> texts;
  for (const auto& base : out.bases) {
    const SliceSeries mu = feature_series(members, base.feature, years);
    if (mu.present_count() < 2) continue;
    auto bundle = diachronic_evidence(members, EvidenceTarget::of_feature(base.feature), mu,
                                      options.evidence_per_year);
    for (const auto& item : bundle.items) texts.push_back(item.text);
    out.bundles.push_back(std::move(bundle));
  }
  out.fingerprint = char_2gram_fingerprint(texts);
  out.fingerprint.concept_id = concept_def.concept_id;
  out.fingerprint.corpus = corpus;
  return out;
}

std::vector<LayerRow> run_cross_layer(std::span<const LayerInput> layers, const ConceptDef& concept_def,
                                      const std::string& corpus, const AnalysisOptions& options) {
  if (layers.size() < 2) throw Error("cross-layer analysis needs at least two layers");
  std::vector<LayerRow> rows;
  std::vector<Fingerprint> fingerprints;
  for (const auto& layer : layers) {
    const RecordView in_corpus = filter_corpus(layer.records, corpus);
    const SalientSet salient = build_salient_set(in_corpus, concept_def, corpus, options.q);
    const RecordView members = salient.members(in_corpus);
    const SliceSeries a = magnitude_series(members, concept_def, distinct_years(in_corpus));

    LayerRow row;
    row.layer_tag = layer.layer_tag;
    row.peak_year = peak_year(a);
    if (a.present_count() >= 2) {
      const TurningPoint tp = turning_point(a);
      row.turn_year = tp.year;
      row.turn_intensity = tp.intensity;
    }
    LayerEvidence ev = collect_layer_evidence(in_corpus, concept_def, corpus, options);
    ev.fingerprint.layer_tag = layer.layer_tag;
    for (const auto& b : ev.bundles) row.evidence_items += b.items.size();
    row.grams = ev.fingerprint.grams.size();
    fingerprints.push_back(std::move(ev.fingerprint));
    rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].avg_jaccard = avg_jaccard(i, fingerprints);
  return rows;
}

}  // namespace diachron
