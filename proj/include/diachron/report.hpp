#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "diachron/analysis.hpp"

namespace diachron {

// Every analysis result is first built as a JSON document carrying a "kind"
// field; the CSV, Markdown and SVG renderers read only that document, so a
// saved JSON output can be re-rendered later with `diachron report`.

enum class ReportFormat { csv, json, svg, md };

ReportFormat parse_report_format(const std::string& text);
std::string to_string(ReportFormat format);

using Json = nlohmann::ordered_json;

Json validation_json(const std::string& store, const ValidationReport& report);
Json atlas_json(const std::vector<AtlasRow>& rows, const AnalysisOptions& options);
Json drift_json(const std::vector<DriftEntry>& ranking, const std::string& corpus,
                const std::string& conditioning);
Json series_json(const SliceSeries& series);
Json trajectory_json(const std::vector<SliceSeries>& series, bool with_rates);
Json shares_json(const ConceptDef& concept_def, const std::string& corpus,
                 const std::vector<CompositionRow>& rows, const CompositionRow& pooled);
Json window_delta_json(const std::vector<WindowDelta>& contrasts, const std::string& conditioning);
Json overlap_json(const DriftTopSet& a, const DriftTopSet& b);
Json cross_layer_json(const std::string& concept_id, const std::string& corpus,
                      const std::vector<LayerRow>& rows);
Json evidence_json(const std::vector<EvidenceBundle>& bundles);

/// Explicit (anchored) vs implicit split of a salient set.
struct ImplicitSummary {
  std::string concept_id;
  std::string corpus;
  double q = kDefaultQuantile;
  double threshold = 0.0;
  std::size_t salient_units = 0;
  std::size_t anchored_units = 0;
  std::size_t implicit_units = 0;
  double anchored_mass = 0.0;
  double implicit_mass = 0.0;
  double implicit_ratio = 0.0;
  std::vector<SliceSeries> series;  // per component, explicit then implicit
};

ImplicitSummary summarize_implicit(std::span<const ActivationRecord* const> records,
                                   const ConceptDef& concept_def, const std::string& corpus,
                                   double q = kDefaultQuantile);
Json implicit_json(const ImplicitSummary& summary);

/// Renders a kind-tagged document; throws for unknown kinds or a format the
/// kind does not support.
std::string render_report(const Json& doc, ReportFormat format);

/// Renders and writes to `out_path`; throws when the path is not writable.
void emit_report(const Json& doc, ReportFormat format, const std::filesystem::path& out_path);

/// Standalone renderers, also used by render_report.
std::string render_line_chart_svg(const std::string& title, const std::vector<SliceSeries>& series);
std::string render_heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                               const std::vector<std::string>& column_labels,
                               const std::vector<std::vector<std::optional<double>>>& cells);
std::string render_evidence_markdown(const std::vector<EvidenceBundle>& bundles);

}  // namespace diachron
