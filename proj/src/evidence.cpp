#include "diachron/evidence.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "diachron/error.hpp"

namespace diachron {

std::string to_string(EvidenceRule rule) {
  return rule == EvidenceRule::diachronic_peak_pair ? "diachronic_peak_pair" : "cross_corpus_top30";
}

EvidenceTarget EvidenceTarget::of_feature(FeatureId feature) {
  EvidenceTarget t;
  t.feature = feature;
  return t;
}

EvidenceTarget EvidenceTarget::of_component(ConceptComponent component) {
  EvidenceTarget t;
  t.component = std::move(component);
  return t;
}

double EvidenceTarget::score(const ActivationRecord& record) const {
  if (feature) return record.z.at(*feature);
  if (component) return component_activation(record, *component);
  throw Error("evidence target is empty");
}

std::string EvidenceTarget::describe() const {
  if (feature) return fmt::format("feature:{}", *feature);
  if (component) return fmt::format("component:{}", component->label);
  return "none";
}

std::pair<int, int> peak_adjacent_pair(const SliceSeries& series) {
  const auto pts = series.present_points();
  if (pts.size() < 2) throw Error("peak adjacent pair undefined: fewer than two present slices");
  std::size_t best = 1;
  double best_abs = std::abs(pts[1].value - pts[0].value);
  for (std::size_t i = 2; i < pts.size(); ++i) {
    const double d = std::abs(pts[i].value - pts[i - 1].value);
    if (d > best_abs) {
      best_abs = d;
      best = i;
    }
  }
  return {pts[best - 1].year, pts[best].year};
}

std::vector<EvidenceItem> top_activating(std::span<const ActivationRecord* const> records,
                                         const EvidenceTarget& target, std::size_t n,
                                         const EvidenceFilter& filter) {
  if (n < 1) throw Error("n must be >= 1");
  std::vector<std::pair<double, const ActivationRecord*>> scored;
  for (const auto* rec : records) {
    if (filter.year_min && rec->meta.year < *filter.year_min) continue;
    if (filter.year_max && rec->meta.year > *filter.year_max) continue;
    if (filter.corpus && rec->meta.corpus != *filter.corpus) continue;
    const double s = target.score(*rec);
    if (s > 0.0) scored.emplace_back(s, rec);
  }
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    if (a.second->meta.unit_id != b.second->meta.unit_id) {
      return a.second->meta.unit_id < b.second->meta.unit_id;
    }
    return a.second->meta.corpus < b.second->meta.corpus;
  };
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    better);
  std::vector<EvidenceItem> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const auto* rec = scored[i].second;
    out.push_back({rec->meta.unit_id, rec->meta.corpus, rec->meta.year, scored[i].first, rec->meta.text});
  }
  return out;
}

EvidenceBundle diachronic_evidence(std::span<const ActivationRecord* const> records,
                                   const EvidenceTarget& target, const SliceSeries& series,
                                   std::size_t per_year) {
  EvidenceBundle bundle;
  bundle.target = target.describe();
  bundle.rule = EvidenceRule::diachronic_peak_pair;
  const auto [y1, y2] = peak_adjacent_pair(series);
  bundle.year_pair = {y1, y2};
  for (int y : {y1, y2}) {
    auto items = top_activating(records, target, per_year, {y, y, std::nullopt});
    bundle.items.insert(bundle.items.end(), std::make_move_iterator(items.begin()),
                        std::make_move_iterator(items.end()));
  }
  bundle.display_count = bundle.items.size();
  return bundle;
}

EvidenceBundle cross_corpus_evidence(std::span<const ActivationRecord* const> records,
                                     const EvidenceTarget& target, std::size_t pool,
                                     std::size_t display) {
  EvidenceBundle bundle;
  bundle.target = target.describe();
  bundle.rule = EvidenceRule::cross_corpus_top30;
  bundle.items = top_activating(records, target, pool);
  bundle.display_count = std::min(display, bundle.items.size());
  return bundle;
}

}  // namespace diachron
