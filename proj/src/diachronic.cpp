#include "diachron/diachronic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "diachron/error.hpp"

namespace diachron {

namespace {

std::vector<double> component_means(std::span<const ActivationRecord* const> records,
                                    const ConceptDef& concept_def) {
  std::vector<double> sums(concept_def.components.size(), 0.0);
  for (const auto* rec : records) {
    for (std::size_t s = 0; s < sums.size(); ++s) {
      sums[s] += component_activation(*rec, concept_def.components[s]);
    }
  }
  for (auto& v : sums) v /= static_cast<double>(records.size());
  return sums;
}

CompositionRow make_row(const ConceptDef& concept_def, std::span<const ActivationRecord* const> records,
                        double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  CompositionRow row;
  row.concept_id = concept_def.concept_id;
  row.epsilon = epsilon;
  row.unit_count = records.size();
  const auto means = component_means(records, concept_def);
  double total = 0.0;
  for (double m : means) total += m;
  for (std::size_t s = 0; s < means.size(); ++s) {
    row.shares.push_back({concept_def.components[s].label, means[s], means[s] / (total + epsilon)});
  }
  std::set<std::string> corpora;
  for (const auto* rec : records) corpora.insert(rec->meta.corpus);
  if (corpora.size() == 1) row.corpus = *corpora.begin();
  return row;
}

std::vector<AdjacentChange> adjacent(const SliceSeries& series, bool relative) {
  const auto pts = series.present_points();
  if (pts.size() < 2) {
    throw Error(fmt::format("need at least two present slices (have {})", pts.size()));
  }
  std::vector<AdjacentChange> out;
  out.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double diff = pts[i].value - pts[i - 1].value;
    const double v = relative ? diff / (pts[i - 1].value + kRateEpsilon) : diff;
    out.push_back({pts[i - 1].year, pts[i].year, v});
  }
  return out;
}

}  // namespace

RecordView view_of(std::span<const ActivationRecord> records) {
  RecordView view;
  view.reserve(records.size());
  for (const auto& rec : records) view.push_back(&rec);
  return view;
}

RecordView filter_corpus(std::span<const ActivationRecord* const> records, const std::string& corpus) {
  RecordView out;
  for (const auto* rec : records) {
    if (rec->meta.corpus == corpus) out.push_back(rec);
  }
  return out;
}

RecordView filter_years(std::span<const ActivationRecord* const> records, int year_min, int year_max) {
  RecordView out;
  for (const auto* rec : records) {
    if (rec->meta.year >= year_min && rec->meta.year <= year_max) out.push_back(rec);
  }
  return out;
}

std::vector<int> distinct_years(std::span<const ActivationRecord* const> records) {
  std::set<int> years;
  for (const auto* rec : records) years.insert(rec->meta.year);
  return {years.begin(), years.end()};
}

std::vector<std::string> distinct_corpora(std::span<const ActivationRecord* const> records) {
  std::set<std::string> corpora;
  for (const auto* rec : records) corpora.insert(rec->meta.corpus);
  return {corpora.begin(), corpora.end()};
}

std::size_t SliceSeries::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }));
}

std::vector<SliceSeries::Point> SliceSeries::present_points() const {
  std::vector<Point> pts;
  for (std::size_t t = 0; t < years.size(); ++t) {
    if (present(t)) pts.push_back({years[t], values[t]});
  }
  return pts;
}

SliceSeries slice_mean(std::span<const ActivationRecord* const> records, const ScalarFn& scalar,
                       std::span<const int> years, SeriesKey key) {
  SliceSeries series;
  series.key = std::move(key);
  series.years.assign(years.begin(), years.end());
  if (!std::is_sorted(series.years.begin(), series.years.end()) ||
      std::adjacent_find(series.years.begin(), series.years.end()) != series.years.end()) {
    throw Error("slice years must be strictly ascending");
  }
  series.values.assign(years.size(), 0.0);
  series.counts.assign(years.size(), 0);
  for (const auto* rec : records) {
    auto it = std::lower_bound(series.years.begin(), series.years.end(), rec->meta.year);
    if (it == series.years.end() || *it != rec->meta.year) continue;
    const auto t = static_cast<std::size_t>(it - series.years.begin());
    series.values[t] += scalar(*rec);
    ++series.counts[t];
  }
  for (std::size_t t = 0; t < years.size(); ++t) {
    if (series.counts[t] > 0) series.values[t] /= static_cast<double>(series.counts[t]);
  }
  return series;
}

SliceSeries feature_series(std::span<const ActivationRecord* const> records, FeatureId feature,
                           std::span<const int> years) {
  return slice_mean(
      records, [feature](const ActivationRecord& r) { return r.z.at(feature); }, years,
      {fmt::format("feature:{}", feature), "", ""});
}

double cumulative_drift(const SliceSeries& series) {
  double total = 0.0;
  bool have_prev = false;
  double prev = 0.0;
  for (std::size_t t = 0; t < series.years.size(); ++t) {
    if (!series.present(t)) continue;
    if (have_prev) total += std::abs(series.values[t] - prev);
    prev = series.values[t];
    have_prev = true;
  }
  return total;
}

std::vector<AdjacentChange> relative_change_rate(const SliceSeries& series) {
  return adjacent(series, true);
}

std::vector<AdjacentChange> adjacent_differences(const SliceSeries& series) {
  return adjacent(series, false);
}

bool SalientSet::contains(const std::string& unit_id) const {
  return std::binary_search(unit_ids.begin(), unit_ids.end(), unit_id);
}

RecordView SalientSet::members(std::span<const ActivationRecord* const> records) const {
  RecordView out;
  out.reserve(unit_ids.size());
  for (const auto* rec : records) {
    if (rec->meta.corpus == corpus && contains(rec->meta.unit_id)) out.push_back(rec);
  }
  return out;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty sample");
  if (!(q > 0.0 && q < 1.0)) throw Error(fmt::format("quantile q={} outside (0, 1)", q));
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // q*n can land a few ulps above an integer (0.7 * 10); do not round that up.
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

SalientSet build_salient_set(std::span<const ActivationRecord* const> records,
                             const ConceptDef& concept_def, const std::string& corpus, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error(fmt::format("quantile q={} outside (0, 1)", q));
  std::vector<std::pair<const ActivationRecord*, double>> scored;
  for (const auto* rec : records) {
    if (rec->meta.corpus == corpus) scored.emplace_back(rec, concept_magnitude(*rec, concept_def));
  }
  if (scored.empty()) throw Error(fmt::format("corpus '{}' has no records", corpus));

  std::vector<double> magnitudes;
  magnitudes.reserve(scored.size());
  for (const auto& [rec, m] : scored) magnitudes.push_back(m);

  SalientSet set;
  set.concept_id = concept_def.concept_id;
  set.corpus = corpus;
  set.q = q;
  set.corpus_size = scored.size();
  set.threshold = nearest_rank_quantile(std::move(magnitudes), q);
  for (const auto& [rec, m] : scored) {
    if (m >= set.threshold) set.unit_ids.push_back(rec->meta.unit_id);
  }
  std::sort(set.unit_ids.begin(), set.unit_ids.end());
  return set;
}

std::vector<DriftEntry> select_top_drifting(std::span<const ActivationRecord* const> records,
                                            std::size_t n, const SalientSet* conditioning) {
  if (n < 1) throw Error("n must be >= 1");
  RecordView owned;
  std::span<const ActivationRecord* const> view = records;
  if (conditioning) {
    owned = conditioning->members(records);
    view = owned;
  }
  const auto years = distinct_years(view);
  if (years.empty()) return {};
  std::vector<std::uint64_t> counts(years.size(), 0);

  // Per-feature sums for each present year, accumulated in record order.
  std::unordered_map<FeatureId, std::vector<double>> sums;
  for (const auto* rec : view) {
    const auto t = static_cast<std::size_t>(
        std::lower_bound(years.begin(), years.end(), rec->meta.year) - years.begin());
    ++counts[t];
    for (std::size_t i = 0; i < rec->z.nnz(); ++i) {
      auto& row = sums[rec->z.indices[i]];
      if (row.empty()) row.assign(years.size(), 0.0);
      row[t] += rec->z.values[i];
    }
  }

  std::vector<DriftEntry> ranked;
  ranked.reserve(sums.size());
  for (const auto& [feature, row] : sums) {
    double drift = 0.0;
    double prev = row[0] / static_cast<double>(counts[0]);
    for (std::size_t t = 1; t < years.size(); ++t) {
      const double mean = row[t] / static_cast<double>(counts[t]);
      drift += std::abs(mean - prev);
      prev = mean;
    }
    ranked.push_back({feature, drift});
  }
  auto better = [](const DriftEntry& a, const DriftEntry& b) {
    if (a.drift != b.drift) return a.drift > b.drift;
    return a.feature < b.feature;
  };
  if (ranked.size() > n) {
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(),
                      better);
    ranked.resize(n);
  } else {
    std::sort(ranked.begin(), ranked.end(), better);
  }
  return ranked;
}

double CompositionRow::component_sum() const {
  double total = 0.0;
  for (const auto& s : shares) total += s.mean;
  return total;
}

CompositionRow pooled_shares(std::span<const ActivationRecord* const> records,
                             const ConceptDef& concept_def, double epsilon) {
  if (records.empty()) throw Error("cannot compute shares over an empty record set");
  return make_row(concept_def, records, epsilon);
}

std::optional<CompositionRow> orientation_shares(std::span<const ActivationRecord* const> records,
                                                 const ConceptDef& concept_def, int year,
                                                 double epsilon) {
  const RecordView slice = filter_years(records, year, year);
  if (slice.empty()) return std::nullopt;
  CompositionRow row = make_row(concept_def, slice, epsilon);
  row.year = year;
  return row;
}

std::vector<CompositionRow> composition_series(std::span<const ActivationRecord* const> records,
                                               const ConceptDef& concept_def,
                                               std::span<const int> years, double epsilon) {
  std::vector<CompositionRow> rows;
  for (int y : years) {
    if (auto row = orientation_shares(records, concept_def, y, epsilon)) rows.push_back(std::move(*row));
  }
  return rows;
}

double diversity_entropy(const CompositionRow& row) {
  if (row.shares.empty()) throw Error("composition has no components");
  if (row.shares.size() == 1) return 0.0;
  double h = 0.0;
  for (const auto& s : row.shares) {
    if (s.share > 0.0) h -= s.share * std::log(s.share);
  }
  return h / std::log(static_cast<double>(row.shares.size()));
}

double reorganization_delta(const CompositionRow& previous, const CompositionRow& current) {
  if (previous.shares.size() != current.shares.size()) {
    throw Error("composition rows have different components");
  }
  double delta = 0.0;
  for (std::size_t s = 0; s < current.shares.size(); ++s) {
    if (previous.shares[s].label != current.shares[s].label) {
      throw Error(fmt::format("component label mismatch: '{}' vs '{}'", previous.shares[s].label,
                              current.shares[s].label));
    }
    delta += std::abs(current.shares[s].share - previous.shares[s].share);
  }
  return delta;
}

SliceSeries magnitude_series(std::span<const ActivationRecord* const> records,
                             const ConceptDef& concept_def, std::span<const int> years) {
  return slice_mean(
      records, [&](const ActivationRecord& r) { return concept_magnitude(r, concept_def); }, years,
      {fmt::format("magnitude:{}", concept_def.concept_id), "", ""});
}

std::vector<SliceSeries> component_series(std::span<const ActivationRecord* const> records,
                                          const ConceptDef& concept_def, std::span<const int> years) {
  std::vector<SliceSeries> out;
  for (const auto& comp : concept_def.components) {
    out.push_back(slice_mean(
        records, [&](const ActivationRecord& r) { return component_activation(r, comp); }, years,
        {fmt::format("component:{}/{}", concept_def.concept_id, comp.label), "", ""}));
  }
  return out;
}

int peak_year(const SliceSeries& series) {
  std::optional<std::size_t> best;
  for (std::size_t t = 0; t < series.years.size(); ++t) {
    if (!series.present(t)) continue;
    if (!best || series.values[t] > series.values[*best]) best = t;
  }
  if (!best) throw Error("peak year undefined: no present slices");
  return series.years[*best];
}

TurningPoint turning_point(const SliceSeries& series) {
  const auto pts = series.present_points();
  if (pts.size() < 2) throw Error("turning point undefined: fewer than two present slices");
  TurningPoint tp{pts[1].year, pts[0].year, pts[1].value - pts[0].value};
  for (std::size_t i = 2; i < pts.size(); ++i) {
    const double diff = pts[i].value - pts[i - 1].value;
    if (std::abs(diff) > std::abs(tp.intensity)) tp = {pts[i].year, pts[i - 1].year, diff};
  }
  return tp;
}

double implicit_ratio(const SalientSet& salient, std::span<const ActivationRecord* const> records,
                      const ConceptDef& concept_def) {
  const RecordView members = salient.members(records);
  const AnchorSplit split = split_by_anchor(members, concept_def);
  double total = 0.0;
  double implicit = 0.0;
  for (const auto* rec : members) {
    const double m = concept_magnitude(*rec, concept_def);
    total += m;
    if (split.implicit.count(rec->meta.unit_id)) implicit += m;
  }
  if (!(total > 0.0)) throw Error("empty salient mass");
  return implicit / total;
}

std::string YearRange::label() const {
  return lo == hi ? fmt::format("{}", lo) : fmt::format("{}-{}", lo, hi);
}

WindowDelta window_share_delta(std::span<const ActivationRecord* const> records,
                               const ConceptDef& concept_def, YearRange window_a,
                               YearRange window_b, double epsilon) {
  for (const auto& w : {window_a, window_b}) {
    if (w.lo > w.hi) throw Error(fmt::format("invalid window {}..{}", w.lo, w.hi));
  }
  const RecordView in_a = filter_years(records, window_a.lo, window_a.hi);
  const RecordView in_b = filter_years(records, window_b.lo, window_b.hi);
  if (in_a.empty()) throw Error(fmt::format("empty window {}", window_a.label()));
  if (in_b.empty()) throw Error(fmt::format("empty window {}", window_b.label()));

  WindowDelta out;
  out.concept_id = concept_def.concept_id;
  out.window_a = window_a;
  out.window_b = window_b;
  out.shares_a = pooled_shares(in_a, concept_def, epsilon);
  out.shares_b = pooled_shares(in_b, concept_def, epsilon);
  out.corpus = out.shares_a.corpus == out.shares_b.corpus ? out.shares_a.corpus : std::string();
  for (std::size_t s = 0; s < out.shares_a.shares.size(); ++s) {
    out.deltas.push_back(
        {out.shares_a.shares[s].label, out.shares_b.shares[s].share - out.shares_a.shares[s].share});
  }
  return out;
}

}  // namespace diachron
