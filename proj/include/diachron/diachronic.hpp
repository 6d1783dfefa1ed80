#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diachron/activation_store.hpp"
#include "diachron/concepts.hpp"

namespace diachron {

/// Non-owning view of records, kept in canonical (year, unit_id) order.
using RecordView = std::vector<const ActivationRecord*>;

RecordView view_of(std::span<const ActivationRecord> records);
RecordView filter_corpus(std::span<const ActivationRecord* const> records, const std::string& corpus);
RecordView filter_years(std::span<const ActivationRecord* const> records, int year_min, int year_max);

/// Distinct years present in `records`, ascending.
std::vector<int> distinct_years(std::span<const ActivationRecord* const> records);
/// Sorted distinct corpus names.
std::vector<std::string> distinct_corpora(std::span<const ActivationRecord* const> records);

inline constexpr double kDefaultQuantile = 0.95;
inline constexpr double kDefaultEpsilon = 1e-9;
inline constexpr double kRateEpsilon = 1e-9;

struct SeriesKey {
  std::string scope;         // "feature:7", "component:individual/Actorhood", "magnitude:individual"
  std::string corpus;        // empty when the conditioning set spans corpora
  std::string conditioning;  // "all", "salient(q=0.95)", ...
};

/// Per-slice means. A slice with count 0 is absent: its value is stored as 0
/// and it is skipped by drift, peak and turn computations.
struct SliceSeries {
  SeriesKey key;
  std::vector<int> years;
  std::vector<double> values;
  std::vector<std::uint64_t> counts;

  bool present(std::size_t t) const { return counts[t] > 0; }
  std::size_t present_count() const;

  struct Point {
    int year;
    double value;
  };
  std::vector<Point> present_points() const;
};

using ScalarFn = std::function<double(const ActivationRecord&)>;

/// Mean of `scalar` per year over `records`, accumulated in record order.
/// Records whose year is not in `years` are ignored.
SliceSeries slice_mean(std::span<const ActivationRecord* const> records, const ScalarFn& scalar,
                       std::span<const int> years, SeriesKey key = {});

SliceSeries feature_series(std::span<const ActivationRecord* const> records, FeatureId feature,
                           std::span<const int> years);

/// Sum of |mu_t - mu_prev| over consecutive present slices.
double cumulative_drift(const SliceSeries& series);

struct AdjacentChange {
  int from_year;
  int to_year;
  double value;
};

/// (mu_t - mu_prev) / (mu_prev + 1e-9) for consecutive present slices.
/// Throws with fewer than two present slices.
std::vector<AdjacentChange> relative_change_rate(const SliceSeries& series);

/// Signed mu_t - mu_prev for consecutive present slices.
std::vector<AdjacentChange> adjacent_differences(const SliceSeries& series);

struct SalientSet {
  std::string concept_id;
  std::string corpus;
  double q = kDefaultQuantile;
  double threshold = 0.0;
  std::uint64_t corpus_size = 0;
  std::vector<std::string> unit_ids;  // sorted

  bool contains(const std::string& unit_id) const;

  /// Members of `records` (matching corpus and unit_id), in record order.
  RecordView members(std::span<const ActivationRecord* const> records) const;
};

/// Nearest-rank quantile: the ceil(q*n)-th smallest value (1-based).
double nearest_rank_quantile(std::vector<double> values, double q);

SalientSet build_salient_set(std::span<const ActivationRecord* const> records,
                             const ConceptDef& concept_def, const std::string& corpus,
                             double q = kDefaultQuantile);

struct DriftEntry {
  FeatureId feature;
  double drift;

  friend bool operator==(const DriftEntry&, const DriftEntry&) = default;
};

/// Features ranked by cumulative drift (descending, ties by ascending id)
/// over the conditioning set: the salient members when `conditioning` is
/// given, otherwise all `records`. Features never active are not ranked.
std::vector<DriftEntry> select_top_drifting(std::span<const ActivationRecord* const> records,
                                            std::size_t n, const SalientSet* conditioning = nullptr);

struct ComponentShare {
  std::string label;
  double mean = 0.0;
  double share = 0.0;
};

struct CompositionRow {
  std::string concept_id;
  std::string corpus;
  std::optional<int> year;  // nullopt for pooled (multi-year) rows
  std::uint64_t unit_count = 0;
  double epsilon = kDefaultEpsilon;
  std::vector<ComponentShare> shares;  // component order of the concept

  double component_sum() const;
};

/// Pools every record in `records` into one pseudo-slice and converts the
/// component means into shares mu_s / (sum mu + epsilon).
/// Throws on an empty record set.
CompositionRow pooled_shares(std::span<const ActivationRecord* const> records,
                             const ConceptDef& concept_def, double epsilon = kDefaultEpsilon);

/// Shares for one year of `records` (the salient members); nullopt when the
/// slice is empty.
std::optional<CompositionRow> orientation_shares(std::span<const ActivationRecord* const> records,
                                                 const ConceptDef& concept_def, int year,
                                                 double epsilon = kDefaultEpsilon);

/// Rows for every present year in `years`.
std::vector<CompositionRow> composition_series(std::span<const ActivationRecord* const> records,
                                               const ConceptDef& concept_def,
                                               std::span<const int> years,
                                               double epsilon = kDefaultEpsilon);

/// Normalized entropy of the shares; 0 for a single-component concept.
double diversity_entropy(const CompositionRow& row);

/// Sum_s |p_s(b) - p_s(a)|; throws when component labels differ.
double reorganization_delta(const CompositionRow& previous, const CompositionRow& current);

/// Magnitude series A: per-year mean of m_i over `records`.
SliceSeries magnitude_series(std::span<const ActivationRecord* const> records,
                             const ConceptDef& concept_def, std::span<const int> years);

std::vector<SliceSeries> component_series(std::span<const ActivationRecord* const> records,
                                          const ConceptDef& concept_def, std::span<const int> years);

/// Argmax over present slices, ties to the earliest year.
int peak_year(const SliceSeries& series);

struct TurningPoint {
  int year;
  int previous_year;
  double intensity;  // A_year - A_previous_year
};

/// Largest |A_t - A_prev| over consecutive present slices, ties to the
/// earliest. Throws "turning point undefined" with fewer than two slices.
TurningPoint turning_point(const SliceSeries& series);

/// Share of salient concept mass carried by units without any lexeme.
/// Throws "empty salient mass" when the salient mass is zero.
double implicit_ratio(const SalientSet& salient, std::span<const ActivationRecord* const> records,
                      const ConceptDef& concept_def);

struct YearRange {
  int lo;
  int hi;

  bool contains(int year) const { return year >= lo && year <= hi; }
  std::string label() const;
};

struct WindowDelta {
  std::string concept_id;
  std::string corpus;
  YearRange window_a;
  YearRange window_b;
  CompositionRow shares_a;
  CompositionRow shares_b;

  struct Entry {
    std::string label;
    double delta;
  };
  std::vector<Entry> deltas;  // share_b - share_a per component
};

/// Pools the conditioning set within each window into one pseudo-slice and
/// differences the shares. Throws when either window holds no records.
WindowDelta window_share_delta(std::span<const ActivationRecord* const> records,
                               const ConceptDef& concept_def, YearRange window_a,
                               YearRange window_b, double epsilon = kDefaultEpsilon);

}  // namespace diachron
