#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diachron {

using FeatureId = std::uint32_t;

/// Sparse activation vector over a feature space of size `dim`.
///
/// Indices are strictly ascending and every stored value is > 0; an all-zero
/// activation has empty `indices` and `values`.
struct SparseVector {
  std::uint32_t dim = 0;
  std::vector<FeatureId> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }

  /// Value at `feature`, 0 when absent. Binary search over the support.
  double at(FeatureId feature) const;

  bool contains(FeatureId feature) const;

  /// First invariant violation, or nullopt if the vector is well-formed.
  std::optional<std::string> check() const;

  /// Throws diachron::Error when check() fails.
  void validate() const;

  std::vector<double> to_dense() const;

  /// Keeps strictly positive entries of a dense vector.
  static SparseVector from_dense(std::span<const double> dense);

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// Sentence-level vector as the elementwise max over token vectors.
///
/// Throws on an empty token list ("no tokens") or mismatched dims.
SparseVector max_pool_tokens(std::span<const SparseVector> tokens);

}  // namespace diachron
