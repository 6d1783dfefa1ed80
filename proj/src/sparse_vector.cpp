#include "diachron/sparse_vector.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "diachron/error.hpp"

namespace diachron {

double SparseVector::at(FeatureId feature) const {
  auto it = std::lower_bound(indices.begin(), indices.end(), feature);
  if (it == indices.end() || *it != feature) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

bool SparseVector::contains(FeatureId feature) const {
  return std::binary_search(indices.begin(), indices.end(), feature);
}

std::optional<std::string> SparseVector::check() const {
  if (dim == 0) return "dim must be positive";
  if (indices.size() != values.size()) {
    return fmt::format("indices/values length mismatch ({} vs {})", indices.size(),
                       values.size());
  }
  if (indices.size() > dim) return "nnz exceeds dim";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= dim) {
      return fmt::format("index out of range ({} >= dim {})", indices[i], dim);
    }
    if (i > 0 && indices[i] <= indices[i - 1]) return std::string("non-ascending indices");
    if (!std::isfinite(values[i])) return std::string("non-finite value");
    if (values[i] <= 0.0) return std::string("non-positive value");
  }
  return std::nullopt;
}

void SparseVector::validate() const {
  if (auto err = check()) throw Error(*err);
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = values[i];
  return out;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector v;
  v.dim = static_cast<std::uint32_t>(dense.size());
  for (std::size_t m = 0; m < dense.size(); ++m) {
    if (dense[m] > 0.0) {
      v.indices.push_back(static_cast<FeatureId>(m));
      v.values.push_back(dense[m]);
    }
  }
  return v;
}

SparseVector max_pool_tokens(std::span<const SparseVector> tokens) {
  if (tokens.empty()) throw Error("no tokens");
  const std::uint32_t dim = tokens.front().dim;
  for (const auto& t : tokens) {
    if (t.dim != dim) {
      throw Error(fmt::format("token dim mismatch ({} vs {})", t.dim, dim));
    }
  }
  if (tokens.size() == 1) return tokens.front();

  // k-way merge by feature id; supports are small relative to dim.
  std::vector<std::pair<FeatureId, double>> entries;
  std::size_t total = 0;
  for (const auto& t : tokens) total += t.nnz();
  entries.reserve(total);
  for (const auto& t : tokens) {
    for (std::size_t i = 0; i < t.nnz(); ++i) entries.emplace_back(t.indices[i], t.values[i]);
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  SparseVector out;
  out.dim = dim;
  for (const auto& [feature, value] : entries) {
    if (!out.indices.empty() && out.indices.back() == feature) {
      out.values.back() = std::max(out.values.back(), value);
    } else {
      out.indices.push_back(feature);
      out.values.push_back(value);
    }
  }
  return out;
}

}  // namespace diachron
