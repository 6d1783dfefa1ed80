#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "diachron/activation_store.hpp"
#include "diachron/concepts.hpp"

namespace fixtures {

using diachron::ActivationRecord;
using diachron::ConceptDef;
using diachron::FeatureId;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "diachron");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

ActivationRecord rec(std::string unit_id, int year, std::string corpus, std::string text, std::uint32_t dim,
                     std::vector<std::pair<FeatureId, double>> entries);

ConceptDef concept_of(std::string id, std::vector<std::string> lexemes,
                      std::vector<std::pair<std::string, std::vector<FeatureId>>> components);

/// Random store within the acceptance bounds: dim <= 64, kappa <= 8,
/// <= 500 units, <= 10 years, <= 3 corpora, <= 4 concepts.
struct RandomCase {
  std::uint32_t dim = 0;
  std::vector<ActivationRecord> records;
  std::vector<ConceptDef> concepts;
};

RandomCase random_case(std::uint64_t seed);

/// Same units as `base` with freshly drawn activations (another "layer").
std::vector<ActivationRecord> relayer(const RandomCase& base, std::uint64_t seed);

/// Dense store over years 1915..1924 where every feature is 1 + N(0, 0.1)
/// except `feature`, which is 1 + N(0, 0.1) before `step_year` and
/// 6 + N(0, 0.1) from it on.
std::vector<ActivationRecord> planted_drift_store(std::uint64_t seed, std::uint32_t dim, FeatureId feature,
                                                  int step_year, std::size_t units_per_year);

/// Multiplies every stored value by `c`.
std::vector<ActivationRecord> scaled(std::vector<ActivationRecord> records, double c);

}  // namespace fixtures
