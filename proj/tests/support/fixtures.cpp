#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "diachron/synthetic.hpp"

namespace fixtures {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto candidate = fs::temp_directory_path() / (tag + "-" + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ActivationRecord rec(std::string unit_id, int year, std::string corpus, std::string text, std::uint32_t dim,
                     std::vector<std::pair<FeatureId, double>> entries) {
  std::sort(entries.begin(), entries.end());
  ActivationRecord r;
  r.meta = {std::move(unit_id), std::move(corpus), year, std::move(text)};
  r.z.dim = dim;
  for (const auto& [f, v] : entries) {
    r.z.indices.push_back(f);
    r.z.values.push_back(v);
  }
  return r;
}

ConceptDef concept_of(std::string id, std::vector<std::string> lexemes,
                      std::vector<std::pair<std::string, std::vector<FeatureId>>> components) {
  ConceptDef c;
  c.concept_id = id;
  c.name = std::move(id);
  c.lexemes = std::move(lexemes);
  for (auto& [label, bases] : components) {
    std::sort(bases.begin(), bases.end());
    c.components.push_back({label, bases});
  }
  return c;
}

RandomCase random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 13);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  RandomCase out;
  out.dim = static_cast<std::uint32_t>(pick(16, 64));
  const auto n_concepts = static_cast<std::size_t>(std::min(pick(1, 4), static_cast<int>(out.dim / 12)));
  out.concepts = diachron::synthetic_concepts(out.dim, n_concepts, seed);

  diachron::SyntheticSpec spec;
  spec.dim = out.dim;
  spec.kappa = static_cast<std::uint32_t>(pick(1, 8));
  spec.units = static_cast<std::size_t>(pick(30, 500));
  spec.year_min = 1915;
  spec.year_max = 1915 + pick(0, 9);
  const int n_corpora = pick(1, 3);
  spec.corpora.clear();
  for (int c = 0; c < n_corpora; ++c) spec.corpora.push_back("corpus" + std::to_string(c));
  spec.hot_probability = std::uniform_real_distribution<double>(0.2, 0.6)(rng);
  spec.lexeme_probability = 0.3;
  spec.seed = seed;
  for (const auto& c : out.concepts) {
    for (auto f : c.all_bases()) spec.hot_features.push_back(f);
    spec.lexemes.insert(spec.lexemes.end(), c.lexemes.begin(), c.lexemes.end());
  }
  out.records = diachron::synthetic_records(spec);
  return out;
}

std::vector<ActivationRecord> relayer(const RandomCase& base, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(0.5);
  std::uniform_real_distribution<double> value(0.05, 10.0);
  std::uniform_int_distribution<FeatureId> feat(0, base.dim - 1);
  std::vector<ActivationRecord> out = base.records;
  for (auto& r : out) {
    std::vector<double> dense = r.z.to_dense();
    for (auto& v : dense) {
      if (v > 0.0 && !keep(rng)) v = 0.0;
    }
    for (int i = 0; i < 4; ++i) dense[feat(rng)] = diachron::round_to_f32(value(rng));
    r.z = diachron::SparseVector::from_dense(dense);
    r.z.dim = base.dim;
  }
  return out;
}

std::vector<ActivationRecord> planted_drift_store(std::uint64_t seed, std::uint32_t dim, FeatureId feature,
                                                  int step_year, std::size_t units_per_year) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::vector<ActivationRecord> out;
  std::size_t u = 0;
  for (int year = 1915; year <= 1924; ++year) {
    for (std::size_t i = 0; i < units_per_year; ++i, ++u) {
      ActivationRecord r;
      r.meta = {"u" + std::to_string(1000000 + u), "planted", year, "text"};
      r.z.dim = dim;
      for (FeatureId f = 0; f < dim; ++f) {
        const double base = (f == feature && year >= step_year) ? 6.0 : 1.0;
        r.z.indices.push_back(f);
        r.z.values.push_back(diachron::round_to_f32(std::max(base + noise(rng), 1e-3)));
      }
      out.push_back(std::move(r));
    }
  }
  diachron::sort_canonical(out);
  return out;
}

std::vector<ActivationRecord> scaled(std::vector<ActivationRecord> records, double c) {
  for (auto& r : records) {
    for (auto& v : r.z.values) v *= c;
  }
  return records;
}

}  // namespace fixtures
