#include "diachron/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "diachron/comparative.hpp"
#include "diachron/error.hpp"

namespace diachron {

namespace {

const std::u32string& text_pool() {
  static const std::u32string pool =
      U"个人社会国家世界民族革命思想自由青年政治经济文化主义阶级组织运动帝国新旧道德科学民主劳动"
      U"的是在了和与之其而于以为有不此我们他也就都要说";
  return pool;
}

std::string pick_text(std::mt19937_64& rng, std::size_t length) {
  const auto& pool = text_pool();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::bernoulli_distribution space(0.05);
  std::u32string out;
  for (std::size_t i = 0; i < length; ++i) {
    out += pool[pick(rng)];
    if (space(rng)) out += U' ';
  }
  return encode_utf8(std::span<const char32_t>(out.data(), out.size()));
}

SparseVector random_support(std::mt19937_64& rng, const SyntheticSpec& spec) {
  std::set<FeatureId> support;
  if (spec.kappa >= spec.dim) {
    for (FeatureId f = 0; f < spec.dim; ++f) support.insert(f);
  } else {
    std::uniform_int_distribution<FeatureId> feat(0, spec.dim - 1);
    while (support.size() < spec.kappa) support.insert(feat(rng));
  }
  std::bernoulli_distribution hot(spec.hot_probability);
  for (FeatureId f : spec.hot_features) {
    if (hot(rng)) support.insert(f);
  }
  std::uniform_real_distribution<double> value(spec.value_min, spec.value_max);
  SparseVector z;
  z.dim = spec.dim;
  for (FeatureId f : support) {
    z.indices.push_back(f);
    z.values.push_back(round_to_f32(value(rng)));
  }
  return z;
}

UnitMeta random_meta(std::mt19937_64& rng, const SyntheticSpec& spec, std::size_t u) {
  std::uniform_int_distribution<int> year(spec.year_min, spec.year_max);
  std::uniform_int_distribution<std::size_t> corpus(0, spec.corpora.size() - 1);
  std::uniform_int_distribution<std::size_t> length(8, 40);
  std::bernoulli_distribution with_lexeme(spec.lexeme_probability);
  UnitMeta meta;
  meta.unit_id = fmt::format("u{:07d}", u);
  meta.year = year(rng);
  meta.corpus = spec.corpora[corpus(rng)];
  meta.text = pick_text(rng, length(rng));
  if (!spec.lexemes.empty() && with_lexeme(rng)) {
    std::uniform_int_distribution<std::size_t> lex(0, spec.lexemes.size() - 1);
    meta.text += spec.lexemes[lex(rng)];
    meta.text += pick_text(rng, 4);
  }
  return meta;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.dim == 0) throw Error("synthetic dim must be positive");
  if (spec.corpora.empty()) throw Error("synthetic spec needs at least one corpus");
  if (spec.year_min > spec.year_max) throw Error("synthetic year range is empty");
  if (!(spec.value_min > 0.0) || spec.value_max < spec.value_min) {
    throw Error("synthetic value range must be positive");
  }
  for (FeatureId f : spec.hot_features) {
    if (f >= spec.dim) throw Error(fmt::format("hot feature {} outside dim {}", f, spec.dim));
  }
}

}  // namespace

std::string synthetic_text(std::uint64_t seed, std::size_t length) {
  std::mt19937_64 rng(seed);
  return pick_text(rng, length);
}

std::vector<ActivationRecord> synthetic_records(const SyntheticSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::vector<ActivationRecord> out;
  out.reserve(spec.units);
  for (std::size_t u = 0; u < spec.units; ++u) {
    ActivationRecord rec;
    rec.meta = random_meta(rng, spec, u);
    rec.z = random_support(rng, spec);
    out.push_back(std::move(rec));
  }
  sort_canonical(out);
  return out;
}

std::vector<ConceptDef> synthetic_concepts(std::uint32_t dim, std::size_t n_concepts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FeatureId> pool(dim);
  std::iota(pool.begin(), pool.end(), FeatureId{0});
  std::shuffle(pool.begin(), pool.end(), rng);
  std::size_t next = 0;

  std::uniform_int_distribution<int> n_components(1, 4);
  std::uniform_int_distribution<int> n_bases(1, 3);
  std::vector<ConceptDef> out;
  for (std::size_t c = 0; c < n_concepts; ++c) {
    ConceptDef def;
    def.concept_id = fmt::format("concept{}", c);
    def.name = def.concept_id;
    def.lexemes.push_back(pick_text(rng, 2));
    const int comps = n_components(rng);
    for (int s = 0; s < comps; ++s) {
      ConceptComponent comp;
      comp.label = fmt::format("C{}.{}", c, s);
      const int nb = n_bases(rng);
      for (int b = 0; b < nb && next < pool.size(); ++b) comp.bases.push_back(pool[next++]);
      if (comp.bases.empty()) break;
      std::sort(comp.bases.begin(), comp.bases.end());
      def.components.push_back(std::move(comp));
    }
    if (def.components.empty()) throw Error("feature space too small for synthetic concepts");
    def.validate();
    out.push_back(std::move(def));
  }
  return out;
}

std::string concepts_to_json(const std::vector<ConceptDef>& concepts) {
  nlohmann::json doc;
  doc["concepts"] = nlohmann::json::array();
  for (const auto& c : concepts) {
    nlohmann::json jc;
    jc["id"] = c.concept_id;
    jc["name"] = c.name;
    jc["lexemes"] = c.lexemes;
    jc["components"] = nlohmann::json::array();
    for (const auto& comp : c.components) {
      jc["components"].push_back({{"label", comp.label}, {"bases", comp.bases}});
    }
    doc["concepts"].push_back(std::move(jc));
  }
  return doc.dump(2) + "\n";
}

SaeFixture sae_token_fixture(const SaeWeights& weights, const SaeConfig& config,
                             const SyntheticSpec& spec, std::size_t tokens_per_unit) {
  if (tokens_per_unit == 0) throw Error("tokens_per_unit must be positive");
  SyntheticSpec meta_spec = spec;
  meta_spec.dim = static_cast<std::uint32_t>(weights.k_features());
  check_spec(meta_spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SaeFixture out;
  std::vector<double> h(weights.d());
  for (std::size_t u = 0; u < spec.units; ++u) {
    out.units.push_back(random_meta(rng, meta_spec, u));
    for (std::size_t j = 0; j < tokens_per_unit; ++j) {
      for (auto& x : h) x = gauss(rng);
      SparseVector z = sae_forward(h, weights, config).z;
      SparseVector rounded;
      rounded.dim = z.dim;
      for (std::size_t i = 0; i < z.nnz(); ++i) {
        const double v = round_to_f32(z.values[i]);
        if (v > 0.0) {
          rounded.indices.push_back(z.indices[i]);
          rounded.values.push_back(v);
        }
      }
      out.tokens.push_back({out.units.back().unit_id, static_cast<std::uint32_t>(j), std::move(rounded)});
    }
  }
  return out;
}

}  // namespace diachron
