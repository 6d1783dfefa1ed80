#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>
#include <pybind11/stl_bind.h>

#include "diachron/analysis.hpp"
#include "diachron/error.hpp"
#include "diachron/report.hpp"
#include "diachron/sae.hpp"
#include "diachron/synthetic.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace diachron;

using RecordList = std::vector<ActivationRecord>;
PYBIND11_MAKE_OPAQUE(std::vector<diachron::ActivationRecord>)

namespace {

RecordList copy_view(const RecordView& view) {
  RecordList out;
  out.reserve(view.size());
  for (const ActivationRecord* r : view) out.push_back(*r);
  return out;
}

std::vector<int> years_or_default(const RecordView& view, const std::optional<std::vector<int>>& years) {
  return years ? *years : distinct_years(view);
}

py::object to_python(const Json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

Json from_python(const py::object& doc) {
  return Json::parse(py::module_::import("json").attr("dumps")(doc).cast<std::string>());
}

py::array_t<double> to_array(const std::vector<double>& values) {
  return py::array_t<double>(static_cast<py::ssize_t>(values.size()), values.data());
}

std::vector<std::pair<int, double>> changes(const std::vector<AdjacentChange>& in) {
  std::vector<std::pair<int, double>> out;
  for (const auto& c : in) out.emplace_back(c.to_year, c.value);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diachronic analytics over sparse autoencoder activations";
#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  py::class_<SparseVector>(m, "SparseVector")
      .def(py::init([](std::uint32_t dim, std::vector<FeatureId> indices, std::vector<double> values) {
             SparseVector v{dim, std::move(indices), std::move(values)};
             v.validate();
             return v;
           }),
           "dim"_a, "indices"_a, "values"_a)
      .def_static("from_dense", [](const std::vector<double>& dense) { return SparseVector::from_dense(dense); })
      .def_readonly("dim", &SparseVector::dim)
      .def_readonly("indices", &SparseVector::indices)
      .def_readonly("values", &SparseVector::values)
      .def_property_readonly("nnz", &SparseVector::nnz)
      .def("at", &SparseVector::at)
      .def("to_dense", [](const SparseVector& v) { return to_array(v.to_dense()); })
      .def("__eq__", [](const SparseVector& a, const SparseVector& b) { return a == b; })
      .def("__repr__", [](const SparseVector& v) {
        return "SparseVector(dim=" + std::to_string(v.dim) + ", nnz=" + std::to_string(v.nnz()) + ")";
      });

  m.def("max_pool", [](const std::vector<SparseVector>& tokens) { return max_pool_tokens(tokens); }, "tokens"_a);

  py::class_<ActivationRecord>(m, "Record")
      .def(py::init([](std::string unit_id, std::string corpus, int year, std::string text, SparseVector z) {
             z.validate();
             return ActivationRecord{UnitMeta{std::move(unit_id), std::move(corpus), year, std::move(text)},
                                     std::move(z)};
           }),
           "unit_id"_a, "corpus"_a, "year"_a, "text"_a, "z"_a)
      .def_property_readonly("unit_id", [](const ActivationRecord& r) { return r.meta.unit_id; })
      .def_property_readonly("corpus", [](const ActivationRecord& r) { return r.meta.corpus; })
      .def_property_readonly("year", [](const ActivationRecord& r) { return r.meta.year; })
      .def_property_readonly("text", [](const ActivationRecord& r) { return r.meta.text; })
      .def_readonly("z", &ActivationRecord::z)
      .def("__repr__", [](const ActivationRecord& r) {
        return "Record(" + r.meta.unit_id + ", " + r.meta.corpus + ", " + std::to_string(r.meta.year) + ")";
      });

  py::bind_vector<RecordList>(m, "RecordList");

  py::class_<StoreManifest>(m, "StoreManifest")
      .def(py::init<>())
      .def_readwrite("store_id", &StoreManifest::store_id)
      .def_readwrite("corpus", &StoreManifest::corpus)
      .def_readwrite("layer_tag", &StoreManifest::layer_tag)
      .def_readwrite("dim", &StoreManifest::dim)
      .def_readwrite("kappa", &StoreManifest::kappa)
      .def_readwrite("year_min", &StoreManifest::year_min)
      .def_readwrite("year_max", &StoreManifest::year_max)
      .def_readwrite("unit_count", &StoreManifest::unit_count)
      .def_property(
          "level", [](const StoreManifest& s) { return to_string(s.level); },
          [](StoreManifest& s, const std::string& level) { s.level = parse_store_level(level); });

  py::class_<Store>(m, "Store")
      .def_readonly("manifest", &Store::manifest)
      .def_readonly("records", &Store::records)
      .def("__len__", [](const Store& s) { return s.records.size(); });

  m.def("read_manifest", &read_manifest, "store_dir"_a);
  m.def(
      "validate_store",
      [](const std::filesystem::path& dir) { return to_python(validation_json(dir.string(), validate_store(dir))); },
      "store_dir"_a);
  m.def(
      "load_store",
      [](const std::filesystem::path& dir, std::optional<int> year_min, std::optional<int> year_max,
         std::optional<std::string> corpus) {
        return load_store(dir, RecordFilter{year_min, year_max, std::move(corpus)});
      },
      "store_dir"_a, "year_min"_a = py::none(), "year_max"_a = py::none(), "corpus"_a = py::none());
  m.def(
      "pool_token_store", [](const std::filesystem::path& dir) { return pool_token_store(load_token_store(dir)); },
      "store_dir"_a);
  m.def(
      "write_store",
      [](const std::filesystem::path& dir, const StoreManifest& manifest, const RecordList& records) {
        write_store(dir, manifest, records);
      },
      "store_dir"_a, "manifest"_a, "records"_a);
  m.def(
      "merge",
      [](const std::vector<Store>& stores) { return merge_records(stores); }, "stores"_a);
  m.def("sort_canonical", [](RecordList& records) { sort_canonical(records); }, "records"_a);

  py::class_<ConceptComponent>(m, "ConceptComponent")
      .def(py::init([](std::string label, std::vector<FeatureId> bases) {
             return ConceptComponent{std::move(label), std::move(bases)};
           }),
           "label"_a, "bases"_a)
      .def_readonly("label", &ConceptComponent::label)
      .def_readonly("bases", &ConceptComponent::bases);

  py::class_<ConceptDef>(m, "ConceptDef")
      .def(py::init([](std::string id, std::string name, std::vector<std::string> lexemes,
                       std::vector<ConceptComponent> components) {
             ConceptDef c{std::move(id), std::move(name), std::move(lexemes), std::move(components)};
             c.validate();
             return c;
           }),
           "concept_id"_a, "name"_a, "lexemes"_a, "components"_a)
      .def_readonly("concept_id", &ConceptDef::concept_id)
      .def_readonly("name", &ConceptDef::name)
      .def_readonly("lexemes", &ConceptDef::lexemes)
      .def_readonly("components", &ConceptDef::components)
      .def("all_bases", &ConceptDef::all_bases)
      .def("component", &ConceptDef::component, py::return_value_policy::copy);

  m.def("load_concepts", &load_concepts, "path"_a);
  m.def("parse_concepts", &parse_concepts, "json_text"_a);
  m.def("concepts_to_json", &concepts_to_json, "concepts"_a);
  m.def(
      "find_concept",
      [](const std::vector<ConceptDef>& concepts, const std::string& id) { return find_concept(concepts, id); },
      "concepts"_a, "concept_id"_a);
  m.def("concept_magnitude", &concept_magnitude, "record"_a, "concept"_a);
  m.def("component_activation", &component_activation, "record"_a, "component"_a);
  m.def("has_anchor", &has_anchor, "text"_a, "concept"_a);

  m.def(
      "distinct_years", [](const RecordList& r) { return distinct_years(view_of(r)); }, "records"_a);
  m.def(
      "distinct_corpora", [](const RecordList& r) { return distinct_corpora(view_of(r)); }, "records"_a);
  m.def(
      "filter_corpus", [](const RecordList& r, const std::string& c) { return copy_view(filter_corpus(view_of(r), c)); },
      "records"_a, "corpus"_a);
  m.def(
      "filter_years",
      [](const RecordList& r, int lo, int hi) { return copy_view(filter_years(view_of(r), lo, hi)); }, "records"_a,
      "year_min"_a, "year_max"_a);

  py::class_<SliceSeries>(m, "SliceSeries")
      .def_property_readonly("scope", [](const SliceSeries& s) { return s.key.scope; })
      .def_property_readonly("corpus", [](const SliceSeries& s) { return s.key.corpus; })
      .def_property_readonly("conditioning", [](const SliceSeries& s) { return s.key.conditioning; })
      .def_readonly("years", &SliceSeries::years)
      .def_readonly("values", &SliceSeries::values)
      .def_readonly("counts", &SliceSeries::counts)
      .def("present_points", [](const SliceSeries& s) {
        std::vector<std::pair<int, double>> out;
        for (const auto& p : s.present_points()) out.emplace_back(p.year, p.value);
        return out;
      });

  py::class_<SalientSet>(m, "SalientSet")
      .def_readonly("concept_id", &SalientSet::concept_id)
      .def_readonly("corpus", &SalientSet::corpus)
      .def_readonly("q", &SalientSet::q)
      .def_readonly("threshold", &SalientSet::threshold)
      .def_readonly("corpus_size", &SalientSet::corpus_size)
      .def_readonly("unit_ids", &SalientSet::unit_ids)
      .def("__contains__", &SalientSet::contains)
      .def("__len__", [](const SalientSet& s) { return s.unit_ids.size(); })
      .def(
          "members", [](const SalientSet& s, const RecordList& r) { return copy_view(s.members(view_of(r))); },
          "records"_a);

  py::class_<DriftEntry>(m, "DriftEntry")
      .def_readonly("feature", &DriftEntry::feature)
      .def_readonly("drift", &DriftEntry::drift)
      .def("__repr__", [](const DriftEntry& e) {
        return "DriftEntry(" + std::to_string(e.feature) + ", " + std::to_string(e.drift) + ")";
      });

  m.def("nearest_rank_quantile", &nearest_rank_quantile, "values"_a, "q"_a);
  m.def(
      "build_salient_set",
      [](const RecordList& r, const ConceptDef& c, const std::string& corpus, double q) {
        return build_salient_set(view_of(r), c, corpus, q);
      },
      "records"_a, "concept"_a, "corpus"_a, "q"_a = kDefaultQuantile);
  m.def(
      "feature_series",
      [](const RecordList& r, FeatureId f, std::optional<std::vector<int>> years) {
        const RecordView v = view_of(r);
        return feature_series(v, f, years_or_default(v, years));
      },
      "records"_a, "feature"_a, "years"_a = py::none());
  m.def(
      "magnitude_series",
      [](const RecordList& r, const ConceptDef& c, std::optional<std::vector<int>> years) {
        const RecordView v = view_of(r);
        return magnitude_series(v, c, years_or_default(v, years));
      },
      "records"_a, "concept"_a, "years"_a = py::none());
  m.def(
      "component_series",
      [](const RecordList& r, const ConceptDef& c, std::optional<std::vector<int>> years) {
        const RecordView v = view_of(r);
        return component_series(v, c, years_or_default(v, years));
      },
      "records"_a, "concept"_a, "years"_a = py::none());
  m.def("cumulative_drift", &cumulative_drift, "series"_a);
  m.def(
      "relative_change_rate", [](const SliceSeries& s) { return changes(relative_change_rate(s)); }, "series"_a);
  m.def(
      "select_top_drifting",
      [](const RecordList& r, std::size_t n, const SalientSet* conditioning) {
        return select_top_drifting(view_of(r), n, conditioning);
      },
      "records"_a, "n"_a, "conditioning"_a = py::none());
  m.def("peak_year", &peak_year, "series"_a);

  py::class_<TurningPoint>(m, "TurningPoint")
      .def_readonly("year", &TurningPoint::year)
      .def_readonly("previous_year", &TurningPoint::previous_year)
      .def_readonly("intensity", &TurningPoint::intensity);
  m.def("turning_point", &turning_point, "series"_a);

  py::class_<ComponentShare>(m, "ComponentShare")
      .def_readonly("label", &ComponentShare::label)
      .def_readonly("mean", &ComponentShare::mean)
      .def_readonly("share", &ComponentShare::share);

  py::class_<CompositionRow>(m, "CompositionRow")
      .def_readonly("concept_id", &CompositionRow::concept_id)
      .def_readonly("corpus", &CompositionRow::corpus)
      .def_readonly("year", &CompositionRow::year)
      .def_readonly("unit_count", &CompositionRow::unit_count)
      .def_readonly("epsilon", &CompositionRow::epsilon)
      .def_readonly("shares", &CompositionRow::shares)
      .def("as_dict", [](const CompositionRow& row) {
        py::dict out;
        for (const auto& s : row.shares) out[py::str(s.label)] = s.share;
        return out;
      });

  m.def(
      "pooled_shares",
      [](const RecordList& r, const ConceptDef& c, double eps) { return pooled_shares(view_of(r), c, eps); },
      "records"_a, "concept"_a, "epsilon"_a = kDefaultEpsilon);
  m.def(
      "composition_series",
      [](const RecordList& r, const ConceptDef& c, std::optional<std::vector<int>> years, double eps) {
        const RecordView v = view_of(r);
        return composition_series(v, c, years_or_default(v, years), eps);
      },
      "records"_a, "concept"_a, "years"_a = py::none(), "epsilon"_a = kDefaultEpsilon);
  m.def("diversity_entropy", &diversity_entropy, "row"_a);
  m.def("reorganization_delta", &reorganization_delta, "previous"_a, "current"_a);
  m.def(
      "implicit_ratio",
      [](const SalientSet& s, const RecordList& r, const ConceptDef& c) { return implicit_ratio(s, view_of(r), c); },
      "salient"_a, "records"_a, "concept"_a);
  m.def(
      "window_share_delta",
      [](const RecordList& r, const ConceptDef& c, std::pair<int, int> a, std::pair<int, int> b, double eps) {
        const WindowDelta d =
            window_share_delta(view_of(r), c, YearRange{a.first, a.second}, YearRange{b.first, b.second}, eps);
        py::dict out;
        for (const auto& e : d.deltas) out[py::str(e.label)] = e.delta;
        return out;
      },
      "records"_a, "concept"_a, "window_a"_a, "window_b"_a, "epsilon"_a = kDefaultEpsilon,
      "Per-component share_b - share_a between two inclusive year windows.");

  py::class_<DriftTopSet>(m, "DriftTopSet")
      .def_readonly("concept_id", &DriftTopSet::concept_id)
      .def_readonly("corpus", &DriftTopSet::corpus)
      .def_readonly("k", &DriftTopSet::k)
      .def_readonly("features", &DriftTopSet::features)
      .def("ids", &DriftTopSet::ids);
  m.def(
      "drift_top_set",
      [](const RecordList& r, const ConceptDef& c, const std::string& corpus, std::size_t k, double q) {
        return drift_top_set(view_of(r), c, corpus, k, q);
      },
      "records"_a, "concept"_a, "corpus"_a, "k"_a = kDefaultTopK, "q"_a = kDefaultQuantile);
  m.def("jaccard_at_k", &jaccard_at_k, "a"_a, "b"_a);

  py::class_<Fingerprint>(m, "Fingerprint")
      .def_readonly("layer_tag", &Fingerprint::layer_tag)
      .def_readonly("grams", &Fingerprint::grams)
      .def("__len__", [](const Fingerprint& f) { return f.grams.size(); });
  m.def(
      "char_2gram_fingerprint",
      [](const std::vector<std::string>& texts, const std::string& layer_tag) {
        Fingerprint f = char_2gram_fingerprint(texts);
        f.layer_tag = layer_tag;
        return f;
      },
      "texts"_a, "layer_tag"_a = "");
  m.def("jaccard_2gram", &jaccard_2gram, "a"_a, "b"_a);
  m.def(
      "avg_jaccard",
      [](std::size_t target, const std::vector<Fingerprint>& fps) { return avg_jaccard(target, fps); }, "target"_a,
      "fingerprints"_a);

  py::class_<EvidenceTarget>(m, "EvidenceTarget")
      .def_static("of_feature", &EvidenceTarget::of_feature, "feature"_a)
      .def_static("of_component", &EvidenceTarget::of_component, "component"_a)
      .def("score", &EvidenceTarget::score)
      .def("__repr__", &EvidenceTarget::describe);

  py::class_<EvidenceItem>(m, "EvidenceItem")
      .def_readonly("unit_id", &EvidenceItem::unit_id)
      .def_readonly("corpus", &EvidenceItem::corpus)
      .def_readonly("year", &EvidenceItem::year)
      .def_readonly("activation", &EvidenceItem::activation)
      .def_readonly("text", &EvidenceItem::text);

  py::class_<EvidenceBundle>(m, "EvidenceBundle")
      .def_readonly("target", &EvidenceBundle::target)
      .def_property_readonly("rule", [](const EvidenceBundle& b) { return to_string(b.rule); })
      .def_readonly("year_pair", &EvidenceBundle::year_pair)
      .def_readonly("items", &EvidenceBundle::items)
      .def_readonly("display_count", &EvidenceBundle::display_count)
      .def("displayed", [](const EvidenceBundle& b) {
        return std::vector<EvidenceItem>(b.items.begin(), b.items.begin() + static_cast<long>(b.display_count));
      });

  m.def("peak_adjacent_pair", &peak_adjacent_pair, "series"_a);
  m.def(
      "top_activating",
      [](const RecordList& r, const EvidenceTarget& t, std::size_t n, std::optional<int> year_min,
         std::optional<int> year_max, std::optional<std::string> corpus) {
        return top_activating(view_of(r), t, n, EvidenceFilter{year_min, year_max, std::move(corpus)});
      },
      "records"_a, "target"_a, "n"_a, "year_min"_a = py::none(), "year_max"_a = py::none(),
      "corpus"_a = py::none());
  m.def(
      "diachronic_evidence",
      [](const RecordList& r, const EvidenceTarget& t, const SliceSeries& s, std::size_t per_year) {
        return diachronic_evidence(view_of(r), t, s, per_year);
      },
      "records"_a, "target"_a, "series"_a, "per_year"_a = kEvidencePerYear);
  m.def(
      "cross_corpus_evidence",
      [](const RecordList& r, const EvidenceTarget& t, std::size_t pool, std::size_t display) {
        return cross_corpus_evidence(view_of(r), t, pool, display);
      },
      "records"_a, "target"_a, "pool"_a = kEvidencePool, "display"_a = kEvidenceDisplay);

  py::class_<AnalysisOptions>(m, "AnalysisOptions")
      .def(py::init([](double q, double epsilon, std::size_t top_k, std::size_t per_year, std::size_t pool,
                       std::size_t display) {
             return AnalysisOptions{q, epsilon, top_k, per_year, pool, display};
           }),
           "q"_a = kDefaultQuantile, "epsilon"_a = kDefaultEpsilon, "top_k"_a = kDefaultTopK,
           "evidence_per_year"_a = kEvidencePerYear, "pool"_a = kEvidencePool, "display"_a = kEvidenceDisplay)
      .def_readwrite("q", &AnalysisOptions::q)
      .def_readwrite("epsilon", &AnalysisOptions::epsilon)
      .def_readwrite("top_k", &AnalysisOptions::top_k)
      .def_readwrite("evidence_per_year", &AnalysisOptions::evidence_per_year)
      .def_readwrite("pool", &AnalysisOptions::pool)
      .def_readwrite("display", &AnalysisOptions::display);

  py::class_<AtlasRow>(m, "AtlasRow")
      .def_readonly("concept_id", &AtlasRow::concept_id)
      .def_readonly("corpus", &AtlasRow::corpus)
      .def_readonly("implicit_ratio", &AtlasRow::implicit_ratio)
      .def_readonly("diversity", &AtlasRow::diversity)
      .def_readonly("peak_year", &AtlasRow::peak_year)
      .def_readonly("turn_year", &AtlasRow::turn_year)
      .def_readonly("turn_intensity", &AtlasRow::turn_intensity)
      .def_readonly("salient_threshold", &AtlasRow::salient_threshold)
      .def_readonly("salient_units", &AtlasRow::salient_units);

  m.def(
      "build_atlas",
      [](const RecordList& r, const std::vector<ConceptDef>& concepts, const AnalysisOptions& o) {
        return build_atlas(view_of(r), concepts, o);
      },
      "records"_a, "concepts"_a, "options"_a = AnalysisOptions{});

  py::class_<LayerRow>(m, "LayerRow")
      .def_readonly("layer_tag", &LayerRow::layer_tag)
      .def_readonly("peak_year", &LayerRow::peak_year)
      .def_readonly("turn_year", &LayerRow::turn_year)
      .def_readonly("turn_intensity", &LayerRow::turn_intensity)
      .def_readonly("avg_jaccard", &LayerRow::avg_jaccard)
      .def_readonly("evidence_items", &LayerRow::evidence_items)
      .def_readonly("grams", &LayerRow::grams);

  m.def(
      "run_cross_layer",
      [](const std::vector<std::pair<std::string, const RecordList*>>& layers, const ConceptDef& c,
         const std::string& corpus, const AnalysisOptions& o) {
        std::vector<LayerInput> inputs;
        for (const auto& [tag, records] : layers) inputs.push_back(LayerInput{tag, view_of(*records)});
        return run_cross_layer(inputs, c, corpus, o);
      },
      "layers"_a, "concept"_a, "corpus"_a, "options"_a = AnalysisOptions{},
      "layers is a list of (layer_tag, RecordList) pairs.");

  py::class_<ImplicitSummary>(m, "ImplicitSummary")
      .def_readonly("salient_units", &ImplicitSummary::salient_units)
      .def_readonly("anchored_units", &ImplicitSummary::anchored_units)
      .def_readonly("implicit_units", &ImplicitSummary::implicit_units)
      .def_readonly("anchored_mass", &ImplicitSummary::anchored_mass)
      .def_readonly("implicit_mass", &ImplicitSummary::implicit_mass)
      .def_readonly("implicit_ratio", &ImplicitSummary::implicit_ratio)
      .def_readonly("threshold", &ImplicitSummary::threshold)
      .def_readonly("series", &ImplicitSummary::series);
  m.def(
      "summarize_implicit",
      [](const RecordList& r, const ConceptDef& c, const std::string& corpus, double q) {
        return summarize_implicit(view_of(r), c, corpus, q);
      },
      "records"_a, "concept"_a, "corpus"_a, "q"_a = kDefaultQuantile);

  // JSON documents, identical to the CLI's --format json output.
  m.def(
      "atlas_json",
      [](const std::vector<AtlasRow>& rows, const AnalysisOptions& o) { return to_python(atlas_json(rows, o)); },
      "rows"_a, "options"_a = AnalysisOptions{});
  m.def(
      "drift_json",
      [](const std::vector<DriftEntry>& ranking, const std::string& corpus, const std::string& conditioning) {
        return to_python(drift_json(ranking, corpus, conditioning));
      },
      "ranking"_a, "corpus"_a, "conditioning"_a);
  m.def(
      "trajectory_json",
      [](const std::vector<SliceSeries>& s, bool rates) { return to_python(trajectory_json(s, rates)); },
      "series"_a, "with_rates"_a = false);
  m.def(
      "shares_json",
      [](const ConceptDef& c, const std::string& corpus, const std::vector<CompositionRow>& rows,
         const CompositionRow& pooled) { return to_python(shares_json(c, corpus, rows, pooled)); },
      "concept"_a, "corpus"_a, "rows"_a, "pooled"_a);
  m.def(
      "evidence_json", [](const std::vector<EvidenceBundle>& b) { return to_python(evidence_json(b)); },
      "bundles"_a);
  m.def(
      "cross_layer_json",
      [](const std::string& concept_id, const std::string& corpus, const std::vector<LayerRow>& rows) {
        return to_python(cross_layer_json(concept_id, corpus, rows));
      },
      "concept_id"_a, "corpus"_a, "rows"_a);
  m.def(
      "implicit_json", [](const ImplicitSummary& s) { return to_python(implicit_json(s)); }, "summary"_a);
  m.def(
      "render_report",
      [](const py::object& doc, const std::string& format) {
        return render_report(from_python(doc), parse_report_format(format));
      },
      "doc"_a, "format"_a);

  py::enum_<InputNormalization>(m, "InputNormalization")
      .value("identity", InputNormalization::identity)
      .value("subtract_decoder_bias", InputNormalization::subtract_decoder_bias);

  py::class_<SaeConfig>(m, "SaeConfig")
      .def(py::init([](std::uint32_t kappa, InputNormalization norm) {
             SaeConfig c;
             c.kappa = kappa;
             c.normalization = norm;
             c.validate();
             return c;
           }),
           "kappa"_a = 64, "normalization"_a = InputNormalization::identity)
      .def_readwrite("kappa", &SaeConfig::kappa)
      .def_readwrite("normalization", &SaeConfig::normalization)
      .def_readwrite("lambda_rec", &SaeConfig::lambda_rec)
      .def_readwrite("lambda_l1", &SaeConfig::lambda_l1);

  py::class_<SaeWeights>(m, "SaeWeights")
      .def(py::init([](Eigen::MatrixXd w_enc, Eigen::VectorXd b_enc, Eigen::MatrixXd w_dec, Eigen::VectorXd b_dec) {
             SaeWeights w{w_enc, std::move(b_enc), std::move(w_dec), std::move(b_dec)};
             w.validate();
             return w;
           }),
           "w_enc"_a, "b_enc"_a, "w_dec"_a, "b_dec"_a)
      .def_static("identity", &SaeWeights::identity, "dim"_a)
      .def_static("random", &SaeWeights::random, "d"_a, "k_features"_a, "seed"_a, "scale"_a = 1.0)
      .def_readonly("w_enc", &SaeWeights::w_enc)
      .def_readonly("b_enc", &SaeWeights::b_enc)
      .def_readonly("w_dec", &SaeWeights::w_dec)
      .def_readonly("b_dec", &SaeWeights::b_dec)
      .def_property_readonly("d", &SaeWeights::d)
      .def_property_readonly("k_features", &SaeWeights::k_features);

  m.def(
      "sae_forward",
      [](const std::vector<double>& h, const SaeWeights& w, const SaeConfig& c) {
        SaeOutput out = sae_forward(h, w, c);
        return py::make_tuple(std::move(out.z), to_array(out.h_hat));
      },
      "h"_a, "weights"_a, "config"_a, "Returns (z, h_hat).");
  m.def(
      "topk_sparsify", [](const std::vector<double>& pre, std::uint32_t kappa) { return topk_sparsify(pre, kappa); },
      "preactivation"_a, "kappa"_a);
  m.def(
      "reconstruction_loss",
      [](const std::vector<std::vector<double>>& batch, const SaeWeights& w, const SaeConfig& c) {
        return reconstruction_loss(batch, w, c);
      },
      "h_batch"_a, "weights"_a, "config"_a);
  m.def(
      "read_weights",
      [](const std::filesystem::path& path) {
        std::uint32_t kappa = 0;
        SaeWeights w = read_weights(path, &kappa);
        return py::make_tuple(std::move(w), kappa);
      },
      "path"_a, "Returns (weights, kappa).");
  m.def("write_weights", &write_weights, "path"_a, "weights"_a, "kappa"_a);

  m.def(
      "synthetic_records",
      [](std::uint32_t dim, std::size_t units, int year_min, int year_max, std::vector<std::string> corpora,
         std::vector<FeatureId> hot_features, std::vector<std::string> lexemes, std::uint64_t seed) {
        SyntheticSpec spec;
        spec.dim = dim;
        spec.kappa = std::min<std::uint32_t>(spec.kappa, dim);
        spec.units = units;
        spec.year_min = year_min;
        spec.year_max = year_max;
        spec.corpora = std::move(corpora);
        spec.hot_features = std::move(hot_features);
        spec.lexemes = std::move(lexemes);
        spec.seed = seed;
        return synthetic_records(spec);
      },
      "dim"_a = 64, "units"_a = 200, "year_min"_a = 1915, "year_max"_a = 1924,
      "corpora"_a = std::vector<std::string>{"synthetic"}, "hot_features"_a = std::vector<FeatureId>{},
      "lexemes"_a = std::vector<std::string>{}, "seed"_a = 1);
  m.def("synthetic_concepts", &synthetic_concepts, "dim"_a, "n_concepts"_a, "seed"_a);
}
