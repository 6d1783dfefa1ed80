// diachron: command-line front end over the analytics library.
//
// Every analysis command builds a kind-tagged JSON document and renders it
// with --format (json by default) to --out or stdout. Failures print a JSON
// object {"error": ..., "type": "usage"|"runtime"} to stderr; exit code 2 for
// usage errors, 1 for everything else (including a store that fails
// `validate`).

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "diachron/analysis.hpp"
#include "diachron/error.hpp"
#include "diachron/report.hpp"
#include "diachron/synthetic.hpp"

namespace {

using namespace diachron;

struct Options {
  std::vector<std::string> stores;
  std::string concepts_path;
  std::string concept_id;
  std::vector<std::string> corpora;
  std::string out;
  std::string format = "json";
  std::string config;
  std::string conditioning;  // "", "all" or "salient"
  AnalysisOptions analysis;

  // command specific
  std::vector<std::uint32_t> features;
  std::vector<std::string> components;
  std::vector<std::string> presets;
  std::string window_a;
  std::string window_b;
  bool full_records = false;
  bool rates = false;
  std::string rule = "diachronic";
  std::vector<std::string> layer_tags;
  std::string input;

  // synth
  std::size_t units = 500;
  std::uint32_t dim = 64;
  std::uint32_t kappa = 8;
  int year_min = 1915;
  int year_max = 1924;
  std::size_t n_concepts = 2;
  std::uint64_t seed = 1;
  std::size_t tokens_per_unit = 0;
  std::string concepts_out;
  std::string layer_tag = "L29";
};

// ---- config injection ----

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::string scalar_arg(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return fmt::format("{}", v.get<std::int64_t>());
  if (v.is_number_unsigned()) return fmt::format("{}", v.get<std::uint64_t>());
  if (v.is_number_float()) return fmt::format("{}", v.get<double>());
  throw CLI::ValidationError("--config", fmt::format("unsupported value for key '{}'", key));
}

// Keys of the JSON config become flags appended after the subcommand's own
// arguments, unless that flag was given on the command line.
std::vector<std::string> inject_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("--config", fmt::format("malformed JSON in {} ({})", path, e.what()));
  }
  if (!cfg.is_object()) throw CLI::ValidationError("--config", "config must be a JSON object");
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "config") continue;
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) extra.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        extra.push_back(flag);
        extra.push_back(scalar_arg(v, key));
      }
    } else if (!value.is_null()) {
      extra.push_back(flag);
      extra.push_back(scalar_arg(value, key));
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// ---- loading ----

struct Dataset {
  std::vector<Store> stores;
  std::vector<ActivationRecord> records;
  RecordView view;
  std::vector<ConceptDef> concepts;
};

// A missing or malformed flag detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void check(bool ok, const std::string& message) {
  if (!ok) throw Error(message);
}

std::vector<ConceptDef> load_concept_file(const Options& o, std::span<const Store> stores) {
  require(!o.concepts_path.empty(), "--concepts is required");
  auto concepts = load_concepts(o.concepts_path);
  for (const auto& s : stores) {
    for (const auto& c : concepts) c.check_dim(s.manifest.dim);
  }
  return concepts;
}

Dataset load_dataset(const Options& o, bool need_concepts) {
  require(!o.stores.empty(), "--store is required");
  Dataset d;
  for (const auto& path : o.stores) d.stores.push_back(load_store(path));
  d.records = merge_records(d.stores);
  d.view = view_of(d.records);
  if (need_concepts) d.concepts = load_concept_file(o, d.stores);
  return d;
}

const ConceptDef& pick_concept(const Options& o, const Dataset& d) {
  require(!o.concept_id.empty(), "--concept is required");
  return find_concept(d.concepts, o.concept_id);
}

std::string pick_corpus(const Options& o, std::span<const ActivationRecord* const> records) {
  if (!o.corpora.empty()) {
    require(o.corpora.size() == 1, "this command takes a single --corpus");
    return o.corpora.front();
  }
  const auto all = distinct_corpora(records);
  check(!all.empty(), "no records loaded");
  require(all.size() == 1, "store holds several corpora; pass --corpus");
  return all.front();
}

std::vector<std::string> pick_corpora(const Options& o, std::span<const ActivationRecord* const> records) {
  return o.corpora.empty() ? distinct_corpora(records) : o.corpora;
}

bool use_salient(const Options& o, bool default_salient) {
  if (o.conditioning.empty()) return default_salient;
  require(o.conditioning == "all" || o.conditioning == "salient",
          fmt::format("unknown conditioning '{}' (expected all or salient)", o.conditioning));
  return o.conditioning == "salient";
}

std::string salient_tag(double q) { return fmt::format("salient(q={})", q); }

struct Conditioned {
  RecordView records;
  std::string tag;
};

// The corpus records, optionally restricted to the concept's salient set.
Conditioned condition(const Options& o, const Dataset& d, const ConceptDef& concept_def,
                      const std::string& corpus, bool salient) {
  const RecordView in_corpus = filter_corpus(d.view, corpus);
  if (!salient) return {in_corpus, "all"};
  const SalientSet set = build_salient_set(in_corpus, concept_def, corpus, o.analysis.q);
  return {set.members(in_corpus), salient_tag(o.analysis.q)};
}

YearRange parse_window(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int y = std::stoi(text);
      return {y, y};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw UsageError(fmt::format("malformed window '{}' (expected LO:HI)", text));
  }
}

std::pair<YearRange, YearRange> preset_windows(const std::string& preset, int first_year) {
  if (preset == "pre1917-vs-1917-1919") return {{std::min(first_year, 1916), 1916}, {1917, 1919}};
  if (preset == "1917-1919-vs-1922-1924") return {{1917, 1919}, {1922, 1924}};
  throw UsageError(fmt::format("unknown preset '{}'", preset));
}

// ---- output ----

void emit(const Options& o, const Json& doc) {
  const ReportFormat format = parse_report_format(o.format);
  if (o.out.empty()) {
    std::cout << render_report(doc, format);
  } else {
    emit_report(doc, format, o.out);
  }
}

// ---- commands ----

int cmd_validate(const Options& o) {
  require(o.stores.size() == 1, "validate takes exactly one --store");
  const ValidationReport report = validate_store(o.stores.front());
  emit(o, validation_json(o.stores.front(), report));
  return report.ok() ? 0 : 1;
}

int cmd_pool(const Options& o) {
  require(o.stores.size() == 1, "pool takes exactly one --store");
  require(!o.out.empty(), "--out DIR is required");
  const TokenStore tokens = load_token_store(o.stores.front());
  auto records = pool_token_store(tokens);
  StoreManifest manifest = tokens.manifest;
  manifest.level = StoreLevel::sentence;
  const std::size_t n = records.size();
  write_store(o.out, manifest, std::move(records));
  Json summary{{"kind", "pool"}, {"units", n}, {"tokens", tokens.tokens.size()}, {"out", o.out}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_atlas(const Options& o) {
  Dataset d = load_dataset(o, true);
  std::vector<ConceptDef> concepts = d.concepts;
  if (!o.concept_id.empty()) concepts = {find_concept(d.concepts, o.concept_id)};
  RecordView view;
  const auto corpora = pick_corpora(o, d.view);
  for (const auto* rec : d.view) {
    if (std::find(corpora.begin(), corpora.end(), rec->meta.corpus) != corpora.end()) view.push_back(rec);
  }
  for (const auto& c : corpora) check(!filter_corpus(view, c).empty(), fmt::format("corpus '{}' has no records", c));
  emit(o, atlas_json(build_atlas(view, concepts, o.analysis), o.analysis));
  return 0;
}

int cmd_drift(const Options& o) {
  Dataset d = load_dataset(o, !o.concept_id.empty());
  const std::string corpus = pick_corpus(o, d.view);
  const bool salient = use_salient(o, !o.concept_id.empty());
  Conditioned cond;
  if (salient) {
    cond = condition(o, d, pick_concept(o, d), corpus, true);
    cond.tag = fmt::format("{}:{}", cond.tag, o.concept_id);
  } else {
    cond = {filter_corpus(d.view, corpus), "all"};
  }
  emit(o, drift_json(select_top_drifting(cond.records, o.analysis.top_k), corpus, cond.tag));
  return 0;
}

int cmd_trajectory(const Options& o) {
  Dataset d = load_dataset(o, true);
  const ConceptDef& concept_def = pick_concept(o, d);
  const std::string corpus = pick_corpus(o, d.view);
  const Conditioned cond = condition(o, d, concept_def, corpus, use_salient(o, true));
  const auto years = distinct_years(filter_corpus(d.view, corpus));

  std::vector<SliceSeries> series;
  series.push_back(magnitude_series(cond.records, concept_def, years));
  for (auto& s : component_series(cond.records, concept_def, years)) series.push_back(std::move(s));
  for (FeatureId f : o.features) series.push_back(feature_series(cond.records, f, years));
  for (auto& s : series) {
    s.key.corpus = corpus;
    s.key.conditioning = cond.tag;
  }
  emit(o, trajectory_json(series, o.rates));
  return 0;
}

int cmd_shares(const Options& o) {
  Dataset d = load_dataset(o, true);
  const ConceptDef& concept_def = pick_concept(o, d);
  const std::string corpus = pick_corpus(o, d.view);
  const Conditioned cond = condition(o, d, concept_def, corpus, use_salient(o, true));
  check(!cond.records.empty(), "no records in the conditioning set");
  const auto years = distinct_years(cond.records);
  const auto rows = composition_series(cond.records, concept_def, years, o.analysis.epsilon);
  emit(o, shares_json(concept_def, corpus, rows, pooled_shares(cond.records, concept_def, o.analysis.epsilon)));
  return 0;
}

int cmd_window_delta(const Options& o) {
  Dataset d = load_dataset(o, true);
  std::vector<ConceptDef> concepts = d.concepts;
  if (!o.concept_id.empty()) concepts = {find_concept(d.concepts, o.concept_id)};
  const bool salient = !o.full_records && use_salient(o, true);

  require(o.window_a.empty() == o.window_b.empty(), "--window-a and --window-b go together");
  std::vector<std::string> presets = o.presets;
  if (presets.empty() && o.window_a.empty()) presets = {"pre1917-vs-1917-1919", "1917-1919-vs-1922-1924"};

  std::vector<WindowDelta> contrasts;
  for (const auto& corpus : pick_corpora(o, d.view)) {
    const auto years = distinct_years(filter_corpus(d.view, corpus));
    check(!years.empty(), fmt::format("corpus '{}' has no records", corpus));
    std::vector<std::pair<YearRange, YearRange>> windows;
    for (const auto& p : presets) windows.push_back(preset_windows(p, years.front()));
    if (!o.window_a.empty()) windows.emplace_back(parse_window(o.window_a), parse_window(o.window_b));
    for (const auto& concept_def : concepts) {
      const Conditioned cond = condition(o, d, concept_def, corpus, salient);
      for (const auto& [a, b] : windows) {
        try {
          WindowDelta w = window_share_delta(cond.records, concept_def, a, b, o.analysis.epsilon);
          w.corpus = corpus;
          contrasts.push_back(std::move(w));
        } catch (const Error& e) {
          throw Error(fmt::format("concept '{}' in corpus '{}': {}", concept_def.concept_id, corpus, e.what()));
        }
      }
    }
  }
  emit(o, window_delta_json(contrasts, salient ? salient_tag(o.analysis.q) : "all"));
  return 0;
}

int cmd_cross_corpus(const Options& o) {
  Dataset d = load_dataset(o, true);
  const ConceptDef& concept_def = pick_concept(o, d);
  const auto corpora = pick_corpora(o, d.view);
  require(corpora.size() == 2, "cross-corpus needs exactly two corpora (pass --corpus twice)");
  const DriftTopSet a = drift_top_set(d.view, concept_def, corpora[0], o.analysis.top_k, o.analysis.q);
  const DriftTopSet b = drift_top_set(d.view, concept_def, corpora[1], o.analysis.top_k, o.analysis.q);
  emit(o, overlap_json(a, b));
  return 0;
}

int cmd_cross_layer(const Options& o) {
  require(o.stores.size() >= 2, "cross-layer needs at least two --store layers");
  require(o.layer_tags.empty() || o.layer_tags.size() == o.stores.size(),
          "--layer-tag must be given once per --store");
  std::vector<Store> stores;
  for (const auto& path : o.stores) stores.push_back(load_store(path));
  const auto concepts = load_concept_file(o, stores);
  require(!o.concept_id.empty(), "--concept is required");
  const ConceptDef& concept_def = find_concept(concepts, o.concept_id);

  std::vector<LayerInput> layers;
  for (std::size_t i = 0; i < stores.size(); ++i) {
    std::string tag = o.layer_tags.empty() ? stores[i].manifest.layer_tag : o.layer_tags[i];
    const bool duplicate = std::any_of(layers.begin(), layers.end(), [&](const LayerInput& l) { return l.layer_tag == tag; });
    if (duplicate) tag = fmt::format("{}#{}", tag, i);
    layers.push_back({tag, view_of(stores[i].records)});
  }
  const std::string corpus = pick_corpus(o, layers.front().records);
  emit(o, cross_layer_json(concept_def.concept_id, corpus, run_cross_layer(layers, concept_def, corpus, o.analysis)));
  return 0;
}

int cmd_implicit(const Options& o) {
  Dataset d = load_dataset(o, true);
  const ConceptDef& concept_def = pick_concept(o, d);
  const std::string corpus = pick_corpus(o, d.view);
  emit(o, implicit_json(summarize_implicit(d.view, concept_def, corpus, o.analysis.q)));
  return 0;
}

int cmd_evidence(const Options& o) {
  require(o.rule == "diachronic" || o.rule == "cross-corpus",
          fmt::format("unknown rule '{}' (expected diachronic or cross-corpus)", o.rule));
  Dataset d = load_dataset(o, !o.concept_id.empty() || !o.concepts_path.empty());
  const std::string corpus = pick_corpus(o, d.view);
  const bool salient = use_salient(o, !o.concept_id.empty());

  Conditioned cond;
  const ConceptDef* concept_def = nullptr;
  if (!o.concept_id.empty()) concept_def = &pick_concept(o, d);
  if (salient) {
    require(concept_def != nullptr, "salient conditioning needs --concept");
    cond = condition(o, d, *concept_def, corpus, true);
  } else {
    cond = {filter_corpus(d.view, corpus), "all"};
  }

  std::vector<EvidenceTarget> targets;
  for (FeatureId f : o.features) targets.push_back(EvidenceTarget::of_feature(f));
  for (const auto& label : o.components) {
    require(concept_def != nullptr, "--component needs --concept");
    targets.push_back(EvidenceTarget::of_component(concept_def->component(label)));
  }
  if (targets.empty()) {
    require(concept_def != nullptr, "pass --feature, --component or --concept");
    for (const auto& comp : concept_def->components) targets.push_back(EvidenceTarget::of_component(comp));
  }

  const auto years = distinct_years(cond.records);
  std::vector<EvidenceBundle> bundles;
  for (const auto& target : targets) {
    if (o.rule == "cross-corpus") {
      bundles.push_back(cross_corpus_evidence(cond.records, target, o.analysis.pool, o.analysis.display));
      continue;
    }
    SliceSeries series = slice_mean(
        cond.records, [&](const ActivationRecord& r) { return target.score(r); }, years, {target.describe(), corpus, cond.tag});
    try {
      bundles.push_back(diachronic_evidence(cond.records, target, series, o.analysis.evidence_per_year));
    } catch (const Error& e) {
      throw Error(fmt::format("{}: {}", target.describe(), e.what()));
    }
  }
  emit(o, evidence_json(bundles));
  return 0;
}

int cmd_report(const Options& o) {
  require(!o.input.empty(), "--input is required");
  std::ifstream in(o.input, std::ios::binary);
  check(static_cast<bool>(in), fmt::format("cannot read {}", o.input));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed JSON in {} ({})", o.input, e.what()));
  }
  emit(o, doc);
  return 0;
}

int cmd_synth(const Options& o) {
  require(!o.out.empty(), "--out DIR is required");
  const auto concepts = synthetic_concepts(o.dim, o.n_concepts, o.seed);
  SyntheticSpec spec;
  spec.dim = o.dim;
  spec.kappa = o.kappa;
  spec.units = o.units;
  spec.year_min = o.year_min;
  spec.year_max = o.year_max;
  if (!o.corpora.empty()) spec.corpora = o.corpora;
  spec.seed = o.seed;
  for (const auto& c : concepts) {
    for (FeatureId f : c.all_bases()) spec.hot_features.push_back(f);
    spec.lexemes.insert(spec.lexemes.end(), c.lexemes.begin(), c.lexemes.end());
  }

  StoreManifest manifest;
  manifest.store_id = fmt::format("synthetic-{}", o.seed);
  std::string corpus_name;
  for (const auto& c : spec.corpora) corpus_name += (corpus_name.empty() ? "" : "+") + c;
  manifest.corpus = corpus_name;
  manifest.layer_tag = o.layer_tag;
  manifest.dim = o.dim;
  manifest.kappa = o.kappa;
  manifest.year_min = o.year_min;
  manifest.year_max = o.year_max;

  std::size_t written = 0;
  if (o.tokens_per_unit > 0) {
    const SaeWeights weights = SaeWeights::random(16, o.dim, o.seed, 1.0);
    SaeConfig config;
    config.kappa = o.kappa;
    const SaeFixture fx = sae_token_fixture(weights, config, spec, o.tokens_per_unit);
    manifest.level = StoreLevel::token;
    manifest.unit_count = fx.units.size();
    write_token_store(o.out, manifest, fx.units, fx.tokens);
    written = fx.units.size();
  } else {
    auto records = synthetic_records(spec);
    written = records.size();
    write_store(o.out, manifest, std::move(records));
  }
  if (!o.concepts_out.empty()) {
    std::ofstream out(o.concepts_out, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), fmt::format("cannot write {}", o.concepts_out));
    out << concepts_to_json(concepts);
  }
  Json summary{{"kind", "synth"}, {"units", written}, {"out", o.out}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

void print_error(const std::string& type, const std::string& message) {
  nlohmann::json err{{"error", message}, {"type", type}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Diachronic analytics over sparse autoencoder activation stores"};
  app.require_subcommand(1);

  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--store", o.stores, "Store directory (repeatable)");
    sub->add_option("--out", o.out, "Output path (stdout when omitted)");
    sub->add_option("--format", o.format, "csv, json, svg or md")
        ->check(CLI::IsMember({"csv", "json", "svg", "md"}))
        ->capture_default_str();
    sub->add_option("--config", o.config, "JSON file setting any flag; command-line flags win");
  };
  auto add_analysis = [&](CLI::App* sub) {
    add_io(sub);
    sub->add_option("--concepts", o.concepts_path, "Concept config (JSON)");
    sub->add_option("--concept", o.concept_id, "Concept id");
    sub->add_option("--corpus", o.corpora, "Corpus name (repeatable where meaningful)");
    sub->add_option("--q", o.analysis.q, "Salience quantile")->capture_default_str();
    sub->add_option("--epsilon", o.analysis.epsilon, "Share smoothing constant")->capture_default_str();
    sub->add_option("--top-k", o.analysis.top_k, "Drifting bases kept")->capture_default_str();
    sub->add_option("--evidence-per-year", o.analysis.evidence_per_year, "Diachronic evidence per year")
        ->capture_default_str();
    sub->add_option("--pool", o.analysis.pool, "Cross-corpus evidence pool size")->capture_default_str();
    sub->add_option("--display", o.analysis.display, "Evidence items displayed")->capture_default_str();
    sub->add_option("--conditioning", o.conditioning, "all or salient");
  };

  std::map<std::string, int (*)(const Options&)> handlers;
  auto command = [&](const std::string& name, const std::string& help, int (*fn)(const Options&), bool analysis) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (analysis) add_analysis(sub);
    else add_io(sub);
    handlers[name] = fn;
    return sub;
  };

  command("validate", "Check every store invariant", cmd_validate, false);
  command("pool", "Max-pool a token-level store into a sentence-level store", cmd_pool, false);
  command("atlas", "Per concept and corpus summary statistics", cmd_atlas, true);
  command("drift", "Rank features by cumulative drift", cmd_drift, true);
  command("trajectory", "Magnitude, component and feature series", cmd_trajectory, true)
      ->add_option("--feature", o.features, "Extra feature series (repeatable)");
  app.get_subcommand("trajectory")->add_flag("--rates", o.rates, "Include relative change rates");
  command("shares", "Per-year component shares, diversity and reorganization", cmd_shares, true);
  auto* wd = command("window-delta", "Share differences between two year windows", cmd_window_delta, true);
  wd->add_option("--preset", o.presets, "pre1917-vs-1917-1919 or 1917-1919-vs-1922-1924 (repeatable)");
  wd->add_option("--window-a", o.window_a, "Custom window LO:HI");
  wd->add_option("--window-b", o.window_b, "Custom window LO:HI");
  wd->add_flag("--full-records", o.full_records, "Use all records instead of the salient set");
  command("cross-corpus", "Jaccard@K overlap of drifting bases between two corpora", cmd_cross_corpus, true);
  command("cross-layer", "Layer robustness of peak, turn and evidence fingerprints", cmd_cross_layer, true)
      ->add_option("--layer-tag", o.layer_tags, "Layer tag per --store (default: manifest layer_tag)");
  command("implicit", "Anchored vs implicit realization of a concept", cmd_implicit, true);
  auto* ev = command("evidence", "Retrieve evidence sentences", cmd_evidence, true);
  ev->add_option("--feature", o.features, "Feature target (repeatable)");
  ev->add_option("--component", o.components, "Component target (repeatable)");
  ev->add_option("--rule", o.rule, "diachronic or cross-corpus")->capture_default_str();
  command("report", "Re-render a saved JSON result", cmd_report, false)
      ->add_option("--input", o.input, "JSON document written by another command");
  auto* sy = command("synth", "Write a synthetic store and concept config", cmd_synth, false);
  sy->add_option("--concepts-out", o.concepts_out, "Where to write the concept config");
  sy->add_option("--units", o.units)->capture_default_str();
  sy->add_option("--dim", o.dim)->capture_default_str();
  sy->add_option("--kappa", o.kappa)->capture_default_str();
  sy->add_option("--year-min", o.year_min)->capture_default_str();
  sy->add_option("--year-max", o.year_max)->capture_default_str();
  sy->add_option("--corpus", o.corpora, "Corpus name (repeatable)");
  sy->add_option("--n-concepts", o.n_concepts)->capture_default_str();
  sy->add_option("--seed", o.seed)->capture_default_str();
  sy->add_option("--tokens-per-unit", o.tokens_per_unit, "Write a token-level store when > 0")
      ->capture_default_str();
  sy->add_option("--layer-tag", o.layer_tag)->capture_default_str();

  try {
    std::vector<std::string> args = inject_config(std::vector<std::string>(argv, argv + argc));
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    for (const auto& [name, fn] : handlers) {
      if (app.got_subcommand(name)) return fn(o);
    }
    print_error("usage", "no command given");
    return 2;
  } catch (const UsageError& e) {
    print_error("usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("runtime", e.what());
    return 1;
  }
}
