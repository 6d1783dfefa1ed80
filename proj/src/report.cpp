#include "diachron/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "diachron/error.hpp"

namespace diachron {

namespace {

std::string num(double v) { return fmt::format("{}", v); }

std::string num4(double v) { return fmt::format("{:.4f}", v); }

Json opt_json(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }
Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// CSV/Markdown cell for a JSON scalar; null becomes empty.
std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return fmt::format("{}", v.get<std::int64_t>());
  if (v.is_number_unsigned()) return fmt::format("{}", v.get<std::uint64_t>());
  if (v.is_number_float()) return num(v.get<double>());
  return v.dump();
}

std::string md_cell(const Json& v) {
  if (v.is_number_float()) return num4(v.get<double>());
  std::string s = cell(v);
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<Json> row) { rows_.push_back(std::move(row)); }

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_field(fields[i]);
      }
      out += '\n';
    };
    line(header_);
    for (const auto& row : rows_) {
      std::vector<std::string> fields;
      for (const auto& v : row) fields.push_back(cell(v));
      line(fields);
    }
    return out;
  }

  std::string markdown() const {
    std::string out = "|";
    for (const auto& h : header_) out += " " + h + " |";
    out += "\n|";
    for (std::size_t i = 0; i < header_.size(); ++i) out += " --- |";
    out += '\n';
    for (const auto& row : rows_) {
      out += '|';
      for (const auto& v : row) out += " " + md_cell(v) + " |";
      out += '\n';
    }
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Json>> rows_;
};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string series_name(const SeriesKey& key) {
  std::string name = key.scope;
  if (!key.corpus.empty()) name += " [" + key.corpus + "]";
  if (!key.conditioning.empty()) name += " (" + key.conditioning + ")";
  return name;
}

SliceSeries series_from_json(const Json& j) {
  SliceSeries s;
  s.key.scope = j.at("scope").get<std::string>();
  s.key.corpus = j.value("corpus", "");
  s.key.conditioning = j.value("conditioning", "");
  for (const auto& p : j.at("points")) {
    s.years.push_back(p.at("year").get<int>());
    s.values.push_back(p.at("value").get<double>());
    s.counts.push_back(p.at("count").get<std::uint64_t>());
  }
  return s;
}

const std::string& kind_of(const Json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw Error("report document has no kind");
  }
  return doc["kind"].get_ref<const std::string&>();
}

[[noreturn]] void unsupported(const std::string& kind, ReportFormat format) {
  throw Error(fmt::format("format {} is not supported for {} reports", to_string(format), kind));
}

// ---- per-kind tables ----

Table validation_table(const Json& doc) {
  Table t({"file", "line", "message"});
  for (const auto& e : doc.at("errors")) t.add({e.at("file"), e.at("line"), e.at("message")});
  return t;
}

Table atlas_table(const Json& doc) {
  Table t({"concept_id", "corpus", "implicit_ratio", "diversity", "peak_year", "turn_year",
           "turn_intensity", "salient_threshold", "salient_units"});
  for (const auto& r : doc.at("rows")) {
    t.add({r.at("concept_id"), r.at("corpus"), r.at("implicit_ratio"), r.at("diversity"),
           r.at("peak_year"), r.at("turn_year"), r.at("turn_intensity"), r.at("salient_threshold"),
           r.at("salient_units")});
  }
  return t;
}

Table drift_table(const Json& doc) {
  Table t({"rank", "feature", "drift"});
  for (const auto& r : doc.at("ranking")) t.add({r.at("rank"), r.at("feature"), r.at("drift")});
  return t;
}

Table series_table(const Json& series_list) {
  Table t({"scope", "corpus", "conditioning", "year", "value", "count", "change_rate"});
  for (const auto& s : series_list) {
    std::map<int, Json> rates;
    if (s.contains("rates")) {
      for (const auto& r : s["rates"]) rates[r.at("to_year").get<int>()] = r.at("value");
    }
    for (const auto& p : s.at("points")) {
      const int year = p.at("year").get<int>();
      auto it = rates.find(year);
      t.add({s.at("scope"), s.at("corpus"), s.at("conditioning"), year,
             p.at("count").get<std::uint64_t>() > 0 ? p.at("value") : Json(nullptr), p.at("count"),
             it == rates.end() ? Json(nullptr) : it->second});
    }
  }
  return t;
}

Table shares_table(const Json& doc) {
  Table t({"concept_id", "corpus", "year", "label", "mean", "share", "diversity", "reorganization"});
  auto add_row = [&](const Json& row, const Json& year) {
    for (const auto& s : row.at("shares")) {
      t.add({doc.at("concept_id"), doc.at("corpus"), year, s.at("label"), s.at("mean"), s.at("share"),
             row.at("diversity"), row.contains("reorganization") ? row["reorganization"] : Json(nullptr)});
    }
  };
  for (const auto& row : doc.at("rows")) add_row(row, row.at("year"));
  add_row(doc.at("pooled"), "all");
  return t;
}

Table window_table(const Json& doc) {
  Table t({"concept_id", "corpus", "window_a", "window_b", "label", "share_a", "share_b", "delta"});
  for (const auto& c : doc.at("contrasts")) {
    for (const auto& e : c.at("entries")) {
      t.add({c.at("concept_id"), c.at("corpus"), c.at("window_a"), c.at("window_b"), e.at("label"),
             e.at("share_a"), e.at("share_b"), e.at("delta")});
    }
  }
  return t;
}

Table overlap_table(const Json& doc) {
  std::map<std::uint32_t, Json> drift_a;
  std::map<std::uint32_t, Json> drift_b;
  for (const auto& f : doc.at("top_a")) drift_a[f.at("feature").get<std::uint32_t>()] = f.at("drift");
  for (const auto& f : doc.at("top_b")) drift_b[f.at("feature").get<std::uint32_t>()] = f.at("drift");
  Table t({"feature", "membership", "drift_a", "drift_b"});
  for (const char* part : {"shared", "only_a", "only_b"}) {
    for (const auto& f : doc.at(part)) {
      const auto id = f.get<std::uint32_t>();
      t.add({id, part, drift_a.count(id) ? drift_a[id] : Json(nullptr),
             drift_b.count(id) ? drift_b[id] : Json(nullptr)});
    }
  }
  return t;
}

Table cross_layer_table(const Json& doc) {
  Table t({"layer_tag", "peak_year", "turn_year", "turn_intensity", "avg_jaccard", "evidence_items", "grams"});
  for (const auto& r : doc.at("rows")) {
    t.add({r.at("layer_tag"), r.at("peak_year"), r.at("turn_year"), r.at("turn_intensity"),
           r.at("avg_jaccard"), r.at("evidence_items"), r.at("grams")});
  }
  return t;
}

Table implicit_table(const Json& doc) {
  Table t({"concept_id", "corpus", "q", "threshold", "salient_units", "anchored_units", "implicit_units",
           "anchored_mass", "implicit_mass", "implicit_ratio"});
  t.add({doc.at("concept_id"), doc.at("corpus"), doc.at("q"), doc.at("threshold"), doc.at("salient_units"),
         doc.at("anchored_units"), doc.at("implicit_units"), doc.at("anchored_mass"),
         doc.at("implicit_mass"), doc.at("implicit_ratio")});
  return t;
}

Table evidence_table(const Json& doc) {
  Table t({"target", "rule", "rank", "unit_id", "corpus", "year", "activation", "displayed", "text"});
  for (const auto& b : doc.at("bundles")) {
    std::size_t rank = 0;
    for (const auto& it : b.at("items")) {
      t.add({b.at("target"), b.at("rule"), ++rank, it.at("unit_id"), it.at("corpus"), it.at("year"),
             it.at("activation"), it.at("displayed"), it.at("text")});
    }
  }
  return t;
}

std::string evidence_markdown(const Json& doc) {
  std::string out = "# Evidence\n";
  for (const auto& b : doc.at("bundles")) {
    out += fmt::format("\n## {}\n\nrule: {}", b.at("target").get<std::string>(),
                       b.at("rule").get<std::string>());
    if (!b.at("year_pair").is_null()) {
      out += fmt::format(", years {} to {}", b["year_pair"][0].get<int>(), b["year_pair"][1].get<int>());
    }
    const auto& items = b.at("items");
    out += fmt::format(", showing {} of {}\n", b.at("display_count").get<std::size_t>(), items.size());
    std::optional<int> current_year;
    const bool by_year = !b.at("year_pair").is_null();
    for (const auto& it : items) {
      if (!it.at("displayed").get<bool>()) continue;
      const int year = it.at("year").get<int>();
      if (by_year && current_year != year) {
        out += fmt::format("\n### {}\n", year);
        current_year = year;
      }
      out += fmt::format("\n> {}\n>\n> ({}, {}, {}; activation {})\n", it.at("text").get<std::string>(),
                         it.at("unit_id").get<std::string>(), it.at("corpus").get<std::string>(), year,
                         num4(it.at("activation").get<double>()));
    }
  }
  return out;
}

std::string titled(const std::string& title, const Table& t) { return "# " + title + "\n\n" + t.markdown(); }

std::vector<SliceSeries> series_list_from_json(const Json& list) {
  std::vector<SliceSeries> out;
  for (const auto& s : list) out.push_back(series_from_json(s));
  return out;
}

std::vector<SliceSeries> share_series(const Json& doc) {
  std::vector<SliceSeries> out;
  for (const auto& label : doc.at("labels")) {
    SliceSeries s;
    s.key = {"share:" + label.get<std::string>(), doc.at("corpus").get<std::string>(), ""};
    for (const auto& row : doc.at("rows")) {
      for (const auto& sh : row.at("shares")) {
        if (sh.at("label") != label) continue;
        s.years.push_back(row.at("year").get<int>());
        s.values.push_back(sh.at("share").get<double>());
        s.counts.push_back(row.at("unit_count").get<std::uint64_t>());
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string window_heatmap(const Json& doc) {
  std::vector<std::string> rows;
  std::vector<std::string> cols;
  std::map<std::pair<std::string, std::string>, double> values;
  for (const auto& c : doc.at("contrasts")) {
    const std::string col =
        c.at("window_b").get<std::string>() + " vs " + c.at("window_a").get<std::string>();
    if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
    for (const auto& e : c.at("entries")) {
      const std::string row = c.at("concept_id").get<std::string>() + " [" +
                              c.at("corpus").get<std::string>() + "] " + e.at("label").get<std::string>();
      if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
      values[{row, col}] = e.at("delta").get<double>();
    }
  }
  std::vector<std::vector<std::optional<double>>> cells(rows.size(),
                                                        std::vector<std::optional<double>>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto it = values.find({rows[r], cols[c]});
      if (it != values.end()) cells[r][c] = it->second;
    }
  }
  return render_heatmap_svg("window share deltas", rows, cols, cells);
}

// Linear interpolation white -> blue (negative) / red (positive).
std::string diverging_color(double v, double max_abs) {
  const double t = max_abs > 0.0 ? std::clamp(std::abs(v) / max_abs, 0.0, 1.0) : 0.0;
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  return v >= 0.0 ? fmt::format("#ff{:02x}{:02x}", fade, fade) : fmt::format("#{:02x}{:02x}ff", fade, fade);
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  if (text == "svg") return ReportFormat::svg;
  if (text == "md") return ReportFormat::md;
  throw Error(fmt::format("unknown format '{}' (expected csv, json, svg or md)", text));
}

std::string to_string(ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
    case ReportFormat::svg: return "svg";
    case ReportFormat::md: return "md";
  }
  throw Error("invalid report format");
}

Json validation_json(const std::string& store, const ValidationReport& report) {
  Json doc;
  doc["kind"] = "validation";
  doc["store"] = store;
  doc["ok"] = report.ok();
  doc["unit_count"] = report.unit_count;
  doc["year_histogram"] = Json::array();
  for (const auto& [year, count] : report.year_histogram) {
    doc["year_histogram"].push_back({{"year", year}, {"count", count}});
  }
  doc["errors"] = Json::array();
  for (const auto& e : report.errors) {
    doc["errors"].push_back(
        {{"file", e.file}, {"line", e.line}, {"message", e.message}, {"describe", e.describe()}});
  }
  return doc;
}

Json atlas_json(const std::vector<AtlasRow>& rows, const AnalysisOptions& options) {
  Json doc;
  doc["kind"] = "atlas";
  doc["q"] = options.q;
  doc["epsilon"] = options.epsilon;
  doc["rows"] = Json::array();
  for (const auto& r : rows) {
    doc["rows"].push_back({{"concept_id", r.concept_id},
                           {"corpus", r.corpus},
                           {"implicit_ratio", r.implicit_ratio},
                           {"diversity", r.diversity},
                           {"peak_year", r.peak_year},
                           {"turn_year", opt_json(r.turn_year)},
                           {"turn_intensity", opt_json(r.turn_intensity)},
                           {"salient_threshold", r.salient_threshold},
                           {"salient_units", r.salient_units}});
  }
  return doc;
}

Json drift_json(const std::vector<DriftEntry>& ranking, const std::string& corpus,
                const std::string& conditioning) {
  Json doc;
  doc["kind"] = "drift";
  doc["corpus"] = corpus;
  doc["conditioning"] = conditioning;
  doc["ranking"] = Json::array();
  std::size_t rank = 0;
  for (const auto& e : ranking) {
    doc["ranking"].push_back({{"rank", ++rank}, {"feature", e.feature}, {"drift", e.drift}});
  }
  return doc;
}

Json series_json(const SliceSeries& series) {
  Json j;
  j["scope"] = series.key.scope;
  j["corpus"] = series.key.corpus;
  j["conditioning"] = series.key.conditioning;
  j["points"] = Json::array();
  for (std::size_t t = 0; t < series.years.size(); ++t) {
    j["points"].push_back({{"year", series.years[t]}, {"value", series.values[t]}, {"count", series.counts[t]}});
  }
  j["drift"] = cumulative_drift(series);
  j["peak_year"] = series.present_count() > 0 ? Json(peak_year(series)) : Json(nullptr);
  if (series.present_count() >= 2) {
    const TurningPoint tp = turning_point(series);
    j["turn"] = {{"year", tp.year}, {"previous_year", tp.previous_year}, {"intensity", tp.intensity}};
  } else {
    j["turn"] = nullptr;
  }
  return j;
}

Json trajectory_json(const std::vector<SliceSeries>& series, bool with_rates) {
  Json doc;
  doc["kind"] = "trajectory";
  doc["series"] = Json::array();
  for (const auto& s : series) {
    Json j = series_json(s);
    if (with_rates && s.present_count() >= 2) {
      j["rates"] = Json::array();
      for (const auto& c : relative_change_rate(s)) {
        j["rates"].push_back({{"from_year", c.from_year}, {"to_year", c.to_year}, {"value", c.value}});
      }
    }
    doc["series"].push_back(std::move(j));
  }
  return doc;
}

Json shares_json(const ConceptDef& concept_def, const std::string& corpus,
                 const std::vector<CompositionRow>& rows, const CompositionRow& pooled) {
  auto shares = [](const CompositionRow& row) {
    Json arr = Json::array();
    for (const auto& s : row.shares) arr.push_back({{"label", s.label}, {"mean", s.mean}, {"share", s.share}});
    return arr;
  };
  Json doc;
  doc["kind"] = "shares";
  doc["concept_id"] = concept_def.concept_id;
  doc["corpus"] = corpus;
  doc["epsilon"] = pooled.epsilon;
  doc["labels"] = Json::array();
  for (const auto& c : concept_def.components) doc["labels"].push_back(c.label);
  doc["rows"] = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Json j;
    j["year"] = opt_json(rows[i].year);
    j["unit_count"] = rows[i].unit_count;
    j["shares"] = shares(rows[i]);
    j["component_sum"] = rows[i].component_sum();
    j["diversity"] = diversity_entropy(rows[i]);
    j["reorganization"] = i == 0 ? Json(nullptr) : Json(reorganization_delta(rows[i - 1], rows[i]));
    doc["rows"].push_back(std::move(j));
  }
  doc["pooled"] = {{"unit_count", pooled.unit_count},
                   {"shares", shares(pooled)},
                   {"component_sum", pooled.component_sum()},
                   {"diversity", diversity_entropy(pooled)}};
  return doc;
}

Json window_delta_json(const std::vector<WindowDelta>& contrasts, const std::string& conditioning) {
  Json doc;
  doc["kind"] = "window_delta";
  doc["conditioning"] = conditioning;
  doc["contrasts"] = Json::array();
  for (const auto& c : contrasts) {
    Json j;
    j["concept_id"] = c.concept_id;
    j["corpus"] = c.corpus;
    j["window_a"] = c.window_a.label();
    j["window_b"] = c.window_b.label();
    j["units_a"] = c.shares_a.unit_count;
    j["units_b"] = c.shares_b.unit_count;
    j["entries"] = Json::array();
    for (std::size_t s = 0; s < c.deltas.size(); ++s) {
      j["entries"].push_back({{"label", c.deltas[s].label},
                              {"share_a", c.shares_a.shares[s].share},
                              {"share_b", c.shares_b.shares[s].share},
                              {"delta", c.deltas[s].delta}});
    }
    doc["contrasts"].push_back(std::move(j));
  }
  return doc;
}

Json overlap_json(const DriftTopSet& a, const DriftTopSet& b) {
  const OverlapDecomposition parts = decompose_overlap(a, b);
  auto ranked = [](const DriftTopSet& s) {
    Json arr = Json::array();
    for (const auto& f : s.features) arr.push_back({{"feature", f.feature}, {"drift", f.drift}});
    return arr;
  };
  Json doc;
  doc["kind"] = "overlap";
  doc["concept_id"] = a.concept_id;
  doc["corpus_a"] = a.corpus;
  doc["corpus_b"] = b.corpus;
  doc["k"] = a.k;
  doc["jaccard"] = jaccard_at_k(a, b);
  doc["shared"] = parts.shared;
  doc["only_a"] = parts.only_a;
  doc["only_b"] = parts.only_b;
  doc["top_a"] = ranked(a);
  doc["top_b"] = ranked(b);
  return doc;
}

Json cross_layer_json(const std::string& concept_id, const std::string& corpus,
                      const std::vector<LayerRow>& rows) {
  Json doc;
  doc["kind"] = "cross_layer";
  doc["concept_id"] = concept_id;
  doc["corpus"] = corpus;
  doc["rows"] = Json::array();
  for (const auto& r : rows) {
    doc["rows"].push_back({{"layer_tag", r.layer_tag},
                           {"peak_year", r.peak_year},
                           {"turn_year", opt_json(r.turn_year)},
                           {"turn_intensity", opt_json(r.turn_intensity)},
                           {"avg_jaccard", r.avg_jaccard},
                           {"evidence_items", r.evidence_items},
                           {"grams", r.grams}});
  }
  return doc;
}

Json evidence_json(const std::vector<EvidenceBundle>& bundles) {
  Json doc;
  doc["kind"] = "evidence";
  doc["bundles"] = Json::array();
  for (const auto& b : bundles) {
    Json j;
    j["target"] = b.target;
    j["rule"] = to_string(b.rule);
    j["year_pair"] = b.year_pair ? Json::array({b.year_pair->first, b.year_pair->second}) : Json(nullptr);
    j["display_count"] = b.display_count;
    j["items"] = Json::array();
    for (std::size_t i = 0; i < b.items.size(); ++i) {
      const auto& it = b.items[i];
      j["items"].push_back({{"unit_id", it.unit_id},
                            {"corpus", it.corpus},
                            {"year", it.year},
                            {"activation", it.activation},
                            {"displayed", i < b.display_count},
                            {"text", it.text}});
    }
    doc["bundles"].push_back(std::move(j));
  }
  return doc;
}

ImplicitSummary summarize_implicit(std::span<const ActivationRecord* const> records,
                                   const ConceptDef& concept_def, const std::string& corpus, double q) {
  const RecordView in_corpus = filter_corpus(records, corpus);
  const SalientSet salient = build_salient_set(in_corpus, concept_def, corpus, q);
  const RecordView members = salient.members(in_corpus);
  const AnchorSplit split = split_by_anchor(members, concept_def);

  ImplicitSummary out;
  out.concept_id = concept_def.concept_id;
  out.corpus = corpus;
  out.q = q;
  out.threshold = salient.threshold;
  out.salient_units = members.size();
  RecordView anchored;
  RecordView implicit;
  for (const auto* rec : members) {
    const double m = concept_magnitude(*rec, concept_def);
    if (split.anchored.count(rec->meta.unit_id)) {
      anchored.push_back(rec);
      out.anchored_mass += m;
    } else {
      implicit.push_back(rec);
      out.implicit_mass += m;
    }
  }
  out.anchored_units = anchored.size();
  out.implicit_units = implicit.size();
  out.implicit_ratio = implicit_ratio(salient, in_corpus, concept_def);

  const auto years = distinct_years(in_corpus);
  for (const auto& [subset, tag] : {std::pair{&anchored, "salient-explicit"}, std::pair{&implicit, "salient-implicit"}}) {
    SliceSeries a = magnitude_series(*subset, concept_def, years);
    a.key.corpus = corpus;
    a.key.conditioning = tag;
    out.series.push_back(std::move(a));
  }
  return out;
}

Json implicit_json(const ImplicitSummary& s) {
  Json doc;
  doc["kind"] = "implicit";
  doc["concept_id"] = s.concept_id;
  doc["corpus"] = s.corpus;
  doc["q"] = s.q;
  doc["threshold"] = s.threshold;
  doc["salient_units"] = s.salient_units;
  doc["anchored_units"] = s.anchored_units;
  doc["implicit_units"] = s.implicit_units;
  doc["anchored_mass"] = s.anchored_mass;
  doc["implicit_mass"] = s.implicit_mass;
  doc["implicit_ratio"] = s.implicit_ratio;
  doc["series"] = Json::array();
  for (const auto& series : s.series) doc["series"].push_back(series_json(series));
  return doc;
}

std::string render_line_chart_svg(const std::string& title, const std::vector<SliceSeries>& series) {
  constexpr double kWidth = 720, kHeight = 420, kLeft = 70, kRight = 200, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  int y0 = 0, y1 = 0;
  double v0 = 0.0, v1 = 0.0;
  bool any = false;
  for (const auto& s : series) {
    for (const auto& p : s.present_points()) {
      if (!any) {
        y0 = y1 = p.year;
        v0 = v1 = p.value;
        any = true;
      }
      y0 = std::min(y0, p.year);
      y1 = std::max(y1, p.year);
      v0 = std::min(v0, p.value);
      v1 = std::max(v1, p.value);
    }
  }
  v0 = std::min(v0, 0.0);
  if (v1 <= v0) v1 = v0 + 1.0;
  const double year_span = y1 > y0 ? static_cast<double>(y1 - y0) : 1.0;
  auto px = [&](int year) { return kLeft + plot_w * (y1 > y0 ? (year - y0) / year_span : 0.5); };
  auto py = [&](double v) { return kTop + plot_h * (1.0 - (v - v0) / (v1 - v0)); };

  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += fmt::format("<title>{}</title>\n", xml_escape(title));
  out += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>\n", kLeft, xml_escape(title));
  out += fmt::format("<g class=\"axes\" stroke=\"#333\">\n"
                     "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>\n"
                     "<line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\"/>\n</g>\n",
                     kLeft, kTop + plot_h, kLeft + plot_w, kTop);
  if (any) {
    const int step = std::max(1, (y1 - y0 + 9) / 10);
    for (int y = y0; y <= y1; y += step) {
      out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", px(y),
                         kTop + plot_h + 16, y);
    }
    for (int i = 0; i <= 4; ++i) {
      const double v = v0 + (v1 - v0) * i / 4.0;
      out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6,
                         py(v) + 4, num4(v));
    }
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    std::string points;
    for (const auto& p : series[i].present_points()) {
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", px(p.year), py(p.value));
    }
    const std::string name = xml_escape(series_name(series[i].key));
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\">"
                       "<title>{}</title></polyline>\n",
                       color, points, name);
    const double ly = kTop + 14.0 * static_cast<double>(i);
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                       kLeft + plot_w + 12, ly, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kLeft + plot_w + 26, ly + 9, name);
  }
  out += "</svg>\n";
  return out;
}

std::string render_heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                               const std::vector<std::string>& column_labels,
                               const std::vector<std::vector<std::optional<double>>>& cells) {
  if (cells.size() != row_labels.size()) throw Error("heatmap rows do not match row labels");
  for (const auto& row : cells) {
    if (row.size() != column_labels.size()) throw Error("heatmap columns do not match column labels");
  }
  constexpr double kCellW = 110, kCellH = 24, kLeft = 260, kTop = 60;
  const double width = kLeft + kCellW * static_cast<double>(column_labels.size()) + 20;
  const double height = kTop + kCellH * static_cast<double>(row_labels.size()) + 20;
  double max_abs = 0.0;
  for (const auto& row : cells) {
    for (const auto& v : row) {
      if (v) max_abs = std::max(max_abs, std::abs(*v));
    }
  }

  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  out += fmt::format("<title>{}</title>\n", xml_escape(title));
  out += fmt::format("<text x=\"10\" y=\"20\" font-size=\"14\">{}</text>\n", xml_escape(title));
  for (std::size_t c = 0; c < column_labels.size(); ++c) {
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + kCellW * (c + 0.5), kTop - 8, xml_escape(column_labels[c]));
  }
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    const double y = kTop + kCellH * r;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", kLeft - 8,
                       y + kCellH * 0.65, xml_escape(row_labels[r]));
    for (std::size_t c = 0; c < column_labels.size(); ++c) {
      const double x = kLeft + kCellW * c;
      const auto& v = cells[r][c];
      const std::string fill = v ? diverging_color(*v, max_abs) : "#dddddd";
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
                         "stroke=\"#ffffff\"/>\n",
                         x, y, kCellW, kCellH, fill);
      if (v) {
        out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                           x + kCellW / 2, y + kCellH * 0.65, fmt::format("{:+.4f}", *v));
      }
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render_evidence_markdown(const std::vector<EvidenceBundle>& bundles) {
  return evidence_markdown(evidence_json(bundles));
}

std::string render_report(const Json& doc, ReportFormat format) {
  const std::string& kind = kind_of(doc);
  if (format == ReportFormat::json) return doc.dump(2) + "\n";

  if (kind == "validation") {
    if (format == ReportFormat::csv) return validation_table(doc).csv();
    if (format == ReportFormat::md) {
      std::string out = fmt::format("# Validation of {}\n\n{} units, {} errors\n\n",
                                    doc.at("store").get<std::string>(), doc.at("unit_count").get<std::uint64_t>(),
                                    doc.at("errors").size());
      Table hist({"year", "count"});
      for (const auto& h : doc.at("year_histogram")) hist.add({h.at("year"), h.at("count")});
      out += hist.markdown();
      if (!doc.at("errors").empty()) out += "\n" + validation_table(doc).markdown();
      return out;
    }
  } else if (kind == "atlas") {
    if (format == ReportFormat::csv) return atlas_table(doc).csv();
    if (format == ReportFormat::md) return titled("Atlas", atlas_table(doc));
  } else if (kind == "drift") {
    if (format == ReportFormat::csv) return drift_table(doc).csv();
    if (format == ReportFormat::md) {
      return titled(fmt::format("Drift ranking ({}, {})", doc.at("corpus").get<std::string>(),
                                doc.at("conditioning").get<std::string>()),
                    drift_table(doc));
    }
  } else if (kind == "trajectory") {
    if (format == ReportFormat::csv) return series_table(doc.at("series")).csv();
    if (format == ReportFormat::md) return titled("Trajectories", series_table(doc.at("series")));
    if (format == ReportFormat::svg) return render_line_chart_svg("trajectories", series_list_from_json(doc.at("series")));
  } else if (kind == "shares") {
    if (format == ReportFormat::csv) return shares_table(doc).csv();
    if (format == ReportFormat::md) {
      return titled(fmt::format("Component shares of {} in {}", doc.at("concept_id").get<std::string>(),
                                doc.at("corpus").get<std::string>()),
                    shares_table(doc));
    }
    if (format == ReportFormat::svg) {
      return render_line_chart_svg("component shares of " + doc.at("concept_id").get<std::string>(),
                                   share_series(doc));
    }
  } else if (kind == "window_delta") {
    if (format == ReportFormat::csv) return window_table(doc).csv();
    if (format == ReportFormat::md) return titled("Window share deltas", window_table(doc));
    if (format == ReportFormat::svg) return window_heatmap(doc);
  } else if (kind == "overlap") {
    if (format == ReportFormat::csv) return overlap_table(doc).csv();
    if (format == ReportFormat::md) {
      return fmt::format("# Overlap of {} between {} and {}\n\nJaccard@{}: {}\n\n",
                         doc.at("concept_id").get<std::string>(), doc.at("corpus_a").get<std::string>(),
                         doc.at("corpus_b").get<std::string>(), doc.at("k").get<std::size_t>(),
                         num4(doc.at("jaccard").get<double>())) +
             overlap_table(doc).markdown();
    }
  } else if (kind == "cross_layer") {
    if (format == ReportFormat::csv) return cross_layer_table(doc).csv();
    if (format == ReportFormat::md) {
      return titled(fmt::format("Cross-layer robustness of {} in {}", doc.at("concept_id").get<std::string>(),
                                doc.at("corpus").get<std::string>()),
                    cross_layer_table(doc));
    }
  } else if (kind == "implicit") {
    if (format == ReportFormat::csv) return implicit_table(doc).csv();
    if (format == ReportFormat::md) {
      return titled("Implicit realization", implicit_table(doc)) + "\n" + series_table(doc.at("series")).markdown();
    }
    if (format == ReportFormat::svg) {
      return render_line_chart_svg("explicit vs implicit magnitude", series_list_from_json(doc.at("series")));
    }
  } else if (kind == "evidence") {
    if (format == ReportFormat::csv) return evidence_table(doc).csv();
    if (format == ReportFormat::md) return evidence_markdown(doc);
  } else {
    throw Error(fmt::format("unknown report kind '{}'", kind));
  }
  unsupported(kind, format);
}

void emit_report(const Json& doc, ReportFormat format, const std::filesystem::path& out_path) {
  const std::string text = render_report(doc, format);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", out_path.string()));
  out << text;
  out.flush();
  if (!out) throw Error(fmt::format("cannot write {}", out_path.string()));
}

}  // namespace diachron
