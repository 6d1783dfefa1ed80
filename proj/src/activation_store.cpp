#include "diachron/activation_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "diachron/error.hpp"

namespace diachron {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kUnitsFile = "units.jsonl";
constexpr const char* kTokensFile = "tokens.jsonl";

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

// Parses "indices"/"values" into a SparseVector; returns an error message
// instead of throwing so validation can continue past bad lines.
std::optional<std::string> parse_vector(const json& obj, std::uint32_t dim, bool required,
                                        SparseVector& out) {
  out.dim = dim;
  const bool has_idx = obj.contains("indices");
  const bool has_val = obj.contains("values");
  if (!has_idx && !has_val && !required) return std::nullopt;
  if (!has_idx) return std::string("missing field 'indices'");
  if (!has_val) return std::string("missing field 'values'");
  const json& idx = obj["indices"];
  const json& val = obj["values"];
  if (!idx.is_array()) return std::string("'indices' must be an array");
  if (!val.is_array()) return std::string("'values' must be an array");
  if (idx.size() != val.size()) {
    return fmt::format("indices/values length mismatch ({} vs {})", idx.size(), val.size());
  }
  out.indices.reserve(idx.size());
  out.values.reserve(val.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const json& ix = idx[i];
    if (!ix.is_number_unsigned()) return std::string("indices must be unsigned integers");
    const auto feature = ix.get<std::uint64_t>();
    if (feature >= dim) return fmt::format("index out of range ({} >= dim {})", feature, dim);
    if (i > 0 && feature <= out.indices.back()) return std::string("non-ascending indices");
    const json& vx = val[i];
    if (!vx.is_number()) return std::string("values must be numbers");
    const double v = round_to_f32(vx.get<double>());
    if (!std::isfinite(v)) return std::string("non-finite value");
    if (v <= 0.0) return std::string("non-positive value");
    out.indices.push_back(static_cast<FeatureId>(feature));
    out.values.push_back(v);
  }
  return std::nullopt;
}

std::optional<std::string> parse_meta(const json& obj, UnitMeta& meta) {
  for (const char* key : {"unit_id", "corpus", "text"}) {
    if (!obj.contains(key)) return fmt::format("missing field '{}'", key);
    if (!obj[key].is_string()) return fmt::format("'{}' must be a string", key);
  }
  if (!obj.contains("year")) return std::string("missing field 'year'");
  if (!obj["year"].is_number_integer()) return std::string("'year' must be an integer");
  meta.unit_id = obj["unit_id"].get<std::string>();
  meta.corpus = obj["corpus"].get<std::string>();
  meta.text = obj["text"].get<std::string>();
  meta.year = obj["year"].get<int>();
  return std::nullopt;
}

struct ScanResult {
  ValidationReport report;
  std::vector<ActivationRecord> records;
  std::vector<TokenRecord> tokens;
};

ScanResult scan_store(const fs::path& dir, const StoreManifest& manifest, bool keep) {
  ScanResult result;
  auto& report = result.report;
  auto issue = [&](const char* file, std::size_t line, std::string msg) {
    report.errors.push_back({file, line, std::move(msg)});
  };

  if (manifest.year_min > manifest.year_max) {
    issue(kManifestFile, 0,
          fmt::format("year_min {} exceeds year_max {}", manifest.year_min, manifest.year_max));
  }

  const fs::path units_path = dir / kUnitsFile;
  std::ifstream units(units_path);
  if (!units) throw Error(fmt::format("cannot open records file {}", units_path.string()));

  const bool sentence = manifest.level == StoreLevel::sentence;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(units, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    ++report.unit_count;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      issue(kUnitsFile, line_no, fmt::format("malformed JSON ({})", e.what()));
      continue;
    }
    if (!obj.is_object()) {
      issue(kUnitsFile, line_no, "record is not a JSON object");
      continue;
    }
    ActivationRecord rec;
    if (auto err = parse_meta(obj, rec.meta)) {
      issue(kUnitsFile, line_no, *err);
      continue;
    }
    bool good = true;
    if (!seen_ids.insert(rec.meta.unit_id).second) {
      issue(kUnitsFile, line_no, fmt::format("duplicate unit_id '{}'", rec.meta.unit_id));
      good = false;
    }
    if (rec.meta.year < manifest.year_min || rec.meta.year > manifest.year_max) {
      issue(kUnitsFile, line_no,
            fmt::format("year {} outside manifest range [{}, {}]", rec.meta.year,
                        manifest.year_min, manifest.year_max));
      good = false;
    }
    if (auto err = parse_vector(obj, manifest.dim, sentence, rec.z)) {
      issue(kUnitsFile, line_no, *err);
      good = false;
    }
    if (!good) continue;
    ++report.year_histogram[rec.meta.year];
    if (keep) result.records.push_back(std::move(rec));
  }

  if (report.unit_count != manifest.unit_count) {
    issue(kManifestFile, 0,
          fmt::format("unit_count {} does not match {} records", manifest.unit_count,
                      report.unit_count));
  }

  if (sentence) return result;

  const fs::path tokens_path = dir / kTokensFile;
  std::ifstream tokens(tokens_path);
  if (!tokens) {
    issue(kTokensFile, 0, "token-level store has no tokens.jsonl");
    return result;
  }
  std::set<std::pair<std::string, std::uint32_t>> seen_tokens;
  std::unordered_set<std::string> units_with_tokens;
  line_no = 0;
  while (std::getline(tokens, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      issue(kTokensFile, line_no, fmt::format("malformed JSON ({})", e.what()));
      continue;
    }
    if (!obj.is_object() || !obj.contains("unit_id") || !obj["unit_id"].is_string()) {
      issue(kTokensFile, line_no, "token record needs a string 'unit_id'");
      continue;
    }
    if (!obj.contains("token_index") || !obj["token_index"].is_number_unsigned()) {
      issue(kTokensFile, line_no, "token record needs an unsigned 'token_index'");
      continue;
    }
    TokenRecord tok;
    tok.unit_id = obj["unit_id"].get<std::string>();
    tok.token_index = obj["token_index"].get<std::uint32_t>();
    if (!seen_ids.count(tok.unit_id)) {
      issue(kTokensFile, line_no, fmt::format("unknown unit_id '{}'", tok.unit_id));
      continue;
    }
    if (!seen_tokens.emplace(tok.unit_id, tok.token_index).second) {
      issue(kTokensFile, line_no,
            fmt::format("duplicate token {} of unit '{}'", tok.token_index, tok.unit_id));
      continue;
    }
    if (auto err = parse_vector(obj, manifest.dim, true, tok.z)) {
      issue(kTokensFile, line_no, *err);
      continue;
    }
    units_with_tokens.insert(tok.unit_id);
    if (keep) result.tokens.push_back(std::move(tok));
  }
  if (units_with_tokens.size() < seen_ids.size()) {
    std::vector<std::string> missing;
    for (const auto& id : seen_ids) {
      if (!units_with_tokens.count(id)) missing.push_back(id);
    }
    std::sort(missing.begin(), missing.end());
    for (const auto& id : missing) issue(kTokensFile, 0, fmt::format("unit '{}' has no tokens", id));
  }
  return result;
}

std::string summarize(const ValidationReport& report) {
  std::string msg = fmt::format("store failed validation with {} error(s)", report.errors.size());
  if (!report.errors.empty()) msg += ": " + report.errors.front().describe();
  return msg;
}

std::string json_number(double value) { return fmt::format("{}", static_cast<float>(value)); }

void write_vector(std::string& out, const SparseVector& z) {
  out += "\"indices\":[";
  for (std::size_t i = 0; i < z.nnz(); ++i) {
    if (i) out += ',';
    out += fmt::format("{}", z.indices[i]);
  }
  out += "],\"values\":[";
  for (std::size_t i = 0; i < z.nnz(); ++i) {
    if (i) out += ',';
    out += json_number(z.values[i]);
  }
  out += ']';
}

std::string quoted(const std::string& s) { return json(s).dump(-1, ' ', false); }

void write_manifest(const fs::path& dir, const StoreManifest& m) {
  json j = json::object();
  j["store_id"] = m.store_id;
  j["corpus"] = m.corpus;
  j["layer_tag"] = m.layer_tag;
  j["dim"] = m.dim;
  j["kappa"] = m.kappa ? json(*m.kappa) : json(nullptr);
  j["year_min"] = m.year_min;
  j["year_max"] = m.year_max;
  j["unit_count"] = m.unit_count;
  j["level"] = to_string(m.level);
  std::ofstream out(dir / kManifestFile, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", (dir / kManifestFile).string()));
  out << j.dump(2) << '\n';
}

std::string meta_fields(const UnitMeta& meta) {
  return fmt::format("\"unit_id\":{},\"corpus\":{},\"year\":{},\"text\":{}", quoted(meta.unit_id),
                     quoted(meta.corpus), meta.year, quoted(meta.text));
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  return out;
}

}  // namespace

std::string to_string(StoreLevel level) {
  return level == StoreLevel::token ? "token" : "sentence";
}

StoreLevel parse_store_level(const std::string& text) {
  if (text == "token") return StoreLevel::token;
  if (text == "sentence") return StoreLevel::sentence;
  throw Error(fmt::format("unknown store level '{}'", text));
}

std::string ValidationIssue::describe() const {
  if (line == 0) return fmt::format("{}: {}", file, message);
  if (file == kUnitsFile) return fmt::format("{} at line {}", message, line);
  return fmt::format("{} at {} line {}", message, file, line);
}

bool RecordFilter::accepts(const UnitMeta& meta) const {
  if (year_min && meta.year < *year_min) return false;
  if (year_max && meta.year > *year_max) return false;
  if (corpus && meta.corpus != *corpus) return false;
  return true;
}

double round_to_f32(double value) { return static_cast<double>(static_cast<float>(value)); }

StoreManifest read_manifest(const fs::path& store_dir) {
  const fs::path path = store_dir / kManifestFile;
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("missing manifest {}", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(fmt::format("malformed manifest {}: {}", path.string(), e.what()));
  }
  StoreManifest m;
  try {
    m.store_id = j.at("store_id").get<std::string>();
    m.corpus = j.at("corpus").get<std::string>();
    m.layer_tag = j.at("layer_tag").get<std::string>();
    m.dim = j.at("dim").get<std::uint32_t>();
    if (j.contains("kappa") && !j["kappa"].is_null()) m.kappa = j["kappa"].get<std::uint32_t>();
    m.year_min = j.at("year_min").get<int>();
    m.year_max = j.at("year_max").get<int>();
    m.unit_count = j.at("unit_count").get<std::uint64_t>();
    m.level = parse_store_level(j.at("level").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(fmt::format("invalid manifest {}: {}", path.string(), e.what()));
  }
  if (m.dim == 0) throw Error(fmt::format("invalid manifest {}: dim must be positive", path.string()));
  if (m.kappa && *m.kappa == 0) {
    throw Error(fmt::format("invalid manifest {}: kappa must be positive", path.string()));
  }
  return m;
}

ValidationReport validate_store(const fs::path& store_dir) {
  const StoreManifest manifest = read_manifest(store_dir);
  return scan_store(store_dir, manifest, false).report;
}

Store load_store(const fs::path& store_dir, const RecordFilter& filter) {
  Store store;
  store.manifest = read_manifest(store_dir);
  if (store.manifest.level != StoreLevel::sentence) {
    throw Error(fmt::format("{} is a token-level store; pool it first", store_dir.string()));
  }
  ScanResult scan = scan_store(store_dir, store.manifest, true);
  if (!scan.report.ok()) throw Error(summarize(scan.report));
  store.records.reserve(scan.records.size());
  for (auto& rec : scan.records) {
    if (filter.accepts(rec.meta)) store.records.push_back(std::move(rec));
  }
  sort_canonical(store.records);
  return store;
}

TokenStore load_token_store(const fs::path& store_dir) {
  TokenStore store;
  store.manifest = read_manifest(store_dir);
  if (store.manifest.level != StoreLevel::token) {
    throw Error(fmt::format("{} is not a token-level store", store_dir.string()));
  }
  ScanResult scan = scan_store(store_dir, store.manifest, true);
  if (!scan.report.ok()) throw Error(summarize(scan.report));
  store.units.reserve(scan.records.size());
  for (auto& rec : scan.records) store.units.push_back(std::move(rec.meta));
  store.tokens = std::move(scan.tokens);
  return store;
}

std::vector<ActivationRecord> pool_token_store(const TokenStore& store) {
  std::unordered_map<std::string, std::vector<const TokenRecord*>> by_unit;
  for (const auto& tok : store.tokens) by_unit[tok.unit_id].push_back(&tok);

  std::vector<ActivationRecord> out;
  out.reserve(store.units.size());
  for (const auto& meta : store.units) {
    auto it = by_unit.find(meta.unit_id);
    if (it == by_unit.end()) throw Error(fmt::format("unit '{}' has no tokens", meta.unit_id));
    auto& toks = it->second;
    std::sort(toks.begin(), toks.end(),
              [](const TokenRecord* a, const TokenRecord* b) { return a->token_index < b->token_index; });
    std::vector<SparseVector> vecs;
    vecs.reserve(toks.size());
    for (const auto* t : toks) vecs.push_back(t->z);
    out.push_back({meta, max_pool_tokens(vecs)});
  }
  sort_canonical(out);
  return out;
}

void write_store(const fs::path& store_dir, StoreManifest manifest,
                 std::vector<ActivationRecord> records) {
  fs::create_directories(store_dir);
  sort_canonical(records);
  manifest.unit_count = records.size();
  manifest.level = StoreLevel::sentence;
  write_manifest(store_dir, manifest);
  auto out = open_for_write(store_dir / kUnitsFile);
  std::string line;
  for (const auto& rec : records) {
    line = '{' + meta_fields(rec.meta) + ',';
    write_vector(line, rec.z);
    line += "}\n";
    out << line;
  }
  if (!out) throw Error(fmt::format("write failed for {}", (store_dir / kUnitsFile).string()));
}

void write_token_store(const fs::path& store_dir, StoreManifest manifest,
                       std::span<const UnitMeta> units, std::span<const TokenRecord> tokens) {
  fs::create_directories(store_dir);
  manifest.unit_count = units.size();
  manifest.level = StoreLevel::token;
  write_manifest(store_dir, manifest);
  auto uout = open_for_write(store_dir / kUnitsFile);
  for (const auto& meta : units) uout << '{' << meta_fields(meta) << "}\n";
  auto tout = open_for_write(store_dir / kTokensFile);
  std::string line;
  for (const auto& tok : tokens) {
    line = fmt::format("{{\"unit_id\":{},\"token_index\":{},", quoted(tok.unit_id), tok.token_index);
    write_vector(line, tok.z);
    line += "}\n";
    tout << line;
  }
  if (!uout || !tout) throw Error(fmt::format("write failed for {}", store_dir.string()));
}

bool canonical_less(const ActivationRecord& a, const ActivationRecord& b) {
  return std::tie(a.meta.year, a.meta.unit_id, a.meta.corpus) <
         std::tie(b.meta.year, b.meta.unit_id, b.meta.corpus);
}

void sort_canonical(std::vector<ActivationRecord>& records) {
  std::stable_sort(records.begin(), records.end(), canonical_less);
}

std::vector<ActivationRecord> merge_records(std::span<const Store> stores) {
  std::vector<ActivationRecord> out;
  std::size_t total = 0;
  for (const auto& s : stores) total += s.records.size();
  out.reserve(total);
  for (const auto& s : stores) out.insert(out.end(), s.records.begin(), s.records.end());
  sort_canonical(out);
  return out;
}

}  // namespace diachron
