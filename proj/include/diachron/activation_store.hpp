#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diachron/sparse_vector.hpp"

namespace diachron {

enum class StoreLevel { token, sentence };

std::string to_string(StoreLevel level);
StoreLevel parse_store_level(const std::string& text);

struct StoreManifest {
  std::string store_id;
  std::string corpus;
  std::string layer_tag;
  std::uint32_t dim = 0;
  std::optional<std::uint32_t> kappa;
  int year_min = 0;
  int year_max = 0;
  std::uint64_t unit_count = 0;
  StoreLevel level = StoreLevel::sentence;
};

struct UnitMeta {
  std::string unit_id;
  std::string corpus;
  int year = 0;
  std::string text;
};

struct ActivationRecord {
  UnitMeta meta;
  SparseVector z;
};

/// One token-level activation, input to pooling.
struct TokenRecord {
  std::string unit_id;
  std::uint32_t token_index = 0;
  SparseVector z;
};

struct ValidationIssue {
  std::string file;  // "manifest.json", "units.jsonl" or "tokens.jsonl"
  std::size_t line = 0;  // 1-based; 0 for store-level issues
  std::string message;

  /// e.g. "non-ascending indices at line 2"
  std::string describe() const;
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::uint64_t unit_count = 0;
  std::map<int, std::uint64_t> year_histogram;

  bool ok() const { return errors.empty(); }
};

/// Year range and corpus predicate applied by load_store.
struct RecordFilter {
  std::optional<int> year_min;
  std::optional<int> year_max;
  std::optional<std::string> corpus;

  bool accepts(const UnitMeta& meta) const;
};

/// A loaded sentence-level store. Records are in canonical (year, unit_id)
/// order and immutable after load.
struct Store {
  StoreManifest manifest;
  std::vector<ActivationRecord> records;
};

/// Token-level store contents: unit metadata plus per-token vectors.
struct TokenStore {
  StoreManifest manifest;
  std::vector<UnitMeta> units;
  std::vector<TokenRecord> tokens;
};

StoreManifest read_manifest(const std::filesystem::path& store_dir);

/// Checks every store invariant. Throws only when the manifest or the
/// records file is missing or unreadable; per-line problems are collected.
ValidationReport validate_store(const std::filesystem::path& store_dir);

/// Validates, then loads the sentence-level records passing `filter`.
/// Refuses (throws) when validation reports any error.
Store load_store(const std::filesystem::path& store_dir, const RecordFilter& filter = {});

TokenStore load_token_store(const std::filesystem::path& store_dir);

/// Max-pools every unit of a token-level store into sentence-level records,
/// in canonical order. Token activations are not retained.
std::vector<ActivationRecord> pool_token_store(const TokenStore& store);

/// Writes manifest.json and units.jsonl. Records are written in canonical
/// order with values rounded to 32-bit floats; `manifest.unit_count` is
/// overwritten with the record count.
void write_store(const std::filesystem::path& store_dir, StoreManifest manifest,
                 std::vector<ActivationRecord> records);

/// Token-level counterpart: units.jsonl carries metadata only.
void write_token_store(const std::filesystem::path& store_dir, StoreManifest manifest,
                       std::span<const UnitMeta> units, std::span<const TokenRecord> tokens);

/// Canonical ordering key: (year, unit_id), then corpus for merged stores.
bool canonical_less(const ActivationRecord& a, const ActivationRecord& b);
void sort_canonical(std::vector<ActivationRecord>& records);

/// Concatenates several stores' records and restores canonical order.
std::vector<ActivationRecord> merge_records(std::span<const Store> stores);

/// Nearest f32 value, widened back to double.
double round_to_f32(double value);

}  // namespace diachron
