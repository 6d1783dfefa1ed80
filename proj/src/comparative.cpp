#include "diachron/comparative.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "diachron/error.hpp"

namespace diachron {

namespace {

template <typename T>
double set_jaccard(const std::set<T>& a, const std::set<T>& b, const char* empty_message) {
  if (a.empty() && b.empty()) throw Error(empty_message);
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::set<FeatureId> DriftTopSet::ids() const {
  std::set<FeatureId> out;
  for (const auto& e : features) out.insert(e.feature);
  return out;
}

DriftTopSet drift_top_set(std::span<const ActivationRecord* const> records,
                          const ConceptDef& concept_def, const std::string& corpus, std::size_t k,
                          double q) {
  const SalientSet salient = build_salient_set(records, concept_def, corpus, q);
  DriftTopSet out;
  out.concept_id = concept_def.concept_id;
  out.corpus = corpus;
  out.k = k;
  out.features = select_top_drifting(records, k, &salient);
  return out;
}

double jaccard_at_k(const DriftTopSet& a, const DriftTopSet& b) {
  if (a.concept_id != b.concept_id) {
    throw Error(fmt::format("cannot compare drift sets of '{}' and '{}'", a.concept_id, b.concept_id));
  }
  return set_jaccard(a.ids(), b.ids(), "no drifting bases");
}

OverlapDecomposition decompose_overlap(const DriftTopSet& a, const DriftTopSet& b) {
  if (a.concept_id != b.concept_id) {
    throw Error(fmt::format("cannot compare drift sets of '{}' and '{}'", a.concept_id, b.concept_id));
  }
  const auto ia = a.ids();
  const auto ib = b.ids();
  OverlapDecomposition out;
  std::set_intersection(ia.begin(), ia.end(), ib.begin(), ib.end(),
                        std::inserter(out.shared, out.shared.end()));
  std::set_difference(ia.begin(), ia.end(), ib.begin(), ib.end(),
                      std::inserter(out.only_a, out.only_a.end()));
  std::set_difference(ib.begin(), ib.end(), ia.begin(), ia.end(),
                      std::inserter(out.only_b, out.only_b.end()));
  return out;
}

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto bad = [&]() { return Error(fmt::format("malformed UTF-8 at byte {}", i)); };
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      throw bad();
    }
    if (i + len > text.size()) throw bad();
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) throw bad();
      cp = (cp << 6) | (b & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw bad();
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::span<const char32_t> scalars) {
  std::string out;
  for (char32_t c : scalars) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

bool is_unicode_whitespace(char32_t c) {
  switch (c) {
    case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
    case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

Fingerprint char_2gram_fingerprint(std::span<const std::string> evidence_texts) {
  Fingerprint fp;
  for (const auto& text : evidence_texts) {
    auto scalars = decode_utf8(text);
    std::erase_if(scalars, is_unicode_whitespace);
    for (std::size_t i = 0; i + 1 < scalars.size(); ++i) {
      fp.grams.insert(encode_utf8(std::span<const char32_t>(scalars.data() + i, 2)));
    }
  }
  return fp;
}

double jaccard_2gram(const Fingerprint& a, const Fingerprint& b) {
  return set_jaccard(a.grams, b.grams, "both fingerprints are empty");
}

double avg_jaccard(std::size_t target, std::span<const Fingerprint> fingerprints) {
  if (fingerprints.size() < 2) throw Error("average Jaccard needs at least two layers");
  if (target >= fingerprints.size()) throw Error("target layer out of range");
  double total = 0.0;
  for (std::size_t j = 0; j < fingerprints.size(); ++j) {
    if (j != target) total += jaccard_2gram(fingerprints[target], fingerprints[j]);
  }
  return total / static_cast<double>(fingerprints.size() - 1);
}

}  // namespace diachron
