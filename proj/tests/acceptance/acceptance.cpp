// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "cli_runner.hpp"
#include "diachron/analysis.hpp"
#include "diachron/error.hpp"
#include "diachron/sae.hpp"
#include "equivalence.hpp"
#include "fixtures.hpp"

using namespace diachron;

namespace {

const std::string kCli = DIACHRON_CLI;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  std::size_t checks = 0;
  std::vector<std::string> failures;
  for (std::uint64_t seed = 1001; seed <= 1050; ++seed) {
    for (const auto& f : equivalence::compare(fixtures::random_case(seed), checks)) {
      failures.push_back(fmt::format("seed {}: {}", seed, f));
    }
  }
  const double elapsed = seconds_since(start);
  if (!failures.empty()) {
    return {false, fmt::format("{} mismatches of {} checks, first: {}", failures.size(), checks, failures.front())};
  }
  return {elapsed < 60.0, fmt::format("50 stores, {} checks within 1e-9, {:.2f} s (limit 60 s)", checks, elapsed)};
}

Outcome planted_drift() {
  int hits = 0;
  std::string first_miss;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed * 31 + 7);
    constexpr std::uint32_t dim = 32;
    const auto feature = static_cast<FeatureId>(std::uniform_int_distribution<int>(0, dim - 1)(rng));
    const int step = std::uniform_int_distribution<int>(1916, 1924)(rng);
    const auto records = fixtures::planted_drift_store(seed, dim, feature, step, 40);
    const RecordView all = view_of(records);
    const auto ranking = select_top_drifting(all, 1);
    const ConceptDef c = fixtures::concept_of("planted", {"planted-lexeme"}, {{"step", {feature}}});
    const TurningPoint tp = turning_point(magnitude_series(all, c, distinct_years(all)));
    const bool ok = !ranking.empty() && ranking[0].feature == feature && tp.year == step &&
                    std::fabs(tp.intensity - 5.0) <= 0.5;
    if (ok) ++hits;
    else if (first_miss.empty()) {
      first_miss = fmt::format(" (first miss: seed {}, feature {} step {}, got feature {} turn {} I={:.3f})", seed,
                               feature, step, ranking.empty() ? -1 : static_cast<int>(ranking[0].feature),
                               tp.year, tp.intensity);
    }
  }
  return {hits >= 95, fmt::format("{}/100 seeds detected the planted step (need 95){}", hits, first_miss)};
}

Outcome identity_sae() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> positive(0.01, 10.0);
  constexpr std::size_t d = 48;
  const SaeWeights identity = SaeWeights::identity(d);
  SaeConfig config;
  config.kappa = d;
  std::vector<std::vector<double>> batch(256, std::vector<double>(d));
  for (auto& h : batch) {
    for (auto& x : h) x = positive(rng);
  }
  const double loss = reconstruction_loss(batch, identity, config);

  const SaeWeights random = SaeWeights::random(32, 256, 9);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t violations = 0;
  std::size_t max_nnz = 0;
  for (int i = 0; i < 10000; ++i) {
    SaeConfig c;
    c.kappa = static_cast<std::uint32_t>(1 + i % 64);
    std::vector<double> h(32);
    for (auto& x : h) x = normal(rng);
    const SaeOutput out = sae_forward(h, random, c);
    max_nnz = std::max(max_nnz, out.z.nnz());
    if (out.z.nnz() > c.kappa) ++violations;
  }
  return {loss == 0.0 && violations == 0,
          fmt::format("identity loss {} (must be exactly 0); {} of 10000 forwards exceed kappa (max nnz {})", loss,
                      violations, max_nnz)};
}

Outcome implicit_ratio_planting() {
  std::string detail;
  bool pass = true;
  for (double f : {0.0, 0.25, 0.5, 1.0}) {
    constexpr int n = 40;
    const int anchored = static_cast<int>(f * n);
    std::vector<ActivationRecord> records;
    for (int i = 0; i < n; ++i) {
      records.push_back(fixtures::rec(fmt::format("u{:02d}", i), 1915 + i % 5, "c", i < anchored ? "个人主义" : "社会",
                                      8, {{1, 0.25}, {2, 0.25}}));
    }
    sort_canonical(records);
    const ConceptDef c = fixtures::concept_of("individual", {"个人"}, {{"a", {1}}, {"b", {2}}});
    const RecordView all = view_of(records);
    const SalientSet s = build_salient_set(all, c, "c");
    const double r = implicit_ratio(s, all, c);
    const bool ok = s.unit_ids.size() == n && r == 1.0 - f;
    pass = pass && ok;
    detail += fmt::format("{}f={} r={}", detail.empty() ? "" : ", ", f, r);
  }
  return {pass, detail + " (expected exactly 1-f)"};
}

Outcome cross_layer_degeneracy() {
  fixtures::TempDir dir("diachron-accept-layers");
  std::vector<std::string> args{"cross-layer"};
  std::string first_bytes;
  for (int i = 0; i < 4; ++i) {
    const std::string store = (dir / fmt::format("layer{}", i)).string();
    const auto r = cli::run(kCli, {"synth", "--out", store, "--concepts-out", (dir / "concepts.json").string(),
                                   "--units", "400", "--dim", "64", "--seed", "5", "--corpus", "news"});
    if (r.exit_code != 0) return {false, "synth failed: " + r.err};
    const std::string bytes = fixtures::read_file(std::filesystem::path(store) / "units.jsonl");
    if (i == 0) first_bytes = bytes;
    else if (bytes != first_bytes) return {false, "layer stores are not byte-identical"};
    args.insert(args.end(), {"--store", store, "--layer-tag", fmt::format("L{}", i)});
  }
  const auto doc_text = nlohmann::json::parse(fixtures::read_file(dir / "concepts.json"));
  args.insert(args.end(), {"--concepts", (dir / "concepts.json").string(), "--concept",
                           doc_text["concepts"][0]["id"].get<std::string>()});
  const auto r = cli::run(kCli, args);
  if (r.exit_code != 0) return {false, "cross-layer failed: " + r.err};
  const auto doc = nlohmann::json::parse(r.out);
  const auto& rows = doc["rows"];
  bool pass = rows.size() == 4;
  for (const auto& row : rows) {
    pass = pass && row["peak_year"] == rows[0]["peak_year"] && row["turn_year"] == rows[0]["turn_year"] &&
           row["avg_jaccard"].get<double>() == 1.0;
  }
  return {pass, fmt::format("4 identical layers: peak {} turn {} AvgJaccard {}", rows[0]["peak_year"].dump(),
                            rows[0]["turn_year"].dump(), rows[0]["avg_jaccard"].dump())};
}

Outcome cli_determinism() {
  fixtures::TempDir dir("diachron-accept-cli");
  const cli::Workspace ws = cli::make_workspace(kCli, dir.path());
  std::size_t runs = 0;
  std::set<std::string> commands;
  auto differs = [&](const std::vector<std::string>& args) -> std::optional<std::string> {
    const auto a = cli::run(kCli, args);
    const auto b = cli::run(kCli, args);
    ++runs;
    commands.insert(args.front());
    if (a.exit_code != 0) return fmt::format("{} exited {}: {}", args.front(), a.exit_code, a.err);
    if (a.out != b.out || a.err != b.err || a.exit_code != b.exit_code) return args.front() + " output differs";
    return std::nullopt;
  };
  for (const auto& args : cli::every_command(ws)) {
    if (auto why = differs(args)) return {false, *why};
  }
  // commands writing directories or reading saved results
  const std::string saved = (dir / "atlas.json").string();
  if (cli::run(kCli, {"atlas", "--store", ws.store, "--concepts", ws.concepts, "--out", saved}).exit_code != 0) {
    return {false, "atlas --out failed"};
  }
  for (const char* format : {"json", "csv", "md"}) {
    if (auto why = differs({"report", "--input", saved, "--format", format})) return {false, *why};
  }
  for (const auto& [name, args_of] :
       std::vector<std::pair<std::string, std::function<std::vector<std::string>(const std::string&)>>>{
           {"pool", [&](const std::string& out) { return std::vector<std::string>{"pool", "--store", ws.token_store, "--out", out}; }},
           {"synth", [&](const std::string& out) {
              return std::vector<std::string>{"synth", "--out", out, "--concepts-out", out + ".json", "--units", "100", "--seed", "8"};
            }}}) {
    std::vector<std::string> bytes;
    for (int i = 0; i < 2; ++i) {
      const std::string out = (dir / fmt::format("{}-{}", name, i)).string();
      const auto r = cli::run(kCli, args_of(out));
      if (r.exit_code != 0) return {false, name + " failed: " + r.err};
      std::string all;
      for (const char* file : {"manifest.json", "units.jsonl"}) {
        all += fixtures::read_file(std::filesystem::path(out) / file);
      }
      if (std::filesystem::exists(out + ".json")) all += fixtures::read_file(out + ".json");
      bytes.push_back(all);
    }
    ++runs;
    commands.insert(name);
    if (bytes[0] != bytes[1]) return {false, name + " output differs"};
  }
  return {true, fmt::format("{} distinct commands, {} invocation pairs byte-identical", commands.size(), runs)};
}

Outcome throughput() {
  fixtures::TempDir dir("diachron-accept-throughput");
  const std::string store = (dir / "store").string();
  const std::string concepts = (dir / "concepts.json").string();
  const auto synth = cli::run(kCli, {"synth", "--out", store, "--concepts-out", concepts, "--units", "100000", "--dim",
                                     "262144", "--kappa", "64", "--n-concepts", "4", "--corpus", "a", "--corpus", "b",
                                     "--seed", "2024"});
  if (synth.exit_code != 0) return {false, "synth failed: " + synth.err};
  const auto start = Clock::now();
  const auto atlas = cli::run(kCli, {"atlas", "--store", store, "--concepts", concepts, "--format", "csv"});
  const double elapsed = seconds_since(start);
  if (atlas.exit_code != 0) return {false, "atlas failed: " + atlas.err};
  return {elapsed < 30.0,
          fmt::format("atlas over 100000 records, dim 262144, kappa 64: {:.2f} s wall, {} hardware threads (limit 30 s)",
                      elapsed, std::thread::hardware_concurrency())};
}

Outcome scaling_invariance() {
  std::vector<std::string> problems;
  std::size_t cells = 0;
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); };
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto c = fixtures::random_case(seed);
    const auto doubled = fixtures::scaled(c.records, 2.0);
    for (const auto& concept_def : c.concepts) {
      for (const auto& corpus : distinct_corpora(view_of(c.records))) {
        ++cells;
        const std::string where = fmt::format("seed {} {}/{}", seed, concept_def.concept_id, corpus);
        struct Cell {
          SliceSeries a;
          std::optional<TurningPoint> turn;
          std::vector<DriftEntry> ranking;
          CompositionRow pooled;
          std::optional<double> r;
        };
        auto cell_of = [&](const std::vector<ActivationRecord>& records) {
          const RecordView in_corpus = filter_corpus(view_of(records), corpus);
          const SalientSet s = build_salient_set(in_corpus, concept_def, corpus);
          const RecordView members = s.members(in_corpus);
          Cell out{magnitude_series(members, concept_def, distinct_years(in_corpus)), std::nullopt,
                   select_top_drifting(members, 30), pooled_shares(members, concept_def), std::nullopt};
          if (out.a.present_count() >= 2) out.turn = turning_point(out.a);
          try {
            out.r = implicit_ratio(s, in_corpus, concept_def);
          } catch (const Error&) {
          }
          return out;
        };
        const Cell x = cell_of(c.records);
        const Cell y = cell_of(doubled);
        if (peak_year(x.a) != peak_year(y.a)) problems.push_back(where + " peak year");
        if (x.turn.has_value() != y.turn.has_value() || (x.turn && x.turn->year != y.turn->year)) {
          problems.push_back(where + " turn year");
        }
        if (x.turn && !close(std::fabs(y.turn->intensity), 2.0 * std::fabs(x.turn->intensity))) {
          problems.push_back(where + " |I|");
        }
        for (std::size_t t = 0; t < x.a.values.size(); ++t) {
          if (!close(y.a.values[t], 2.0 * x.a.values[t])) problems.push_back(where + " A");
        }
        if (x.ranking.size() != y.ranking.size()) problems.push_back(where + " ranking size");
        for (std::size_t i = 0; i < std::min(x.ranking.size(), y.ranking.size()); ++i) {
          if (x.ranking[i].feature != y.ranking[i].feature) problems.push_back(where + " ranking order");
          if (!close(y.ranking[i].drift, 2.0 * x.ranking[i].drift)) problems.push_back(where + " D");
        }
        for (std::size_t s = 0; s < x.pooled.shares.size(); ++s) {
          if (!close(x.pooled.shares[s].share, y.pooled.shares[s].share)) problems.push_back(where + " shares");
        }
        if (!close(diversity_entropy(x.pooled), diversity_entropy(y.pooled))) problems.push_back(where + " H");
        if (x.r.has_value() != y.r.has_value() || (x.r && !close(*x.r, *y.r))) problems.push_back(where + " r");
      }
    }
  }
  if (!problems.empty()) return {false, fmt::format("{} violations, first: {}", problems.size(), problems.front())};
  return {true, fmt::format("x2 on {} cells: peak, turn, rankings, shares, H, r unchanged; D, A, |I| doubled", cells)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle_equivalence", oracle_equivalence},
      {"planted_drift_detection", planted_drift},
      {"identity_sae_fixture", identity_sae},
      {"implicit_ratio_planting", implicit_ratio_planting},
      {"cross_layer_degeneracy", cross_layer_degeneracy},
      {"cli_determinism", cli_determinism},
      {"throughput", throughput},
      {"scaling_invariance", scaling_invariance},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed == 0 ? 0 : 1;
}
