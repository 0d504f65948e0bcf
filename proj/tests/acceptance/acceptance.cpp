// Acceptance suite: one PASS/FAIL line per criterion, each checked at its
// stated tolerance and time limit. Exit status is the number of failures.
//
//   acceptance_tests [--cli path/to/ir-agent] [--only N]

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ir_agent/agents/pipeline.hpp"
#include "ir_agent/eval/harness.hpp"
#include "ir_agent/peaks.hpp"
#include "ir_agent/retriever.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/spectrum.hpp"
#include "ir_agent/spectrum_io.hpp"
#include "ir_agent/translator/decoding.hpp"
#include "ir_agent/translator/generator.hpp"
#include "ir_agent/translator/training.hpp"
#include "micro.hpp"
#include "oracles.hpp"

using namespace ir_agent;
namespace ag = ir_agent::agents;
namespace tr = ir_agent::translator;

namespace {

/// Outcome of one criterion; `detail` is a short human summary.
struct Outcome {
  bool ok = true;
  std::string detail;
};

class Check {
 public:
  void expect(bool condition, const std::string& what) {
    if (!condition && failures_.size() < 5) failures_.push_back(what);
    if (!condition) ++failed_;
  }
  Outcome outcome(const std::string& summary) const {
    if (failed_ == 0) return {true, summary};
    std::string d = std::to_string(failed_) + " violation(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) d += (i ? "; " : "") + failures_[i];
    return {false, d};
  }

 private:
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

std::string cli_path;

std::string capture(const std::string& command, int* status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) {
    *status = -1;
    return out;
  }
  std::array<char, 4096> buffer{};
  std::size_t n;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) out.append(buffer.data(), n);
  *status = pclose(pipe);
  return out;
}

std::vector<Spectrum> toy_absorbance(const std::string& file) {
  std::vector<Spectrum> out;
  for (const auto& s : load_spectra(oracle::data_path(file))) {
    out.push_back(s.mode() == IntensityMode::kAbsorbance ? s : to_absorbance(s));
  }
  return out;
}

// 1 ----------------------------------------------------------------------

Outcome preprocessing() {
  util::SeededRng rng(101);
  std::vector<double> t(100000);
  for (auto& v : t) v = rng.uniform();
  t[0] = 0.0;
  t[1] = 1.0;
  t[2] = 1e-10;
  t[3] = 1e-11;
  const WavenumberGrid grid(500.0, 4000.0, t.size());
  const auto a = to_absorbance(Spectrum(grid, t, IntensityMode::kTransmittance));
  Check c;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double reference = -std::log10(std::max(t[i], 1e-10));
    if (std::memcmp(&reference, &a.values()[i], sizeof(double)) != 0) ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " values differ from the reference");
  c.expect(a.values()[0] == 10.0, "T = 0 does not map to 10");
  c.expect(a.values()[3] == 10.0, "T below the floor does not map to 10");
  return c.outcome("100000 values bit-identical, T=0 -> 10");
}

// 2 ----------------------------------------------------------------------

Outcome peak_oracle() {
  util::SeededRng rng(202);
  Check c;
  std::size_t total_peaks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(512);
    // A third of the signals are coarsely quantized so plateaus and ties are common.
    const bool quantized = trial % 3 == 0;
    for (auto& x : v) x = quantized ? std::floor(rng.uniform(0.0, 5.0)) / 2.0 : rng.uniform(0.0, 2.5);
    const double height = rng.uniform(0.0, 2.5);
    const std::size_t distance = 1 + rng.below(60);
    const auto got = find_peak_indices(v, {height, distance});
    const auto want = oracle::peaks(v, height, distance);
    total_peaks += want.size();
    c.expect(got == want, "signal " + std::to_string(trial));
  }
  return c.outcome("1000 signals equal the oracle (" + std::to_string(total_peaks) + " peaks)");
}

// 3 ----------------------------------------------------------------------

Outcome retrieval_oracle() {
  util::SeededRng rng(303);
  const WavenumberGrid grid(500.0, 4000.0, 3501);
  const auto entries = oracle::random_database(rng, 200, grid);
  const SpectraDatabase db(entries);
  Check c;
  for (int q = 0; q < 50; ++q) {
    std::vector<double> v(grid.count());
    for (auto& x : v) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 2.0);
    const Spectrum query(grid, v, IntensityMode::kAbsorbance, "q");
    const auto hits = retrieve(db, query, {10, 1});
    const auto expected = oracle::retrieve(entries, v, 10);
    bool same = hits.size() == expected.size();
    for (std::size_t i = 0; same && i < hits.size(); ++i) {
      same = hits[i].id == expected[i].id && hits[i].similarity == expected[i].similarity;
    }
    c.expect(same, "query " + std::to_string(q) + " differs from the exhaustive scan");

    const auto threaded = retrieve(db, query, {10, 4});
    c.expect(threaded == hits, "query " + std::to_string(q) + " depends on the thread count");

    const auto top3 = retrieve(db, query, {3, 1});
    c.expect(std::equal(top3.begin(), top3.end(), hits.begin()),
             "query " + std::to_string(q) + " top-3 is not a prefix of top-10");

    auto scaled = v;
    const double factor = rng.uniform(0.1, 50.0);
    for (auto& x : scaled) x *= factor;
    const auto scaled_hits = retrieve(db, Spectrum(grid, scaled, IntensityMode::kAbsorbance, "q"), {10, 1});
    bool invariant = scaled_hits.size() == hits.size();
    for (std::size_t i = 0; invariant && i < hits.size(); ++i) {
      invariant = scaled_hits[i].id == hits[i].id &&
                  std::abs(scaled_hits[i].similarity - hits[i].similarity) <= 1e-12;
    }
    c.expect(invariant, "query " + std::to_string(q) + " is not scale invariant");
  }
  return c.outcome("50 queries x 200 entries equal the oracle; prefix and scale invariance hold");
}

// 4 ----------------------------------------------------------------------

std::vector<std::string> corpus() {
  std::vector<std::string> out;
  std::istringstream in(util::read_file(oracle::data_path("smiles_corpus.txt")));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

Outcome canonicalization() {
  util::SeededRng rng(404);
  Check c;
  std::vector<smiles::MoleculeGraph> small;
  std::size_t permutations = 0;
  for (int i = 0; i < 500; ++i) {
    const auto g = oracle::random_molecule(rng, 1 + rng.below(16));
    const auto expected = smiles::canonicalize(g).text;
    for (int p = 0; p < 10; ++p) {
      const auto permuted = g.permuted(oracle::random_permutation(rng, g.atom_count()));
      ++permutations;
      c.expect(smiles::canonicalize(permuted).text == expected, "graph " + std::to_string(i));
    }
    if (g.atom_count() <= 8) small.push_back(g);
  }
  const auto texts = corpus();
  for (const auto& s : texts) {
    const auto g = smiles::parse(s);
    if (g.atom_count() <= 8) small.push_back(g);
    const auto canonical = smiles::canonicalize(g).text;
    c.expect(smiles::canonicalize(smiles::parse(canonical)).text == canonical, "round trip of " + s);
    c.expect(oracle::isomorphic(g, smiles::parse(canonical)), "canonical form of " + s + " is a different molecule");
  }
  // Equal canonical text must mean isomorphic and vice versa, on every pair.
  std::vector<std::string> canon;
  for (const auto& g : small) canon.push_back(smiles::canonicalize(g).text);
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < small.size(); ++a) {
    for (std::size_t b = a + 1; b < small.size(); ++b) {
      if (small[a].atom_count() != small[b].atom_count()) {
        c.expect(canon[a] != canon[b], "different sizes share " + canon[a]);
        continue;
      }
      ++pairs;
      c.expect(oracle::isomorphic(small[a], small[b]) == (canon[a] == canon[b]),
               "oracle disagrees on " + canon[a] + " / " + canon[b]);
    }
  }
  return c.outcome(std::to_string(permutations) + " permutations invariant, " + std::to_string(pairs) +
                   " same-size pairs agree with the isomorphism oracle, " + std::to_string(texts.size()) +
                   " corpus round trips");
}

// 5 ----------------------------------------------------------------------

Outcome gradient_check() {
  const tr::TranslatorModel model(micro::config(16, 5), micro::vocabulary());
  Check c;
  c.expect(model.vocabulary().size() == 12, "vocabulary size is not 12");
  auto batch = micro::synthetic_pairs(2, 16, 6);
  batch[0].smiles = "CC(=O)N";
  batch[1].smiles = "c1ccccc1O";
  const auto report = micro::gradient_check(model, batch);
  char detail[160];
  std::snprintf(detail, sizeof detail, "%zu/%zu parameters within 1e-4 (%.2f%%), max relative error %.2e",
                report.within_tolerance, report.parameters, 100.0 * report.fraction(),
                report.max_relative_error);
  c.expect(report.fraction() >= 0.99, detail);
  c.expect(report.max_relative_error <= 1e-3, detail);
  return c.outcome(detail);
}

// 6 ----------------------------------------------------------------------

Outcome beam_oracle() {
  Check c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const oracle::TableScorer scorer(3, std::nullopt, 3, oracle::random_logits(seed, 3));
    const auto all = oracle::enumerate(scorer);
    c.expect(all.size() == 27, "enumeration does not have 27 sequences");
    const auto beam = tr::beam_decode(scorer, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      c.expect(beam[i].tokens == all[i].tokens && std::abs(beam[i].score - all[i].score) < 1e-12,
               "toy model " + std::to_string(seed) + " rank " + std::to_string(i));
    }
  }
  const auto vocab = micro::vocabulary();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const tr::TranslatorModel model(micro::config(16, 1000 + seed), vocab);
    util::SeededRng rng(seed);
    const auto spectrum = micro::random_spectrum(rng, 16);
    const tr::ModelScorer scorer(model, spectrum);
    const auto beam = tr::beam_decode(scorer, 1);
    const auto greedy = tr::greedy_decode(scorer);
    c.expect(beam.size() == 1 && beam[0].tokens == greedy.tokens && beam[0].score == greedy.score,
             "micro-model " + std::to_string(seed));
  }
  return c.outcome("width 3 = top-3 of 27 on 20 toy models; width 1 = greedy on 100 micro-models");
}

// 7 ----------------------------------------------------------------------

tr::TrainingConfig overfit_config() {
  tr::TrainingConfig cfg;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.warmup_steps = 50;
  cfg.max_epochs = 300;
  cfg.patience = 300;
  cfg.seed = 11;
  cfg.stop_at_train_accuracy = 0.95;
  return cfg;
}

tr::TranslatorConfig overfit_model() {
  auto cfg = micro::config(16, 7);
  cfg.d_model = 32;
  cfg.heads = 2;
  return cfg;
}

Outcome training_sanity() {
  const auto data = micro::synthetic_pairs(24, 16, 3);
  const std::vector<tr::TrainingExample> train_set(data.begin(), data.begin() + 20);
  const std::vector<tr::TrainingExample> valid_set(data.begin() + 20, data.end());
  std::vector<std::string> smiles;
  for (const auto& e : data) smiles.push_back(e.smiles);
  const auto vocab = tr::TokenVocabulary::from_corpus(smiles);

  tr::TranslatorModel a(overfit_model(), vocab);
  const auto ra = tr::train(a, train_set, valid_set, overfit_config());
  tr::TranslatorModel b(overfit_model(), vocab);
  const auto rb = tr::train(b, train_set, valid_set, overfit_config());

  Check c;
  bool same = ra.history.size() == rb.history.size();
  for (std::size_t i = 0; same && i < ra.history.size(); ++i) {
    same = ra.history[i].train_loss == rb.history[i].train_loss;
  }
  c.expect(same, "loss history differs between identical runs");
  // Accuracy is recomputed on the parameters of the final epoch.
  a.set_parameters(ra.last_parameters);
  const double accuracy = tr::next_token_accuracy(a, train_set);
  char detail[160];
  std::snprintf(detail, sizeof detail, "next-token accuracy %.4f after %zu epochs, loss %.4f -> %.4f",
                accuracy, ra.history.size(), ra.history.front().train_loss, ra.history.back().train_loss);
  c.expect(accuracy >= 0.95, detail);
  c.expect(ra.history.size() <= 300, "more than 300 epochs");
  return c.outcome(detail);
}

// 8 ----------------------------------------------------------------------

Outcome pipeline_structure() {
  const auto db_spectra = toy_absorbance("toy_spectra.jsonl");
  const auto queries = toy_absorbance("toy_query.jsonl");
  const auto db = std::make_shared<const SpectraDatabase>(db_spectra);
  const auto table = load_table(oracle::data_path("table.csv"));
  const tr::RetrievalGenerator generator(db, true);
  Check c;

  const std::map<ag::AblationMode, std::size_t> expected = {
      {ag::AblationMode::kFull, 3}, {ag::AblationMode::kTiOnly, 2}, {ag::AblationMode::kRetOnly, 2},
      {ag::AblationMode::kSingleAgent, 1}, {ag::AblationMode::kNoExperts, 0}};
  for (const auto& [mode, calls] : expected) {
    ag::PipelineConfig cfg;
    cfg.mode = mode;
    cfg.peak_distance = 5;
    cfg.exclude_self = true;
    cfg.seed = 42;
    std::string first;
    for (int repeat = 0; repeat < 2; ++repeat) {
      auto backend = ag::ScriptedMockBackend::load(oracle::data_path("mock_script.json"));
      std::string dump;
      for (const auto& q : queries) {
        const auto before = backend.call_count();
        const auto r = ag::elucidate(cfg, {&generator, db.get(), table, &backend}, q);
        c.expect(backend.call_count() - before == calls && r.calls.size() == calls,
                 std::string(ag::mode_name(mode)) + " on " + q.id());
        dump += ag::result_to_json(r).dump() + "\n";
      }
      if (repeat == 0) {
        first = dump;
      } else {
        c.expect(dump == first, std::string(ag::mode_name(mode)) + " output differs between runs");
      }
    }
  }

  std::string summary = "call counts {3,2,2,1,0} on 10 spectra, library output byte-identical";
  if (!cli_path.empty()) {
    const std::string command = cli_path + " elucidate --json --seed 42 --exclude-self true -i " +
                                oracle::data_path("toy_query.jsonl").string() + " --db " +
                                oracle::data_path("toy_spectra.jsonl").string() + " -t " +
                                oracle::data_path("table.csv").string() + " --mock-script " +
                                oracle::data_path("mock_script.json").string();
    int s1 = 0, s2 = 0;
    const auto o1 = capture(command, &s1);
    const auto o2 = capture(command, &s2);
    c.expect(s1 == 0 && s2 == 0, "ir-agent elucidate failed");
    c.expect(!o1.empty() && o1 == o2, "ir-agent elucidate output differs between runs");
    summary += ", CLI output byte-identical";
  }
  return c.outcome(summary);
}

// 9 ----------------------------------------------------------------------

Outcome evaluation_protocol() {
  Check c;
  std::vector<std::string> ids;
  for (int i = 0; i < 1000; ++i) ids.push_back("s" + std::to_string(i));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const eval::SplitSpec spec{0.8, 0.1, 0.1, seed};
    const auto a = eval::split(ids, spec);
    auto reversed = ids;
    std::reverse(reversed.begin(), reversed.end());
    const auto b = eval::split(reversed, spec);
    c.expect(a.train == b.train && a.valid == b.valid && a.test == b.test,
             "seed " + std::to_string(seed) + " is not deterministic");
    c.expect(a.train.size() == 800 && a.valid.size() == 100 && a.test.size() == 100,
             "seed " + std::to_string(seed) + " sizes");
    std::set<std::string> seen;
    for (const auto* part : {&a.train, &a.valid, &a.test}) {
      for (const auto& id : *part) c.expect(seen.insert(id).second, "seed " + std::to_string(seed) + " overlap at " + id);
    }
    c.expect(seen.size() == ids.size(), "seed " + std::to_string(seed) + " loses ids");
  }

  auto spec = eval::load_experiment(oracle::data_path("experiment.json"));
  spec.split = {0.8, 0.1, 0.1, 7};
  spec.runs = 3;
  const auto reports = eval::run_experiment(spec);
  const auto markdown = eval::render_markdown(reports);
  for (const auto& r : reports) {
    c.expect(r.runs.size() == 3, r.name + " does not have three runs");
    for (const auto& run : r.runs) {
      for (std::size_t i = 1; i < run.topk.size(); ++i) {
        c.expect(run.topk[i].accuracy >= run.topk[i - 1].accuracy,
                 r.name + " run " + std::to_string(run.run) + " is not monotone in K");
      }
    }
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
      double mean = 0.0;
      for (const auto& run : r.runs) mean += run.topk[i].accuracy;
      mean /= static_cast<double>(r.runs.size());
      double sq = 0.0;
      for (const auto& run : r.runs) sq += (run.topk[i].accuracy - mean) * (run.topk[i].accuracy - mean);
      const auto s = r.summary(i);
      c.expect(std::abs(s.mean - mean) < 1e-15 && std::abs(s.stddev - std::sqrt(sq / 2.0)) < 1e-15,
               r.name + " summary at K=" + std::to_string(r.ks[i]));
    }
  }
  c.expect(markdown.find("| Mean |") != std::string::npos && markdown.find("| Std |") != std::string::npos,
           "report lacks mean and spread rows");
  return c.outcome("20 seeds deterministic and disjoint; " + std::to_string(reports.size()) +
                   " configs x 3 runs monotone in K with mean and spread reported");
}

// 10 ---------------------------------------------------------------------

Outcome chemical_info() {
  const auto db_spectra = toy_absorbance("toy_spectra.jsonl");
  const auto db = std::make_shared<const SpectraDatabase>(db_spectra);
  const auto table = load_table(oracle::data_path("table.csv"));
  const tr::RetrievalGenerator generator(db, true);
  Check c;

  std::vector<const Spectrum*> cyclic;
  for (const auto& s : db_spectra) {
    if (smiles::ring_scaffold(smiles::parse(*s.smiles())).atom_count() > 0) cyclic.push_back(&s);
    if (cyclic.size() == 3) break;
  }
  c.expect(cyclic.size() == 3, "toy data has too few cyclic molecules");

  std::size_t compared = 0;
  auto prompts = [&](ag::AblationMode mode, ag::ChemicalInfoKind kind, const Spectrum& s) {
    ag::PipelineConfig cfg;
    cfg.mode = mode;
    cfg.chemical_info = kind;
    cfg.peak_distance = 5;
    cfg.exclude_self = true;
    auto backend = ag::ScriptedMockBackend::load(oracle::data_path("mock_script.json"));
    return ag::elucidate(cfg, {&generator, db.get(), table, &backend}, s).calls;
  };
  for (const auto* s : cyclic) {
    for (const auto mode : {ag::AblationMode::kFull, ag::AblationMode::kSingleAgent}) {
      const auto plain = prompts(mode, ag::ChemicalInfoKind::kNone, *s);
      for (const auto kind : {ag::ChemicalInfoKind::kAtomTypes, ag::ChemicalInfoKind::kScaffold,
                              ag::ChemicalInfoKind::kCarbonCount}) {
        const auto info = ag::ChemicalInfo::from_smiles(kind, *s->smiles());
        const std::string sentence = info.sentence();
        c.expect(!sentence.empty() && sentence.find('\n') == std::string::npos,
                 "no single sentence for " + std::string(ag::chemical_info_name(kind)));
        const auto with = prompts(mode, kind, *s);
        c.expect(with.size() == plain.size(), "call count changed");
        for (std::size_t i = 0; i < std::min(with.size(), plain.size()); ++i) {
          const auto& p = plain[i];
          const auto& w = with[i];
          ++compared;
          const std::string tag = s->id() + " " + std::string(ag::role_key(w.role)) + " " +
                                  std::string(ag::chemical_info_name(kind));
          c.expect(w.role == p.role && w.prompt.system == p.prompt.system, tag + ": system prompt changed");
          c.expect(w.digest != p.digest, tag + ": digest unchanged");
          c.expect(w.digest == ag::prompt_digest(p.prompt.system, p.prompt.user + "\n" + sentence),
                   tag + ": prompt is not the plain prompt plus one sentence");
        }
      }
    }
  }
  return c.outcome(std::to_string(compared) + " agent prompts differ from the plain prompt by one appended sentence");
}

struct Criterion {
  int number;
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli_path = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--cli path] [--only N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "preprocessing exactness", 5, preprocessing},
      {2, "peak oracle equivalence", 30, peak_oracle},
      {3, "retrieval oracle equivalence", 10, retrieval_oracle},
      {4, "SMILES canonicalization", 120, canonicalization},
      {5, "translator gradient check", 120, gradient_check},
      {6, "beam search oracle", 60, beam_oracle},
      {7, "training sanity", 600, training_sanity},
      {8, "pipeline determinism and ablation calls", 60, pipeline_structure},
      {9, "evaluation protocol", 60, evaluation_protocol},
      {10, "chemical info injection", 10, chemical_info},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.number != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.ok && seconds > criterion.limit_seconds) {
      outcome.ok = false;
      outcome.detail += " (too slow)";
    }
    failures += outcome.ok ? 0 : 1;
    std::printf("[%s] %2d %-42s %8.2f s (limit %g s)  %s\n", outcome.ok ? "PASS" : "FAIL", criterion.number,
                criterion.name, seconds, criterion.limit_seconds, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
