// ir-agent: command line entry point over the spectral tooling, translator,
// agent pipeline and evaluation harness.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ir_agent/agents/pipeline.hpp"
#include "ir_agent/error.hpp"
#include "ir_agent/eval/harness.hpp"
#include "ir_agent/peaks.hpp"
#include "ir_agent/retriever.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/spectrum_io.hpp"
#include "ir_agent/translator/checkpoint.hpp"
#include "ir_agent/translator/decoding.hpp"
#include "ir_agent/translator/generator.hpp"
#include "ir_agent/translator/training.hpp"
#include "ir_agent/util/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ir_agent;

namespace {

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message) : Error(ErrorCategory::kUsage, message) {}
};

struct Globals {
  bool json_output = false;
  std::size_t jobs = 1;
};

void emit(const Globals& g, const json& j, const std::string& human) {
  if (g.json_output) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << human;
  }
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " '" + p.string() + "' does not exist");
}

/// Runs a validation step, reporting its failure as a usage error.
template <typename Fn>
void validate_flags(Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::vector<Spectrum> load_absorbance(const fs::path& path) {
  require_file(path, "spectra file");
  std::vector<Spectrum> out;
  for (auto& s : load_spectra(path)) {
    out.push_back(s.mode() == IntensityMode::kTransmittance ? to_absorbance(s) : std::move(s));
  }
  return out;
}

std::string spectrum_label(const Spectrum& s, std::size_t index) {
  return s.id().empty() ? "#" + std::to_string(index) : s.id();
}

// ---- ingest ----

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::string mode;
  std::string method = "monotone-cubic";
  double start = 500.0, end = 4000.0;
  std::size_t count = 3501;
};

void run_ingest(const Globals& g, const IngestArgs& a) {
  std::optional<IntensityMode> mode;
  std::optional<InterpolationMethod> method;
  std::optional<WavenumberGrid> grid;
  validate_flags([&] {
    if (!a.mode.empty()) mode = parse_mode(a.mode);
    method = parse_method(a.method);
    grid.emplace(a.start, a.end, a.count);
  });
  for (const auto& in : a.inputs) require_file(in, "raw CSV");
  std::vector<Spectrum> out;
  for (const auto& in : a.inputs) {
    auto record = load_raw_record(in, mode);
    const std::string id = record.id.empty() ? fs::path(in).stem().string() : record.id;
    out.push_back(interpolate(record.raw, *grid, *method, id, record.smiles));
  }
  save_spectra(a.output, out);
  emit(g, {{"written", out.size()}, {"output", a.output}, {"grid", grid->describe()}},
       "wrote " + std::to_string(out.size()) + " spectra to " + a.output + "\n");
}

// ---- preprocess ----

struct PreprocessArgs {
  std::string input, output;
  bool normalize = false;
  std::optional<double> start, end;
  std::optional<std::size_t> count;
};

void run_preprocess(const Globals& g, const PreprocessArgs& a) {
  if (a.start.has_value() != a.end.has_value() || a.start.has_value() != a.count.has_value()) {
    throw UsageError("--grid-start, --grid-end and --grid-count go together");
  }
  std::optional<WavenumberGrid> grid;
  if (a.start) validate_flags([&] { grid.emplace(*a.start, *a.end, *a.count); });
  require_file(a.input, "spectra file");
  std::vector<Spectrum> out;
  AbsorbanceStats total;
  for (const auto& s : load_spectra(a.input)) {
    Spectrum cur = s;
    if (cur.mode() == IntensityMode::kTransmittance) {
      AbsorbanceStats stats;
      cur = to_absorbance(cur, &stats);
      total.clamped_above_one += stats.clamped_above_one;
      total.floored += stats.floored;
    }
    if (grid && !(cur.grid() == *grid)) cur = interpolate(cur, *grid);
    if (a.normalize) cur = l2_normalize(cur);
    out.push_back(std::move(cur));
  }
  save_spectra(a.output, out);
  emit(g,
       {{"written", out.size()},
        {"output", a.output},
        {"clamped_above_one", total.clamped_above_one},
        {"floored", total.floored}},
       "wrote " + std::to_string(out.size()) + " absorbance spectra to " + a.output + " (" +
           std::to_string(total.clamped_above_one) + " samples clamped to T=1, " +
           std::to_string(total.floored) + " floored)\n");
}

// ---- peaks ----

struct PeaksArgs {
  std::string input, table;
  double height = 1.0;
  std::size_t distance = 50;
};

void run_peaks(const Globals& g, const PeaksArgs& a) {
  if (a.distance < 1) throw UsageError("--distance must be at least 1");
  require_file(a.table, "absorption table");
  const auto spectra = load_absorbance(a.input);
  const auto table = load_table(a.table);
  json j = json::object();
  std::string human;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto peaks = find_peaks(spectra[i], {a.height, a.distance});
    const auto assignments = assign(peaks, table);
    const auto label = spectrum_label(spectra[i], i);
    j[label] = assignments_to_json(assignments);
    human += label + ": " + std::to_string(peaks.size()) + " peaks\n";
    for (const auto& pa : assignments) {
      for (const auto& line : pa.interpretation) human += "  " + line + "\n";
    }
  }
  // A single spectrum yields the bare assignment list.
  emit(g, spectra.size() == 1 ? j.begin().value() : j, human);
}

// ---- retrieve ----

struct RetrieveArgs {
  std::string db, query, exclude_id;
  std::size_t top_n = 10;
  bool exclude_self = false;
};

void run_retrieve(const Globals& g, const RetrieveArgs& a) {
  if (a.top_n < 1) throw UsageError("--top-n must be at least 1");
  if (!a.exclude_id.empty() && a.exclude_self) {
    throw UsageError("--exclude-id and --exclude-self are mutually exclusive");
  }
  require_file(a.db, "database");
  const SpectraDatabase db(load_absorbance(a.db));
  const auto queries = load_absorbance(a.query);
  json j = json::object();
  std::string human;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::optional<std::size_t> excluded;
    if (!a.exclude_id.empty()) {
      excluded = db.find(a.exclude_id);
      if (!excluded) throw UsageError("--exclude-id '" + a.exclude_id + "' is not in the database");
    } else if (a.exclude_self) {
      excluded = db.find(queries[i].id());
    }
    const auto hits = retrieve(DatabaseView(db, excluded), queries[i], {a.top_n, g.jobs});
    const auto label = spectrum_label(queries[i], i);
    j[label] = hits_to_json(hits);
    human += label + ":\n";
    for (const auto& h : hits) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", h.similarity);
      human += "  " + std::string(buf) + "  " + h.smiles + "  (" + h.id + ")\n";
    }
  }
  emit(g, queries.size() == 1 ? j.begin().value() : j, human);
}

// ---- train ----

struct TrainArgs {
  std::string train, valid, config, output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};

void run_train(const Globals& g, const TrainArgs& a) {
  translator::TranslatorConfig model_config;
  translator::TrainingConfig train_config;
  bool explicit_length = false;
  if (!a.config.empty()) {
    require_file(a.config, "training config");
    json j;
    try {
      j = json::parse(util::read_file(a.config));
    } catch (const json::parse_error& e) {
      throw SchemaError(a.config + ": " + e.what());
    }
    for (const auto& [key, value] : j.items()) {
      if (key != "model" && key != "training") throw SchemaError("unknown training config key '" + key + "'");
    }
    if (j.contains("model")) {
      model_config = translator::config_from_json(j["model"]);
      explicit_length = j["model"].contains("spectrum_length");
    }
    if (j.contains("training")) train_config = translator::training_config_from_json(j["training"]);
  }
  if (a.seed) {
    model_config.seed = *a.seed;
    train_config.seed = *a.seed;
  }
  if (a.epochs) train_config.max_epochs = *a.epochs;
  validate_flags([&] {
    model_config.validate();
    train_config.validate();
  });

  auto to_examples = [](const std::vector<Spectrum>& spectra) {
    std::vector<translator::TrainingExample> out;
    for (const auto& s : spectra) {
      if (!s.smiles()) throw SchemaError("training spectrum '" + s.id() + "' has no SMILES");
      out.push_back({s.id(), {s.values().begin(), s.values().end()}, *s.smiles()});
    }
    return out;
  };
  const auto train_set = to_examples(load_absorbance(a.train));
  const auto valid_set = to_examples(load_absorbance(a.valid));
  // The input length follows the data unless the config pins it.
  if (!explicit_length && !train_set.empty()) model_config.spectrum_length = train_set.front().spectrum.size();
  std::vector<std::string> corpus;
  for (const auto& e : train_set) corpus.push_back(e.smiles);
  translator::TranslatorModel model(model_config, translator::TokenVocabulary::from_corpus(corpus));

  const auto result = translator::train(model, train_set, valid_set, train_config,
                                        [&](const translator::EpochRecord& r) {
                                          if (g.json_output) return;
                                          std::fprintf(stderr, "epoch %zu loss %.6f acc %.4f bleu %.4f\n",
                                                       r.epoch, r.train_loss, r.train_accuracy,
                                                       r.valid_bleu);
                                        });
  json history = json::array();
  for (const auto& r : result.history) {
    history.push_back({{"epoch", r.epoch},
                       {"train_loss", r.train_loss},
                       {"train_accuracy", r.train_accuracy},
                       {"valid_bleu", r.valid_bleu},
                       {"learning_rate", r.learning_rate}});
  }
  const json metadata = {{"training", translator::training_config_to_json(train_config)},
                         {"best_epoch", result.best_epoch},
                         {"best_bleu", result.best_bleu},
                         {"stopped_early", result.stopped_early},
                         {"steps", result.steps},
                         {"history", history}};
  translator::save_checkpoint(model, a.output, metadata);
  emit(g, {{"checkpoint", a.output}, {"parameters", model.parameters().size()}, {"summary", metadata}},
       "saved " + a.output + " (best epoch " + std::to_string(result.best_epoch) + ", BLEU " +
           util::format_number(result.best_bleu) + ")\n");
}

// ---- decode ----

struct DecodeArgs {
  std::string checkpoint, input;
  std::size_t beam_width = 3;
  std::size_t k = 0;
};

void run_decode(const Globals& g, const DecodeArgs& a) {
  if (a.beam_width < 1) throw UsageError("--beam-width must be at least 1");
  require_file(a.checkpoint, "checkpoint");
  const auto model = std::make_shared<const translator::TranslatorModel>(
      translator::load_checkpoint(a.checkpoint));
  const auto spectra = load_absorbance(a.input);
  const std::size_t k = a.k == 0 ? a.beam_width : a.k;
  const translator::NeuralGenerator generator(model, a.beam_width);
  json j = json::object();
  std::string human;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    const auto set = generator.generate(spectra[i], k);
    const auto label = spectrum_label(spectra[i], i);
    j[label] = translator::candidates_to_json(set);
    human += label + ":\n";
    for (std::size_t r = 0; r < set.size(); ++r) {
      human += "  " + std::to_string(r + 1) + ". " + set.candidates[r].smiles + "  (" +
               std::string(translator::origin_name(set.candidates[r].origin)) + ")\n";
    }
  }
  emit(g, spectra.size() == 1 ? j.begin().value() : j, human);
}

// ---- elucidate ----

struct ElucidateArgs {
  std::string config, input, db, table, checkpoint;
  std::string mode, mock_script, chemical_info, backend;
  std::optional<std::size_t> k, top_n, num_candidates, beam_width;
  std::optional<std::uint64_t> seed;
  std::optional<bool> exclude_self;
};

void run_elucidate(const Globals& g, const ElucidateArgs& a) {
  agents::PipelineConfig config;
  fs::path base_dir;
  if (!a.config.empty()) {
    require_file(a.config, "pipeline config");
    config = agents::load_pipeline_config(a.config);
    base_dir = fs::path(a.config).parent_path();
  }
  validate_flags([&] {
    if (!a.mode.empty()) config.mode = agents::parse_mode(a.mode);
    if (!a.chemical_info.empty()) config.chemical_info = agents::parse_chemical_info(a.chemical_info);
    if (!a.backend.empty()) config.backend = a.backend;
    if (!a.mock_script.empty()) {
      config.mock_script = fs::absolute(a.mock_script).string();
    }
    if (a.k) config.k = *a.k;
    if (a.top_n) config.top_n = *a.top_n;
    if (a.num_candidates) config.num_candidates = *a.num_candidates;
    if (a.beam_width) config.beam_width = *a.beam_width;
    if (a.seed) config.seed = *a.seed;
    if (a.exclude_self) config.exclude_self = *a.exclude_self;
    config.validate();
  });
  require_file(a.db, "database");
  require_file(a.table, "absorption table");
  if (!a.checkpoint.empty()) require_file(a.checkpoint, "checkpoint");

  const auto spectra = load_absorbance(a.input);
  const auto db = std::make_shared<const SpectraDatabase>(load_absorbance(a.db));
  const auto table = load_table(a.table);
  std::unique_ptr<translator::CandidateGenerator> generator;
  if (!a.checkpoint.empty()) {
    generator = std::make_unique<translator::NeuralGenerator>(
        std::make_shared<const translator::TranslatorModel>(translator::load_checkpoint(a.checkpoint)),
        config.beam_width);
  } else {
    generator = std::make_unique<translator::RetrievalGenerator>(db, config.exclude_self);
  }
  std::unique_ptr<agents::LlmBackend> backend;
  if (config.mode != agents::AblationMode::kNoExperts) backend = agents::make_backend(config, base_dir);

  const agents::PipelineResources resources{generator.get(), db.get(), table, backend.get()};
  json results = json::array();
  std::string human;
  for (const auto& s : spectra) {
    const auto result = agents::elucidate(config, resources, s);
    results.push_back(agents::result_to_json(result));
    human += (result.spectrum_id.empty() ? std::string("spectrum") : result.spectrum_id) + ":\n";
    for (std::size_t r = 0; r < result.ranked.size(); ++r) {
      human += "  " + std::to_string(r + 1) + ". " + result.ranked[r] + "\n";
    }
    for (const auto& w : result.warnings) human += "  warning: " + w + "\n";
  }
  emit(g,
       {{"mode", agents::mode_name(config.mode)},
        {"config", agents::pipeline_config_to_json(config)},
        {"results", results}},
       human);
}

// ---- evaluate / report ----

struct EvaluateArgs {
  std::string spec, out = "runs";
  std::optional<std::size_t> runs, max_test;
};

void run_evaluate(const Globals& g, const EvaluateArgs& a) {
  require_file(a.spec, "experiment spec");
  auto spec = eval::load_experiment(a.spec);
  if (a.runs) {
    if (*a.runs == 0) throw UsageError("--runs must be positive");
    spec.runs = *a.runs;
  }
  if (a.max_test) spec.max_test = *a.max_test;
  spec.jobs = std::max(spec.jobs, g.jobs);
  const fs::path dir = fs::path(a.out) / eval::experiment_fingerprint(spec);
  const auto reports = eval::run_experiment(spec, [&](const std::string& config, std::size_t run) {
    if (!g.json_output) std::fprintf(stderr, "%s: run %zu/%zu\n", config.c_str(), run + 1, spec.runs);
  });
  eval::emit_report(reports, dir);
  util::write_file(dir / "experiment.json", spec.to_json().dump(2) + "\n");
  json summary = json::array();
  std::string human = "report written to " + dir.string() + "\n";
  for (const auto& r : reports) {
    json ks = json::object();
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
      const auto s = r.summary(i);
      ks["top" + std::to_string(r.ks[i])] = {{"mean", s.mean}, {"stddev", s.stddev}};
      char buf[96];
      std::snprintf(buf, sizeof buf, "  top-%zu %.4f +/- %.4f", r.ks[i], s.mean, s.stddev);
      human += (i == 0 ? r.name + "\n" : "") + std::string(buf) + "\n";
    }
    summary.push_back({{"config", r.name}, {"fingerprint", r.fingerprint}, {"accuracy", ks}});
  }
  emit(g, {{"run_dir", dir.string()}, {"configs", summary}}, human);
}

struct ReportArgs {
  std::string raw, out;
};

void run_report(const Globals& g, const ReportArgs& a) {
  require_file(a.raw, "raw results CSV");
  const auto reports = eval::reports_from_csv(util::read_file(a.raw));
  const fs::path dir = a.out.empty() ? fs::path(a.raw).parent_path() : fs::path(a.out);
  eval::emit_report(reports, dir);
  emit(g, {{"report_dir", dir.string()}, {"configs", reports.size()}},
       "report regenerated in " + dir.string() + "\n");
}

// ---- canonicalize / compare ----

void run_canonicalize(const Globals& g) {
  json out = json::array();
  std::string human;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto input = std::string(util::trim(line));
    if (input.empty()) continue;
    json entry = {{"input", input}};
    try {
      const auto canonical = smiles::canonicalize(smiles::parse(input)).text;
      entry["canonical"] = canonical;
      human += canonical + "\n";
    } catch (const Error& e) {
      entry["error"] = e.what();
      human += "error: " + std::string(e.what()) + "\n";
    }
    out.push_back(std::move(entry));
  }
  emit(g, out, human);
}

void run_compare(const Globals& g) {
  json out = json::array();
  std::string human;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    std::istringstream fields{line};
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw SchemaError("expected two SMILES separated by whitespace", line_no);
    }
    const auto c = smiles::compare(a, b);
    out.push_back({{"a", a},
                   {"b", b},
                   {"equivalent", c.equivalent},
                   {"aromatic_normalized_equivalent", c.aromatic_normalized_equivalent},
                   {"parse_failure", c.parse_failure},
                   {"stereo_discarded", c.stereo_discarded}});
    human += std::string(c.equivalent ? "same" : "different") + "\t" + a + "\t" + b + "\n";
  }
  emit(g, out, human);
}

int exit_code(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kUsage:
    case ErrorCategory::kSchema:
    case ErrorCategory::kIo:
      return 2;
    default:
      return 1;
  }
}

int report_error(const Globals& g, std::string_view category, const std::string& message, int code) {
  if (g.json_output) {
    std::cout << json{{"error", {{"category", category}, {"message", message}}}}.dump(2) << "\n";
  }
  std::cerr << "error [" << category << "]: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infrared spectrum to molecular structure toolkit"};
  app.require_subcommand(1);
  // Global flags may also follow the subcommand.
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  Globals g;
  app.add_flag("--json", g.json_output, "Structured JSON on stdout");
  app.add_option("--jobs", g.jobs, "Worker thread cap")->check(CLI::PositiveNumber);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Resample raw wavenumber,intensity CSVs onto a grid");
  ingest_cmd->add_option("inputs", ingest.inputs, "Raw CSV files (sidecar <csv>.json declares the mode)")->required();
  ingest_cmd->add_option("-o,--output", ingest.output, "Output JSON-lines file")->required();
  ingest_cmd->add_option("--mode", ingest.mode, "Override intensity mode: transmittance|absorbance");
  ingest_cmd->add_option("--method", ingest.method, "Interpolation: monotone-cubic|linear");
  ingest_cmd->add_option("--grid-start", ingest.start, "Grid start (cm-1)");
  ingest_cmd->add_option("--grid-end", ingest.end, "Grid end (cm-1)");
  ingest_cmd->add_option("--grid-count", ingest.count, "Grid points");

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Convert to absorbance, optionally regrid and normalize");
  pre_cmd->add_option("-i,--input", pre.input, "Input JSON-lines spectra")->required();
  pre_cmd->add_option("-o,--output", pre.output, "Output JSON-lines spectra")->required();
  pre_cmd->add_flag("--normalize", pre.normalize, "L2-normalize each spectrum");
  pre_cmd->add_option("--grid-start", pre.start, "Regrid start (cm-1)");
  pre_cmd->add_option("--grid-end", pre.end, "Regrid end (cm-1)");
  pre_cmd->add_option("--grid-count", pre.count, "Regrid points");

  PeaksArgs peaks;
  auto* peaks_cmd = app.add_subcommand("peaks", "Detect peaks and assign absorption-table bands");
  peaks_cmd->add_option("-i,--input", peaks.input, "JSON-lines spectra")->required();
  peaks_cmd->add_option("-t,--table", peaks.table, "Absorption table CSV")->required();
  peaks_cmd->add_option("--height", peaks.height, "Minimum peak absorbance");
  peaks_cmd->add_option("--distance", peaks.distance, "Minimum peak separation (grid points)");

  RetrieveArgs ret;
  auto* ret_cmd = app.add_subcommand("retrieve", "Cosine-similarity search of a spectra database");
  ret_cmd->add_option("--db", ret.db, "Database JSON-lines spectra")->required();
  ret_cmd->add_option("-q,--query", ret.query, "Query JSON-lines spectra")->required();
  ret_cmd->add_option("--top-n", ret.top_n, "Hits per query");
  ret_cmd->add_option("--exclude-id", ret.exclude_id, "Database id to hide");
  ret_cmd->add_flag("--exclude-self", ret.exclude_self, "Hide each query's own id");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the spectrum-to-SMILES translator");
  train_cmd->add_option("--train", tr.train, "Training spectra (with SMILES)")->required();
  train_cmd->add_option("--valid", tr.valid, "Validation spectra (with SMILES)")->required();
  train_cmd->add_option("-c,--config", tr.config, "JSON {\"model\": {...}, \"training\": {...}}");
  train_cmd->add_option("-o,--output", tr.output, "Checkpoint path")->required();
  train_cmd->add_option("--seed", tr.seed, "Seed for initialization and shuffling");
  train_cmd->add_option("--epochs", tr.epochs, "Epoch cap (default 300)");

  DecodeArgs dec;
  auto* dec_cmd = app.add_subcommand("decode", "Beam-search SMILES candidates from a checkpoint");
  dec_cmd->add_option("--checkpoint", dec.checkpoint, "Translator checkpoint")->required();
  dec_cmd->add_option("-i,--input", dec.input, "JSON-lines spectra")->required();
  dec_cmd->add_option("--beam-width", dec.beam_width, "Beam width");
  dec_cmd->add_option("-k", dec.k, "Candidates per spectrum (0 = beam width)");

  ElucidateArgs el;
  auto* el_cmd = app.add_subcommand("elucidate", "Run the agent pipeline on spectra");
  el_cmd->add_option("-i,--input", el.input, "Query JSON-lines spectra")->required();
  el_cmd->add_option("--db", el.db, "Reference database for retrieval")->required();
  el_cmd->add_option("-t,--table", el.table, "Absorption table CSV")->required();
  el_cmd->add_option("-c,--config", el.config, "Pipeline config JSON");
  el_cmd->add_option("--checkpoint", el.checkpoint, "Translator checkpoint (default: retrieval candidates)");
  el_cmd->add_option("--mode", el.mode, "full|ti-only|ret-only|single-agent|no-experts (default full)");
  el_cmd->add_option("--backend", el.backend, "mock|http (default mock)");
  el_cmd->add_option("--mock-script", el.mock_script, "Scripted mock responses");
  el_cmd->add_option("--chemical-info", el.chemical_info,
                     "none|atom_types|scaffold|carbon_count (default none)");
  el_cmd->add_option("-k", el.k, "Final list length (default 10)");
  el_cmd->add_option("--top-n", el.top_n, "Retrieved spectra shown to the agents (default 10)");
  el_cmd->add_option("--num-candidates", el.num_candidates, "Translator candidates (default 3)");
  el_cmd->add_option("--beam-width", el.beam_width, "Beam width (default 3)");
  el_cmd->add_option("--seed", el.seed, "Backend sampling seed (default 0)");
  el_cmd->add_option("--exclude-self", el.exclude_self, "Hide the query's own id from retrieval (default false)");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Run an experiment spec and write a report");
  ev_cmd->add_option("-s,--spec", ev.spec, "Experiment spec JSON")->required();
  ev_cmd->add_option("-o,--out", ev.out, "Parent directory of run directories");
  ev_cmd->add_option("--runs", ev.runs, "Override independent runs (default 3)");
  ev_cmd->add_option("--max-test", ev.max_test, "Cap on evaluated test spectra");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Regenerate a report from raw.csv");
  rep_cmd->add_option("--raw", rep.raw, "raw.csv of an evaluation run")->required();
  rep_cmd->add_option("-o,--out", rep.out, "Output directory (default: beside raw.csv)");

  auto* can_cmd = app.add_subcommand("canonicalize", "Canonical SMILES for each stdin line");
  auto* cmp_cmd = app.add_subcommand("compare", "Structure equivalence for 'A B' stdin lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(g, "usage", e.what(), 2);
  }

  try {
    if (*ingest_cmd) run_ingest(g, ingest);
    else if (*pre_cmd) run_preprocess(g, pre);
    else if (*peaks_cmd) run_peaks(g, peaks);
    else if (*ret_cmd) run_retrieve(g, ret);
    else if (*train_cmd) run_train(g, tr);
    else if (*dec_cmd) run_decode(g, dec);
    else if (*el_cmd) run_elucidate(g, el);
    else if (*ev_cmd) run_evaluate(g, ev);
    else if (*rep_cmd) run_report(g, rep);
    else if (*can_cmd) run_canonicalize(g);
    else if (*cmp_cmd) run_compare(g);
  } catch (const Error& e) {
    return report_error(g, category_name(e.category()), e.what(), exit_code(e.category()));
  } catch (const json::exception& e) {
    return report_error(g, "schema", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error(g, "runtime", e.what(), 1);
  }
  return 0;
}
