#include "ir_agent/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "ir_agent/error.hpp"
#include "ir_agent/smiles.hpp"
#include "ir_agent/spectrum_io.hpp"
#include "ir_agent/translator/checkpoint.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent::eval {

void SplitSpec::validate() const {
  if (train < 0.0 || valid < 0.0 || test < 0.0 || std::abs(train + valid + test - 1.0) > 1e-9) {
    throw DomainError("split ratios must be non-negative and sum to 1");
  }
}

Split split(std::span<const std::string> ids, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::string> order(ids.begin(), ids.end());
  std::sort(order.begin(), order.end());
  if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
    throw DomainError("split ids must be unique");
  }
  if (order.size() < 10) {
    throw DomainError("split needs at least 10 ids, got " + std::to_string(order.size()));
  }
  util::SeededRng rng(spec.seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const double n = static_cast<double>(order.size());
  // The epsilon keeps exact products such as 0.8 * 10 from flooring to 7.
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train * n + 1e-9));
  const auto n_valid = static_cast<std::size_t>(std::floor(spec.valid * n + 1e-9));
  Split out;
  const auto begin = order.begin();
  out.train.assign(begin, begin + static_cast<std::ptrdiff_t>(n_train));
  out.valid.assign(begin + static_cast<std::ptrdiff_t>(n_train),
                   begin + static_cast<std::ptrdiff_t>(n_train + n_valid));
  out.test.assign(begin + static_cast<std::ptrdiff_t>(n_train + n_valid), order.end());
  for (auto* part : {&out.train, &out.valid, &out.test}) std::sort(part->begin(), part->end());
  return out;
}

TopKStats topk_accuracy(std::span<const RankedPrediction> results, std::size_t k) {
  if (k < 1) throw DomainError("k must be at least 1");
  TopKStats stats;
  stats.k = k;
  stats.examples = results.size();
  for (const auto& r : results) {
    const auto truth = smiles::try_canonical(r.truth);
    bool hit = false;
    bool aromatic_hit = false;
    const std::size_t limit = std::min(k, r.ranked.size());
    for (std::size_t i = 0; i < limit; ++i) {
      const auto c = smiles::compare(r.ranked[i], r.truth);
      if (!smiles::try_canonical(r.ranked[i])) ++stats.parse_failures;
      if (c.stereo_discarded) ++stats.stereo_discarded;
      hit = hit || c.equivalent;
      aromatic_hit = aromatic_hit || c.aromatic_normalized_equivalent;
    }
    if (!truth) continue;
    stats.hits += hit ? 1 : 0;
    stats.aromatic_normalized_hits += aromatic_hit ? 1 : 0;
  }
  stats.accuracy = stats.examples == 0
                       ? 0.0
                       : static_cast<double>(stats.hits) / static_cast<double>(stats.examples);
  return stats;
}

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

template <typename T>
T read(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("experiment key '") + key + "': " + e.what());
  }
}

/// Applies `overrides` on top of `base` through the JSON form so the same
/// validation runs.
agents::PipelineConfig with_overrides(const agents::PipelineConfig& base, const json& overrides) {
  json merged = agents::pipeline_config_to_json(base);
  for (const auto& [key, value] : overrides.items()) {
    if (!merged.contains(key)) throw SchemaError("unknown pipeline config key '" + key + "'");
    merged[key] = value;
  }
  return agents::pipeline_config_from_json(merged);
}

}  // namespace

json ExperimentSpec::to_json() const {
  json configs_json = json::array();
  for (const auto& c : configs) {
    configs_json.push_back({{"name", c.name},
                            {"pipeline", agents::pipeline_config_to_json(c.pipeline)},
                            {"sweep_parameter", c.sweep_parameter},
                            {"sweep_value", c.sweep_value}});
  }
  return {{"database", database.string()},
          {"table", table.string()},
          {"checkpoint", checkpoint ? json(checkpoint->string()) : json()},
          {"split", {{"train", split.train}, {"valid", split.valid}, {"test", split.test}, {"seed", split.seed}}},
          {"base_seed", base_seed},
          {"runs", runs},
          {"ks", ks},
          {"jobs", jobs},
          {"max_test", max_test},
          {"configs", configs_json}};
}

ExperimentSpec experiment_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw SchemaError("experiment spec must be a JSON object");
  static const std::set<std::string> known = {"database", "table",  "checkpoint", "split",
                                              "base_seed", "runs",  "ks",         "jobs",
                                              "max_test",  "base",  "configs",    "sweeps"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw SchemaError("unknown experiment key '" + key + "'");
  }
  ExperimentSpec spec;
  spec.base_dir = base_dir;
  if (!j.contains("database") || !j.contains("table")) {
    throw SchemaError("experiment spec needs 'database' and 'table'");
  }
  spec.database = read<std::string>(j, "database", "");
  spec.table = read<std::string>(j, "table", "");
  if (j.contains("checkpoint") && !j.at("checkpoint").is_null()) {
    spec.checkpoint = read<std::string>(j, "checkpoint", "");
  }
  if (j.contains("split")) {
    const auto& s = j.at("split");
    spec.split.train = read<double>(s, "train", spec.split.train);
    spec.split.valid = read<double>(s, "valid", spec.split.valid);
    spec.split.test = read<double>(s, "test", spec.split.test);
    spec.split.seed = read<std::uint64_t>(s, "seed", spec.split.seed);
  }
  spec.split.validate();
  spec.base_seed = read<std::uint64_t>(j, "base_seed", 0);
  spec.runs = read<std::size_t>(j, "runs", 3);
  spec.ks = read<std::vector<std::size_t>>(j, "ks", kDefaultKs);
  spec.jobs = read<std::size_t>(j, "jobs", 1);
  spec.max_test = read<std::size_t>(j, "max_test", 0);
  if (spec.runs == 0 || spec.ks.empty() || spec.jobs == 0) {
    throw SchemaError("runs, ks and jobs must be non-empty/positive");
  }
  for (const auto k : spec.ks) {
    if (k == 0) throw SchemaError("every K must be positive");
  }
  if (!std::is_sorted(spec.ks.begin(), spec.ks.end())) throw SchemaError("ks must be ascending");

  const agents::PipelineConfig base =
      j.contains("base") ? agents::pipeline_config_from_json(j.at("base")) : agents::PipelineConfig{};
  if (j.contains("configs")) {
    for (const auto& c : j.at("configs")) {
      ExperimentConfig config;
      config.name = read<std::string>(c, "name", "");
      if (config.name.empty()) throw SchemaError("every config needs a name");
      config.pipeline = with_overrides(base, c.value("overrides", json::object()));
      spec.configs.push_back(std::move(config));
    }
  }
  if (j.contains("sweeps")) {
    for (const auto& [parameter, values] : j.at("sweeps").items()) {
      if (parameter != "num_candidates" && parameter != "beam_width" && parameter != "chemical_info") {
        throw SchemaError("cannot sweep '" + parameter + "'");
      }
      for (const auto& v : values) {
        ExperimentConfig config;
        config.sweep_parameter = parameter;
        config.sweep_value = v.is_string() ? v.get<std::string>() : v.dump();
        config.name = parameter + "=" + config.sweep_value;
        json overrides = {{parameter, v}};
        // Wider beams only matter if the extra hypotheses are handed on.
        if (parameter == "beam_width") overrides["num_candidates"] = v;
        config.pipeline = with_overrides(base, overrides);
        spec.configs.push_back(std::move(config));
      }
    }
  }
  if (spec.configs.empty()) spec.configs.push_back({"base", base, "", ""});
  std::set<std::string> names;
  for (const auto& c : spec.configs) {
    if (!names.insert(c.name).second) throw SchemaError("duplicate config name '" + c.name + "'");
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  try {
    return experiment_from_json(json::parse(util::read_file(path)), path.parent_path());
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Summary RunReport::summary(std::size_t index) const {
  Summary s;
  if (runs.empty()) return s;
  std::vector<double> values;
  for (const auto& r : runs) values.push_back(r.topk.at(index).accuracy);
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  return s;
}

agents::CostLedger RunReport::total_cost() const {
  agents::CostLedger total;
  for (const auto& r : runs) total.merge(r.cost);
  return total;
}

namespace {

json protocol_json(const ExperimentSpec& spec) {
  return {{"split", {{"train", spec.split.train}, {"valid", spec.split.valid},
                     {"test", spec.split.test}, {"seed", spec.split.seed}}},
          {"base_seed", spec.base_seed},
          {"runs", spec.runs},
          {"ks", spec.ks},
          {"max_test", spec.max_test},
          {"generator", spec.checkpoint ? "translator" : "retrieval"}};
}

}  // namespace

std::string config_fingerprint(const ExperimentConfig& config, const ExperimentSpec& spec) {
  auto pipeline = agents::pipeline_config_to_json(config.pipeline);
  pipeline.erase("seed");  // set per run
  const json j = {{"pipeline", pipeline}, {"protocol", protocol_json(spec)}};
  return util::sha256_hex(j.dump()).substr(0, 12);
}

std::string experiment_fingerprint(const ExperimentSpec& spec) {
  json configs = json::array();
  for (const auto& c : spec.configs) configs.push_back({c.name, config_fingerprint(c, spec)});
  return util::sha256_hex(json{{"protocol", protocol_json(spec)}, {"configs", configs}}.dump())
      .substr(0, 12);
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the
/// exception of the lowest failing index.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < std::min(jobs, n); ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            const std::lock_guard lock(mutex);
            if (i < failed_index) {
              failed_index = i;
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void require_file(const std::filesystem::path& p, std::string_view what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw IoError(std::string(what) + " '" + p.string() + "' does not exist");
  }
}

}  // namespace

std::vector<RunReport> run_experiment(const ExperimentSpec& spec, const ProgressCallback& progress) {
  // Every artifact is checked and loaded before the first backend request.
  const auto db_path = resolve(spec.base_dir, spec.database);
  const auto table_path = resolve(spec.base_dir, spec.table);
  require_file(db_path, "database");
  require_file(table_path, "absorption table");
  std::optional<std::filesystem::path> checkpoint_path;
  if (spec.checkpoint) {
    checkpoint_path = resolve(spec.base_dir, *spec.checkpoint);
    require_file(*checkpoint_path, "checkpoint");
  }
  for (const auto& c : spec.configs) {
    if (c.pipeline.mode == agents::AblationMode::kNoExperts) continue;
    if (c.pipeline.backend == "mock" && !c.pipeline.mock_script.empty()) {
      require_file(resolve(spec.base_dir, c.pipeline.mock_script), "mock script");
    }
    if (c.pipeline.backend == "http") {
      const char* key = std::getenv("IR_AGENT_API_KEY");
      if (key == nullptr || *key == '\0') {
        throw BackendError("config '" + c.name + "' uses the http backend but IR_AGENT_API_KEY is not set");
      }
    }
  }

  std::vector<Spectrum> spectra;
  for (auto& s : load_spectra(db_path)) {
    if (!s.smiles()) throw SchemaError("database spectrum '" + s.id() + "' has no SMILES");
    spectra.push_back(s.mode() == IntensityMode::kTransmittance ? to_absorbance(s) : std::move(s));
  }
  std::vector<std::string> ids;
  for (const auto& s : spectra) ids.push_back(s.id());
  const Split parts = split(ids, spec.split);
  const std::set<std::string> train_ids(parts.train.begin(), parts.train.end());
  const std::set<std::string> test_ids(parts.test.begin(), parts.test.end());
  std::vector<Spectrum> train;
  std::vector<const Spectrum*> test;
  for (const auto& s : spectra) {
    if (train_ids.contains(s.id())) train.push_back(s);
  }
  for (const auto& s : spectra) {
    if (test_ids.contains(s.id())) test.push_back(&s);
  }
  std::sort(test.begin(), test.end(), [](const Spectrum* a, const Spectrum* b) { return a->id() < b->id(); });
  if (spec.max_test > 0 && test.size() > spec.max_test) test.resize(spec.max_test);
  const auto train_db = std::make_shared<const SpectraDatabase>(std::move(train));
  const auto table = load_table(table_path);
  std::shared_ptr<const translator::TranslatorModel> model;
  if (checkpoint_path) {
    model = std::make_shared<const translator::TranslatorModel>(translator::load_checkpoint(*checkpoint_path));
  }
  std::vector<std::unique_ptr<agents::LlmBackend>> backends;
  for (const auto& c : spec.configs) backends.push_back(agents::make_backend(c.pipeline, spec.base_dir));

  std::vector<RunReport> reports;
  for (std::size_t ci = 0; ci < spec.configs.size(); ++ci) {
    const auto& config = spec.configs[ci];
    std::unique_ptr<translator::CandidateGenerator> generator;
    if (model) {
      generator = std::make_unique<translator::NeuralGenerator>(model, config.pipeline.beam_width);
    } else {
      generator = std::make_unique<translator::RetrievalGenerator>(train_db);
    }
    RunReport report;
    report.name = config.name;
    report.fingerprint = config_fingerprint(config, spec);
    report.sweep_parameter = config.sweep_parameter;
    report.sweep_value = config.sweep_value;
    report.ks = spec.ks;
    for (std::size_t run = 0; run < spec.runs; ++run) {
      if (progress) progress(config.name, run);
      agents::PipelineConfig pipeline = config.pipeline;
      pipeline.seed = spec.base_seed + run;
      const agents::PipelineResources resources{generator.get(), train_db.get(), table,
                                                backends[ci].get()};
      std::vector<agents::ElucidationResult> results(test.size());
      parallel_for(test.size(), spec.jobs, [&](std::size_t i) {
        results[i] = agents::elucidate(pipeline, resources, *test[i]);
      });
      RunResult rr;
      rr.run = run;
      rr.seed = pipeline.seed;
      rr.examples = test.size();
      std::vector<RankedPrediction> predictions;
      for (std::size_t i = 0; i < results.size(); ++i) {
        predictions.push_back({results[i].ranked, *test[i]->smiles()});
        rr.cost.merge(agents::cost_ledger(results[i]));
        rr.backend_calls += results[i].calls.size();
        rr.fallbacks += results[i].fallback ? 1 : 0;
        rr.short_outputs += results[i].short_output ? 1 : 0;
      }
      for (const auto k : spec.ks) rr.topk.push_back(topk_accuracy(predictions, k));
      report.runs.push_back(std::move(rr));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace ir_agent::eval
