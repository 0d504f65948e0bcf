#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ir_agent/agents/pipeline.hpp"

namespace ir_agent::eval {

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<std::string> train, valid, test;  // each sorted
};

/// Ids are sorted, shuffled with the seed, then cut into floor(train*n),
/// floor(valid*n) and the remainder.
Split split(std::span<const std::string> ids, const SplitSpec& spec);

struct RankedPrediction {
  std::vector<std::string> ranked;
  std::string truth;
};

struct TopKStats {
  std::size_t k = 0;
  std::size_t examples = 0;
  std::size_t hits = 0;
  double accuracy = 0.0;
  /// Unparseable entries among the first k predictions.
  std::size_t parse_failures = 0;
  /// Hits when aromatic and Kekule spellings are treated as equal.
  std::size_t aromatic_normalized_hits = 0;
  /// Comparisons where stereo marks were dropped.
  std::size_t stereo_discarded = 0;
};

/// Fraction of examples whose truth is equivalent to one of the first k
/// predictions. Shorter lists count as padded with non-matches.
TopKStats topk_accuracy(std::span<const RankedPrediction> results, std::size_t k);

inline const std::vector<std::size_t> kDefaultKs = {1, 3, 5, 10};

/// One pipeline configuration of an experiment, optionally a point of a sweep.
struct ExperimentConfig {
  std::string name;
  agents::PipelineConfig pipeline;
  std::string sweep_parameter;  // empty when not part of a sweep
  std::string sweep_value;
};

struct ExperimentSpec {
  std::filesystem::path database;
  std::filesystem::path table;
  /// Translator checkpoint; without one the retrieval generator stands in.
  std::optional<std::filesystem::path> checkpoint;
  SplitSpec split;
  std::uint64_t base_seed = 0;
  std::size_t runs = 3;
  std::vector<std::size_t> ks = kDefaultKs;
  /// Worker threads for per-spectrum evaluation.
  std::size_t jobs = 1;
  /// Evaluate at most this many test spectra (0 = all).
  std::size_t max_test = 0;
  std::vector<ExperimentConfig> configs;
  /// Directory relative paths in the spec resolve against.
  std::filesystem::path base_dir;

  nlohmann::json to_json() const;
};

/// {"database", "table", "checkpoint"?, "split": {"train","valid","test","seed"},
///  "base_seed", "runs", "ks", "jobs", "max_test", "base": pipeline config,
///  "configs": [{"name", "overrides": {...}}], "sweeps": {"num_candidates": [...],
///  "beam_width": [...], "chemical_info": [...]}}
ExperimentSpec experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment(const std::filesystem::path& path);

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t examples = 0;
  std::vector<TopKStats> topk;  // one per k, in spec order
  agents::CostLedger cost;
  std::size_t backend_calls = 0;
  std::size_t fallbacks = 0;
  std::size_t short_outputs = 0;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one run
  double min = 0.0;
  double max = 0.0;
};

struct RunReport {
  std::string name;
  std::string fingerprint;  // first 12 hex digits of the config digest
  std::string sweep_parameter;
  std::string sweep_value;
  std::vector<std::size_t> ks;
  std::vector<RunResult> runs;

  /// Accuracy summary over runs for ks[i].
  Summary summary(std::size_t index) const;
  agents::CostLedger total_cost() const;
};

/// Digest over the pipeline config and evaluation protocol.
std::string config_fingerprint(const ExperimentConfig& config, const ExperimentSpec& spec);
std::string experiment_fingerprint(const ExperimentSpec& spec);

using ProgressCallback = std::function<void(const std::string& config, std::size_t run)>;

/// Loads every artifact first (failing before any backend call), evaluates
/// each config over the test split for spec.runs runs with seeds
/// base_seed + run, and returns one report per config.
std::vector<RunReport> run_experiment(const ExperimentSpec& spec,
                                      const ProgressCallback& progress = {});

/// Writes report.md (one table per config), raw.csv and one SVG per sweep
/// into `dir`. Byte-deterministic. An empty report set is an error and
/// nothing is written.
void emit_report(std::span<const RunReport> reports, const std::filesystem::path& dir);

std::string render_markdown(std::span<const RunReport> reports);
std::string render_csv(std::span<const RunReport> reports);
/// Sweep plots keyed by parameter name.
std::map<std::string, std::string> render_sweep_svgs(std::span<const RunReport> reports);
/// Inverse of render_csv.
std::vector<RunReport> reports_from_csv(std::string_view csv);

}  // namespace ir_agent::eval
