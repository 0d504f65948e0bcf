#pragma once

// Tiny translator fixtures shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ir_agent/translator/model.hpp"
#include "ir_agent/translator/training.hpp"
#include "ir_agent/util/text.hpp"

namespace micro {

using namespace ir_agent::translator;

/// Eight SMILES tokens plus the four reserved ones: vocabulary size 12.
inline TokenVocabulary vocabulary() {
  return TokenVocabulary({"C", "N", "O", "=", "(", ")", "1", "c"});
}

inline TranslatorConfig config(std::size_t length = 16, std::uint64_t seed = 1) {
  TranslatorConfig c;
  c.d_model = 8;
  c.heads = 1;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.spectrum_length = length;
  c.max_target_len = 12;
  c.seed = seed;
  return c;
}

inline std::vector<double> random_spectrum(ir_agent::util::SeededRng& rng, std::size_t length) {
  std::vector<double> v(length);
  for (auto& x : v) x = rng.uniform(0.0, 2.0);
  return v;
}

struct GradientReport {
  std::size_t parameters = 0;
  std::size_t within_tolerance = 0;  // relative error <= 1e-4
  double max_relative_error = 0.0;
  double fraction() const {
    return parameters == 0 ? 0.0 : static_cast<double>(within_tolerance) / static_cast<double>(parameters);
  }
};

/// |a - n| / max(|a|, |n|, floor): the floor keeps coordinates whose true
/// gradient is zero from turning rounding noise into large ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Analytic gradient of batch_loss against central differences over every parameter.
inline GradientReport gradient_check(const TranslatorModel& model,
                                     const std::vector<TrainingExample>& batch, double step = 1e-5) {
  std::vector<double> analytic(model.parameters().size(), 0.0);
  batch_loss(model, batch, &analytic);
  TranslatorModel probe = model;
  GradientReport report;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double saved = probe.parameters()[i];
    probe.parameters()[i] = saved + step;
    const double up = batch_loss(probe, batch, nullptr);
    probe.parameters()[i] = saved - step;
    const double down = batch_loss(probe, batch, nullptr);
    probe.parameters()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic[i], numeric);
    ++report.parameters;
    if (err <= 1e-4) ++report.within_tolerance;
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  return report;
}

/// Synthetic spectrum -> SMILES pairs: each spectrum is a bump whose position
/// encodes the example, so distinct targets have distinct inputs.
inline std::vector<TrainingExample> synthetic_pairs(std::size_t count, std::size_t length,
                                                    std::uint64_t seed) {
  static const std::vector<std::string> kTargets = {
      "CCO", "CNC", "C=O", "CC(C)O", "OCCN", "C1CC1", "NC=O", "CCCC", "OC=O", "CN",
      "cccc", "C(N)O", "CC=C", "NCCO", "C1CCC1", "OCO", "CCN(C)C", "C=CN", "ON", "COC"};
  ir_agent::util::SeededRng rng(seed);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(length);
    const double centre = static_cast<double>(i % length);
    for (std::size_t j = 0; j < length; ++j) {
      const double d = static_cast<double>(j) - centre;
      v[j] = 2.0 * std::exp(-0.5 * d * d) + 0.05 * rng.uniform() +
             0.5 * static_cast<double>(i / length);
    }
    char id[16];
    std::snprintf(id, sizeof id, "syn%02zu", i);
    out.push_back({id, std::move(v), kTargets[i % kTargets.size()]});
  }
  return out;
}

}  // namespace micro
