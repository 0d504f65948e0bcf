#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ir_agent/spectrum.hpp"

namespace ir_agent {

// JSON-lines spectra database:
//   {"id": str, "smiles": str|null, "mode": "transmittance"|"absorbance",
//    "grid": {"start": f, "end": f, "count": n}, "values": [f, ...]}

nlohmann::json spectrum_to_json(const Spectrum& spectrum);
/// `line` is only used to label errors.
Spectrum spectrum_from_json(const nlohmann::json& record, std::size_t line = 0);

std::vector<Spectrum> parse_spectra_jsonl(std::string_view text);
std::vector<Spectrum> load_spectra(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<Spectrum>& spectra);
void save_spectra(const std::filesystem::path& path, const std::vector<Spectrum>& spectra);

/// Raw ingestion CSV: header `wavenumber,intensity`, one sample per row.
/// The sidecar `<csv>.json` declares {"mode": ..., "id"?: ..., "smiles"?: ...};
/// `mode_override` wins over the sidecar when set.
struct RawRecord {
  RawSpectrum raw;
  std::string id;
  std::optional<std::string> smiles;
};

RawSpectrum parse_raw_csv(std::string_view text, IntensityMode mode);
RawRecord load_raw_record(const std::filesystem::path& csv_path,
                          std::optional<IntensityMode> mode_override = std::nullopt);

}  // namespace ir_agent
