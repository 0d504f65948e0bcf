#include "ir_agent/spectrum_io.hpp"

#include <charconv>

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent {

using nlohmann::json;

json spectrum_to_json(const Spectrum& spectrum) {
  const auto& grid = spectrum.grid();
  json record;
  record["id"] = spectrum.id();
  record["smiles"] = spectrum.smiles() ? json(*spectrum.smiles()) : json(nullptr);
  record["mode"] = mode_name(spectrum.mode());
  record["grid"] = {{"start", grid.start()}, {"end", grid.end()}, {"count", grid.count()}};
  record["values"] = std::vector<double>(spectrum.values().begin(), spectrum.values().end());
  return record;
}

Spectrum spectrum_from_json(const json& record, std::size_t line) {
  try {
    if (!record.is_object()) throw SchemaError("record is not a JSON object", line);
    const auto& grid_json = record.at("grid");
    const auto count = grid_json.at("count").get<std::int64_t>();
    if (count < 2) throw SchemaError("grid.count must be >= 2", line);
    WavenumberGrid grid(grid_json.at("start").get<double>(), grid_json.at("end").get<double>(),
                        static_cast<std::size_t>(count));
    auto values = record.at("values").get<std::vector<double>>();
    if (values.size() != grid.count()) {
      throw SchemaError("values length " + std::to_string(values.size()) +
                            " does not match grid.count " + std::to_string(grid.count()),
                        line);
    }
    std::optional<std::string> smiles;
    if (record.contains("smiles") && !record["smiles"].is_null()) {
      smiles = record["smiles"].get<std::string>();
    }
    return Spectrum(grid, std::move(values), parse_mode(record.at("mode").get<std::string>()),
                    record.at("id").get<std::string>(), std::move(smiles));
  } catch (const SchemaError&) {
    throw;
  } catch (const json::exception& e) {
    throw SchemaError(e.what(), line);
  } catch (const DomainError& e) {
    throw SchemaError(e.what(), line);
  }
}

std::vector<Spectrum> parse_spectra_jsonl(std::string_view text) {
  std::vector<Spectrum> spectra;
  const auto lines = util::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (util::trim(lines[i]).empty()) continue;
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw SchemaError(std::string("invalid JSON: ") + e.what(), i + 1);
    }
    spectra.push_back(spectrum_from_json(record, i + 1));
  }
  return spectra;
}

std::vector<Spectrum> load_spectra(const std::filesystem::path& path) {
  try {
    return parse_spectra_jsonl(util::read_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string to_jsonl(const std::vector<Spectrum>& spectra) {
  std::string out;
  for (const auto& s : spectra) {
    out += spectrum_to_json(s).dump();
    out += '\n';
  }
  return out;
}

void save_spectra(const std::filesystem::path& path, const std::vector<Spectrum>& spectra) {
  util::write_file(path, to_jsonl(spectra));
}

namespace {

double parse_double(std::string_view text, std::size_t line, std::string_view column) {
  text = util::trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw SchemaError("column " + std::string(column) + ": '" + std::string(text) +
                          "' is not a number",
                      line);
  }
  return value;
}

}  // namespace

RawSpectrum parse_raw_csv(std::string_view text, IntensityMode mode) {
  const auto table = util::parse_csv(text);
  if (table.rows.empty()) throw SchemaError("raw CSV is empty");
  const auto& header = table.rows.front();
  if (header.size() != 2 || util::trim(header[0]) != "wavenumber" ||
      util::trim(header[1]) != "intensity") {
    throw SchemaError("raw CSV header must be 'wavenumber,intensity'", table.line_numbers[0]);
  }
  std::vector<std::pair<double, double>> points;
  points.reserve(table.rows.size() - 1);
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    if (row.size() != 2) throw SchemaError("expected 2 columns", line);
    points.emplace_back(parse_double(row[0], line, "wavenumber"),
                        parse_double(row[1], line, "intensity"));
  }
  try {
    return RawSpectrum(std::move(points), mode);
  } catch (const DomainError& e) {
    throw SchemaError(e.what());
  }
}

RawRecord load_raw_record(const std::filesystem::path& csv_path,
                          std::optional<IntensityMode> mode_override) {
  auto sidecar_path = csv_path;
  sidecar_path += ".json";
  json sidecar = json::object();
  if (std::filesystem::exists(sidecar_path)) {
    try {
      sidecar = json::parse(util::read_file(sidecar_path));
    } catch (const json::exception& e) {
      throw SchemaError(sidecar_path.string() + ": " + e.what());
    }
  }
  std::optional<IntensityMode> mode = mode_override;
  if (!mode) {
    if (!sidecar.contains("mode")) {
      throw SchemaError(csv_path.string() + ": no mode declared (sidecar " +
                        sidecar_path.filename().string() + " missing or without \"mode\")");
    }
    try {
      mode = parse_mode(sidecar["mode"].get<std::string>());
    } catch (const std::exception& e) {
      throw SchemaError(sidecar_path.string() + ": " + e.what());
    }
  }
  std::string id = sidecar.value("id", csv_path.stem().string());
  std::optional<std::string> smiles;
  if (sidecar.contains("smiles") && sidecar["smiles"].is_string()) {
    smiles = sidecar["smiles"].get<std::string>();
  }
  try {
    return {parse_raw_csv(util::read_file(csv_path), *mode), std::move(id), std::move(smiles)};
  } catch (const SchemaError& e) {
    throw SchemaError(csv_path.string() + ": " + e.what());
  }
}

}  // namespace ir_agent
