#include "ir_agent/peaks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <tuple>

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent {

namespace {

std::optional<double> parse_optional_number(std::string_view text, std::size_t line,
                                            std::string_view column) {
  text = util::trim(text);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw SchemaError("column '" + std::string(column) + "': '" + std::string(text) +
                          "' is not a number",
                      line);
  }
  return value;
}

}  // namespace

void sort_table(std::vector<AbsorptionBand>& bands) {
  std::sort(bands.begin(), bands.end(), [](const AbsorptionBand& a, const AbsorptionBand& b) {
    return std::tie(b.low, b.high, a.group, a.bond, a.appearance) <
           std::tie(a.low, a.high, b.group, b.bond, b.appearance);
  });
}

std::vector<AbsorptionBand> parse_table(std::string_view csv_text) {
  const auto table = util::parse_csv(csv_text);
  std::vector<AbsorptionBand> bands;
  if (table.rows.empty()) return bands;

  const auto& header = table.rows.front();
  const auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (util::trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto low_col = column("low");
  const auto high_col = column("high");
  const auto point_col = column("point");
  const auto group_col = column("group");
  const auto bond_col = column("bond");
  const auto appearance_col = column("appearance");
  if (!group_col || !bond_col || (!low_col && !point_col)) {
    throw SchemaError("absorption table header must contain low,high,group,bond,appearance",
                      table.line_numbers[0]);
  }

  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    if (row.size() != header.size()) {
      throw SchemaError("expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(row.size()),
                        line);
    }
    const auto field = [&](std::optional<std::size_t> col) -> std::string_view {
      return col ? util::trim(row[*col]) : std::string_view{};
    };
    std::optional<double> point = parse_optional_number(field(point_col), line, "point");
    std::optional<double> low = parse_optional_number(field(low_col), line, "low");
    std::optional<double> high = parse_optional_number(field(high_col), line, "high");
    if (!point) {
      if (!low) throw SchemaError("row has neither 'low' nor 'point'", line);
      if (!high || *high == *low) point = low;
    }

    AbsorptionBand band;
    if (point) {
      band.low = *point - kPointEntryHalfWidth;
      band.high = *point + kPointEntryHalfWidth;
    } else {
      band.low = std::min(*low, *high);
      band.high = std::max(*low, *high);
    }
    band.group = std::string(field(group_col));
    band.bond = std::string(field(bond_col));
    band.appearance = std::string(field(appearance_col));
    if (band.group.empty()) throw SchemaError("empty 'group'", line);
    bands.push_back(std::move(band));
  }
  sort_table(bands);
  return bands;
}

std::vector<AbsorptionBand> load_table(const std::filesystem::path& path) {
  try {
    return parse_table(util::read_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::vector<std::size_t> find_peak_indices(std::span<const double> values,
                                           const PeakOptions& options) {
  if (options.distance < 1) throw DomainError("peak distance must be >= 1");
  const std::size_t n = values.size();

  std::vector<std::size_t> peaks;
  if (n >= 3) {
    std::size_t i = 1;
    const std::size_t last = n - 1;
    while (i < last) {
      if (values[i - 1] < values[i]) {
        std::size_t ahead = i + 1;
        while (ahead < last && values[ahead] == values[i]) ++ahead;
        if (values[ahead] < values[i]) {
          peaks.push_back((i + ahead - 1) / 2);
          i = ahead;
        }
      }
      ++i;
    }
  }

  std::erase_if(peaks, [&](std::size_t p) { return !(values[p] >= options.height); });
  if (options.distance == 1 || peaks.size() < 2) return peaks;

  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[peaks[a]] > values[peaks[b]];
  });
  std::vector<bool> keep(peaks.size(), true);
  for (const std::size_t j : order) {
    if (!keep[j]) continue;
    for (std::size_t k = j; k-- > 0 && peaks[j] - peaks[k] < options.distance;) keep[k] = false;
    for (std::size_t k = j + 1; k < peaks.size() && peaks[k] - peaks[j] < options.distance; ++k) {
      keep[k] = false;
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < peaks.size(); ++j) {
    if (keep[j]) kept.push_back(peaks[j]);
  }
  return kept;
}

std::vector<Peak> find_peaks(const Spectrum& absorbance, const PeakOptions& options) {
  if (absorbance.mode() != IntensityMode::kAbsorbance) {
    throw DomainError("find_peaks expects an absorbance spectrum");
  }
  std::vector<Peak> peaks;
  for (const std::size_t index : find_peak_indices(absorbance.values(), options)) {
    peaks.push_back({index, absorbance.grid().point(index), absorbance.values()[index]});
  }
  return peaks;
}

std::string interpretation_text(const AbsorptionBand& band) {
  return "Peaks observed between " + util::format_number(band.high) + " and " +
         util::format_number(band.low) + " cm-1 are typically associated with " + band.group +
         " (" + band.bond + ").";
}

std::string no_match_text(double wavenumber) {
  return "No table entry matches the peak at " + util::format_number(wavenumber) + " cm-1.";
}

std::vector<PeakAssignment> assign(std::span<const Peak> peaks,
                                   std::span<const AbsorptionBand> table) {
  std::vector<PeakAssignment> out;
  out.reserve(peaks.size());
  for (const auto& peak : peaks) {
    PeakAssignment assignment{peak, {}, {}};
    for (const auto& band : table) {
      if (band.contains(peak.wavenumber)) {
        assignment.bands.push_back(band);
        assignment.interpretation.push_back(interpretation_text(band));
      }
    }
    if (assignment.bands.empty()) assignment.interpretation.push_back(no_match_text(peak.wavenumber));
    out.push_back(std::move(assignment));
  }
  return out;
}

nlohmann::json assignments_to_json(std::span<const PeakAssignment> assignments) {
  auto out = nlohmann::json::array();
  for (const auto& a : assignments) {
    auto matches = nlohmann::json::array();
    for (const auto& band : a.bands) {
      matches.push_back(
          {{"low", band.low}, {"high", band.high}, {"group", band.group}, {"bond", band.bond}});
    }
    out.push_back({{"wavenumber", a.peak.wavenumber},
                   {"absorbance", a.peak.absorbance},
                   {"matches", std::move(matches)},
                   {"text", a.interpretation}});
  }
  return out;
}

}  // namespace ir_agent
