#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ir_agent/spectrum.hpp"

namespace ir_agent {

/// One row of the IR absorption table, as a closed wavenumber interval.
struct AbsorptionBand {
  double low = 0.0;
  double high = 0.0;
  std::string group;
  std::string bond;
  std::string appearance;

  bool contains(double wavenumber) const noexcept {
    return low <= wavenumber && wavenumber <= high;
  }
  friend bool operator==(const AbsorptionBand&, const AbsorptionBand&) = default;
};

/// Half-width applied to single-point table entries.
inline constexpr double kPointEntryHalfWidth = 5.0;

/// CSV columns `low,high,group,bond,appearance` (header required; an optional
/// `point` column is also understood). A row with empty `high`, or low == high,
/// is a point entry and becomes [p - 5, p + 5]. Reversed ranges are swapped.
/// Bands come back sorted high wavenumbers first.
std::vector<AbsorptionBand> parse_table(std::string_view csv_text);
std::vector<AbsorptionBand> load_table(const std::filesystem::path& path);

/// Orders bands by low descending, then high descending, then by text fields,
/// so results do not depend on the row order of the source file.
void sort_table(std::vector<AbsorptionBand>& bands);

struct Peak {
  std::size_t index = 0;
  double wavenumber = 0.0;
  double absorbance = 0.0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

struct PeakOptions {
  double height = 1.0;
  std::size_t distance = 50;
};

/// Strict local maxima (plateaus collapse to their left-biased midpoint) with
/// absorbance >= height, pruned highest-first so that kept peaks are at least
/// `distance` indices apart. Ties in height keep the lower index. Sorted by index.
std::vector<std::size_t> find_peak_indices(std::span<const double> values,
                                           const PeakOptions& options);
std::vector<Peak> find_peaks(const Spectrum& absorbance, const PeakOptions& options = {});

struct PeakAssignment {
  Peak peak;
  std::vector<AbsorptionBand> bands;
  std::vector<std::string> interpretation;
};

std::string interpretation_text(const AbsorptionBand& band);
std::string no_match_text(double wavenumber);

std::vector<PeakAssignment> assign(std::span<const Peak> peaks,
                                   std::span<const AbsorptionBand> table);

nlohmann::json assignments_to_json(std::span<const PeakAssignment> assignments);

}  // namespace ir_agent
