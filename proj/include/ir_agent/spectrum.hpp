#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ir_agent {

enum class IntensityMode { kTransmittance, kAbsorbance };

std::string_view mode_name(IntensityMode mode);
IntensityMode parse_mode(std::string_view text);

/// Uniform wavenumber axis in cm^-1: point(i) = start + i * (end - start) / (count - 1).
class WavenumberGrid {
 public:
  /// 500-4000 cm^-1 at 1 cm^-1 resolution.
  static WavenumberGrid standard() { return WavenumberGrid(500.0, 4000.0, 3501); }

  WavenumberGrid(double start, double end, std::size_t count);

  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  std::size_t count() const noexcept { return count_; }
  double point(std::size_t index) const noexcept;
  std::vector<double> points() const;

  std::string describe() const;

  friend bool operator==(const WavenumberGrid&, const WavenumberGrid&) = default;

 private:
  double start_;
  double end_;
  std::size_t count_;
};

/// Intensities sampled on a WavenumberGrid. Immutable after construction.
class Spectrum {
 public:
  Spectrum(WavenumberGrid grid, std::vector<double> values, IntensityMode mode,
           std::string id = {}, std::optional<std::string> smiles = std::nullopt);

  const WavenumberGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  IntensityMode mode() const noexcept { return mode_; }
  const std::string& id() const noexcept { return id_; }
  const std::optional<std::string>& smiles() const noexcept { return smiles_; }

  /// Same metadata, new values (validated again).
  Spectrum with_values(std::vector<double> values, IntensityMode mode) const;

 private:
  WavenumberGrid grid_;
  std::vector<double> values_;
  IntensityMode mode_;
  std::string id_;
  std::optional<std::string> smiles_;
};

/// Irregularly sampled source data: (wavenumber, intensity) pairs in any order.
/// Construction sorts by wavenumber and rejects duplicates.
class RawSpectrum {
 public:
  RawSpectrum(std::vector<std::pair<double, double>> points, IntensityMode mode);

  const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }
  IntensityMode mode() const noexcept { return mode_; }

 private:
  std::vector<std::pair<double, double>> points_;
  IntensityMode mode_;
};

/// Counters reported by to_absorbance alongside its result.
struct AbsorbanceStats {
  /// Transmittance samples above 1 (measurement noise) clamped to 1.
  std::size_t clamped_above_one = 0;
  /// Zero or sub-floor samples lifted to the 1e-10 floor.
  std::size_t floored = 0;
};

inline constexpr double kTransmittanceFloor = 1e-10;

/// A = -log10(max(T, 1e-10)). Rejects NaN and negative samples with their index.
Spectrum to_absorbance(const Spectrum& transmittance, AbsorbanceStats* stats = nullptr);

enum class InterpolationMethod {
  kMonotoneCubic,  // cubic-spline slopes limited to keep monotone runs monotone
  kLinear,
};

std::string_view method_name(InterpolationMethod method);
InterpolationMethod parse_method(std::string_view text);

/// Resample onto `grid`. Knots are reproduced exactly; outside the raw support
/// the edge values are held; negative interpolation artifacts are floored at 0.
Spectrum interpolate(const RawSpectrum& raw, const WavenumberGrid& grid,
                     InterpolationMethod method = InterpolationMethod::kMonotoneCubic,
                     std::string id = {}, std::optional<std::string> smiles = std::nullopt);

/// Resample an already gridded spectrum, keeping its id and SMILES.
Spectrum interpolate(const Spectrum& spectrum, const WavenumberGrid& grid,
                     InterpolationMethod method = InterpolationMethod::kMonotoneCubic);

Spectrum l2_normalize(const Spectrum& spectrum);

namespace detail {
/// Hermite slopes at each knot: not-a-knot cubic-spline slopes passed through a
/// Hyman monotonicity filter. Exposed for tests.
std::vector<double> monotone_spline_slopes(std::span<const double> x, std::span<const double> y);
}  // namespace detail

}  // namespace ir_agent
