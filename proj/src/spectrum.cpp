#include "ir_agent/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "ir_agent/error.hpp"
#include "ir_agent/util/text.hpp"

namespace ir_agent {

std::string_view mode_name(IntensityMode mode) {
  return mode == IntensityMode::kTransmittance ? "transmittance" : "absorbance";
}

IntensityMode parse_mode(std::string_view text) {
  if (text == "transmittance") return IntensityMode::kTransmittance;
  if (text == "absorbance") return IntensityMode::kAbsorbance;
  throw DomainError("unknown intensity mode '" + std::string(text) +
                    "' (expected transmittance or absorbance)");
}

WavenumberGrid::WavenumberGrid(double start, double end, std::size_t count)
    : start_(start), end_(end), count_(count) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(start < end)) {
    throw DomainError("grid requires finite start < end, got " + describe());
  }
  if (count < 2) throw DomainError("grid requires count >= 2, got " + describe());
}

double WavenumberGrid::point(std::size_t index) const noexcept {
  return start_ + static_cast<double>(index) * (end_ - start_) / static_cast<double>(count_ - 1);
}

std::vector<double> WavenumberGrid::points() const {
  std::vector<double> out(count_);
  for (std::size_t i = 0; i < count_; ++i) out[i] = point(i);
  return out;
}

std::string WavenumberGrid::describe() const {
  return "[" + util::format_number(start_) + ", " + util::format_number(end_) + "] x " +
         std::to_string(count_);
}

Spectrum::Spectrum(WavenumberGrid grid, std::vector<double> values, IntensityMode mode,
                   std::string id, std::optional<std::string> smiles)
    : grid_(grid),
      values_(std::move(values)),
      mode_(mode),
      id_(std::move(id)),
      smiles_(std::move(smiles)) {
  if (values_.size() != grid_.count()) {
    throw DomainError("spectrum has " + std::to_string(values_.size()) +
                      " values but its grid has " + std::to_string(grid_.count()) + " points");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw SampleError("non-finite intensity", i);
  }
}

Spectrum Spectrum::with_values(std::vector<double> values, IntensityMode mode) const {
  return Spectrum(grid_, std::move(values), mode, id_, smiles_);
}

RawSpectrum::RawSpectrum(std::vector<std::pair<double, double>> points, IntensityMode mode)
    : points_(std::move(points)), mode_(mode) {
  if (points_.size() < 2) {
    throw DomainError("raw spectrum needs at least 2 points, got " +
                      std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second)) {
      throw SampleError("non-finite raw point", i);
    }
  }
  std::sort(points_.begin(), points_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].first == points_[i - 1].first) {
      throw DomainError("duplicate wavenumber " + util::format_number(points_[i].first) +
                        " in raw spectrum");
    }
  }
}

Spectrum to_absorbance(const Spectrum& transmittance, AbsorbanceStats* stats) {
  if (transmittance.mode() != IntensityMode::kTransmittance) {
    throw DomainError("to_absorbance expects a transmittance spectrum");
  }
  AbsorbanceStats local;
  const auto in = transmittance.values();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    double t = in[i];
    if (std::isnan(t) || t < 0.0) throw SampleError("negative or NaN transmittance", i);
    if (t > 1.0) {
      t = 1.0;
      ++local.clamped_above_one;
    }
    if (t < kTransmittanceFloor) ++local.floored;
    out[i] = -std::log10(std::max(t, kTransmittanceFloor));
  }
  if (stats != nullptr) *stats = local;
  return transmittance.with_values(std::move(out), IntensityMode::kAbsorbance);
}

std::string_view method_name(InterpolationMethod method) {
  return method == InterpolationMethod::kLinear ? "linear" : "monotone-cubic";
}

InterpolationMethod parse_method(std::string_view text) {
  if (text == "linear") return InterpolationMethod::kLinear;
  if (text == "monotone-cubic" || text == "cubic") return InterpolationMethod::kMonotoneCubic;
  throw DomainError("unknown interpolation method '" + std::string(text) + "'");
}

namespace {

// Tridiagonal solve with partial pivoting (the LAPACK dgtsv scheme).
// `sub`, `diag`, `super` are consumed; the result overwrites `rhs`.
void solve_tridiagonal(std::vector<double>& sub, std::vector<double>& diag,
                       std::vector<double>& super, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  // sub[i] doubles as the second superdiagonal after an interchange.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(diag[i]) >= std::abs(sub[i])) {
      const double fact = sub[i] / diag[i];
      diag[i + 1] -= fact * super[i];
      rhs[i + 1] -= fact * rhs[i];
      sub[i] = 0.0;
    } else {
      const double fact = diag[i] / sub[i];
      diag[i] = sub[i];
      const double temp = diag[i + 1];
      diag[i + 1] = super[i] - fact * temp;
      if (i + 2 < n) {
        sub[i] = super[i + 1];
        super[i + 1] = -fact * sub[i];
      } else {
        sub[i] = 0.0;
      }
      super[i] = temp;
      std::swap(rhs[i], rhs[i + 1]);
      rhs[i + 1] -= fact * rhs[i];
    }
  }
  rhs[n - 1] /= diag[n - 1];
  if (n > 1) rhs[n - 2] = (rhs[n - 2] - super[n - 2] * rhs[n - 1]) / diag[n - 2];
  for (std::size_t i = n - 2; i-- > 0;) {
    rhs[i] = (rhs[i] - super[i] * rhs[i + 1] - sub[i] * rhs[i + 2]) / diag[i];
  }
}

double hyman_limit(double slope, double left, double right) {
  if (left == 0.0 || right == 0.0) return 0.0;
  if (left > 0.0 && right > 0.0) return std::min(std::max(0.0, slope), 3.0 * std::min(left, right));
  if (left < 0.0 && right < 0.0) return std::max(std::min(0.0, slope), 3.0 * std::max(left, right));
  return slope;  // local extremum of the data
}

double hyman_limit_end(double slope, double secant) {
  if (secant == 0.0) return 0.0;
  if (secant > 0.0) return std::min(std::max(0.0, slope), 3.0 * secant);
  return std::max(std::min(0.0, slope), 3.0 * secant);
}

}  // namespace

namespace detail {

std::vector<double> monotone_spline_slopes(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<double> dx(n - 1);
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dx[i] = x[i + 1] - x[i];
    secant[i] = (y[i + 1] - y[i]) / dx[i];
  }
  std::vector<double> slopes(n);
  if (n == 2) {
    slopes[0] = slopes[1] = secant[0];
    return slopes;
  }
  if (n == 3) {
    // not-a-knot with three knots is the interpolating parabola
    const double curvature = (secant[1] - secant[0]) / (x[2] - x[0]);
    for (std::size_t i = 0; i < 3; ++i) {
      slopes[i] = secant[0] + curvature * (2.0 * x[i] - x[0] - x[1]);
    }
  } else {
    std::vector<double> sub(n - 1);
    std::vector<double> diag(n);
    std::vector<double> super(n - 1);
    std::vector<double>& rhs = slopes;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      sub[i - 1] = dx[i];
      diag[i] = 2.0 * (dx[i - 1] + dx[i]);
      super[i] = dx[i - 1];
      rhs[i] = 3.0 * (dx[i] * secant[i - 1] + dx[i - 1] * secant[i]);
    }
    const double span_start = x[2] - x[0];
    diag[0] = dx[1];
    super[0] = span_start;
    rhs[0] = ((dx[0] + 2.0 * span_start) * dx[1] * secant[0] + dx[0] * dx[0] * secant[1]) /
             span_start;
    const double span_end = x[n - 1] - x[n - 3];
    diag[n - 1] = dx[n - 3];
    sub[n - 2] = span_end;
    rhs[n - 1] = (dx[n - 2] * dx[n - 2] * secant[n - 3] +
                  (2.0 * span_end + dx[n - 2]) * dx[n - 3] * secant[n - 2]) /
                 span_end;
    solve_tridiagonal(sub, diag, super, rhs);
  }
  slopes[0] = hyman_limit_end(slopes[0], secant[0]);
  slopes[n - 1] = hyman_limit_end(slopes[n - 1], secant[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    slopes[i] = hyman_limit(slopes[i], secant[i - 1], secant[i]);
  }
  return slopes;
}

}  // namespace detail

Spectrum interpolate(const RawSpectrum& raw, const WavenumberGrid& grid,
                     InterpolationMethod method, std::string id,
                     std::optional<std::string> smiles) {
  const auto& points = raw.points();
  const std::size_t n = points.size();
  std::vector<double> x(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = points[i].first;
    y[i] = points[i].second;
  }
  if (x.back() < grid.start() || x.front() > grid.end()) {
    throw DomainError("raw spectrum [" + util::format_number(x.front()) + ", " +
                      util::format_number(x.back()) + "] does not overlap grid " +
                      grid.describe());
  }

  std::vector<double> slopes;
  if (method == InterpolationMethod::kMonotoneCubic) slopes = detail::monotone_spline_slopes(x, y);

  std::vector<double> values(grid.count());
  for (std::size_t g = 0; g < grid.count(); ++g) {
    const double at = grid.point(g);
    double v = 0.0;
    if (at <= x.front()) {
      v = y.front();
    } else if (at >= x.back()) {
      v = y.back();
    } else {
      const auto upper = std::upper_bound(x.begin(), x.end(), at);
      const std::size_t i = static_cast<std::size_t>(upper - x.begin()) - 1;
      if (at == x[i]) {
        v = y[i];
      } else {
        const double h = x[i + 1] - x[i];
        const double t = (at - x[i]) / h;
        if (method == InterpolationMethod::kLinear) {
          v = y[i] + t * (y[i + 1] - y[i]);
        } else {
          const double t2 = t * t;
          const double t3 = t2 * t;
          v = (2.0 * t3 - 3.0 * t2 + 1.0) * y[i] + (t3 - 2.0 * t2 + t) * h * slopes[i] +
              (-2.0 * t3 + 3.0 * t2) * y[i + 1] + (t3 - t2) * h * slopes[i + 1];
        }
      }
    }
    values[g] = std::max(v, 0.0);
  }
  return Spectrum(grid, std::move(values), raw.mode(), std::move(id), std::move(smiles));
}

Spectrum interpolate(const Spectrum& spectrum, const WavenumberGrid& grid,
                     InterpolationMethod method) {
  const auto values = spectrum.values();
  std::vector<std::pair<double, double>> points(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    points[i] = {spectrum.grid().point(i), values[i]};
  }
  return interpolate(RawSpectrum(std::move(points), spectrum.mode()), grid, method,
                     spectrum.id(), spectrum.smiles());
}

Spectrum l2_normalize(const Spectrum& spectrum) {
  const auto values = spectrum.values();
  // scaled accumulation avoids overflow for very large intensities
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw DomainError("cannot L2-normalize an all-zero spectrum");
  double sum = 0.0;
  for (double v : values) sum += (v / scale) * (v / scale);
  const double norm = scale * std::sqrt(sum);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] / norm;
  return spectrum.with_values(std::move(out), spectrum.mode());
}

}  // namespace ir_agent
