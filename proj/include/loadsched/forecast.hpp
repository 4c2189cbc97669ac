#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "loadsched/scheduler.hpp"

namespace loadsched {

struct SolarCurveParams {
  double duration_s = 14400.0;
  double peak_pu = 1.0;
  std::uint64_t seed = 42;
  double noise_level = 0.1;
  double dt_s = 1.0;
  double noise_knot_s = 300.0;  ///< spacing of the random knots the noise is interpolated from
};

/// Half-sine bell over the duration scaled to peak_pu, multiplied by
/// smooth seeded noise in [1 - noise_level, 1 + noise_level] and floored
/// at zero. Identical seeds give identical series on every platform.
ForecastSeries gen_solar_curve(const SolarCurveParams& params);

/// Error from load_forecast_csv. `row` counts data rows from 1 (header excluded).
class ForecastCsvError : public std::runtime_error {
 public:
  enum class Kind { Io, Header, Malformed, NonUniformSpacing, NegativePower };

  ForecastCsvError(Kind kind, std::size_t row, const std::string& what)
      : std::runtime_error(what), kind_(kind), row_(row) {}

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] std::size_t row() const { return row_; }

 private:
  Kind kind_;
  std::size_t row_;
};

/// Reads a `time_s,power_pu` CSV. Spacing must equal dt_s within 1e-9.
ForecastSeries load_forecast_csv(const std::filesystem::path& path, double dt_s = 1.0);

void write_forecast_csv(const ForecastSeries& forecast, const std::filesystem::path& path);

}  // namespace loadsched
