#include "loadsched/forecast.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "numfmt.hpp"

namespace loadsched {

namespace {

// Uniform in [-1, 1) from raw engine bits; std distributions are not
// specified bit-for-bit across standard libraries.
double unit_symmetric(std::mt19937_64& rng) {
  const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * r - 1.0;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cols.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return cols;
}

}  // namespace

ForecastSeries gen_solar_curve(const SolarCurveParams& params) {
  if (!(params.duration_s > 0.0) || !(params.dt_s > 0.0)) {
    throw std::invalid_argument("gen_solar_curve: duration_s and dt_s must be positive");
  }
  if (!(params.noise_level >= 0.0 && params.noise_level < 1.0)) {
    throw std::invalid_argument("gen_solar_curve: noise_level must be in [0, 1)");
  }
  if (!(params.noise_knot_s > 0.0)) {
    throw std::invalid_argument("gen_solar_curve: noise_knot_s must be positive");
  }
  const auto len = static_cast<std::size_t>(std::llround(params.duration_s / params.dt_s));
  const auto n_knots = static_cast<std::size_t>(std::ceil(params.duration_s / params.noise_knot_s)) + 2;

  std::mt19937_64 rng(params.seed);
  std::vector<double> knots(n_knots);
  for (auto& k : knots) {
    k = unit_symmetric(rng);
  }

  ForecastSeries out;
  out.dt_s = params.dt_s;
  out.values.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double t = static_cast<double>(k) * params.dt_s;
    const double bell = params.peak_pu * std::sin(std::numbers::pi * t / params.duration_s);
    double factor = 1.0;
    if (params.noise_level > 0.0) {
      const double u = t / params.noise_knot_s;
      const auto i = static_cast<std::size_t>(u);
      const double frac = u - static_cast<double>(i);
      // Cosine interpolation keeps the noise smooth between knots.
      const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * frac));
      const double noise = (1.0 - w) * knots[i] + w * knots[i + 1];
      factor = 1.0 + params.noise_level * noise;
    }
    out.values[k] = std::max(0.0, bell * factor);
  }
  return out;
}

ForecastSeries load_forecast_csv(const std::filesystem::path& path, double dt_s) {
  using Kind = ForecastCsvError::Kind;
  std::ifstream in(path);
  if (!in) {
    throw ForecastCsvError(Kind::Io, 0, "cannot open forecast file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ForecastCsvError(Kind::Header, 0, path.string() + ": missing header");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != "time_s,power_pu") {
    throw ForecastCsvError(Kind::Header, 0,
                           path.string() + ": expected header 'time_s,power_pu', got '" + line + "'");
  }

  ForecastSeries out;
  out.dt_s = dt_s;
  std::size_t row = 0;
  double prev_t = 0.0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    ++row;
    const auto cols = split_csv(line);
    std::optional<double> t;
    std::optional<double> p;
    if (cols.size() == 2) {
      t = detail::parse_double(cols[0]);
      p = detail::parse_double(cols[1]);
    }
    if (!t || !p || !std::isfinite(*t) || !std::isfinite(*p)) {
      throw ForecastCsvError(Kind::Malformed, row,
                             path.string() + ": malformed row " + std::to_string(row) + ": '" +
                                 line + "'");
    }
    if (row > 1 && std::abs((*t - prev_t) - dt_s) > 1e-9) {
      std::ostringstream msg;
      msg << path.string() << ": non-uniform spacing at row " << row << " (step " << (*t - prev_t)
          << " s, expected " << dt_s << " s)";
      throw ForecastCsvError(Kind::NonUniformSpacing, row, msg.str());
    }
    if (*p < 0.0) {
      throw ForecastCsvError(Kind::NegativePower, row,
                             path.string() + ": negative power at row " + std::to_string(row));
    }
    prev_t = *t;
    out.values.push_back(*p);
  }
  return out;
}

void write_forecast_csv(const ForecastSeries& forecast, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "time_s,power_pu\n";
  for (std::size_t k = 0; k < forecast.values.size(); ++k) {
    out << detail::format_double(static_cast<double>(k) * forecast.dt_s) << ','
        << detail::format_double(forecast.values[k]) << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

}  // namespace loadsched
