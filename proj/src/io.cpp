#include "loadsched/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "numfmt.hpp"

namespace loadsched {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::complex<double>> parse_poles(const json& arr, const std::string& where) {
  if (!arr.is_array()) {
    throw ConfigError(where + ": expected an array of [re, im] pairs");
  }
  std::vector<std::complex<double>> poles;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ConfigError(where + ": each pole must be [re, im]");
    }
    poles.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return poles;
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ConfigError(where + ": missing key '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T optional_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) {
    return fallback;
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() ? p : base / p;
}

std::string barrier_names(unsigned mask) {
  std::string s;
  for (unsigned j = 0; j < 4; ++j) {
    if (mask & (1u << j)) {
      if (!s.empty()) {
        s += '|';
      }
      s += 'B';
      s += static_cast<char>('1' + j);
    }
  }
  return s;
}

unsigned parse_barrier_names(std::string_view s) {
  unsigned mask = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == 'B' && s[i + 1] >= '1' && s[i + 1] <= '4') {
      mask |= 1u << static_cast<unsigned>(s[i + 1] - '1');
    }
  }
  return mask;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cols.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    cols.emplace_back();
  }
  return cols;
}

double to_double(const std::string& s, const fs::path& file, std::size_t line) {
  const auto v = detail::parse_double(s);
  if (!v) {
    throw std::runtime_error(file.string() + ":" + std::to_string(line) + ": bad number '" + s +
                             "'");
  }
  return *v;
}

}  // namespace

std::vector<LoadSpec> parse_loads(const json& doc) {
  if (!doc.is_array() || doc.empty()) {
    throw ConfigError("loads: expected a nonempty array of load objects");
  }
  std::vector<LoadSpec> loads;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& obj = doc[i];
    const std::string where = "loads[" + std::to_string(i) + "]";
    if (!obj.is_object()) {
      throw ConfigError(where + ": expected an object");
    }
    LoadSpec spec;
    spec.id = required<int>(obj, "id", where);
    spec.size_pu = required<double>(obj, "size_pu", where);
    spec.poles_on = parse_poles(obj.value("poles_on", json()), where + ".poles_on");
    spec.poles_off = parse_poles(obj.value("poles_off", json()), where + ".poles_off");
    spec.t_on_min_s = required<double>(obj, "t_on_min_s", where);
    spec.t_off_min_s = required<double>(obj, "t_off_min_s", where);
    try {
      validate(spec);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    loads.push_back(std::move(spec));
  }
  return loads;
}

std::vector<LoadSpec> load_loads_json(const fs::path& path) {
  try {
    return parse_loads(read_json(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json loads_to_json(const std::vector<LoadSpec>& loads) {
  auto poles = [](const std::vector<std::complex<double>>& ps) {
    json arr = json::array();
    for (const auto& p : ps) {
      arr.push_back({p.real(), p.imag()});
    }
    return arr;
  };
  json doc = json::array();
  for (const auto& l : loads) {
    doc.push_back({{"id", l.id},
                   {"size_pu", l.size_pu},
                   {"poles_on", poles(l.poles_on)},
                   {"poles_off", poles(l.poles_off)},
                   {"t_on_min_s", l.t_on_min_s},
                   {"t_off_min_s", l.t_off_min_s}});
  }
  return doc;
}

SchedulerConfig RunConfig::scheduler() const {
  SchedulerConfig c;
  c.horizon = horizon;
  c.battery = battery;
  c.workers = workers;
  c.pad_forecast = pad_forecast;
  return c;
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) {
    throw ConfigError("run config: expected a JSON object");
  }
  RunConfig cfg;
  cfg.loads_path = resolve(required<std::string>(doc, "loads_path", "run config"), base_dir);

  if (doc.contains("horizon")) {
    const auto& h = doc["horizon"];
    cfg.horizon.n_steps = optional_or(h, "n_steps", cfg.horizon.n_steps, "horizon");
    cfg.horizon.ctrl_interval_s =
        optional_or(h, "ctrl_interval_s", cfg.horizon.ctrl_interval_s, "horizon");
    cfg.horizon.fine_dt_s = optional_or(h, "fine_dt_s", cfg.horizon.fine_dt_s, "horizon");
  }

  if (doc.contains("battery")) {
    const auto& b = doc["battery"];
    cfg.battery.p_norm = optional_or(b, "p_norm", cfg.battery.p_norm, "battery");
    cfg.battery.s_norm = optional_or(b, "s_norm", cfg.battery.s_norm, "battery");
    cfg.battery.soc_lo = optional_or(b, "soc_lo", cfg.battery.soc_lo, "battery");
    cfg.battery.soc_hi = optional_or(b, "soc_hi", cfg.battery.soc_hi, "battery");
    if (b.contains("c")) {
      const auto c = optional_or(b, "c", std::vector<double>{}, "battery");
      if (c.size() != 4) {
        throw ConfigError("battery: 'c' must hold 4 weights");
      }
      std::copy(c.begin(), c.end(), cfg.battery.c.begin());
    }
    cfg.soc_init = optional_or(b, "soc_init", cfg.soc_init, "battery");
  }
  try {
    validate(cfg.battery);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(cfg.soc_init >= 0.0 && cfg.soc_init <= 1.0)) {
    throw ConfigError("battery: soc_init must be in [0, 1]");
  }

  if (!doc.contains("forecast") || !doc["forecast"].is_object()) {
    throw ConfigError("run config: missing 'forecast' block");
  }
  const auto& f = doc["forecast"];
  const bool has_csv = f.contains("csv_path");
  const bool has_syn = f.contains("synthetic");
  if (has_csv == has_syn) {
    throw ConfigError("forecast: give exactly one of 'csv_path' or 'synthetic'");
  }
  if (has_csv) {
    cfg.forecast_csv = resolve(required<std::string>(f, "csv_path", "forecast"), base_dir);
  } else {
    const auto& s = f["synthetic"];
    SolarCurveParams p;
    p.duration_s = optional_or(s, "duration_s", p.duration_s, "forecast.synthetic");
    p.peak_pu = optional_or(s, "peak_pu", p.peak_pu, "forecast.synthetic");
    p.seed = optional_or(s, "seed", p.seed, "forecast.synthetic");
    p.noise_level = optional_or(s, "noise_level", p.noise_level, "forecast.synthetic");
    p.noise_knot_s = optional_or(s, "noise_knot_s", p.noise_knot_s, "forecast.synthetic");
    p.dt_s = cfg.horizon.fine_dt_s;
    cfg.synthetic = p;
  }
  cfg.pad_forecast = optional_or(f, "pad", cfg.pad_forecast, "forecast");

  cfg.output_dir = resolve(optional_or<std::string>(doc, "output_dir", "out", "run config"), base_dir);
  cfg.workers = optional_or(doc, "workers", cfg.workers, "run config");
  if (cfg.workers < 0) {
    throw ConfigError("run config: workers must be >= 0");
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  try {
    return parse_run_config(read_json(path), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ForecastSeries resolve_forecast(const RunConfig& config) {
  if (config.forecast_csv) {
    return load_forecast_csv(*config.forecast_csv, config.horizon.fine_dt_s);
  }
  return gen_solar_curve(*config.synthetic);
}

RunSummary summarize(const ScheduleSolution& solution, const BatterySpec& battery,
                     const HorizonConfig& horizon) {
  const SimTrace& tr = solution.trace;
  RunSummary s;
  s.n_steps = tr.steps.size();
  s.n_samples = tr.size();
  s.soc_init = solution.soc_init;
  s.total_wall_time_s = solution.total_wall_time_s;
  if (!tr.soc.empty()) {
    const auto [lo, hi] = std::minmax_element(tr.soc.begin(), tr.soc.end());
    s.min_soc = *lo;
    s.max_soc = *hi;
    s.final_soc = tr.soc.back();
  }
  for (std::size_t m = 0; m < tr.size(); ++m) {
    const double abs_e = std::abs(tr.e_pu[m]);
    s.max_abs_e = std::max(s.max_abs_e, abs_e);
    s.violations.power += battery.p_norm * abs_e >= 1.0 ? 1 : 0;
    s.violations.soc_negative += tr.soc[m] < 0.0 ? 1 : 0;
    s.violations.soc_high += tr.soc[m] > battery.soc_hi ? 1 : 0;
    s.violations.soc_low += tr.soc[m] < battery.soc_lo ? 1 : 0;
  }
  s.max_normalized_power = battery.p_norm * s.max_abs_e;

  std::vector<double> times;
  for (const auto& st : tr.steps) {
    for (unsigned j = 0; j < 4; ++j) {
      s.steps_with_active_barrier[j] += (st.active_barriers >> j) & 1u;
    }
    s.padded_steps += st.padded ? 1 : 0;
    s.total_candidates += st.candidate_count;
    s.max_candidates = std::max(s.max_candidates, st.candidate_count);
    s.min_candidates = s.min_candidates == 0 ? st.candidate_count
                                             : std::min(s.min_candidates, st.candidate_count);
    s.max_step_wall_time_s = std::max(s.max_step_wall_time_s, st.wall_time_s);
    s.cardinality_bound_ok = s.cardinality_bound_ok &&
                             cardinality_bound_check(st.candidate_count, tr.n_loads, horizon.n_steps);
    times.push_back(st.wall_time_s);
  }
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    s.median_step_wall_time_s =
        times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  }
  return s;
}

json to_json(const RunSummary& s) {
  return {{"n_steps", s.n_steps},
          {"n_samples", s.n_samples},
          {"soc_init", s.soc_init},
          {"min_soc", s.min_soc},
          {"max_soc", s.max_soc},
          {"final_soc", s.final_soc},
          {"max_abs_e", s.max_abs_e},
          {"max_normalized_power", s.max_normalized_power},
          {"violations",
           {{"power", s.violations.power},
            {"soc_negative", s.violations.soc_negative},
            {"soc_high", s.violations.soc_high},
            {"soc_low", s.violations.soc_low}}},
          {"steps_with_active_barrier", s.steps_with_active_barrier},
          {"padded_steps", s.padded_steps},
          {"total_wall_time_s", s.total_wall_time_s},
          {"median_step_wall_time_s", s.median_step_wall_time_s},
          {"max_step_wall_time_s", s.max_step_wall_time_s},
          {"candidate_count",
           {{"min", s.min_candidates}, {"max", s.max_candidates}, {"total", s.total_candidates}}},
          {"cardinality_bound_ok", s.cardinality_bound_ok}};
}

void write_trace(const ScheduleSolution& solution, const BatterySpec& battery,
                 const HorizonConfig& horizon, const fs::path& output_dir) {
  using detail::format_double;
  const SimTrace& tr = solution.trace;
  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create " + output_dir.string() + ": " + ec.message());
  }
  auto open = [](const fs::path& p) {
    std::ofstream out(p);
    if (!out) {
      throw std::runtime_error("cannot write " + p.string());
    }
    return out;
  };

  {
    const fs::path p = output_dir / "trace.csv";
    auto out = open(p);
    out << "t_s,forecast_pu";
    for (int i = 0; i < tr.n_loads; ++i) {
      out << ",p_" << (i + 1) << "_pu";
    }
    out << ",total_p_pu,e_pu,battery_power_pu,soc\n";
    for (std::size_t m = 0; m < tr.size(); ++m) {
      out << format_double(tr.t_s[m]) << ',' << format_double(tr.forecast_pu[m]);
      for (int i = 0; i < tr.n_loads; ++i) {
        out << ',' << format_double(tr.load_pu[static_cast<std::size_t>(i)][m]);
      }
      out << ',' << format_double(tr.total_pu[m]) << ',' << format_double(tr.e_pu[m]) << ','
          << format_double(tr.e_pu[m]) << ',' << format_double(tr.soc[m]) << '\n';
    }
    if (!out) {
      throw std::runtime_error("write failed: " + p.string());
    }
  }
  {
    const fs::path p = output_dir / "steps.csv";
    auto out = open(p);
    out << "step,t_s";
    for (int i = 0; i < tr.n_loads; ++i) {
      out << ",w_" << (i + 1);
    }
    out << ",candidate_count,cost,active_barriers,padded,step_wall_time_s\n";
    for (const auto& st : tr.steps) {
      out << st.step << ',' << format_double(st.t_s);
      for (auto w : st.applied) {
        out << ',' << static_cast<int>(w);
      }
      out << ',' << st.candidate_count << ',' << format_double(st.cost) << ','
          << barrier_names(st.active_barriers) << ',' << (st.padded ? 1 : 0) << ','
          << format_double(st.wall_time_s) << '\n';
    }
    if (!out) {
      throw std::runtime_error("write failed: " + p.string());
    }
  }
  {
    const fs::path p = output_dir / "summary.json";
    auto out = open(p);
    out << to_json(summarize(solution, battery, horizon)).dump(2) << '\n';
    if (!out) {
      throw std::runtime_error("write failed: " + p.string());
    }
  }
}

SimTrace read_trace(const fs::path& output_dir) {
  SimTrace tr;
  const fs::path trace_path = output_dir / "trace.csv";
  std::ifstream in(trace_path);
  if (!in) {
    throw std::runtime_error("cannot open " + trace_path.string());
  }
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  if (header.size() < 6) {
    throw std::runtime_error(trace_path.string() + ": unexpected header");
  }
  tr.n_loads = static_cast<int>(header.size()) - 6;
  tr.load_pu.assign(static_cast<std::size_t>(tr.n_loads), {});
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cols = split(line);
    if (cols.size() != header.size()) {
      throw std::runtime_error(trace_path.string() + ":" + std::to_string(lineno) +
                               ": wrong column count");
    }
    std::size_t c = 0;
    tr.t_s.push_back(to_double(cols[c++], trace_path, lineno));
    tr.forecast_pu.push_back(to_double(cols[c++], trace_path, lineno));
    for (auto& p : tr.load_pu) {
      p.push_back(to_double(cols[c++], trace_path, lineno));
    }
    tr.total_pu.push_back(to_double(cols[c++], trace_path, lineno));
    tr.e_pu.push_back(to_double(cols[c++], trace_path, lineno));
    ++c;  // battery power duplicates e
    tr.soc.push_back(to_double(cols[c++], trace_path, lineno));
  }

  const fs::path steps_path = output_dir / "steps.csv";
  std::ifstream sin(steps_path);
  if (!sin) {
    throw std::runtime_error("cannot open " + steps_path.string());
  }
  std::getline(sin, line);
  lineno = 1;
  while (std::getline(sin, line)) {
    ++lineno;
    const auto cols = split(line);
    if (cols.size() != static_cast<std::size_t>(tr.n_loads) + 7) {
      throw std::runtime_error(steps_path.string() + ":" + std::to_string(lineno) +
                               ": wrong column count");
    }
    StepRecord st;
    std::size_t c = 0;
    st.step = std::stoll(cols[c++]);
    st.t_s = to_double(cols[c++], steps_path, lineno);
    for (int i = 0; i < tr.n_loads; ++i) {
      st.applied.push_back(static_cast<std::uint8_t>(std::stoi(cols[c++])));
    }
    st.candidate_count = std::stoull(cols[c++]);
    st.cost = to_double(cols[c++], steps_path, lineno);
    st.active_barriers = parse_barrier_names(cols[c++]);
    st.padded = cols[c++] == "1";
    st.wall_time_s = to_double(cols[c++], steps_path, lineno);
    tr.steps.push_back(std::move(st));
  }
  return tr;
}

}  // namespace loadsched
