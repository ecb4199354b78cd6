#pragma once

// Run configuration for the abretard CLI: a JSON document with tables
// "units", "source", "interferometer", "electron", "window", "numerics",
// "scan" and "output". Unknown keys are rejected. Values are read in the
// selected unit system and converted to natural units once, here.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "abretard/geometry.hpp"
#include "abretard/phase.hpp"
#include "abretard/units.hpp"

namespace abretard::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class UnitSystem { Natural, SI };

inline std::optional<UnitSystem> parse_unit_system(const std::string& s) {
  if (s == "natural") return UnitSystem::Natural;
  if (s == "si" || s == "SI") return UnitSystem::SI;
  return std::nullopt;
}

struct SourceConfig {
  std::string kind = "loop";  // "loop" | "solenoid"
  Vec3 center{0, 0, 0};
  Vec3 normal{0, 0, 1};
  double radius = 1.0;
  double current = 1.0;
  int segments = 256;
  double flux = 1.0;
  bool static_source = true;
};

struct InterferometerConfig {
  Vec3 center{0, 0, 0.5};
  Vec3 normal{0, 0, 1};
  double width = 4.0;
  double height = 4.0;
  // Explicit paths override the rectangle when both are given.
  std::vector<Vec3> path1;
  std::vector<Vec3> path2;
};

struct ElectronConfig {
  double charge = 1.0;
  double speed = 1e-4;
  double t_start = 0.0;
};

struct NumericsConfig {
  int time_order = 16;
  int time_panels = 2;
  double tolerance = 1e-7;
  int flux_subdivisions = 64;
  int splitting_panels = 64;
};

struct ScanConfig {
  std::vector<double> distances;  // explicit D values
  std::vector<double> ratios;     // D / (c window)
  std::optional<double> ratio_min;
  std::optional<double> ratio_max;
  int count = 0;
};

struct OutputConfig {
  std::string report;
  std::string csv;
};

// Everything in the units named by `units`; see to_natural().
struct RunConfig {
  UnitSystem units = UnitSystem::Natural;
  SourceConfig source;
  InterferometerConfig interferometer;
  ElectronConfig electron;
  std::optional<Window> window;
  NumericsConfig numerics;
  ScanConfig scan;
  OutputConfig output;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Best-effort line of `"key"` following `"table"` in the raw text.
inline std::string locate(const std::string& text, const std::string& table, const std::string& key) {
  std::size_t from = 0;
  if (!table.empty()) {
    from = text.find('"' + table + '"');
    if (from == std::string::npos) return {};
  }
  if (!key.empty()) {
    const std::size_t at = text.find('"' + key + '"', from);
    if (at == std::string::npos) return {};
    from = at;
  }
  return " (" + line_col(text, from) + ")";
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& table, const std::string& key, const std::string& what) const {
    const std::string field = table.empty() ? key : (key.empty() ? table : table + "." + key);
    throw ConfigError("config field '" + field + "'" + locate(text_, table, key) + ": " + what);
  }

  void only_keys(const nlohmann::json& obj, const std::string& table, std::initializer_list<const char*> keys) const {
    if (!obj.is_object()) fail(table, "", "expected a table (JSON object)");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) fail(table, k, "unknown key");
  }

  double number(const nlohmann::json& obj, const std::string& table, const char* key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(table, key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(table, key, "must be finite");
    return x;
  }

  double positive(const nlohmann::json& obj, const std::string& table, const char* key, double fallback) const {
    const double x = number(obj, table, key, fallback);
    if (!(x > 0.0)) fail(table, key, "must be positive");
    return x;
  }

  int integer(const nlohmann::json& obj, const std::string& table, const char* key, int fallback, int min) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail(table, key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < min || x > 100'000'000) fail(table, key, "must be an integer >= " + std::to_string(min));
    return static_cast<int>(x);
  }

  bool boolean(const nlohmann::json& obj, const std::string& table, const char* key, bool fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) fail(table, key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const nlohmann::json& obj, const std::string& table, const char* key,
                     const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(table, key, "expected a string");
    return v.get<std::string>();
  }

  Vec3 vec(const nlohmann::json& v, const std::string& table, const std::string& key) const {
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const auto& x) { return x.is_number(); }))
      fail(table, key, "expected an array of 3 numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  Vec3 vec(const nlohmann::json& obj, const std::string& table, const char* key, Vec3 fallback) const {
    if (!obj.contains(key)) return fallback;
    return vec(obj.at(key), table, key);
  }

  Vec3 unit_vec(const nlohmann::json& obj, const std::string& table, const char* key, Vec3 fallback) const {
    const Vec3 v = vec(obj, table, key, fallback);
    if (norm(v) == 0.0) fail(table, key, "direction must be nonzero");
    return normalized(v);
  }

  std::vector<Vec3> points(const nlohmann::json& obj, const std::string& table, const char* key) const {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() < 2) fail(table, key, "expected an array of at least 2 points");
    std::vector<Vec3> out;
    for (const auto& p : v) out.push_back(vec(p, table, key));
    return out;
  }

  std::vector<double> numbers(const nlohmann::json& obj, const std::string& table, const char* key) const {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    if (!v.is_array()) fail(table, key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) fail(table, key, "expected an array of numbers");
      out.push_back(x.get<double>());
      if (!(out.back() > 0.0) || !std::isfinite(out.back())) fail(table, key, "entries must be positive");
    }
    return out;
  }

 private:
  const std::string& text_;
};

}  // namespace detail

// Parses and validates a config document. An empty or whitespace-only
// document yields the built-in defaults.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) return cfg;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config syntax error at " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  const detail::Reader rd(text);
  rd.only_keys(doc, "", {"units", "source", "interferometer", "electron", "window", "numerics", "scan", "output"});

  const std::string units = rd.string(doc, "", "units", "natural");
  const auto system = parse_unit_system(units);
  if (!system) rd.fail("", "units", "expected \"natural\" or \"si\"");
  cfg.units = *system;

  if (doc.contains("source")) {
    const auto& s = doc["source"];
    rd.only_keys(s, "source",
                 {"kind", "center", "normal", "radius", "current", "segments", "flux", "axis_point", "axis_dir", "static"});
    auto& src = cfg.source;
    src.kind = rd.string(s, "source", "kind", src.kind);
    if (src.kind != "loop" && src.kind != "solenoid") rd.fail("source", "kind", "expected \"loop\" or \"solenoid\"");
    if (src.kind == "loop") {
      for (const char* k : {"flux", "axis_point", "axis_dir"})
        if (s.contains(k)) rd.fail("source", k, "not a loop parameter");
      src.center = rd.vec(s, "source", "center", src.center);
      src.normal = rd.unit_vec(s, "source", "normal", src.normal);
      src.radius = rd.positive(s, "source", "radius", src.radius);
      src.current = rd.number(s, "source", "current", src.current);
      src.segments = rd.integer(s, "source", "segments", src.segments, 8);
    } else {
      for (const char* k : {"center", "normal", "radius", "current", "segments"})
        if (s.contains(k)) rd.fail("source", k, "not a solenoid parameter");
      src.center = rd.vec(s, "source", "axis_point", src.center);
      src.normal = rd.unit_vec(s, "source", "axis_dir", src.normal);
      src.flux = rd.number(s, "source", "flux", src.flux);
    }
    src.static_source = rd.boolean(s, "source", "static", src.static_source);
    if (src.kind == "solenoid" && !src.static_source)
      rd.fail("source", "static", "an ideal solenoid is only supported as a static source");
  }

  if (doc.contains("interferometer")) {
    const auto& s = doc["interferometer"];
    rd.only_keys(s, "interferometer", {"center", "normal", "width", "height", "path1", "path2"});
    auto& ifm = cfg.interferometer;
    ifm.center = rd.vec(s, "interferometer", "center", ifm.center);
    ifm.normal = rd.unit_vec(s, "interferometer", "normal", ifm.normal);
    ifm.width = rd.positive(s, "interferometer", "width", ifm.width);
    ifm.height = rd.positive(s, "interferometer", "height", ifm.height);
    ifm.path1 = rd.points(s, "interferometer", "path1");
    ifm.path2 = rd.points(s, "interferometer", "path2");
    if (ifm.path1.empty() != ifm.path2.empty())
      rd.fail("interferometer", ifm.path1.empty() ? "path2" : "path1", "path1 and path2 must be given together");
    if (!ifm.path1.empty() && (!(ifm.path1.front() == ifm.path2.front()) || !(ifm.path1.back() == ifm.path2.back())))
      rd.fail("interferometer", "path2", "paths must share start and end points");
  }

  if (doc.contains("electron")) {
    const auto& s = doc["electron"];
    rd.only_keys(s, "electron", {"charge", "speed", "t_start"});
    auto& el = cfg.electron;
    el.charge = rd.number(s, "electron", "charge", el.charge);
    el.speed = rd.positive(s, "electron", "speed", el.speed);
    el.t_start = rd.number(s, "electron", "t_start", el.t_start);
    const double c = cfg.units == UnitSystem::SI ? units::kSpeedOfLight : 1.0;
    if (!(el.speed < c)) rd.fail("electron", "speed", "must be below the speed of light");
  }

  if (doc.contains("window")) {
    const auto& s = doc["window"];
    rd.only_keys(s, "window", {"t_i", "t_f"});
    if (!s.contains("t_i") || !s.contains("t_f")) rd.fail("window", "", "needs both t_i and t_f");
    cfg.window = Window{rd.number(s, "window", "t_i", 0.0), rd.number(s, "window", "t_f", 0.0)};
    if (!(cfg.window->t_f > cfg.window->t_i)) rd.fail("window", "t_f", "must exceed t_i");
  }

  if (doc.contains("numerics")) {
    const auto& s = doc["numerics"];
    rd.only_keys(s, "numerics", {"time_order", "time_panels", "tolerance", "flux_subdivisions", "splitting_panels"});
    auto& n = cfg.numerics;
    n.time_order = rd.integer(s, "numerics", "time_order", n.time_order, 1);
    n.time_panels = rd.integer(s, "numerics", "time_panels", n.time_panels, 1);
    n.tolerance = rd.positive(s, "numerics", "tolerance", n.tolerance);
    n.flux_subdivisions = rd.integer(s, "numerics", "flux_subdivisions", n.flux_subdivisions, 1);
    n.splitting_panels = rd.integer(s, "numerics", "splitting_panels", n.splitting_panels, 1);
  }

  if (doc.contains("scan")) {
    const auto& s = doc["scan"];
    rd.only_keys(s, "scan", {"distances", "ratios", "ratio_min", "ratio_max", "count"});
    auto& sc = cfg.scan;
    sc.distances = rd.numbers(s, "scan", "distances");
    sc.ratios = rd.numbers(s, "scan", "ratios");
    if (s.contains("ratio_min")) sc.ratio_min = rd.positive(s, "scan", "ratio_min", 0.0);
    if (s.contains("ratio_max")) sc.ratio_max = rd.positive(s, "scan", "ratio_max", 0.0);
    sc.count = rd.integer(s, "scan", "count", 0, 0);
    const int forms = !sc.distances.empty() + !sc.ratios.empty() + (sc.ratio_min || sc.ratio_max || sc.count);
    if (forms > 1) rd.fail("scan", "", "give exactly one of distances, ratios, or ratio_min/ratio_max/count");
    if ((sc.ratio_min || sc.ratio_max || sc.count) && !(sc.ratio_min && sc.ratio_max && sc.count >= 2))
      rd.fail("scan", "count", "log spacing needs ratio_min, ratio_max and count >= 2");
    if (sc.ratio_min && sc.ratio_max && !(*sc.ratio_max > *sc.ratio_min))
      rd.fail("scan", "ratio_max", "must exceed ratio_min");
  }

  if (doc.contains("output")) {
    const auto& s = doc["output"];
    rd.only_keys(s, "output", {"report", "csv"});
    cfg.output.report = rd.string(s, "output", "report", "");
    cfg.output.csv = rd.string(s, "output", "csv", "");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// Converts every dimensional quantity between unit systems. Lengths stay in
// meters in both.
inline RunConfig convert(const RunConfig& in, UnitSystem to) {
  if (in.units == to) return in;
  RunConfig out = in;
  out.units = to;
  const bool to_nat = to == UnitSystem::Natural;
  auto time = [&](double t) { return to_nat ? units::time_to_natural(t) : units::time_to_si(t); };
  out.source.current = to_nat ? units::current_to_natural(in.source.current) : units::current_to_si(in.source.current);
  out.source.flux = to_nat ? units::flux_to_natural(in.source.flux) : units::flux_to_si(in.source.flux);
  out.electron.charge =
      to_nat ? units::charge_to_natural(in.electron.charge) : units::charge_to_si(in.electron.charge);
  out.electron.speed = to_nat ? units::speed_to_natural(in.electron.speed) : units::speed_to_si(in.electron.speed);
  out.electron.t_start = time(in.electron.t_start);
  if (in.window) out.window = Window{time(in.window->t_i), time(in.window->t_f)};
  return out;
}

inline NumericsConfig scaled(NumericsConfig n, double scale) {
  auto s = [&](int x) { return std::max(1, static_cast<int>(std::lround(x * scale))); };
  n.time_panels = s(n.time_panels);
  n.flux_subdivisions = s(n.flux_subdivisions);
  n.splitting_panels = s(n.splitting_panels);
  return n;
}

// Scenario in natural units.
inline Scenario to_scenario(const RunConfig& given, double quadrature_scale = 1.0) {
  const RunConfig cfg = convert(given, UnitSystem::Natural);
  const auto& src = cfg.source;
  CurrentSource source = src.kind == "loop"
                             ? CurrentSource{CurrentLoop{src.center, src.normal, src.radius, src.current, src.segments}}
                             : CurrentSource{IdealSolenoid{src.center, src.normal, src.flux}};
  const auto& ifm = cfg.interferometer;
  Interferometer paths = ifm.path1.empty()
                             ? rectangle_interferometer(ifm.center, ifm.normal, ifm.width, ifm.height)
                             : Interferometer{Polyline(ifm.path1), Polyline(ifm.path2)};
  const NumericsConfig n = scaled(cfg.numerics, quadrature_scale);
  Scenario s{source,
             paths.path1,
             paths.path2,
             cfg.electron.charge,
             cfg.electron.speed,
             cfg.electron.t_start,
             cfg.window,
             src.static_source,
             PhaseNumerics{n.time_order, n.time_panels, n.tolerance}};
  s.validate();
  return s;
}

// Scan distances (natural units), sorted and deduplicated; duplicates are
// reported through `warnings`.
inline std::vector<double> scan_distances(const RunConfig& given, const Scenario& base,
                                          std::vector<std::string>& warnings) {
  const RunConfig cfg = convert(given, UnitSystem::Natural);
  const double window = base.resolved_window().length();
  std::vector<double> d = cfg.scan.distances;
  for (const double r : cfg.scan.ratios) d.push_back(r * window);
  if (cfg.scan.count >= 2 && cfg.scan.ratio_min && cfg.scan.ratio_max)
    for (const double r : log_spaced(*cfg.scan.ratio_min, *cfg.scan.ratio_max, cfg.scan.count)) d.push_back(r * window);
  std::sort(d.begin(), d.end());
  const auto before = d.size();
  d.erase(std::unique(d.begin(), d.end()), d.end());
  if (d.size() != before)
    warnings.push_back("removed " + std::to_string(before - d.size()) + " duplicate scan distance(s)");
  if (d.size() < 2) throw ConfigError("config field 'scan': at least 2 distinct distances are required");
  return d;
}

}  // namespace abretard::cli
