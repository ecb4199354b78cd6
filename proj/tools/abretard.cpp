// abretard: command-line front end.
//
//   abretard run <config>        phase report for one configuration
//   abretard scan <config>       regime scan, CSV
//   abretard validate [config]   numerical self-tests
//   abretard squid --response-time <s>
//
// Exit codes: 0 success, 1 invariant failure, 2 config error, 3 nonconvergence.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "abretard/phase.hpp"
#include "config.hpp"
#include "self_test.hpp"

namespace {

using namespace abretard;
using namespace abretard::cli;

enum Exit { kOk = 0, kInvariant = 1, kConfig = 2, kNonConvergence = 3 };

struct Options {
  std::string config;
  std::string out;
  double quadrature_scale = 1.0;
  std::string units;
  double response_time = 0.0;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunConfig load(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? RunConfig{} : load_config(opt.config);
  if (!opt.units.empty()) cfg.units = *parse_unit_system(opt.units);
  return cfg;
}

// Writes to a temporary sibling and renames, so a failed run leaves no
// partial file behind.
void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text;
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_file(path, text);
    std::cerr << "wrote " << path << "\n";
  }
}

std::string report(const RunConfig& cfg, const Scenario& s, const PhaseResult& r) {
  std::ostringstream o;
  const Window w = s.resolved_window();
  const bool si = cfg.units == UnitSystem::SI;
  auto time = [&](double t) { return si ? units::time_to_si(t) : t; };
  const char* tu = si ? " s" : "";
  o << "units               = " << (si ? "si" : "natural") << "\n"
    << "regime              = " << to_string(r.regime) << "\n"
    << "window              = [" << fmt(time(w.t_i)) << ", " << fmt(time(w.t_f)) << "]" << tu << "\n"
    << "phi_path1           = " << fmt(r.phi_path1) << "\n"
    << "phi_path2           = " << fmt(r.phi_path2) << "\n"
    << "delta_phi           = " << fmt(r.delta_phi) << "\n"
    << "term_e_dot_AS       = " << fmt(r.term_e_dot_AS) << "\n"
    << "term_S_dot_Ae       = " << fmt(r.term_S_dot_Ae) << "\n"
    << "phase_standard      = " << fmt(r.standard) << "\n";
  if (r.factor)
    o << "factor              = " << fmt(*r.factor) << "\n"
      << "factor_error        = " << fmt(r.factor_error) << "\n";
  else
    o << "factor              = undefined (standard phase is zero)\n";
  o << "reciprocity_residual = " << fmt(reciprocity_residual(r)) << "\n"
    << "p_cos               = " << fmt(r.p_cos) << "\n"
    << "p_sin               = " << fmt(r.p_sin) << "\n";
  return o.str();
}

std::string scan_csv(const RegimeCurve& curve) {
  bool any_failed = false;
  for (const auto& p : curve.points) any_failed = any_failed || p.error.has_value();
  std::ostringstream o;
  o << "D,D_over_c_dt,factor,delta_phi,term_e_AS,term_S_Ae" << (any_failed ? ",status" : "") << "\n";
  for (const auto& p : curve.points) {
    if (p.error) {
      o << fmt(p.distance) << "," << fmt(p.distance_over_window) << ",nan,nan,nan,nan,failed\n";
      continue;
    }
    o << fmt(p.distance) << "," << fmt(p.distance_over_window) << "," << fmt(p.factor) << "," << fmt(p.delta_phi)
      << "," << fmt(p.term_e_AS) << "," << fmt(p.term_S_Ae) << (any_failed ? ",ok" : "") << "\n";
  }
  return o.str();
}

int cmd_run(const Options& opt) {
  const RunConfig cfg = load(opt);
  const Scenario s = to_scenario(cfg, opt.quadrature_scale);
  const PhaseResult r = phase_full(s);
  emit(report(cfg, s, r), opt.out.empty() ? cfg.output.report : opt.out);
  if (!cfg.output.csv.empty()) {
    // Single row in the scan schema, D being the nearest source-path distance.
    RegimePoint p;
    p.distance = abretard::detail::source_path_extent(s).first;
    p.distance_over_window = p.distance / s.resolved_window().length();
    if (r.factor)
      p.factor = *r.factor;
    else
      p.error = "factor undefined";
    p.delta_phi = r.delta_phi;
    p.term_e_AS = r.term_e_dot_AS;
    p.term_S_Ae = r.term_S_dot_Ae;
    emit(scan_csv(RegimeCurve{{p}}), cfg.output.csv);
  }
  return kOk;
}

int cmd_scan(const Options& opt) {
  const RunConfig cfg = load(opt);
  const Scenario s = to_scenario(cfg, opt.quadrature_scale);
  if (!std::holds_alternative<CurrentLoop>(s.source))
    throw ConfigError("config field 'source.kind': scan requires a current loop");
  std::vector<std::string> warnings;
  const auto distances = scan_distances(cfg, s, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const RegimeCurve curve = regime_scan(s, distances);
  int failures = 0;
  for (const auto& p : curve.points)
    if (p.error) {
      ++failures;
      std::cerr << "error: " << *p.error << "\n";
    }
  emit(scan_csv(curve), opt.out.empty() ? cfg.output.csv : opt.out);
  if (failures == static_cast<int>(curve.points.size())) return kNonConvergence;
  if (!factor_nonincreasing(curve)) {
    std::cerr << "invariant failure: factor increases with distance beyond the quadrature error\n";
    return kInvariant;
  }
  return kOk;
}

int cmd_validate(const Options& opt) {
  const RunConfig cfg = load(opt);
  const auto checks = run_self_tests(cfg, opt.quadrature_scale);
  std::ostringstream o;
  bool ok = true;
  for (const auto& c : checks) {
    ok = ok && c.passed;
    o << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << fmt(c.value) << " (threshold " << fmt(c.threshold)
      << ")" << (c.note.empty() ? "" : "  [" + c.note + "]") << "\n";
  }
  o << (ok ? "all self-tests passed\n" : "self-tests FAILED\n");
  emit(o.str(), opt.out);
  return ok ? kOk : kInvariant;
}

int cmd_squid(const Options& opt) {
  const double d = squid_feasibility(opt.response_time);
  std::ostringstream o;
  o << "response_time = " << fmt(opt.response_time) << " s\n"
    << "light_travel_distance = " << fmt(d) << " m\n"
    << "a source closer than this cannot be resolved as retarded by the detector\n";
  emit(o.str(), opt.out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retarded Aharonov-Bohm phase calculator"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Write the output to this file instead of stdout");
    sub->add_option("--quadrature-scale", opt.quadrature_scale, "Multiply quadrature panel counts by this factor")
        ->check(CLI::PositiveNumber);
    sub->add_option("--units", opt.units, "Unit system of the config values")->check(CLI::IsMember({"si", "natural"}));
  };

  auto* run = app.add_subcommand("run", "Compute the phase report for one configuration");
  run->add_option("config", opt.config, "JSON config file")->required();
  common(run);
  auto* scan = app.add_subcommand("scan", "Scan the source distance and write a CSV");
  scan->add_option("config", opt.config, "JSON config file")->required();
  common(scan);
  auto* validate = app.add_subcommand("validate", "Run numerical self-tests");
  validate->add_option("config", opt.config, "JSON config file (defaults if omitted)");
  common(validate);
  auto* squid = app.add_subcommand("squid", "Light-travel distance for a detector response time");
  squid->add_option("--response-time", opt.response_time, "Response time in seconds")->required();
  squid->add_option("--out", opt.out, "Write the output to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(opt);
    if (*scan) return cmd_scan(opt);
    if (*validate) return cmd_validate(opt);
    return cmd_squid(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NonConvergenceError& e) {
    std::cerr << "nonconvergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
}
