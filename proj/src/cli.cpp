#include "porosity/cli.hpp"

#include "porosity/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace porosity {

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  unsigned workers = default_workers();
  std::string out;
  std::vector<std::string> tol;
};

void add_common(CLI::App* cmd, Common& c, bool with_tol) {
  cmd->add_option("--seed", c.seed, "Seed of every sampled estimator");
  cmd->add_option("--samples", c.samples, "Sample budget (pairs or points per check)");
  cmd->add_option("--workers", c.workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Output file");
  if (with_tol) cmd->add_option("--tol", c.tol, "Tolerance override name=value (exact, sampled, lip, stretch, identity)");
}

void check_output(const std::string& path) {
  if (path.empty()) return;
  const auto dir = std::filesystem::path(path).parent_path();
  if (!dir.empty() && !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory " + dir.string() + " does not exist");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << content;
}

Tolerances apply_tol(const std::vector<std::string>& overrides, Tolerances t) {
  Json j = Json::object();
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--tol expects name=value, got " + kv);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
    } catch (const std::exception&) {
      throw ConfigError("--tol: bad value in " + kv);
    }
    j[kv.substr(0, eq)] = v;
  }
  return parse_tolerances(j, t);
}

void apply_common(Scenario& s, const Common& c) {
  if (c.seed) s.seed = *c.seed;
  if (c.samples) {
    s.budgets.lip_pairs = s.budgets.direction_pairs = s.budgets.check_pairs = s.budgets.check_points = *c.samples;
  }
  s.workers = c.workers;
  s.tol = apply_tol(c.tol, s.tol);
}

void echo_scenario(const Scenario& s, std::ostream& out) {
  out << "scenario " << (s.name.empty() ? "(unnamed)" : s.name) << ": seed=" << s.seed
      << " lip_pairs=" << s.budgets.lip_pairs << " direction_pairs=" << s.budgets.direction_pairs
      << " check_pairs=" << s.budgets.check_pairs << " check_points=" << s.budgets.check_points
      << " probes=" << s.budgets.probes << " workers=" << s.workers << '\n';
}

Json lip_json(const LipEstimate& lip) {
  Json j{{"value", lip.value}, {"kind", to_string(lip.kind)}, {"samples", lip.samples}};
  j["seed"] = lip.kind == LipKind::exact ? Json(nullptr) : Json(lip.seed);
  return j;
}

Json scenario_header(const Scenario& s) {
  return {{"scenario", s.name},
          {"space", to_json(s.space())},
          {"body", to_json(s.body())},
          {"map", to_json(s.map)},
          {"a", s.a},
          {"b", s.b},
          {"eps", s.eps},
          {"seed", s.seed},
          {"tampered", s.tamper.any()},
          {"witness_kind", s.kind == WitnessKind::constant ? "constant" : "perturbation"}};
}

int certify(const Scenario& s, const std::string& out_path, std::ostream& out) {
  echo_scenario(s, out);
  Json params = scenario_header(s);
  Json doc;
  bool pass = false;
  try {
    const ScenarioResult r = run_scenario(s);
    params["lip_f_on_U"] = lip_json(r.lip_f_on_U);
    if (r.witness) {
      params["witness"] = to_json(r.witness->params);
      params["direction_min_quotient"] = r.witness->direction.min_quotient;
      params["radius_worst_quotient"] = r.witness->radius.worst_quotient;
    }
    doc = certificate_json(r.certificate, params);
    pass = r.certificate.overall();
    for (const auto& c : r.certificate.checks) {
      out << (c.pass ? "  pass " : "  FAIL ") << c.name << " value=" << c.value << ' ' << to_string(c.relation)
          << ' ' << c.bound << '\n';
    }
  } catch (const StageError& e) {
    doc = certificate_json(Certificate{}, params);
    doc["error"] = {{"stage", e.stage()}, {"message", e.what()}};
    out << "  construction failed at stage " << e.stage() << ": " << e.what() << '\n';
  }
  out << "overall: " << (pass ? "pass" : "fail") << '\n';
  if (!out_path.empty()) write_file(out_path, doc.dump(2) + "\n");
  return pass ? kExitPass : kExitFail;
}

struct GeometryConfig {
  NormSpec space;
  ConvexBody body;
  MapExpr map;
};

GeometryConfig read_geometry(const std::string& path) {
  const Json j = read_json(path);
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  for (const char* key : {"space", "body", "map"}) {
    if (!j.contains(key)) throw ConfigError(path + ": missing \"" + key + "\"");
  }
  NormSpec space = parse_space(j.at("space"));
  ConvexBody body = parse_body(j.at("body"), space);
  MapExpr map = parse_map(j.at("map"), body);
  return {space, body, map};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Porosity witnesses for non-expansive maps on convex domains"};
  app.require_subcommand(1);

  Common cc;
  std::string certify_config;
  auto* cmd_certify = app.add_subcommand("certify", "Build the witness for a scenario and write its certificate");
  cmd_certify->add_option("--config", certify_config, "Scenario JSON")->required();
  add_common(cmd_certify, cc, true);

  Common dc;
  auto* cmd_demo = app.add_subcommand("demo", "Run the bundled l2-disc scenario end to end");
  add_common(cmd_demo, dc, true);

  Common fc;
  std::string field_config;
  int grid = 8;
  double radius = 0.05;
  std::vector<double> thresholds{0.9, 0.99};
  std::string report_path;
  auto* cmd_field = app.add_subcommand("field", "Write the local Lipschitz field Lip(f, x, r) as CSV");
  cmd_field->add_option("--config", field_config, "JSON with space, body and map")->required();
  cmd_field->add_option("--grid", grid, "Grid points per axis")->check(CLI::PositiveNumber);
  cmd_field->add_option("--radius", radius, "Radius r of Lip(f, x, r)")->check(CLI::PositiveNumber);
  cmd_field->add_option("--threshold", thresholds, "Residual-report thresholds");
  cmd_field->add_option("--report", report_path, "Residual report JSON");
  add_common(cmd_field, fc, false);

  Common vc;
  double lo = 0.0;
  double hi = 0.0;
  auto* cmd_cover = app.add_subcommand("cover", "Write an interval cover of [lo, hi]");
  cmd_cover->add_option("--lo", lo, "Lower end")->required();
  cmd_cover->add_option("--hi", hi, "Upper end")->required();
  cmd_cover->add_option("--out", vc.out, "Output JSON");

  Common sc;
  std::string sweep_config;
  int n_points = 4;
  int n_radii = 2;
  double sweep_lo = 0.05;
  double sweep_hi = 0.95;
  auto* cmd_sweep = app.add_subcommand("sweep", "Classify f on the U_{i,j} family against an interval cover");
  cmd_sweep->add_option("--config", sweep_config, "JSON with space, body and map")->required();
  cmd_sweep->add_option("--points", n_points, "Centers x_i")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--radii", n_radii, "Radii 1/2, 1/3, ...")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--lo", sweep_lo, "Cover lower end");
  cmd_sweep->add_option("--hi", sweep_hi, "Cover upper end");
  add_common(cmd_sweep, sc, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (cmd_certify->parsed()) {
      check_output(cc.out);
      Scenario s = parse_scenario(read_json(certify_config));
      apply_common(s, cc);
      return certify(s, cc.out, out);
    }
    if (cmd_demo->parsed()) {
      check_output(dc.out);
      Scenario s = demo_scenario();
      apply_common(s, dc);
      return certify(s, dc.out, out);
    }
    if (cmd_field->parsed()) {
      check_output(fc.out);
      check_output(report_path);
      const GeometryConfig g = read_geometry(field_config);
      const SamplePlan plan{fc.samples.value_or(2000), fc.seed.value_or(42), fc.workers, std::nullopt};
      out << "field: seed=" << plan.seed << " samples=" << plan.count << " grid=" << grid << " radius=" << radius
          << " workers=" << plan.workers << '\n';
      LipField field;
      try {
        field = lip_field(g.map, g.body, radius, GridStrategy{grid}, plan);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      std::ostringstream csv;
      write_field_csv(field, csv);
      if (!fc.out.empty()) {
        write_file(fc.out, csv.str());
      } else {
        out << csv.str();
      }
      const ResidualReport report = residual_report(field, g.space, thresholds);
      for (const auto& t : report.thresholds) {
        out << "  s=" << t.threshold << " fraction=" << t.fraction << " components=" << t.components
            << " grid_dense=" << (t.grid_dense ? "true" : "false") << '\n';
      }
      if (!report_path.empty()) write_file(report_path, to_json(report).dump(2) + "\n");
      return kExitPass;
    }
    if (cmd_cover->parsed()) {
      check_output(vc.out);
      IntervalCover cover;
      try {
        cover = cover_intervals(lo, hi);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      out << "cover: " << cover.intervals.size() << " intervals on [" << lo << ", " << hi << "]\n";
      const std::string doc = to_json(cover).dump(2) + "\n";
      if (!vc.out.empty()) {
        write_file(vc.out, doc);
      } else {
        out << doc;
      }
      return kExitPass;
    }
    if (cmd_sweep->parsed()) {
      check_output(sc.out);
      const GeometryConfig g = read_geometry(sweep_config);
      const SamplePlan plan{sc.samples.value_or(10000), sc.seed.value_or(42), sc.workers, std::nullopt};
      IntervalCover cover;
      try {
        cover = cover_intervals(sweep_lo, sweep_hi);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      out << "sweep: seed=" << plan.seed << " samples=" << plan.count << " points=" << n_points
          << " radii=" << n_radii << " workers=" << plan.workers << '\n';
      const SubsetFamily fam = subset_family(g.body, n_points, n_radii, plan.seed);
      const SweepReport report = sweep_family(g.map, g.body, fam, cover, plan);
      Json doc = to_json(report, fam);
      doc["cover"] = {{"lo", sweep_lo}, {"hi", sweep_hi}, {"count", cover.intervals.size()}};
      if (!sc.out.empty()) {
        write_file(sc.out, doc.dump(2) + "\n");
      } else {
        out << doc.dump(2) << '\n';
      }
      return kExitPass;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StageError& e) {
    err << "error at stage " << e.stage() << ": " << e.what() << '\n';
    return kExitFail;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitConfig;
}

}  // namespace porosity
