#include "porosity/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

namespace porosity {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
}

void only_keys(const Json& j, const std::string& what, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw ConfigError(what + ": unknown key \"" + it.key() + "\"");
  }
}

const Json& field(const Json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) throw ConfigError(what + ": missing \"" + key + "\"");
  return j.at(key);
}

double number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(what + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(what + ": expected a finite number");
  return v;
}

double number_at(const Json& j, const std::string& key, const std::string& what) {
  return number(field(j, key, what), what + "." + key);
}

std::size_t count_at(const Json& j, const std::string& key, const std::string& what) {
  const Json& v = field(j, key, what);
  if (!v.is_number_unsigned()) throw ConfigError(what + "." + key + ": expected a nonnegative integer");
  return v.get<std::size_t>();
}

Vector vector_of(const Json& j, const std::string& what, int dim) {
  if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
  if (dim >= 0 && static_cast<int>(j.size()) != dim) {
    throw ConfigError(what + ": expected " + std::to_string(dim) + " entries");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

std::vector<Vector> vectors_of(const Json& j, const std::string& what, int dim) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty array of points");
  std::vector<Vector> out;
  for (const auto& x : j) out.push_back(vector_of(x, what, dim));
  return out;
}

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json mat_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    a.push_back(row);
  }
  return a;
}

// the library's own precondition failures surface as config errors
template <typename Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

NormSpec parse_space(const Json& j) {
  require_object(j, "space");
  only_keys(j, "space", {"dim", "p"});
  const std::size_t dim = count_at(j, "dim", "space");
  const Json& p = field(j, "p", "space");
  double pv = 0.0;
  if (p.is_string() && (p == "inf" || p == "infinity")) {
    pv = kInfinity;
  } else {
    pv = number(p, "space.p");
  }
  return guarded("space", [&] { return NormSpec(static_cast<int>(dim), pv); });
}

ConvexBody parse_body(const Json& j, const NormSpec& space) {
  require_object(j, "body");
  const Json& shape = field(j, "shape", "body");
  if (!shape.is_string()) throw ConfigError("body.shape: expected a string");
  const std::string s = shape.get<std::string>();
  const int d = space.dim();
  return guarded("body", [&] {
    if (s == "ball") {
      only_keys(j, "body", {"shape", "center", "radius"});
      return ConvexBody::ball(space, vector_of(field(j, "center", "body"), "body.center", d),
                              number_at(j, "radius", "body"));
    }
    if (s == "box") {
      only_keys(j, "body", {"shape", "lower", "upper"});
      return ConvexBody::box(space, vector_of(field(j, "lower", "body"), "body.lower", d),
                             vector_of(field(j, "upper", "body"), "body.upper", d));
    }
    if (s == "simplex") {
      only_keys(j, "body", {"shape", "vertices"});
      return ConvexBody::simplex(space, vectors_of(field(j, "vertices", "body"), "body.vertices", d));
    }
    if (s == "hull") {
      only_keys(j, "body", {"shape", "points"});
      return ConvexBody::hull(space, vectors_of(field(j, "points", "body"), "body.points", d));
    }
    throw ConfigError("body.shape: unknown shape \"" + s + "\"");
  });
}

MapExpr parse_map(const Json& j, const ConvexBody& body) {
  require_object(j, "map");
  const Json& kind = field(j, "kind", "map");
  if (!kind.is_string()) throw ConfigError("map.kind: expected a string");
  const std::string k = kind.get<std::string>();
  const int d = body.dim();
  return guarded("map", [&]() -> MapExpr {
    if (k == "identity") {
      only_keys(j, "map", {"kind"});
      return MapExpr::identity();
    }
    if (k == "constant") {
      only_keys(j, "map", {"kind", "value"});
      return MapExpr::constant(vector_of(field(j, "value", "map"), "map.value", d), body);
    }
    if (k == "scale_toward") {
      only_keys(j, "map", {"kind", "anchor", "factor"});
      return MapExpr::scale_toward(vector_of(field(j, "anchor", "map"), "map.anchor", d),
                                   number_at(j, "factor", "map"), body);
    }
    if (k == "affine" || k == "rotation") {
      Matrix m;
      if (k == "rotation") {
        only_keys(j, "map", {"kind", "angle", "offset"});
        if (d != 2) throw ConfigError("map: rotation needs dimension 2");
        const double t = number_at(j, "angle", "map");
        m.resize(2, 2);
        m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
      } else {
        only_keys(j, "map", {"kind", "matrix", "offset", "asserted_bound"});
        const Json& rows = field(j, "matrix", "map");
        if (!rows.is_array() || static_cast<int>(rows.size()) != d) {
          throw ConfigError("map.matrix: expected " + std::to_string(d) + " rows");
        }
        m.resize(d, d);
        for (int i = 0; i < d; ++i) m.row(i) = vector_of(rows[i], "map.matrix", d).transpose();
      }
      Vector offset = j.contains("offset") ? vector_of(j.at("offset"), "map.offset", d) : Vector::Zero(d);
      std::optional<double> bound;
      if (j.contains("asserted_bound")) bound = number_at(j, "asserted_bound", "map");
      return MapExpr::affine(std::move(m), std::move(offset), body, SamplePlan{}, bound);
    }
    if (k == "convex_combo") {
      only_keys(j, "map", {"kind", "weights", "children"});
      const Vector w = vector_of(field(j, "weights", "map"), "map.weights", -1);
      const Json& ch = field(j, "children", "map");
      if (!ch.is_array()) throw ConfigError("map.children: expected an array");
      std::vector<MapExpr> children;
      for (const auto& c : ch) children.push_back(parse_map(c, body));
      return MapExpr::convex_combo(std::vector<double>(w.data(), w.data() + w.size()), std::move(children));
    }
    if (k == "compose") {
      only_keys(j, "map", {"kind", "outer", "inner"});
      return MapExpr::compose(parse_map(field(j, "outer", "map"), body), parse_map(field(j, "inner", "map"), body));
    }
    if (k == "half_square") {
      only_keys(j, "map", {"kind"});
      return MapExpr::half_square(body);
    }
    throw ConfigError("map.kind: unknown kind \"" + k + "\"");
  });
}

Tolerances parse_tolerances(const Json& j, Tolerances t) {
  require_object(j, "tol");
  only_keys(j, "tol", {"exact", "sampled", "lip", "stretch", "identity"});
  auto set = [&](const char* key, double& slot) {
    if (!j.contains(key)) return;
    slot = number_at(j, key, "tol");
    if (slot < 0.0) throw ConfigError(std::string("tol.") + key + ": must be nonnegative");
  };
  set("exact", t.exact);
  set("sampled", t.sampled);
  set("lip", t.lip);
  set("stretch", t.stretch);
  set("identity", t.identity);
  return t;
}

Tamper parse_tamper(const Json& j) {
  require_object(j, "tamper");
  only_keys(j, "tamper",
            {"use_base", "eps_scale", "r_scale", "sigma", "b", "e_scale", "perturb_sigma", "lip_f", "gamma_e_scale",
             "gamma_e_star_scale", "gamma_eps", "gamma_leak", "probe_scale"});
  Tamper t;
  if (j.contains("use_base")) {
    if (!j.at("use_base").is_boolean()) throw ConfigError("tamper.use_base: expected a boolean");
    t.use_base = j.at("use_base").get<bool>();
  }
  auto opt = [&](const char* key, std::optional<double>& slot) {
    if (j.contains(key)) slot = number_at(j, key, "tamper");
  };
  opt("eps_scale", t.eps_scale);
  opt("r_scale", t.r_scale);
  opt("sigma", t.sigma);
  opt("b", t.b);
  opt("e_scale", t.e_scale);
  opt("perturb_sigma", t.perturb_sigma);
  opt("lip_f", t.lip_f);
  opt("gamma_e_scale", t.gamma_e_scale);
  opt("gamma_e_star_scale", t.gamma_e_star_scale);
  opt("gamma_eps", t.gamma_eps);
  opt("gamma_leak", t.gamma_leak);
  opt("probe_scale", t.probe_scale);
  return t;
}

Scenario parse_scenario(const Json& j) {
  require_object(j, "scenario");
  only_keys(j, "scenario",
            {"name", "space", "body", "map", "U", "a", "b", "eps", "seed", "workers", "budgets", "tol", "witness",
             "x0", "e", "probe_pair", "tamper"});
  const NormSpec space = parse_space(field(j, "space", "scenario"));
  const ConvexBody body = parse_body(field(j, "body", "scenario"), space);
  const MapExpr map = parse_map(field(j, "map", "scenario"), body);
  const Json& u = field(j, "U", "scenario");
  require_object(u, "U");
  only_keys(u, "U", {"center", "radius"});
  const Vector uc = vector_of(field(u, "center", "U"), "U.center", space.dim());
  const double ur = number_at(u, "radius", "U");
  Scenario s(map, guarded("U", [&] { return OpenSubset(uc, ur, body); }));
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("name: expected a string");
    s.name = j.at("name").get<std::string>();
  }
  s.a = number_at(j, "a", "scenario");
  s.b = number_at(j, "b", "scenario");
  s.eps = number_at(j, "eps", "scenario");
  if (!(s.a > 0.0 && s.a < 1.0 && s.b > 0.0 && s.b < 1.0)) throw ConfigError("scenario: a and b must lie in (0, 1)");
  if (j.contains("seed")) s.seed = count_at(j, "seed", "scenario");
  if (j.contains("workers")) s.workers = static_cast<unsigned>(std::max<std::size_t>(1, count_at(j, "workers", "scenario")));
  if (j.contains("budgets")) {
    const Json& b = j.at("budgets");
    require_object(b, "budgets");
    only_keys(b, "budgets", {"lip_pairs", "direction_pairs", "check_pairs", "check_points", "probes"});
    if (b.contains("lip_pairs")) s.budgets.lip_pairs = count_at(b, "lip_pairs", "budgets");
    if (b.contains("direction_pairs")) s.budgets.direction_pairs = count_at(b, "direction_pairs", "budgets");
    if (b.contains("check_pairs")) s.budgets.check_pairs = count_at(b, "check_pairs", "budgets");
    if (b.contains("check_points")) s.budgets.check_points = count_at(b, "check_points", "budgets");
    if (b.contains("probes")) s.budgets.probes = count_at(b, "probes", "budgets");
  }
  if (j.contains("tol")) s.tol = parse_tolerances(j.at("tol"));
  if (j.contains("witness")) {
    const Json& w = j.at("witness");
    if (w == "perturbation") {
      s.kind = WitnessKind::perturbation;
    } else if (w == "constant") {
      s.kind = WitnessKind::constant;
    } else {
      throw ConfigError("witness: expected \"perturbation\" or \"constant\"");
    }
  }
  if (j.contains("x0") != j.contains("e")) throw ConfigError("scenario: x0 and e must be given together");
  if (j.contains("x0")) {
    s.x0 = vector_of(j.at("x0"), "x0", space.dim());
    s.e = vector_of(j.at("e"), "e", space.dim());
  }
  if (j.contains("probe_pair")) {
    const auto pts = vectors_of(j.at("probe_pair"), "probe_pair", space.dim());
    if (pts.size() != 2) throw ConfigError("probe_pair: expected two points");
    s.probe_pair = std::make_pair(pts[0], pts[1]);
  }
  if (j.contains("tamper")) s.tamper = parse_tamper(j.at("tamper"));
  return s;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Json to_json(const NormSpec& space) {
  Json j{{"dim", space.dim()}};
  if (space.is_inf()) {
    j["p"] = "inf";
  } else {
    j["p"] = space.p();
  }
  return j;
}

Json to_json(const ConvexBody& body) {
  return std::visit(overloaded{
                        [](const BallShape& s) -> Json {
                          return {{"shape", "ball"}, {"center", vec_json(s.center)}, {"radius", s.radius}};
                        },
                        [](const BoxShape& s) -> Json {
                          return {{"shape", "box"}, {"lower", vec_json(s.lower)}, {"upper", vec_json(s.upper)}};
                        },
                        [](const SimplexShape& s) -> Json {
                          Json v = Json::array();
                          for (const auto& x : s.vertices) v.push_back(vec_json(x));
                          return {{"shape", "simplex"}, {"vertices", v}};
                        },
                        [](const HullShape& s) -> Json {
                          Json v = Json::array();
                          for (const auto& x : s.points) v.push_back(vec_json(x));
                          return {{"shape", "hull"}, {"points", v}};
                        },
                    },
                    body.shape());
}

Json to_json(const MapExpr& f) {
  return std::visit(overloaded{
                        [](const IdentityNode&) -> Json { return {{"kind", "identity"}}; },
                        [](const ConstantNode& n) -> Json { return {{"kind", "constant"}, {"value", vec_json(n.value)}}; },
                        [](const AffineNode& n) -> Json {
                          return {{"kind", "affine"}, {"matrix", mat_json(n.matrix)}, {"offset", vec_json(n.offset)}};
                        },
                        [](const ScaleTowardNode& n) -> Json {
                          return {{"kind", "scale_toward"}, {"anchor", vec_json(n.anchor)}, {"factor", n.factor}};
                        },
                        [](const ConvexComboNode& n) -> Json {
                          Json ch = Json::array();
                          for (const auto& c : n.children) ch.push_back(to_json(c));
                          return {{"kind", "convex_combo"}, {"weights", n.weights}, {"children", ch}};
                        },
                        [](const ComposeNode& n) -> Json {
                          return {{"kind", "compose"}, {"outer", to_json(n.outer)}, {"inner", to_json(n.inner)}};
                        },
                        [](const PerturbedNode& n) -> Json {
                          return {{"kind", "perturbed"}, {"base", to_json(n.base)}, {"params", to_json(n.params)}};
                        },
                        [](const HalfSquareNode&) -> Json { return {{"kind", "half_square"}}; },
                    },
                    f.node().value);
}

Json to_json(const WitnessParams& p) {
  return {{"a", p.a},         {"b", p.b},         {"x0", vec_json(p.x0)},       {"e", vec_json(p.e)},
          {"e_star", vec_json(p.e_star.coeffs)},  {"r", p.r},                   {"sigma", p.sigma},
          {"eps0", p.eps0},   {"eps", p.eps},     {"alpha", p.alpha}};
}

Json to_json(const Check& c) {
  Json j{{"name", c.name},
         {"value", c.value},
         {"bound", c.bound},
         {"relation", to_string(c.relation)},
         {"tol", c.tol},
         {"margin", c.margin},
         {"pass", c.pass},
         {"method", to_string(c.method)},
         {"samples", c.samples}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  return j;
}

Json to_json(const IntervalCover& cover) {
  Json iv = Json::array();
  for (const auto& [a, b] : cover.intervals) iv.push_back(Json::array({a, b}));
  return {{"lo", cover.lo},
          {"hi", cover.hi},
          {"count", cover.intervals.size()},
          {"intervals", iv},
          {"note", "finite truncation of a countable family"}};
}

Json to_json(const ResidualReport& report) {
  Json t = Json::array();
  for (const auto& s : report.thresholds) {
    t.push_back({{"threshold", s.threshold},
                 {"fraction", s.fraction},
                 {"above", s.above},
                 {"components", s.components},
                 {"grid_dense", s.grid_dense}});
  }
  return {{"link_radius", report.link_radius}, {"thresholds", t}, {"note", ResidualReport::kDensityNote}};
}

Json to_json(const SweepReport& report, const SubsetFamily& fam) {
  Json pts = Json::array();
  for (const auto& x : fam.points) pts.push_back(vec_json(x));
  Json cells = Json::array();
  for (const auto& c : report.cells) {
    Json j{{"point", c.point},
           {"radius", fam.radii[c.radius]},
           {"lip", c.lip},
           {"kind", to_string(c.kind)},
           {"class", to_string(c.cls)},
           {"boundary", c.boundary}};
    j["interval"] = c.interval ? Json(*c.interval) : Json(nullptr);
    cells.push_back(j);
  }
  return {{"points", pts}, {"radii", fam.radii}, {"cells", cells}, {"note", SweepReport::kNote}};
}

Json certificate_json(const Certificate& cert, const Json& params) {
  Json checks = Json::array();
  for (const auto& c : cert.checks) checks.push_back(to_json(c));
  Json info = Json::object();
  for (const auto& [k, v] : cert.info) info[k] = v;
  return {{"checks", checks}, {"overall", cert.overall()}, {"params", params}, {"info", info}};
}

void write_field_csv(const LipField& field, std::ostream& out) {
  if (field.grid.empty()) throw Error("write_field_csv: empty field");
  const Eigen::Index d = field.grid.front().size();
  std::vector<std::size_t> order(field.grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    const auto& u = field.grid[x];
    const auto& v = field.grid[y];
    return std::lexicographical_compare(u.data(), u.data() + u.size(), v.data(), v.data() + v.size());
  });
  std::ostringstream s;
  s << std::setprecision(17);
  for (Eigen::Index k = 0; k < d; ++k) s << 'x' << k << ',';
  s << "lip\n";
  for (std::size_t i : order) {
    for (Eigen::Index k = 0; k < d; ++k) s << field.grid[i][k] << ',';
    s << field.values[i] << '\n';
  }
  out << s.str();
}

}  // namespace porosity
