// Acceptance run: one pass/fail line per criterion, exit 0 iff all pass.

#include "cli_harness.hpp"

#include "porosity/certify.hpp"
#include "porosity/scenario.hpp"
#include "porosity/witness.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace porosity;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------- scenarios

struct Case {
  std::string name;
  NormSpec space;
  ConvexBody body;
  std::function<MapExpr(const ConvexBody&)> map;
  Vector u_center;
  double u_radius;
  double a;
  double b;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  auto add = [&](std::string name, NormSpec space, ConvexBody body, std::function<MapExpr(const ConvexBody&)> f,
                 Vector uc, double ur, double a, double b) {
    out.push_back({std::move(name), std::move(space), std::move(body), std::move(f), std::move(uc), ur, a, b});
  };
  {
    const NormSpec s = NormSpec::l2(2);
    add("l2 ball d2, scale 0.801", s, ConvexBody::ball(s, Vector::Zero(2), 1.0),
        [](const ConvexBody& c) { return MapExpr::scale_toward(Vector::Zero(2), 0.801, c); }, Vector::Zero(2), 0.5,
        0.8, 0.801);
  }
  {
    const NormSpec s = NormSpec::l1(3);
    const Vector mid = Vector::Constant(3, 0.5);
    add("l1 box d3, scale 0.503", s, ConvexBody::box(s, Vector::Zero(3), Vector::Ones(3)),
        [mid](const ConvexBody& c) { return MapExpr::scale_toward(mid, 0.503, c); }, mid, 0.4, 0.5, 0.505);
  }
  {
    const NormSpec s = NormSpec::linf(2);
    add("linf simplex d2, affine diag(0.503, 0.2)", s,
        ConvexBody::simplex(s, {vec({0, 0}), vec({1, 0}), vec({0, 1})}),
        [](const ConvexBody& c) { return MapExpr::affine(diag({0.503, 0.2}), Vector::Zero(2), c); },
        vec({0.25, 0.25}), 0.2, 0.5, 0.505);
  }
  {
    const NormSpec s = NormSpec::l2(4);
    const Vector mid = Vector::Constant(4, 0.5);
    add("l2 box d4, scale 0.8007", s, ConvexBody::box(s, Vector::Zero(4), Vector::Ones(4)),
        [mid](const ConvexBody& c) { return MapExpr::scale_toward(mid, 0.8007, c); }, mid, 0.4, 0.8, 0.801);
  }
  {
    const NormSpec s = NormSpec::l1(1);
    add("l1 ball d1, scale 0.504", s, ConvexBody::ball(s, Vector::Zero(1), 1.0),
        [](const ConvexBody& c) { return MapExpr::scale_toward(Vector::Zero(1), 0.504, c); }, vec({0.2}), 0.5, 0.5,
        0.505);
  }
  {
    const NormSpec s = NormSpec::linf(3);
    add("linf ball d3, affine diag(0.801, 0.5, -0.3)", s, ConvexBody::ball(s, Vector::Zero(3), 1.0),
        [](const ConvexBody& c) { return MapExpr::affine(diag({0.801, 0.5, -0.3}), Vector::Zero(3), c); },
        Vector::Zero(3), 0.6, 0.8, 0.801);
  }
  {
    const NormSpec s = NormSpec::l2(3);
    const Vector centroid = Vector::Constant(3, 0.25);
    add("l2 simplex d3, scale 0.502", s,
        ConvexBody::simplex(s, {vec({0, 0, 0}), vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})}),
        [centroid](const ConvexBody& c) { return MapExpr::scale_toward(centroid, 0.502, c); }, centroid, 0.2, 0.5,
        0.505);
  }
  return out;
}

Scenario make_scenario(const Case& c, std::uint64_t seed) {
  Scenario s(c.map(c.body), OpenSubset(c.u_center, c.u_radius, c.body));
  s.name = c.name;
  s.a = c.a;
  s.b = c.b;
  // well inside eps0 = sigma r / 2 for any radius the ladder can pick
  s.eps = witness_constants(c.a, c.b, c.u_radius).sigma * c.u_radius / 64.0;
  s.seed = seed;
  s.tol.sampled = 0.0;
  return s;
}

struct ScenarioRuns {
  std::vector<std::pair<std::string, ScenarioResult>> results;
  std::vector<std::string> errors;
  double seconds = 0.0;
};

ScenarioRuns run_all() {
  ScenarioRuns out;
  const auto t0 = std::chrono::steady_clock::now();
  std::uint64_t seed = 1000;
  for (const auto& c : cases()) {
    try {
      out.results.emplace_back(c.name, run_scenario(make_scenario(c, seed++)));
    } catch (const std::exception& e) {
      out.errors.push_back(c.name + ": " + e.what());
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

const Check* need(const Certificate& c, const std::string& name, Outcome& o, const std::string& scenario) {
  const Check* k = c.find(name);
  if (!k) {
    o.pass = false;
    o.detail += " [" + scenario + ": missing " + name + "]";
  }
  return k;
}

void expect(bool ok, Outcome& o, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += " [" + what + "]";
  }
}

Outcome witness_suite(const ScenarioRuns& runs) {
  Outcome o;
  std::set<int> norms;
  std::set<std::string> shapes;
  for (const auto& e : runs.errors) expect(false, o, e);
  expect(runs.results.size() >= 6, o, "fewer than 6 scenarios");
  for (const auto& [name, r] : runs.results) {
    const Certificate& c = r.certificate;
    const auto& p = r.witness->params;
    expect(c.overall(), o, name + ": certificate fails");
    for (const char* n : {"witness.sup_distance.analytic", "witness.sup_distance.sampled"}) {
      if (const Check* k = need(c, n, o, name)) expect(k->value <= p.eps, o, name + ": " + n);
    }
    if (const Check* k = need(c, "witness.lip.sampled", o, name)) {
      expect(k->value <= 1.0 + 1e-9, o, name + ": Lip(g)");
      expect(k->samples >= 10000, o, name + ": pair budget");
    }
    if (const Check* k = need(c, "witness.stretch", o, name)) {
      expect(k->value >= p.a * (1.0 + p.sigma / 4.0) - 1e-12, o, name + ": stretch");
    }
    expect(p.a * (1.0 + p.sigma / 8.0) > p.b, o, name + ": hole arithmetic");
    if (const Check* k = need(c, "hole.exclusion", o, name)) expect(k->pass && k->tol == 0.0, o, name + ": hole");
  }
  for (const auto& c : cases()) {
    norms.insert(c.space.is_inf() ? 0 : static_cast<int>(c.space.p()));
    const auto& sh = c.body.shape();
    shapes.insert(std::holds_alternative<BallShape>(sh) ? "ball" : std::holds_alternative<BoxShape>(sh) ? "box" : "simplex");
  }
  expect(norms.size() == 3 && shapes.size() == 3, o, "norm/shape coverage");
  expect(runs.seconds < 120.0, o, "runtime");
  o.detail = std::to_string(runs.results.size()) + " scenarios in " + fmt(runs.seconds) + " s" + o.detail;
  return o;
}

Outcome gamma_bounds(const ScenarioRuns& runs) {
  Outcome o;
  double worst_ratio = 0.0;
  for (const auto& [name, r] : runs.results) {
    const auto& p = r.witness->params;
    const Certificate& c = r.certificate;
    if (const Check* k = need(c, "gamma.lipschitz", o, name)) {
      expect(k->value <= 3.0 * p.sigma * (1.0 + 1e-9), o, name + ": Lip(gamma)");
      worst_ratio = std::max(worst_ratio, k->value / (3.0 * p.sigma));
    }
    if (const Check* k = need(c, "gamma.sup_norm", o, name)) expect(k->value <= p.eps, o, name + ": sup gamma");
    if (const Check* k = need(c, "gamma.support", o, name)) {
      expect(k->value == 0.0 && k->tol == 0.0, o, name + ": support");
    }
  }
  expect(!runs.results.empty(), o, "no scenarios");
  o.detail = "max Lip(gamma)/(3 sigma) = " + fmt(worst_ratio) + o.detail;
  return o;
}

// ---------------------------------------------------------- interval algebra

Outcome interval_sweep() {
  Outcome o;
  Rng gen(20240601);
  std::size_t accepted = 0;
  std::size_t drawn = 0;
  while (accepted < 10000 && drawn < 10000000) {
    ++drawn;
    const double a = gen.uniform(0.01, 0.99);
    const double b = a + gen.uniform() * std::min(a / 16.0, 1.0 - a);
    if (!(b > a) || !check_interval(a, b)) continue;
    ++accepted;
    const double sigma = 16.0 * (b - a) / a;
    if (!(sigma < 1.0) || !(b * (1.0 + 3.0 * sigma) < 1.0) || !(2.0 * b - a > b)) {
      expect(false, o, "a=" + fmt(a) + " b=" + fmt(b));
    }
    const auto k = witness_constants(a, b, 1.0);
    expect(std::abs(k.sigma - sigma) <= 1e-15 * sigma, o, "sigma mismatch at a=" + fmt(a));
  }
  expect(accepted == 10000, o, "not enough admissible pairs");
  o.detail = std::to_string(accepted) + " admissible pairs of " + std::to_string(drawn) + " drawn" + o.detail;
  return o;
}

Outcome cover_sweep() {
  Outcome o;
  const IntervalCover cover = cover_intervals(0.05, 0.95);
  for (const auto& [a, b] : cover.intervals) expect(check_interval(a, b), o, "interval fails check");
  std::size_t missed = 0;
  std::size_t points = 0;
  for (long k = 0; k <= 9000; ++k) {
    const double x = 0.05 + static_cast<double>(k) * 1e-4;
    ++points;
    if (!cover.covers(x)) ++missed;
  }
  expect(missed == 0, o, std::to_string(missed) + " uncovered points");
  o.detail = std::to_string(cover.intervals.size()) + " intervals, " + std::to_string(points) + " sweep points" + o.detail;
  return o;
}

// ------------------------------------------------------------ constant maps

Outcome constant_map() {
  Outcome o;
  const NormSpec s = NormSpec::l2(2);
  const ConvexBody disc = ConvexBody::ball(s, Vector::Zero(2), 1.0);
  Scenario sc(MapExpr::constant(vec({0.25, -0.1}), disc), OpenSubset(Vector::Zero(2), 0.5, disc));
  sc.a = 0.8;
  sc.b = 0.801;
  sc.eps = 0.02;
  sc.kind = WitnessKind::constant;
  sc.budgets.probes = 20;
  sc.tol.identity = 1e-12;
  const ScenarioResult r = run_scenario(sc);
  const Certificate& c = r.certificate;
  expect(c.overall(), o, "certificate fails");
  double identity_err = 0.0;
  if (const Check* k = need(c, "constant.identity", o, "constant")) {
    identity_err = std::abs(k->value - k->bound);
    expect(identity_err <= 1e-12, o, "identity");
  }
  if (const Check* k = need(c, "constant.probes", o, "constant")) {
    expect(k->value >= k->bound, o, "separation floor");
    expect(k->samples == 20, o, "probe count");
  }
  o.detail = "identity error " + fmt(identity_err) + ", 20 probes" + o.detail;
  return o;
}

// ------------------------------------------------------- Lipschitz estimator

double exact_norm(const Matrix& m, const NormSpec& s) {
  if (s.is_inf()) return m.cwiseAbs().rowwise().sum().maxCoeff();
  if (s.p() == 1.0) return m.cwiseAbs().colwise().sum().maxCoeff();
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

Outcome estimator_oracle() {
  Outcome o;
  Rng gen(77);
  double worst_ratio = 1.0;
  double worst_excess = -1.0;
  int cases_run = 0;
  for (int dim = 1; dim <= 4; ++dim) {
    for (const NormSpec& s : {NormSpec::l1(dim), NormSpec::l2(dim), NormSpec::linf(dim)}) {
      for (int rep = 0; rep < 3; ++rep) {
        Matrix m(dim, dim);
        for (int i = 0; i < dim; ++i) {
          for (int j = 0; j < dim; ++j) m(i, j) = gen.normal();
        }
        m *= 0.9 / exact_norm(m, s);
        const double exact = exact_norm(m, s);
        const ConvexBody ball = ConvexBody::ball(s, Vector::Zero(dim), 1.0);
        const MapExpr f = MapExpr::affine(m, Vector::Zero(dim), ball);
        const LipEstimate est = lip_sampled(f, Region(ball), SamplePlan{10000, rng::stream_seed(77, cases_run)});
        worst_ratio = std::min(worst_ratio, est.value / exact);
        worst_excess = std::max(worst_excess, est.value - exact);
        ++cases_run;
        std::string tag = "d" + std::to_string(dim) + (s.is_inf() ? " linf" : " l" + fmt(s.p()));
        expect(est.value >= 0.98 * exact, o, tag + " ratio " + fmt(est.value / exact));
        expect(est.value <= exact + 1e-12, o, tag + " overshoot " + fmt(est.value - exact));
      }
    }
  }
  o.detail = std::to_string(cases_run) + " maps, min ratio " + fmt(worst_ratio) + ", max excess " + fmt(worst_excess) +
             o.detail;
  return o;
}

// --------------------------------------------------------- residual fields

Outcome residual_exploration() {
  Outcome o;
  const SamplePlan sp{2000, 31};
  const NormSpec s = NormSpec::l2(2);
  {
    const ConvexBody square = ConvexBody::box(s, vec({-1, -1}), vec({1, 1}));
    Matrix rot(2, 2);
    rot << 0.0, -1.0, 1.0, 0.0;
    const LipField field = lip_field(MapExpr::affine(rot, Vector::Zero(2), square), square, 0.1, GridStrategy{8}, sp);
    expect(field.values.size() == 64, o, "rotation grid size " + std::to_string(field.values.size()));
    double dev = 0.0;
    for (double v : field.values) dev = std::max(dev, std::abs(v - 1.0));
    expect(dev <= 1e-6, o, "rotation deviation " + fmt(dev));
    const ResidualReport rep = residual_report(field, s, {0.99});
    expect(rep.thresholds[0].fraction == 1.0, o, "rotation fraction");
    o.detail += "rotation max |Lip-1| " + fmt(dev);
  }
  {
    const ConvexBody disc = ConvexBody::ball(s, Vector::Zero(2), 1.0);
    const LipField field =
        lip_field(MapExpr::scale_toward(Vector::Zero(2), 0.5, disc), disc, 0.1, GridStrategy{8}, sp);
    const ResidualReport rep = residual_report(field, s, {0.9});
    expect(!field.values.empty() && rep.thresholds[0].fraction == 0.0, o, "scale fraction");
    o.detail += ", scale fraction above 0.9 = " + fmt(rep.thresholds[0].fraction);
  }
  {
    const NormSpec s1 = NormSpec::l2(1);
    const ConvexBody unit = ConvexBody::box(s1, vec({0}), vec({1}));
    const double r = 0.1;
    const LipField field = lip_field(MapExpr::half_square(unit), unit, r, GridStrategy{21}, sp);
    double dev = 0.0;
    std::size_t interior = 0;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
      const double x = field.grid[i][0];
      // quotients from x are (x + y) / 2 over y in [x - r, x + r] ∩ [0, 1]
      const double oracle = (x + std::min(x + r, 1.0)) / 2.0;
      if (x + r <= 1.0) ++interior;
      dev = std::max(dev, std::abs(field.values[i] - oracle));
    }
    expect(dev <= 1e-6, o, "half-square deviation " + fmt(dev));
    o.detail += ", half-square max error " + fmt(dev) + " (" + std::to_string(interior) + " points with x + r <= 1)";
  }
  return o;
}

// --------------------------------------------------------- negative controls

Outcome negative_controls() {
  Outcome o;
  const auto dir = harness::scratch("acceptance_negative");
  std::set<std::string> targets;
  const auto fixtures = harness::negative_fixtures();
  for (const auto& f : fixtures) {
    const auto r = harness::run_negative(f, dir);
    targets.insert(r.target);
    expect(r.code == kExitFail && !r.overall && r.target_failed, o, r.fixture);
  }
  auto names = harness::check_names(harness::fixture("running_example.json"), dir);
  const auto constant = harness::check_names(harness::fixture("constant_example.json"), dir);
  names.insert(constant.begin(), constant.end());
  for (const auto& n : names) expect(targets.count(n) == 1, o, "no fixture for " + n);
  o.detail = std::to_string(fixtures.size()) + " fixtures over " + std::to_string(names.size()) + " checks" + o.detail;
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::string& title, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " [PRIMARY] " << title << ": " << o.detail
              << std::endl;
  };

  const ScenarioRuns runs = run_all();
  report(1, "witness certificate suite", [&] { return witness_suite(runs); });
  report(2, "gamma bounds", [&] { return gamma_bounds(runs); });
  report(3, "interval algebra sweep", interval_sweep);
  report(4, "interval cover", cover_sweep);
  report(5, "constant-map identity and separation", constant_map);
  report(6, "Lipschitz estimator oracle", estimator_oracle);
  report(7, "residual exploration", residual_exploration);
  report(8, "negative controls through the CLI", negative_controls);
  return failed == 0 ? 0 : 1;
}
