#include "porosity/scenario.hpp"

#include "porosity/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace porosity {

bool Tamper::any() const {
  return use_base || eps_scale || r_scale || sigma || b || e_scale || perturb_sigma || lip_f || gamma_e_scale ||
         gamma_e_star_scale || gamma_eps || gamma_leak || probe_scale;
}

WitnessPlan witness_plan(const Scenario& s) {
  WitnessPlan p;
  p.lip = SamplePlan{s.budgets.lip_pairs, rng::stream_seed(s.seed, 1), s.workers, std::nullopt};
  p.direction.pairs = SamplePlan{s.budgets.direction_pairs, rng::stream_seed(s.seed, 2), s.workers, std::nullopt};
  return p;
}

CertifyPlan certify_plan(const Scenario& s) {
  CertifyPlan p;
  p.pairs = SamplePlan{s.budgets.check_pairs, rng::stream_seed(s.seed, 3), s.workers, std::nullopt};
  p.points = SamplePlan{s.budgets.check_points, rng::stream_seed(s.seed, 4), s.workers, std::nullopt};
  p.probes = s.budgets.probes;
  p.tol = s.tol;
  p.lip_f = s.tamper.lip_f;
  if (s.tamper.probe_scale) p.probe_scale = *s.tamper.probe_scale;
  return p;
}

namespace {

WitnessParams tampered(WitnessParams p, const Tamper& t) {
  if (t.eps_scale) p.eps *= *t.eps_scale;
  if (t.r_scale) p.r *= *t.r_scale;
  if (t.sigma) p.sigma = *t.sigma;
  if (t.b) p.b = *t.b;
  if (t.e_scale) p.e *= *t.e_scale;
  return p;
}

Check lip_check(const LipEstimate& lip, double b) {
  const CheckMethod m = lip.kind == LipKind::exact ? CheckMethod::exact : CheckMethod::sampled;
  return make_check("scenario.lip_upper", lip.value, Relation::at_most, b, 0.0, m, lip.samples, lip.seed);
}

ScenarioResult run_perturbation(const Scenario& s) {
  const WitnessPlan wplan = witness_plan(s);
  const CertifyPlan cplan = certify_plan(s);
  const ConvexBody& body = s.body();
  const Tamper& t = s.tamper;

  Witness w = (s.x0 && s.e) ? build_witness_at(s.map, s.U, s.a, s.b, s.eps, *s.x0, *s.e, wplan)
                            : build_witness(s.map, s.U, s.a, s.b, s.eps, wplan);
  MapExpr g = w.g;
  if (t.perturb_sigma) {
    WitnessParams p = w.params;
    p.sigma = *t.perturb_sigma;
    g = MapExpr::perturbed(s.map, p, body);
  }
  if (t.use_base) g = s.map;
  const WitnessParams cp = tampered(w.params, t);

  WitnessParams gp = cp;
  if (t.gamma_e_scale) gp.e *= *t.gamma_e_scale;
  if (t.gamma_e_star_scale) gp.e_star.coeffs *= *t.gamma_e_star_scale;
  if (t.gamma_eps) gp.eps = *t.gamma_eps;
  PerturbationFn fn;
  if (t.gamma_leak) {
    const double leak = *t.gamma_leak;
    const NormSpec space = s.space();
    fn = [gp, leak, space](const Vector& x) {
      Vector y = gamma(gp, x, space);
      if (norm(space, x) >= gp.r) y.array() += leak;
      return y;
    };
  }

  ScenarioResult out{Certificate{}, g, std::nullopt, w.lip_f_on_U};
  Certificate& cert = out.certificate;
  cert.checks.push_back(lip_check(w.lip_f_on_U, cp.b));
  cert.append(certify_gamma(gp, s.space(), cplan, fn));
  cert.append(certify_witness(s.map, g, s.U, cp, cplan));
  cert.append(certify_hole(g, s.U, cp, cplan));
  cert.info.emplace_back("alpha", cp.b - cp.a);
  cert.info.emplace_back("sigma", cp.sigma);
  out.witness = std::move(w);
  return out;
}

ScenarioResult run_constant(const Scenario& s) {
  const CertifyPlan cplan = certify_plan(s);
  const ConvexBody& body = s.body();
  const NormSpec& space = s.space();
  const Tamper& t = s.tamper;
  const LipEstimate lip = lip_on_set(s.map, s.U, witness_plan(s).lip);

  MapExpr g = constant_witness(s.map, s.eps, body);
  if (t.perturb_sigma) {
    // an expanding local bump of the identity
    WitnessParams p;
    p.x0 = contains(body, s.U.center()) ? Vector(s.U.center()) : body.center_point();
    p.e = Vector::Unit(space.dim(), 0);
    p.e_star = norming_functional(space, p.e);
    Region region(body);
    p.r = region.max_step(p.x0, p.e, s.U.radius()) / 2.0;
    p.sigma = *t.perturb_sigma;
    p.eps = p.sigma * p.r / 4.0;
    p.a = s.a;
    p.b = s.b;
    g = MapExpr::perturbed(MapExpr::identity(), p, body);
  }
  if (t.use_base) g = s.map;
  const double eps = s.eps * t.eps_scale.value_or(1.0);

  ScenarioResult out{Certificate{}, g, std::nullopt, lip};
  out.certificate = certify_constant_witness(s.map, g, s.U, eps, body, cplan, s.probe_pair);
  out.certificate.info.emplace_back("lip_f_on_U", lip.value);
  return out;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& s) {
  if (!(s.eps > 0.0)) throw StageError("epsilon", "eps must be positive");
  return s.kind == WitnessKind::constant ? run_constant(s) : run_perturbation(s);
}

Scenario demo_scenario() {
  const NormSpec space = NormSpec::l2(2);
  const ConvexBody disc = ConvexBody::ball(space, Vector::Zero(2), 1.0);
  Scenario s(MapExpr::scale_toward(Vector::Zero(2), 0.801, disc), OpenSubset(Vector::Zero(2), 0.5, disc));
  s.name = "l2-disc-scale";
  s.a = 0.8;
  s.b = 0.801;
  s.eps = 0.002;
  return s;
}

std::vector<OpenSubset> SubsetFamily::subsets(const ConvexBody& body) const {
  std::vector<OpenSubset> out;
  out.reserve(points.size() * radii.size());
  for (const auto& x : points) {
    for (double q : radii) out.emplace_back(x, q, body);
  }
  return out;
}

SubsetFamily subset_family(const ConvexBody& body, int n_points, int n_radii, std::uint64_t seed) {
  if (n_points < 1 || n_radii < 1) throw Error("subset_family: n_points and n_radii must be at least 1");
  SubsetFamily fam;
  fam.points = sample(body, RandomStrategy{static_cast<std::size_t>(n_points), seed});
  for (int j = 0; j < n_radii; ++j) fam.radii.push_back(1.0 / (j + 2));
  return fam;
}

std::string to_string(CellClass c) {
  switch (c) {
    case CellClass::constant: return "constant on U";
    case CellClass::interval: return "interval";
    case CellClass::no_contraction_witness: return "no contraction witness";
    case CellClass::outside_cover: return "outside cover";
  }
  return "unknown";
}

SweepReport sweep_family(const MapExpr& f, const ConvexBody& body, const SubsetFamily& fam,
                         const IntervalCover& cover, const SamplePlan& plan) {
  const auto subsets = fam.subsets(body);
  SweepReport report;
  report.cells.resize(subsets.size());
  detail::parallel_for(subsets.size(), plan.workers, [&](std::size_t k) {
    SweepCell& cell = report.cells[k];
    cell.point = k / fam.radii.size();
    cell.radius = k % fam.radii.size();
    const SamplePlan local{plan.count, rng::stream_seed(plan.seed, k), 1, std::nullopt};
    const LipEstimate est = lip_on_set(f, subsets[k], local);
    cell.lip = est.value;
    cell.kind = est.kind;
    const double v = est.value;
    for (const auto& [a, b] : cover.intervals) {
      if (v == a || v == b) cell.boundary = true;
    }
    if (v <= 0.0) {
      cell.cls = CellClass::constant;
    } else if (v >= 1.0 - 1e-9) {
      cell.cls = CellClass::no_contraction_witness;
    } else {
      for (std::size_t i = 0; i < cover.intervals.size(); ++i) {
        const auto& [a, b] = cover.intervals[i];
        if (a < v && v <= b) {
          cell.cls = CellClass::interval;
          cell.interval = i;
          break;
        }
      }
    }
  });
  return report;
}

}  // namespace porosity
