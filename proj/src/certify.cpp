#include "porosity/certify.hpp"

#include "porosity/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace porosity {

std::string to_string(CheckMethod m) {
  switch (m) {
    case CheckMethod::exact: return "exact";
    case CheckMethod::analytic_bound: return "analytic-bound";
    case CheckMethod::sampled: return "sampled";
  }
  return "unknown";
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::at_most: return "<=";
    case Relation::at_least: return ">=";
    case Relation::greater: return ">";
    case Relation::less: return "<";
    case Relation::equal: return "==";
  }
  return "?";
}

Check make_check(std::string name, double value, Relation relation, double bound, double tol, CheckMethod method,
                 std::size_t samples, std::optional<std::uint64_t> seed) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.bound = bound;
  c.tol = tol;
  c.relation = relation;
  c.method = method;
  c.samples = samples;
  c.seed = method == CheckMethod::sampled ? seed : std::nullopt;
  switch (relation) {
    case Relation::at_most:
      c.margin = bound - value;
      c.pass = value <= bound + tol;
      break;
    case Relation::at_least:
      c.margin = value - bound;
      c.pass = value >= bound - tol;
      break;
    case Relation::greater:
      c.margin = value - bound;
      c.pass = value > bound;
      break;
    case Relation::less:
      c.margin = bound - value;
      c.pass = value < bound;
      break;
    case Relation::equal:
      c.margin = tol - std::abs(value - bound);
      c.pass = std::abs(value - bound) <= tol;
      break;
  }
  // NaN never passes
  if (std::isnan(value) || std::isnan(bound)) c.pass = false;
  return c;
}

bool Certificate::overall() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* Certificate::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void Certificate::append(const Certificate& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  info.insert(info.end(), other.info.begin(), other.info.end());
}

namespace {

template <typename Fn>
double pair_max_quotient(const Fn& fn, const PairStream& pairs, const NormSpec& space, const SamplePlan& plan) {
  return detail::parallel_max(
      plan.count, plan.workers,
      [&](std::size_t i) {
        const auto pr = pairs(i);
        if (!pr) return 0.0;
        const double d = distance(space, pr->first, pr->second);
        if (d < kMinPairDistance) return 0.0;
        return distance(space, fn(pr->first), fn(pr->second)) / d;
      },
      0.0);
}

Vector zeros(int dim) { return Vector::Zero(dim); }

// points on the sphere of radius s * r around 0 in direction i of the stream
Vector shell_point(Rng& rng, const NormSpec& space, double radius) {
  Vector d(space.dim());
  for (int k = 0; k < d.size(); ++k) d[k] = rng.normal();
  double n = norm(space, d);
  while (!(n > 0.0)) {
    d[0] = 1.0;
    n = norm(space, d);
  }
  return d * (radius / n);
}

double lip_f_value(const MapExpr& f, const ConvexBody& body, const CertifyPlan& plan) {
  if (plan.lip_f) return *plan.lip_f;
  if (auto e = exact_lip(f, body)) return *e;
  return lip_upper_bound(f);
}

// pairs near the hyperplane e*(x - x0) = 0 inside B(x0, r), where phi is
// not yet saturated and gamma varies fastest
double slab_lip(const MapExpr& g, const ConvexBody& body, const WitnessParams& params, std::size_t count,
                std::uint64_t seed, unsigned workers) {
  const NormSpec& space = body.space();
  const Region ball = Region(body).restricted(params.x0, params.r);
  const double width = params.eps / params.sigma;
  return detail::parallel_max(count, workers, [&](std::size_t i) {
    Rng rng = Rng::for_index(seed, i);
    auto y = ball.draw(rng);
    if (!y) return 0.0;
    const double s = rng.uniform(-1.5, 1.5) * width;
    *y -= (params.e_star(*y - params.x0) - s) * params.e;
    if (!ball.contains(*y)) return 0.0;
    Vector d(space.dim());
    if (i % 2 == 0) {
      d = params.e;
    } else {
      for (int k = 0; k < d.size(); ++k) d[k] = rng.normal();
    }
    const double dn = norm(space, d);
    if (!(dn > 0.0)) return 0.0;
    d /= dn;
    const double h = width * std::exp2(-rng.uniform(0.0, 10.0));
    const double t = ball.max_step(*y, d, h);
    if (t < h / 8.0) return 0.0;
    return norm(space, g.delta(*y, t * d)) / t;
  });
}

}  // namespace

Certificate certify_gamma(const WitnessParams& params, const NormSpec& space, const CertifyPlan& plan,
                          const PerturbationFn& perturbation) {
  const PerturbationFn gam =
      perturbation ? perturbation : PerturbationFn([&](const Vector& x) { return gamma(params, x, space); });
  const Tolerances& tol = plan.tol;
  const int dim = space.dim();
  Certificate cert;

  // Lip(gamma) on B(0, 1.25 r), focused on the support
  SamplePlan pp = plan.pairs;
  pp.focus = FocusBall{zeros(dim), params.r};
  const Region region(ConvexBody::ball(space, zeros(dim), 1.25 * params.r));
  const PairStream pairs(region, pp);
  const double lip = pair_max_quotient(gam, pairs, space, pp);
  cert.checks.push_back(make_check("gamma.lipschitz", lip, Relation::at_most, 3.0 * params.sigma, 3.0 * params.sigma * tol.lip,
                                   CheckMethod::sampled, pp.count, pp.seed));

  // sup ||gamma|| on B(0, r): random draws plus the segment along e
  const SamplePlan& sp = plan.points;
  const Region inner(ConvexBody::ball(space, zeros(dim), params.r));
  constexpr std::size_t kLine = 257;
  const double sup = detail::parallel_max(
      sp.count + kLine, sp.workers,
      [&](std::size_t i) {
        if (i >= sp.count) {
          const double s = -1.0 + 2.0 * static_cast<double>(i - sp.count) / (kLine - 1);
          return norm(space, gam(s * params.r * params.e));
        }
        Rng rng = Rng::for_index(sp.seed, i);
        const auto x = inner.draw(rng);
        return x ? norm(space, gam(*x)) : 0.0;
      },
      0.0);
  cert.checks.push_back(make_check("gamma.sup_norm", sup, Relation::at_most, params.eps, tol.sampled,
                                   CheckMethod::sampled, sp.count + kLine, sp.seed));

  // support: gamma vanishes exactly at every point with ||x|| >= r
  const std::uint64_t support_seed = rng::mix(sp.seed ^ 0x5u);
  const double off = detail::parallel_max(
      sp.count, sp.workers,
      [&](std::size_t i) {
        Rng rng = Rng::for_index(support_seed, i);
        // radii in [r, 2r], a quarter of them exactly on the sphere
        const double scale = (i % 4 == 0) ? 1.0 : 1.0 + rng.uniform();
        Vector x = shell_point(rng, space, scale * params.r);
        if (norm(space, x) < params.r) return 0.0;
        return norm(space, gam(x));
      },
      0.0);
  cert.checks.push_back(make_check("gamma.support", off, Relation::at_most, 0.0, 0.0, CheckMethod::sampled,
                                   sp.count, support_seed));

  cert.checks.push_back(make_check("gamma.eps_admissible", params.eps, Relation::less,
                                   params.sigma * params.r / 2.0, 0.0, CheckMethod::exact));
  return cert;
}

double stretch_quotient(const MapExpr& g, const WitnessParams& params, const NormSpec& space) {
  return norm(space, g.delta(params.x0, params.eps * params.e)) / params.eps;
}

Certificate certify_witness(const MapExpr& f, const MapExpr& g, const OpenSubset& U, const WitnessParams& params,
                            const CertifyPlan& plan) {
  const ConvexBody& body = U.parent();
  const NormSpec& space = body.space();
  const Tolerances& tol = plan.tol;
  const double a = params.a;
  const double b = params.b;
  Certificate cert;

  // parameter constraints
  const double width = b - a;
  const double width_bound = (a > 0.0 && b > 0.0) ? std::min(a / 16.0, a * (1.0 - b) / (48.0 * b)) : 0.0;
  cert.checks.push_back(make_check("params.interval", width, Relation::less, width_bound, 0.0, CheckMethod::exact));
  cert.checks.push_back(make_check("params.sigma", params.sigma, Relation::equal, 16.0 * (b - a) / a, tol.exact,
                                   CheckMethod::exact));
  cert.checks.push_back(make_check("params.eps", params.eps, Relation::less, params.sigma * params.r / 2.0, 0.0,
                                   CheckMethod::exact));
  cert.checks.push_back(make_check("params.radius_margin", subset_margin(U, params.x0, params.r),
                                   Relation::at_least, 0.0, 0.0, CheckMethod::exact));
  const Vector tip = params.x0 + params.r * params.e;
  const double tip_depth = U.contains(tip) ? U.radius() - distance(space, tip, U.center()) : -1.0;
  cert.checks.push_back(make_check("params.tip_in_U", tip_depth, Relation::greater, 0.0, 0.0, CheckMethod::exact));
  cert.checks.push_back(make_check("params.unit_direction", norm(space, params.e), Relation::equal, 1.0,
                                   kUnitNormTol, CheckMethod::exact));

  const double lip_f = lip_f_value(f, body, plan);
  cert.info.emplace_back("lip_f", lip_f);

  // (1) ||g - f|| <= eps
  cert.checks.push_back(make_check("witness.sup_distance.analytic", lip_f * params.eps, Relation::at_most,
                                   params.eps, tol.exact, CheckMethod::analytic_bound));
  SamplePlan sp = plan.points;
  sp.focus = FocusBall{params.x0, params.r};
  const double sup = sup_distance(f, g, body, sp);
  cert.checks.push_back(make_check("witness.sup_distance.sampled", sup, Relation::at_most, params.eps,
                                   tol.sampled, CheckMethod::sampled, sp.count, sp.seed));

  // (2) Lip(g) <= 1
  const double lip_bound = std::max(b * (1.0 + 3.0 * params.sigma), lip_f);
  cert.checks.push_back(make_check("witness.lip.analytic", lip_bound, Relation::at_most, 1.0, tol.exact,
                                   CheckMethod::analytic_bound));
  SamplePlan pp = plan.pairs;
  pp.focus = FocusBall{params.x0, params.r};
  const std::size_t slab_pairs = pp.count / 4;
  pp.count -= slab_pairs;
  const double lip_g = std::max(lip_sampled(g, Region(body), pp).value,
                                slab_lip(g, body, params, slab_pairs, rng::mix(pp.seed ^ 0x5au), pp.workers));
  cert.checks.push_back(make_check("witness.lip.sampled", lip_g, Relation::at_most, 1.0, tol.lip,
                                   CheckMethod::sampled, pp.count + slab_pairs, pp.seed));

  // (3) two-point stretch
  const double stretch = stretch_quotient(g, params, space);
  cert.info.emplace_back("stretch", stretch);
  cert.checks.push_back(make_check("witness.stretch", stretch, Relation::at_least,
                                   a * (1.0 + params.sigma / 4.0), tol.stretch, CheckMethod::exact));

  // g = f exactly off B(x0, r)
  const Region region(body);
  const std::uint64_t loc_seed = rng::mix(sp.seed ^ 0x9u);
  std::vector<char> used(sp.count, 0);
  const double off = detail::parallel_max(
      sp.count, sp.workers,
      [&](std::size_t i) {
        Rng rng = Rng::for_index(loc_seed, i);
        std::optional<Vector> x;
        if (i % 2 == 0) {
          // just outside the support
          Vector y = params.x0 + shell_point(rng, space, params.r * (1.0 + 0.25 * rng.uniform()));
          if (contains(body, y)) x = std::move(y);
        }
        if (!x) x = region.draw(rng);
        if (!x || distance(space, *x, params.x0) < params.r) return 0.0;
        used[i] = 1;
        return distance(space, f(*x), g(*x));
      },
      0.0);
  const auto n_used = static_cast<std::size_t>(std::count(used.begin(), used.end(), 1));
  cert.checks.push_back(
      make_check("witness.locality", off, Relation::at_most, 0.0, 0.0, CheckMethod::sampled, n_used, loc_seed));
  cert.info.emplace_back("clamp_events", static_cast<double>(clamp_events(g)));
  return cert;
}

Certificate certify_hole(const MapExpr& g, const OpenSubset& U, const WitnessParams& params,
                         const CertifyPlan& plan) {
  const ConvexBody& body = U.parent();
  const NormSpec& space = body.space();
  const Tolerances& tol = plan.tol;
  const double a = params.a;
  const double sigma = params.sigma;
  const double floor = a * (1.0 + sigma / 8.0);
  const double radius = a * sigma * params.eps / 16.0;
  Certificate cert;
  cert.info.emplace_back("hole_radius", radius);
  cert.info.emplace_back("porosity_alpha", params.alpha);
  cert.info.emplace_back("two_b_minus_a", 2.0 * params.b - a);

  cert.checks.push_back(make_check("hole.exclusion", floor, Relation::greater, params.b, 0.0, CheckMethod::exact));
  const double stretch = stretch_quotient(g, params, space);
  cert.checks.push_back(make_check("hole.chain", stretch - a * sigma / 8.0, Relation::at_least, floor, tol.stretch,
                                   CheckMethod::exact));

  // probes h = (1 - mu) g + mu c with ||h - g|| <= radius
  const SamplePlan& sp = plan.points;
  const std::size_t per_probe = std::max<std::size_t>(1, std::min<std::size_t>(sp.count, 2000));
  const std::uint64_t probe_seed = rng::mix(sp.seed ^ 0x11u);
  const Region region(body);
  const double diam = diameter(body);
  double worst_quotient = kInfinity;
  double worst_distance = 0.0;
  for (std::size_t k = 0; k < plan.probes; ++k) {
    MapExpr h = g;
    if (k > 0) {
      Rng rng = Rng::for_index(probe_seed, k);
      const auto c = region.draw(rng);
      if (!c) continue;
      const MapExpr cm = MapExpr::constant(*c, body);
      SamplePlan dp{per_probe, rng::stream_seed(probe_seed, k), sp.workers, FocusBall{params.x0, params.r}};
      // ||c - g(x)|| <= diam(C), so ||h - g|| <= mu diam(C) = radius
      const double mu = std::min(1.0, plan.probe_scale * radius / diam);
      h = MapExpr::convex_combo({1.0 - mu, mu}, {g, cm});
      worst_distance = std::max(worst_distance, sup_distance(h, g, body, dp));
    }
    const double q = norm(space, h.delta(params.x0, params.eps * params.e)) / params.eps;
    worst_quotient = std::min(worst_quotient, q);
  }
  cert.checks.push_back(make_check("hole.probe_distance", worst_distance, Relation::at_most, radius, tol.exact,
                                   CheckMethod::sampled, plan.probes, probe_seed));
  cert.checks.push_back(make_check("hole.probes", worst_quotient, Relation::greater, floor, 0.0,
                                   CheckMethod::sampled, plan.probes, probe_seed));
  return cert;
}

Certificate certify_constant_witness(const MapExpr& f, const MapExpr& g, const OpenSubset& U, double eps,
                                     const ConvexBody& body, const CertifyPlan& plan,
                                     std::optional<std::pair<Vector, Vector>> probe_pair) {
  const NormSpec& space = body.space();
  const Tolerances& tol = plan.tol;
  const double R = diameter(body);
  const Region inU(U);
  const SamplePlan& sp = plan.points;
  Certificate cert;

  Vector u, v;
  if (probe_pair) {
    u = probe_pair->first;
    v = probe_pair->second;
  } else {
    // farthest of a few seeded draws from the first one
    Rng rng = Rng::for_index(rng::mix(sp.seed ^ 0x21u), 0);
    auto first = inU.draw(rng);
    if (!first) throw Error("certify_constant_witness: cannot sample U");
    u = *first;
    v = u;
    for (int k = 0; k < 64; ++k) {
      auto y = inU.draw(rng);
      if (y && distance(space, *y, u) > distance(space, v, u)) v = *y;
    }
  }
  if (!U.contains(u) || !U.contains(v)) throw Error("certify_constant_witness: probe pair must lie in U");
  const double d = distance(space, u, v);
  if (!(d > 0.0)) throw Error("certify_constant_witness: probe pair must be distinct");
  cert.info.emplace_back("pair_distance", d);

  const Vector fu = f(u);
  const double spread = detail::parallel_max(
      sp.count, sp.workers,
      [&](std::size_t i) {
        Rng rng = Rng::for_index(sp.seed, i);
        const auto x = inU.draw(rng);
        return x ? distance(space, f(*x), fu) : 0.0;
      },
      0.0);
  cert.checks.push_back(make_check("constant.precondition", spread, Relation::at_most, 0.0, tol.exact,
                                   CheckMethod::sampled, sp.count, sp.seed));

  const LipEstimate lip_g = lip_sampled(g, Region(body), plan.pairs);
  cert.checks.push_back(make_check("constant.lip.sampled", lip_g.value, Relation::at_most, 1.0, tol.lip,
                                   CheckMethod::sampled, plan.pairs.count, plan.pairs.seed));
  const double sup = sup_distance(f, g, body, sp);
  cert.checks.push_back(make_check("constant.sup_distance", sup, Relation::at_most, eps, tol.sampled,
                                   CheckMethod::sampled, sp.count, sp.seed));

  const double gap = norm(space, g.difference(u, v));
  cert.checks.push_back(make_check("constant.identity", gap, Relation::equal, eps / R * d, tol.identity,
                                   CheckMethod::exact));
  const double rho = eps * d / (3.0 * R);
  cert.checks.push_back(
      make_check("constant.separation", gap - 2.0 * rho, Relation::greater, 0.0, 0.0, CheckMethod::exact));

  const std::uint64_t probe_seed = rng::mix(sp.seed ^ 0x23u);
  const Region region(body);
  double worst_gap = kInfinity;
  double worst_distance = 0.0;
  const std::size_t per_probe = std::max<std::size_t>(1, std::min<std::size_t>(sp.count, 2000));
  for (std::size_t k = 0; k < plan.probes; ++k) {
    MapExpr h = g;
    if (k > 0) {
      Rng rng = Rng::for_index(probe_seed, k);
      const auto c = region.draw(rng);
      if (!c) continue;
      const MapExpr cm = MapExpr::constant(*c, body);
      SamplePlan dp{per_probe, rng::stream_seed(probe_seed, k), sp.workers, std::nullopt};
      const double mu = std::min(1.0, plan.probe_scale * rho / R);
      h = MapExpr::convex_combo({1.0 - mu, mu}, {g, cm});
      worst_distance = std::max(worst_distance, sup_distance(h, g, body, dp));
    }
    worst_gap = std::min(worst_gap, norm(space, h.difference(u, v)));
  }
  cert.checks.push_back(make_check("constant.probe_distance", worst_distance, Relation::at_most, rho, tol.exact,
                                   CheckMethod::sampled, plan.probes, probe_seed));
  cert.checks.push_back(make_check("constant.probes", worst_gap, Relation::at_least, rho, tol.exact,
                                   CheckMethod::sampled, plan.probes, probe_seed));
  return cert;
}

LipField lip_field(const MapExpr& f, const ConvexBody& body, double r, const SampleStrategy& grid,
                   const SamplePlan& plan) {
  if (!(r > 0.0)) throw Error("lip_field: r must be positive");
  LipField field;
  field.grid = sample(body, grid);
  field.radius = r;
  field.values.assign(field.grid.size(), 0.0);
  field.kinds.assign(field.grid.size(), LipKind::exact);
  detail::parallel_for(field.grid.size(), plan.workers, [&](std::size_t i) {
    SamplePlan local{plan.count, rng::stream_seed(plan.seed, i), 1, std::nullopt};
    const LipEstimate est = lip_local(f, body, field.grid[i], r, local);
    field.values[i] = est.value;
    field.kinds[i] = est.kind;
  });
  return field;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t x, std::size_t y) { parent[find(x)] = find(y); }
};

}  // namespace

ResidualReport residual_report(const LipField& field, const NormSpec& space, const std::vector<double>& thresholds,
                               std::optional<double> link_radius) {
  const std::size_t n = field.grid.size();
  if (n == 0) throw Error("residual_report: empty field");
  ResidualReport report;
  if (link_radius) {
    if (!(*link_radius > 0.0)) throw Error("residual_report: link radius must be positive");
    report.link_radius = *link_radius;
  } else {
    double widest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double nearest = kInfinity;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) nearest = std::min(nearest, distance(space, field.grid[i], field.grid[j]));
      }
      if (std::isfinite(nearest)) widest = std::max(widest, nearest);
    }
    report.link_radius = widest > 0.0 ? 1.01 * widest : 1.0;
  }
  const double link = report.link_radius;
  for (double s : thresholds) {
    ThresholdSummary t;
    t.threshold = s;
    std::vector<std::size_t> above;
    for (std::size_t i = 0; i < n; ++i) {
      if (field.values[i] > s) above.push_back(i);
    }
    t.above = above.size();
    t.fraction = static_cast<double>(above.size()) / static_cast<double>(n);
    UnionFind uf(above.size());
    for (std::size_t i = 0; i < above.size(); ++i) {
      for (std::size_t j = i + 1; j < above.size(); ++j) {
        if (distance(space, field.grid[above[i]], field.grid[above[j]]) <= link) uf.unite(i, j);
      }
    }
    for (std::size_t i = 0; i < above.size(); ++i) {
      if (uf.find(i) == i) ++t.components;
    }
    t.grid_dense = !above.empty();
    for (std::size_t i = 0; i < n && t.grid_dense; ++i) {
      bool hit = false;
      for (std::size_t j : above) {
        if (distance(space, field.grid[i], field.grid[j]) <= link) {
          hit = true;
          break;
        }
      }
      t.grid_dense = hit;
    }
    report.thresholds.push_back(t);
  }
  return report;
}

}  // namespace porosity
