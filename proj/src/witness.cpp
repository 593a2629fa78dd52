#include "porosity/witness.hpp"

#include "porosity/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace porosity {

bool check_interval(double a, double b) {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
    throw Error("check_interval: a and b must lie in (0, 1)");
  }
  if (!(a < b)) return false;
  return b - a < std::min(a / 16.0, a * (1.0 - b) / (48.0 * b));
}

double max_interval_width(double a) {
  // b - a = a(1 - b)/(48 b) with b = a + w is 48 w^2 + 49 a w - a(1 - a) = 0
  const double c = a * (1.0 - a);
  const double root = 2.0 * c / (49.0 * a + std::sqrt(49.0 * 49.0 * a * a + 192.0 * c));
  return std::min(a / 16.0, root);
}

WitnessConstants witness_constants(double a, double b, double r) {
  if (!(r > 0.0)) throw Error("witness_constants: r must be positive");
  if (!check_interval(a, b)) throw StageError("interval", "(a, b) violates b - a < min{a/16, a(1-b)/(48b)}");
  WitnessConstants c;
  c.sigma = 16.0 * (b - a) / a;
  c.eps0 = c.sigma * r / 2.0;
  c.alpha = b - a;
  // both follow from the interval condition
  if (!(c.sigma < 1.0)) throw Error("witness_constants: sigma >= 1 despite the interval condition");
  if (!(b * (1.0 + 3.0 * c.sigma) < 1.0)) throw Error("witness_constants: b(1 + 3 sigma) >= 1");
  return c;
}

namespace {

struct GridQuotient {
  double worst = kInfinity;
  std::size_t points = 0;
};

// min over t = t_max 2^(-k/per_octave), k = 0..octaves*per_octave, of the
// forward quotient ||f(x0 + t e) - f(x0)|| / t
GridQuotient forward_quotients(const MapExpr& f, const NormSpec& space, const Vector& x0, const Vector& e,
                               double t_max, int octaves, int per_octave) {
  GridQuotient out;
  const int steps = octaves * per_octave;
  for (int k = 0; k <= steps; ++k) {
    const double t = t_max * std::exp2(-static_cast<double>(k) / per_octave);
    const double q = norm(space, f.delta(x0, t * e)) / t;
    out.worst = std::min(out.worst, q);
    ++out.points;
  }
  return out;
}

}  // namespace

Direction find_direction(const MapExpr& f, const OpenSubset& U, double L, const DirectionPlan& plan) {
  if (plan.pairs.count == 0) throw Error("find_direction: empty search budget");
  if (plan.top_pairs == 0 || plan.base_candidates < 1 || plan.octaves < 1 || plan.per_octave < 1) {
    throw Error("find_direction: invalid search plan");
  }
  const NormSpec& space = U.parent().space();
  const PairStream pairs(Region(U), plan.pairs);
  const double threshold = L + 1e-12 * std::max(1.0, std::abs(L));

  std::vector<double> quotients(plan.pairs.count, -kInfinity);
  detail::parallel_for(plan.pairs.count, plan.pairs.workers, [&](std::size_t i) {
    const auto pr = pairs(i);
    if (!pr) return;
    const double d = distance(space, pr->first, pr->second);
    if (d < kMinPairDistance) return;
    quotients[i] = norm(space, f.difference(pr->first, pr->second)) / d;
  });
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < quotients.size(); ++i) {
    if (quotients[i] > threshold) order.push_back(i);
  }
  if (order.empty()) {
    throw StageError("direction", "no sampled pair in U has quotient above L = " + std::to_string(L));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return quotients[x] > quotients[y]; });
  if (order.size() > plan.top_pairs) order.resize(plan.top_pairs);

  Direction best;
  double best_depth = -kInfinity;
  bool found = false;
  for (std::size_t idx : order) {
    const auto pr = *pairs(idx);
    const Vector& x = pr.first;
    const Vector& y = pr.second;
    const double len = distance(space, x, y);
    const Vector e = (y - x) / len;
    for (int j = 0; j < plan.base_candidates; ++j) {
      const double s = static_cast<double>(j) / plan.base_candidates;
      const Vector x0 = x + s * (y - x);
      const double t_max = (1.0 - s) * len;
      const auto grid = forward_quotients(f, space, x0, e, t_max, plan.octaves, plan.per_octave);
      const double depth = subset_margin(U, x0, 0.0);
      const bool better = !found || grid.worst > best.min_quotient * (1.0 + 1e-9) ||
                          (grid.worst >= best.min_quotient * (1.0 - 1e-9) && depth > best_depth);
      if (better) {
        found = true;
        best_depth = depth;
        best.x0 = x0;
        best.e = e;
        best.pair_quotient = quotients[idx];
        best.min_quotient = grid.worst;
        best.t_max = t_max;
        best.t_min = t_max * std::exp2(-plan.octaves);
        best.grid_points = grid.points;
      }
    }
  }
  if (!(best.min_quotient > threshold)) {
    throw StageError("direction", "no base point keeps the forward quotients above L on the t-grid");
  }
  return best;
}

RadiusChoice choose_radius(const MapExpr& f, const OpenSubset& U, const Vector& x0, const Vector& e, double a,
                           const RadiusPlan& plan) {
  if (plan.ladder < 1 || plan.octaves < 1 || plan.per_octave < 1) throw Error("choose_radius: invalid plan");
  const NormSpec& space = U.parent().space();
  const double m = subset_margin(U, x0, 0.0);
  if (!(m > 0.0) || !U.contains(x0)) throw StageError("radius", "x0 does not lie in U");
  RadiusChoice out;
  out.octaves = plan.octaves;
  out.per_octave = plan.per_octave;
  for (int k = 0; k < plan.ladder; ++k) {
    double r = m * std::exp2(-k);
    while (subset_margin(U, x0, r) < 0.0) r = std::nextafter(r, 0.0);
    ++out.candidates_tried;
    if (!U.contains(x0 + r * e)) continue;
    const auto grid = forward_quotients(f, space, x0, e, r, plan.octaves, plan.per_octave);
    if (grid.worst > a) {
      out.r = r;
      out.worst_quotient = grid.worst;
      out.margin = grid.worst - a;
      out.grid_points = grid.points;
      return out;
    }
  }
  throw StageError("radius", "no candidate radius keeps the stretch quotient above a");
}

namespace {

Witness assemble(const MapExpr& f, const OpenSubset& U, double a, double b, double eps, LipEstimate lip,
                 Direction dir, const RadiusPlan& radius_plan) {
  const ConvexBody& body = U.parent();
  const NormSpec& space = body.space();
  RadiusChoice rad = choose_radius(f, U, dir.x0, dir.e, a, radius_plan);
  const WitnessConstants c = witness_constants(a, b, rad.r);
  if (!(eps > 0.0 && eps < c.eps0)) {
    throw StageError("epsilon", "eps = " + std::to_string(eps) + " must lie in (0, eps0) with eps0 = " +
                                    std::to_string(c.eps0));
  }
  WitnessParams p;
  p.a = a;
  p.b = b;
  p.x0 = dir.x0;
  p.e = dir.e;
  p.e_star = norming_functional(space, dir.e);
  p.r = rad.r;
  p.sigma = c.sigma;
  p.eps0 = c.eps0;
  p.eps = eps;
  p.alpha = c.alpha;
  MapExpr g = MapExpr::perturbed(f, p, body);
  return Witness{std::move(g), std::move(p), lip, std::move(dir), rad};
}

LipEstimate checked_lip(const MapExpr& f, const OpenSubset& U, double a, double b, const WitnessPlan& plan) {
  if (!check_interval(a, b)) throw StageError("interval", "(a, b) violates b - a < min{a/16, a(1-b)/(48b)}");
  LipEstimate lip = lip_on_set(f, U, plan.lip);
  if (lip.value > b) {
    throw StageError("interval", "Lip(f, U) estimate " + std::to_string(lip.value) + " exceeds b");
  }
  return lip;
}

}  // namespace

Witness build_witness(const MapExpr& f, const OpenSubset& U, double a, double b, double eps,
                      const WitnessPlan& plan) {
  LipEstimate lip = checked_lip(f, U, a, b, plan);
  Direction dir = find_direction(f, U, a, plan.direction);
  return assemble(f, U, a, b, eps, lip, std::move(dir), plan.radius);
}

Witness build_witness_at(const MapExpr& f, const OpenSubset& U, double a, double b, double eps, const Vector& x0,
                         const Vector& e, const WitnessPlan& plan) {
  const NormSpec& space = U.parent().space();
  LipEstimate lip = checked_lip(f, U, a, b, plan);
  const double n = norm(space, e);
  if (std::abs(n - 1.0) > kUnitNormTol) throw StageError("direction", "supplied e is not a unit vector");
  if (!U.contains(x0)) throw StageError("direction", "supplied x0 does not lie in U");
  Direction dir;
  dir.x0 = x0;
  dir.e = e / n;
  const double t_max = U.radius() - distance(space, x0, U.center());
  const auto& dp = plan.direction;
  const auto grid = forward_quotients(f, space, dir.x0, dir.e, t_max / 2.0, dp.octaves, dp.per_octave);
  dir.min_quotient = grid.worst;
  dir.pair_quotient = grid.worst;
  dir.t_max = t_max / 2.0;
  dir.t_min = dir.t_max * std::exp2(-dp.octaves);
  dir.grid_points = grid.points;
  return assemble(f, U, a, b, eps, lip, std::move(dir), plan.radius);
}

MapExpr constant_witness(const MapExpr& f, double eps, const ConvexBody& body) {
  const double R = diameter(body);
  if (eps == 0.0) return f;
  if (!(eps > 0.0) || eps > R) throw Error("constant_witness: eps must lie in [0, diam(C)]");
  return MapExpr::convex_combo({1.0 - eps / R, eps / R}, {f, MapExpr::identity()});
}

bool IntervalCover::covers(double x) const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [x](const auto& ab) { return ab.first < x && x < ab.second; });
}

IntervalCover cover_intervals(double lo, double hi) {
  if (!(lo > 0.0 && hi < 1.0 && lo < hi)) throw Error("cover_intervals: need 0 < lo < hi < 1");
  constexpr double kOverlap = 0.9;
  constexpr std::size_t kMaxIntervals = 10'000'000;
  IntervalCover cover;
  cover.lo = lo;
  cover.hi = hi;
  double a = lo - max_interval_width(lo) / 4.0;
  if (!(a > 0.0)) a = lo / 2.0;
  while (true) {
    double w = max_interval_width(a) / 2.0;
    double b = a + w;
    while (!(b < 1.0) || !check_interval(a, b)) {
      w /= 2.0;
      b = a + w;
      if (w == 0.0) throw Error("cover_intervals: width underflow");
    }
    cover.intervals.emplace_back(a, b);
    if (b > hi) break;
    if (cover.intervals.size() >= kMaxIntervals) throw Error("cover_intervals: too many intervals");
    a = a + kOverlap * (b - a);
  }
  return cover;
}

}  // namespace porosity
