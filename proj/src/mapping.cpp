#include "porosity/mapping.hpp"

#include "porosity/parallel.hpp"
#include "porosity/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace porosity {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kWeightSumTol = 1e-12;
constexpr double kOpNormTol = 1e-12;

}  // namespace

// ---------------------------------------------------------------------------
// construction

MapExpr MapExpr::identity() { return MapExpr(std::make_shared<const MapNode>(MapNode{IdentityNode{}})); }

MapExpr MapExpr::constant(Vector value, const ConvexBody& body) {
  if (!contains(body, value, kInputTol)) throw Error("constant: value lies outside the body");
  return MapExpr(std::make_shared<const MapNode>(MapNode{ConstantNode{std::move(value)}}));
}

std::optional<double> operator_norm(const Matrix& matrix, const NormSpec& space) {
  if (matrix.rows() != space.dim() || matrix.cols() != space.dim()) {
    throw Error("operator_norm: matrix shape does not match the space");
  }
  if (space.p() == 1.0) return matrix.cwiseAbs().colwise().sum().maxCoeff();
  if (space.is_inf()) return matrix.cwiseAbs().rowwise().sum().maxCoeff();
  if (space.p() == 2.0) {
    Eigen::JacobiSVD<Matrix> svd(matrix);
    return svd.singularValues()(0);
  }
  return std::nullopt;
}

MapExpr MapExpr::affine(Matrix matrix, Vector offset, const ConvexBody& body, const SamplePlan& plan,
                        std::optional<double> asserted_bound) {
  const NormSpec& space = body.space();
  require_compatible(space, offset);
  if (matrix.rows() != space.dim() || matrix.cols() != space.dim() || !matrix.allFinite()) {
    throw Error("affine: matrix must be a finite dim x dim matrix");
  }
  AffineNode node{matrix, offset, 1.0, true};
  if (auto exact = operator_norm(matrix, space)) {
    if (*exact > 1.0 + kOpNormTol) throw Error("affine: operator norm exceeds 1");
    node.lip_bound = *exact;
  } else {
    if (!asserted_bound) throw Error("affine: no exact operator norm for this p; supply an asserted bound");
    if (!(*asserted_bound <= 1.0)) throw Error("affine: asserted bound exceeds 1");
    node.lip_bound = *asserted_bound;
    node.lip_exact = false;
  }
  MapExpr f(std::make_shared<const MapNode>(MapNode{node}));

  if (!node.lip_exact) {
    const auto sampled = lip_sampled(f, Region(body), plan);
    if (sampled.value > node.lip_bound * (1.0 + 1e-12)) {
      throw Error("affine: sampled operator norm exceeds the asserted bound");
    }
  }

  // range certificate: vertices, samples, and for balls points on the sphere
  std::vector<Vector> probes = body.vertices();
  const auto drawn = sample(body, RandomStrategy{std::max<std::size_t>(plan.count, 1), plan.seed});
  probes.insert(probes.end(), drawn.begin(), drawn.end());
  if (const auto* ball = std::get_if<BallShape>(&body.shape())) {
    for (const auto& x : drawn) {
      const Vector d = x - ball->center;
      const double n = norm(space, d);
      if (n > 0) probes.push_back(ball->center + (ball->radius / n) * d);
    }
  }
  for (const auto& x : probes) {
    if (!contains(body, matrix * x + offset, kInputTol)) {
      throw Error("affine: map sends a point of the body outside it");
    }
  }
  return f;
}

MapExpr MapExpr::scale_toward(Vector anchor, double factor, const ConvexBody& body) {
  if (!(factor >= 0.0 && factor <= 1.0)) throw Error("scale_toward: factor must lie in [0, 1]");
  if (!contains(body, anchor, kInputTol)) throw Error("scale_toward: anchor lies outside the body");
  return MapExpr(std::make_shared<const MapNode>(MapNode{ScaleTowardNode{std::move(anchor), factor}}));
}

MapExpr MapExpr::convex_combo(std::vector<double> weights, std::vector<MapExpr> children) {
  if (weights.empty() || weights.size() != children.size()) {
    throw Error("convex_combo: need matching, nonempty weights and children");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("convex_combo: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTol) throw Error("convex_combo: weights must sum to 1");
  return MapExpr(std::make_shared<const MapNode>(MapNode{ConvexComboNode{std::move(weights), std::move(children)}}));
}

MapExpr MapExpr::compose(MapExpr outer, MapExpr inner) {
  return MapExpr(std::make_shared<const MapNode>(MapNode{ComposeNode{std::move(outer), std::move(inner)}}));
}

MapExpr MapExpr::perturbed(MapExpr base, WitnessParams params, const ConvexBody& body) {
  const NormSpec& space = body.space();
  require_compatible(space, params.x0);
  require_compatible(space, params.e);
  require_compatible(space, params.e_star.coeffs);
  if (!(params.r > 0.0) || !(params.eps > 0.0) || !(params.sigma > 0.0)) {
    throw Error("perturbed: r, eps and sigma must be positive");
  }
  if (!(params.eps < 2.0 * params.r)) throw Error("perturbed: eps must be below 2r");
  if (!contains(body, params.x0, kInputTol)) throw Error("perturbed: x0 lies outside the body");
  if (!contains(body, params.x0 + params.r * params.e, kInputTol)) {
    throw Error("perturbed: x0 + r e lies outside the body");
  }
  auto counter = std::make_shared<std::atomic<std::uint64_t>>(0);
  return MapExpr(std::make_shared<const MapNode>(
      MapNode{PerturbedNode{std::move(base), std::move(params), body, std::move(counter)}}));
}

MapExpr MapExpr::half_square(const ConvexBody& body) {
  if (body.dim() != 1) throw Error("half_square: body must be one-dimensional");
  const auto& [lo, hi] = body.bounding_box();
  if (lo[0] < 0.0 || hi[0] > 1.0) throw Error("half_square: body must lie in [0, 1]");
  return MapExpr(std::make_shared<const MapNode>(MapNode{HalfSquareNode{}}));
}

std::string MapExpr::kind() const {
  return std::visit(overloaded{
                        [](const IdentityNode&) { return std::string("identity"); },
                        [](const ConstantNode&) { return std::string("constant"); },
                        [](const AffineNode&) { return std::string("affine"); },
                        [](const ScaleTowardNode&) { return std::string("scale_toward"); },
                        [](const ConvexComboNode&) { return std::string("convex_combo"); },
                        [](const ComposeNode&) { return std::string("compose"); },
                        [](const PerturbedNode&) { return std::string("perturbed"); },
                        [](const HalfSquareNode&) { return std::string("half_square"); },
                    },
                    node_->value);
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

Vector perturbed_inner(const PerturbedNode& n, const Vector& x, bool* clamped = nullptr) {
  const NormSpec& space = n.body.space();
  const Vector shifted = x - n.params.x0;
  if (clamped) *clamped = false;
  if (bump_psi(n.params.r, shifted, space) == 0.0) return x;
  Vector inner = x + gamma(n.params, shifted, space);
  if (contains(n.body, inner, 0.0)) return inner;
  if (clamped) *clamped = true;
  if (!contains(n.body, inner, kInputTol)) throw Error("perturbed: inner argument left the body");
  // pull back toward x0 by the smallest factor that lands in C
  double lo = 0.0, hi = 1.0;
  const Vector delta = inner - n.params.x0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (contains(n.body, n.params.x0 + (1.0 - mid) * delta, 0.0)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  n.clamp_events->fetch_add(1, std::memory_order_relaxed);
  return n.params.x0 + (1.0 - hi) * delta;
}

}  // namespace

Vector MapExpr::operator()(const Vector& x) const {
  return std::visit(overloaded{
                        [&](const IdentityNode&) -> Vector { return x; },
                        [&](const ConstantNode& n) -> Vector { return n.value; },
                        [&](const AffineNode& n) -> Vector { return n.matrix * x + n.offset; },
                        [&](const ScaleTowardNode& n) -> Vector { return n.anchor + n.factor * (x - n.anchor); },
                        [&](const ConvexComboNode& n) -> Vector {
                          Vector out = Vector::Zero(x.size());
                          for (std::size_t i = 0; i < n.children.size(); ++i) out += n.weights[i] * n.children[i](x);
                          return out;
                        },
                        [&](const ComposeNode& n) -> Vector { return n.outer(n.inner(x)); },
                        [&](const PerturbedNode& n) -> Vector { return n.base(perturbed_inner(n, x)); },
                        [&](const HalfSquareNode&) -> Vector { return 0.5 * x.cwiseProduct(x); },
                    },
                    node_->value);
}

Vector MapExpr::difference(const Vector& y, const Vector& z) const { return delta(y, z - y); }

Vector MapExpr::delta(const Vector& y, const Vector& d) const {
  return std::visit(
      overloaded{
          [&](const IdentityNode&) -> Vector { return d; },
          [&](const ConstantNode&) -> Vector { return Vector::Zero(d.size()); },
          [&](const AffineNode& n) -> Vector { return n.matrix * d; },
          [&](const ScaleTowardNode& n) -> Vector { return n.factor * d; },
          [&](const ConvexComboNode& n) -> Vector {
            Vector out = Vector::Zero(d.size());
            for (std::size_t i = 0; i < n.children.size(); ++i) out += n.weights[i] * n.children[i].delta(y, d);
            return out;
          },
          [&](const ComposeNode& n) -> Vector { return n.outer.delta(n.inner(y), n.inner.delta(y, d)); },
          [&](const PerturbedNode& n) -> Vector {
            const NormSpec& space = n.body.space();
            const Vector z = y + d;
            bool cy = false;
            bool cz = false;
            const Vector iy = perturbed_inner(n, y, &cy);
            const Vector iz = perturbed_inner(n, z, &cz);
            if (cy || cz) return n.base.delta(iy, iz - iy);
            // inner(z) - inner(y) = d + gamma(z - x0) - gamma(y - x0), free of the large common part
            const Vector dg = gamma(n.params, z - n.params.x0, space) - gamma(n.params, y - n.params.x0, space);
            return n.base.delta(iy, d + dg);
          },
          [&](const HalfSquareNode&) -> Vector { return 0.5 * d.cwiseProduct(2.0 * y + d); },
      },
      node_->value);
}

Vector evaluate(const MapExpr& f, const ConvexBody& body, const Vector& x) {
  if (!contains(body, x, kInputTol)) throw Error("evaluate: input lies outside the body");
  Vector y = f(x);
  if (!y.allFinite() || y.size() != x.size() || !contains(body, y, kRangeTol)) {
    throw Error("evaluate: result lies outside the body (invalid constructor certificate)");
  }
  return y;
}

std::uint64_t clamp_events(const MapExpr& f) {
  return std::visit(overloaded{
                        [](const ConvexComboNode& n) {
                          std::uint64_t total = 0;
                          for (const auto& c : n.children) total += clamp_events(c);
                          return total;
                        },
                        [](const ComposeNode& n) { return clamp_events(n.outer) + clamp_events(n.inner); },
                        [](const PerturbedNode& n) { return n.clamp_events->load() + clamp_events(n.base); },
                        [](const auto&) { return std::uint64_t{0}; },
                    },
                    f.node().value);
}

// ---------------------------------------------------------------------------
// Lipschitz constants

std::string to_string(LipKind kind) {
  return kind == LipKind::exact ? "exact" : "sampled-lower-bound";
}

std::optional<double> exact_lip(const MapExpr& f, const ConvexBody& body) {
  return std::visit(overloaded{
                        [](const IdentityNode&) -> std::optional<double> { return 1.0; },
                        [](const ConstantNode&) -> std::optional<double> { return 0.0; },
                        [](const ScaleTowardNode& n) -> std::optional<double> { return n.factor; },
                        [&](const AffineNode& n) -> std::optional<double> {
                          if (n.lip_exact && body.full_dimensional()) return n.lip_bound;
                          return std::nullopt;
                        },
                        [&](const HalfSquareNode&) -> std::optional<double> {
                          return body.bounding_box().second[0];
                        },
                        [](const auto&) -> std::optional<double> { return std::nullopt; },
                    },
                    f.node().value);
}

double lip_upper_bound(const MapExpr& f) {
  return std::visit(overloaded{
                        [](const IdentityNode&) { return 1.0; },
                        [](const ConstantNode&) { return 0.0; },
                        [](const ScaleTowardNode& n) { return n.factor; },
                        [](const AffineNode& n) { return n.lip_bound; },
                        [](const HalfSquareNode&) { return 1.0; },
                        [](const ConvexComboNode& n) {
                          double total = 0.0;
                          for (std::size_t i = 0; i < n.children.size(); ++i) {
                            total += n.weights[i] * lip_upper_bound(n.children[i]);
                          }
                          return total;
                        },
                        [](const ComposeNode& n) { return lip_upper_bound(n.outer) * lip_upper_bound(n.inner); },
                        [](const PerturbedNode& n) {
                          const auto& p = n.params;
                          const NormSpec& space = n.body.space();
                          const bool admissible = p.eps < p.sigma * p.r / 2.0 &&
                                                  std::abs(norm(space, p.e) - 1.0) <= kUnitNormTol &&
                                                  dual_norm(space, p.e_star) <= 1.0 + kUnitNormTol;
                          if (!admissible) return kInfinity;
                          // Lip(base ∘ (id + gamma)) <= Lip(base) (1 + 3 sigma)
                          return lip_upper_bound(n.base) * (1.0 + 3.0 * p.sigma);
                        },
                    },
                    f.node().value);
}

namespace {

// Unit directions tried first by the local samplers: coordinate axes and,
// in low dimension, all sign vectors (the extremal directions of l1 and l∞).
std::vector<Vector> direction_dictionary(const NormSpec& space) {
  const int d = space.dim();
  std::vector<Vector> dirs;
  for (int i = 0; i < d; ++i) {
    Vector v = Vector::Zero(d);
    v[i] = 1.0;
    dirs.push_back(v);
    dirs.push_back(-v);
  }
  if (d >= 2 && d <= 6) {
    for (std::uint64_t mask = 0; mask < (1ULL << d); ++mask) {
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = (mask & (1ULL << i)) ? -1.0 : 1.0;
      dirs.push_back(v / norm(space, v));
    }
  }
  return dirs;
}

Vector random_direction(const NormSpec& space, Rng& rng) {
  Vector v(space.dim());
  for (;;) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const double n = norm(space, v);
    if (n > 1e-8) return v / n;
  }
}

using Pair = std::pair<Vector, Vector>;

double pair_quotient(const MapExpr& f, const NormSpec& space, const Pair& pr) {
  const double dx = distance(space, pr.first, pr.second);
  if (dx < kMinPairDistance) return -kInfinity;
  return norm(space, f.difference(pr.first, pr.second)) / dx;
}

}  // namespace

PairStream::PairStream(Region region, const SamplePlan& plan)
    : region_(std::move(region)), directions_(direction_dictionary(region_.space())), seed_(plan.seed) {
  if (plan.focus) focus_ = region_.restricted(plan.focus->center, plan.focus->radius);
}

std::optional<Pair> PairStream::operator()(std::size_t index) const {
  Rng rng = Rng::for_index(seed_, index);
  const Region& base = (focus_ && (index % 4) < 2) ? *focus_ : region_;
  auto y = base.draw(rng);
  if (!y) y = region_.draw(rng);
  if (!y) return std::nullopt;
  if (index % 2 == 0) {
    auto z = base.draw(rng);
    if (!z) return std::nullopt;
    return Pair{std::move(*y), std::move(*z)};
  }
  const std::uint64_t pick = rng.below(2 * directions_.size());
  Vector d = pick < directions_.size() ? directions_[pick] : random_direction(region_.space(), rng);
  const double h = base.diameter_bound() * std::exp2(-rng.uniform(1.0, 14.0));
  double t = region_.max_step(*y, d, h);
  if (t < h / 8.0) {
    const double back = region_.max_step(*y, -d, h);
    if (back > t) {
      d = -d;
      t = back;
    }
  }
  // steps cut short by the boundary lose too many digits to cancellation
  if (t < h / 8.0) return std::nullopt;
  Vector z = *y + t * d;
  return Pair{std::move(*y), std::move(z)};
}

LipEstimate lip_sampled(const MapExpr& f, const Region& region, const SamplePlan& plan) {
  if (plan.count == 0) throw Error("lip estimate: empty sampling budget");
  const PairStream pairs(region, plan);
  const double best = detail::parallel_max(plan.count, plan.workers, [&](std::size_t i) {
    const auto pr = pairs(i);
    return pr ? pair_quotient(f, region.space(), *pr) : -kInfinity;
  });
  if (!(best > -kInfinity)) throw Error("lip estimate: no admissible pair found");
  return LipEstimate{best, LipKind::sampled_lower_bound, plan.count, plan.seed};
}

LipEstimate lip_global(const MapExpr& f, const ConvexBody& body, const SamplePlan& plan) {
  if (plan.count == 0) throw Error("lip_global: empty sampling budget");
  if (auto exact = exact_lip(f, body)) return LipEstimate{*exact, LipKind::exact, 0, plan.seed};
  return lip_sampled(f, Region(body), plan);
}

LipEstimate lip_on_set(const MapExpr& f, const OpenSubset& U, const SamplePlan& plan) {
  if (plan.count == 0) throw Error("lip_on_set: empty sampling budget");
  const auto closed = std::visit(
      overloaded{
          [](const IdentityNode&) -> std::optional<double> { return 1.0; },
          [](const ConstantNode&) -> std::optional<double> { return 0.0; },
          [](const ScaleTowardNode& n) -> std::optional<double> { return n.factor; },
          [&](const AffineNode& n) -> std::optional<double> {
            // U is relatively open in C, so it has interior when C does
            if (n.lip_exact && U.parent().full_dimensional()) return n.lip_bound;
            return std::nullopt;
          },
          [](const auto&) -> std::optional<double> { return std::nullopt; },
      },
      f.node().value);
  if (closed) return LipEstimate{*closed, LipKind::exact, 0, plan.seed};
  return lip_sampled(f, Region(U), plan);
}

LipEstimate lip_local(const MapExpr& f, const ConvexBody& body, const Vector& x, double r,
                      const SamplePlan& plan) {
  if (!(r > 0.0)) throw Error("lip_local: radius must be positive");
  if (!contains(body, x, kInputTol)) throw Error("lip_local: x lies outside the body");
  if (plan.count == 0) throw Error("lip_local: empty sampling budget");
  const auto closed = std::visit(overloaded{
                                     [](const IdentityNode&) -> std::optional<double> { return 1.0; },
                                     [](const ConstantNode&) -> std::optional<double> { return 0.0; },
                                     [](const ScaleTowardNode& n) -> std::optional<double> { return n.factor; },
                                     [](const auto&) -> std::optional<double> { return std::nullopt; },
                                 },
                                 f.node().value);
  if (closed) return LipEstimate{*closed, LipKind::exact, 0, plan.seed};

  const NormSpec& space = body.space();
  const Region region(body);
  const Region ball = region.restricted(x, r);
  const auto dirs = direction_dictionary(space);

  // ray ladders: steps approaching the edge of B(x, r) ∩ C and shrinking to 0
  constexpr int kLadder = 40;
  const std::size_t ladder_pairs = std::min(plan.count / 2, dirs.size() * kLadder);
  // shorter steps lose too many digits to cancellation in f(y) - f(x)
  const double min_step = std::max(kMinPairDistance, 1e-6 * r);
  auto quotient_at = [&](const Vector& y) {
    const double dy = distance(space, y, x);
    if (dy < min_step || !(dy < r)) return -kInfinity;
    return norm(space, f.difference(x, y)) / dy;
  };
  const double best = detail::parallel_max(plan.count, plan.workers, [&](std::size_t i) {
    if (i < ladder_pairs) {
      const Vector& d = dirs[i / kLadder];
      const int level = static_cast<int>(i % kLadder);
      const double edge = region.max_step(x, d, r);
      if (edge <= 0.0) return -kInfinity;
      double t;
      if (level < kLadder / 2) {
        // t -> edge from below; edge itself is admissible only when C, not
        // the open ball, stops the ray
        t = level == 0 ? (edge < r ? edge : 0.5 * r) : edge * (1.0 - std::exp2(-level));
      } else {
        t = edge * std::exp2(-(level - kLadder / 2 + 1));
      }
      return quotient_at(x + t * d);
    }
    Rng rng = Rng::for_index(plan.seed, i);
    auto y = ball.draw(rng);
    return y ? quotient_at(*y) : -kInfinity;
  });
  if (!(best > -kInfinity)) throw Error("lip_local: no admissible y found (radius too small)");
  return LipEstimate{best, LipKind::sampled_lower_bound, plan.count, plan.seed};
}

PointLipEstimate lip_at_point(const MapExpr& f, const ConvexBody& body, const Vector& x,
                              const std::vector<double>& radii, const SamplePlan& plan) {
  if (radii.empty()) throw Error("lip_at_point: empty radius schedule");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error("lip_at_point: radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw Error("lip_at_point: radii must be decreasing");
  }
  PointLipEstimate out;
  out.radii = radii;
  double env = kInfinity;
  LipEstimate last;
  for (double r : radii) {
    last = lip_local(f, body, x, r, plan);
    out.values.push_back(last.value);
    env = std::min(env, last.value);
    out.envelope.push_back(env);
  }
  out.estimate = last;
  out.estimate.value = env;
  return out;
}

double sup_distance(const MapExpr& f, const MapExpr& g, const ConvexBody& body, const SamplePlan& plan) {
  const Region region(body);
  std::optional<Region> focus;
  if (plan.focus) focus = region.restricted(plan.focus->center, plan.focus->radius);
  const auto vertices = body.vertices();
  const NormSpec& space = body.space();
  const std::size_t n = plan.count + vertices.size();
  return detail::parallel_max(
      n, plan.workers,
      [&](std::size_t i) {
        if (i >= plan.count) {
          const auto& v = vertices[i - plan.count];
          return distance(space, f(v), g(v));
        }
        Rng rng = Rng::for_index(plan.seed, i);
        std::optional<Vector> x;
        if (focus && i % 2 == 0) x = focus->draw(rng);
        if (!x) x = region.draw(rng);
        return x ? distance(space, f(*x), g(*x)) : 0.0;
      },
      0.0);
}

}  // namespace porosity
