#include "porosity/convex_domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace porosity {

namespace {

// Residual floor for hull membership: Wolfe's iteration is exact up to
// rounding, which leaves interior points with residuals of a few ulps.
constexpr double kHullResidualFloor = 1e-13;

constexpr int kMaxRejections = 200000;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_points(const NormSpec& space, const std::vector<Vector>& pts, const char* what) {
  for (const auto& p : pts) require_compatible(space, p);
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < pts.size() && distinct < 2; ++i) {
    bool fresh = true;
    for (std::size_t j = 0; j < i; ++j) fresh = fresh && pts[i] != pts[j];
    if (fresh) ++distinct;
  }
  if (distinct < 2) throw Error(std::string(what) + ": need at least two distinct points");
}

int affine_rank(const std::vector<Vector>& pts) {
  if (pts.size() < 2) return 0;
  Matrix diffs(pts.front().size(), static_cast<Eigen::Index>(pts.size() - 1));
  for (std::size_t i = 1; i < pts.size(); ++i) diffs.col(static_cast<Eigen::Index>(i - 1)) = pts[i] - pts[0];
  Eigen::FullPivLU<Matrix> lu(diffs);
  lu.setThreshold(1e-12);
  return static_cast<int>(lu.rank());
}

std::pair<Vector, Vector> points_bbox(const std::vector<Vector>& pts) {
  Vector lo = pts.front(), hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

// Minimizer of ||sum v_i q_i|| over the affine hull (sum v_i = 1).
Vector affine_minimizer(const std::vector<const Vector*>& q) {
  const auto n = static_cast<Eigen::Index>(q.size());
  Matrix kkt = Matrix::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kkt(i, j) = q[i]->dot(*q[j]);
    kkt(i, n) = 1.0;
    kkt(n, i) = 1.0;
  }
  Vector rhs = Vector::Zero(n + 1);
  rhs[n] = 1.0;
  Vector sol = kkt.fullPivLu().solve(rhs);
  return sol.head(n);
}

// Wolfe's minimum-norm-point algorithm over conv(pts).
Vector min_norm_point(const std::vector<Vector>& pts) {
  const std::size_t n = pts.size();
  double scale = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sq = pts[i].squaredNorm();
    scale = std::max(scale, sq);
    if (sq < pts[start].squaredNorm()) start = i;
  }
  const double tol = 1e-15 * std::max(scale, 1e-300);
  std::vector<std::size_t> active{start};
  std::vector<double> weights{1.0};
  Vector x = pts[start];

  for (int major = 0; major < 10 * static_cast<int>(n) + 50; ++major) {
    std::size_t best = 0;
    double best_dot = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x.dot(pts[i]);
      if (d < best_dot) {
        best_dot = d;
        best = i;
      }
    }
    if (x.squaredNorm() - best_dot <= tol) break;
    if (std::find(active.begin(), active.end(), best) != active.end()) break;
    active.push_back(best);
    weights.push_back(0.0);

    for (int minor = 0; minor < static_cast<int>(n) + 5; ++minor) {
      std::vector<const Vector*> q;
      for (auto idx : active) q.push_back(&pts[idx]);
      const Vector v = affine_minimizer(q);
      bool interior = true;
      for (Eigen::Index i = 0; i < v.size(); ++i) interior = interior && v[i] > 1e-14;
      if (interior) {
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = v[static_cast<Eigen::Index>(i)];
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        const double vi = v[static_cast<Eigen::Index>(i)];
        if (vi <= 1e-14 && weights[i] - vi > 0) theta = std::min(theta, weights[i] / (weights[i] - vi));
      }
      for (std::size_t i = 0; i < weights.size(); ++i) {
        weights[i] = (1.0 - theta) * weights[i] + theta * v[static_cast<Eigen::Index>(i)];
      }
      std::vector<std::size_t> keep_idx;
      std::vector<double> keep_w;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 1e-14) {
          keep_idx.push_back(active[i]);
          keep_w.push_back(weights[i]);
        }
      }
      if (keep_idx.empty()) {
        keep_idx.push_back(active.back());
        keep_w.push_back(1.0);
      }
      double total = 0.0;
      for (double w : keep_w) total += w;
      for (double& w : keep_w) w /= total;
      active = std::move(keep_idx);
      weights = std::move(keep_w);
    }
    Vector next = Vector::Zero(x.size());
    for (std::size_t i = 0; i < active.size(); ++i) next += weights[i] * pts[active[i]];
    if (next.squaredNorm() >= x.squaredNorm() - tol * 1e-3 && major > 0) {
      x = next.squaredNorm() < x.squaredNorm() ? next : x;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace

ConvexBody::ConvexBody(NormSpec space, Shape shape) : space_(space), shape_(std::move(shape)) {
  std::visit(overloaded{
                 [&](const BallShape& b) {
                   require_compatible(space_, b.center);
                   if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw Error("ball: radius must be positive");
                   const Vector r = Vector::Constant(b.center.size(), b.radius);
                   bbox_ = {b.center - r, b.center + r};
                 },
                 [&](const BoxShape& b) {
                   require_compatible(space_, b.lower);
                   require_compatible(space_, b.upper);
                   if (!(b.lower.array() < b.upper.array()).all()) throw Error("box: need lower < upper coordinatewise");
                   bbox_ = {b.lower, b.upper};
                 },
                 [&](const SimplexShape& s) {
                   require_points(space_, s.vertices, "simplex");
                   if (affine_rank(s.vertices) != static_cast<int>(s.vertices.size()) - 1) {
                     throw Error("simplex: vertices must be affinely independent");
                   }
                   bbox_ = points_bbox(s.vertices);
                   full_dimensional_ = affine_rank(s.vertices) == space_.dim();
                 },
                 [&](const HullShape& h) {
                   require_points(space_, h.points, "hull");
                   bbox_ = points_bbox(h.points);
                   full_dimensional_ = affine_rank(h.points) == space_.dim();
                 },
             },
             shape_);
}

ConvexBody ConvexBody::ball(NormSpec space, Vector center, double radius) {
  return ConvexBody(space, BallShape{std::move(center), radius});
}

ConvexBody ConvexBody::box(NormSpec space, Vector lower, Vector upper) {
  return ConvexBody(space, BoxShape{std::move(lower), std::move(upper)});
}

ConvexBody ConvexBody::simplex(NormSpec space, std::vector<Vector> vertices) {
  return ConvexBody(space, SimplexShape{std::move(vertices)});
}

ConvexBody ConvexBody::hull(NormSpec space, std::vector<Vector> points) {
  return ConvexBody(space, HullShape{std::move(points)});
}

std::string ConvexBody::shape_name() const {
  return std::visit(overloaded{
                        [](const BallShape&) { return std::string("ball"); },
                        [](const BoxShape&) { return std::string("box"); },
                        [](const SimplexShape&) { return std::string("simplex"); },
                        [](const HullShape&) { return std::string("hull"); },
                    },
                    shape_);
}

std::vector<Vector> ConvexBody::vertices() const {
  return std::visit(overloaded{
                        [](const BallShape&) { return std::vector<Vector>{}; },
                        [&](const BoxShape& b) {
                          const int d = space_.dim();
                          if (d > 20) throw Error("box: too many corners to enumerate");
                          std::vector<Vector> corners;
                          for (std::uint64_t mask = 0; mask < (1ULL << d); ++mask) {
                            Vector c = b.lower;
                            for (int i = 0; i < d; ++i) {
                              if (mask & (1ULL << i)) c[i] = b.upper[i];
                            }
                            corners.push_back(std::move(c));
                          }
                          return corners;
                        },
                        [](const SimplexShape& s) { return s.vertices; },
                        [](const HullShape& h) { return h.points; },
                    },
                    shape_);
}

Vector ConvexBody::center_point() const {
  return std::visit(overloaded{
                        [](const BallShape& b) -> Vector { return b.center; },
                        [](const BoxShape& b) -> Vector { return 0.5 * (b.lower + b.upper); },
                        [](const SimplexShape& s) -> Vector {
                          Vector c = Vector::Zero(s.vertices.front().size());
                          for (const auto& v : s.vertices) c += v;
                          return c / static_cast<double>(s.vertices.size());
                        },
                        [](const HullShape& h) -> Vector {
                          Vector c = Vector::Zero(h.points.front().size());
                          for (const auto& v : h.points) c += v;
                          return c / static_cast<double>(h.points.size());
                        },
                    },
                    shape_);
}

double hull_residual(const std::vector<Vector>& points, const Vector& x) {
  std::vector<Vector> shifted;
  shifted.reserve(points.size());
  for (const auto& p : points) shifted.push_back(p - x);
  return min_norm_point(shifted).cwiseAbs().maxCoeff();
}

bool contains(const ConvexBody& body, const Vector& x, double tol) {
  require_compatible(body.space(), x);
  if (tol < 0.0) throw Error("contains: tolerance must be nonnegative");
  return std::visit(overloaded{
                        [&](const BallShape& b) { return distance(body.space(), x, b.center) <= b.radius + tol; },
                        [&](const BoxShape& b) {
                          return ((x.array() >= b.lower.array() - tol) && (x.array() <= b.upper.array() + tol)).all();
                        },
                        [&](const SimplexShape& s) {
                          const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
                          return hull_residual(s.vertices, x) <= tol + kHullResidualFloor * scale;
                        },
                        [&](const HullShape& h) {
                          const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
                          return hull_residual(h.points, x) <= tol + kHullResidualFloor * scale;
                        },
                    },
                    body.shape());
}

double diameter(const ConvexBody& body) {
  return std::visit(overloaded{
                        [](const BallShape& b) { return 2.0 * b.radius; },
                        [&](const BoxShape& b) { return norm(body.space(), b.upper - b.lower); },
                        [&](const auto& poly) {
                          const auto pts = body.vertices();
                          (void)poly;
                          double best = 0.0;
                          for (std::size_t i = 0; i < pts.size(); ++i) {
                            for (std::size_t j = i + 1; j < pts.size(); ++j) {
                              best = std::max(best, distance(body.space(), pts[i], pts[j]));
                            }
                          }
                          return best;
                        },
                    },
                    body.shape());
}

namespace {

std::optional<Vector> draw_from_body(const ConvexBody& body, Rng& rng) {
  return std::visit(overloaded{
                        [&](const BallShape& b) -> std::optional<Vector> {
                          const auto& [lo, hi] = body.bounding_box();
                          for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
                            Vector x(lo.size());
                            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
                            if (distance(body.space(), x, b.center) <= b.radius) return x;
                          }
                          return std::nullopt;
                        },
                        [&](const BoxShape& b) -> std::optional<Vector> {
                          Vector x(b.lower.size());
                          for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(b.lower[i], b.upper[i]);
                          return x;
                        },
                        [&](const auto&) -> std::optional<Vector> {
                          const auto pts = body.vertices();
                          std::vector<double> w(pts.size());
                          double total = 0.0;
                          for (auto& wi : w) total += (wi = rng.exponential());
                          Vector x = Vector::Zero(body.dim());
                          for (std::size_t i = 0; i < pts.size(); ++i) x += (w[i] / total) * pts[i];
                          return x;
                        },
                    },
                    body.shape());
}

}  // namespace

std::vector<Vector> sample(const ConvexBody& body, const SampleStrategy& strategy) {
  return std::visit(
      overloaded{
          [&](const GridStrategy& g) {
            if (g.per_axis < 2) throw Error("sample: grid needs at least 2 points per axis");
            const auto& [lo, hi] = body.bounding_box();
            const int d = body.dim();
            std::vector<int> idx(static_cast<std::size_t>(d), 0);
            std::vector<Vector> out;
            const int k = g.per_axis;
            while (true) {
              Vector x(d);
              for (int i = 0; i < d; ++i) {
                const int j = idx[static_cast<std::size_t>(i)];
                x[i] = j == k - 1 ? hi[i] : lo[i] + (hi[i] - lo[i]) * (static_cast<double>(j) / (k - 1));
              }
              if (contains(body, x, 0.0)) out.push_back(std::move(x));
              int axis = d - 1;
              while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == k) {
                idx[static_cast<std::size_t>(axis)] = 0;
                --axis;
              }
              if (axis < 0) break;
            }
            if (out.empty()) throw Error("sample: grid resolution misses the body entirely");
            return out;
          },
          [&](const RandomStrategy& r) {
            if (r.count < 1) throw Error("sample: need at least one random point");
            std::vector<Vector> out;
            out.reserve(r.count);
            for (std::size_t i = 0; i < r.count; ++i) {
              Rng rng = Rng::for_index(r.seed, i);
              auto x = draw_from_body(body, rng);
              if (!x) throw Error("sample: rejection sampling failed");
              out.push_back(std::move(*x));
            }
            return out;
          },
      },
      strategy);
}

OpenSubset::OpenSubset(Vector center, double radius, ConvexBody parent)
    : center_(std::move(center)), radius_(radius), parent_(std::move(parent)) {
  require_compatible(parent_.space(), center_);
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw Error("OpenSubset: radius must be positive");
  if (!porosity::contains(parent_, center_, 0.0)) {
    // center outside C is allowed as long as the ball still meets C
    Region region(*this);
    Rng rng(0x5eed);
    if (!region.draw(rng)) throw Error("OpenSubset: B(center, radius) does not meet the body");
  }
}

bool OpenSubset::contains(const Vector& x) const {
  return distance(parent_.space(), x, center_) < radius_ && porosity::contains(parent_, x, 0.0);
}

double subset_margin(const OpenSubset& U, const Vector& x0, double r) {
  return U.radius() - distance(U.parent().space(), x0, U.center()) - r;
}

Region::Region(ConvexBody body) : body_(std::move(body)) {
  lower_ = body_.bounding_box().first;
  upper_ = body_.bounding_box().second;
  diameter_bound_ = diameter(body_);
}

Region::Region(const OpenSubset& U) : Region(U.parent(), U.center(), U.radius()) {}

Region::Region(ConvexBody body, Vector ball_center, double ball_radius) : Region(std::move(body)) {
  *this = restricted(ball_center, ball_radius);
}

Region Region::restricted(const Vector& ball_center, double ball_radius) const {
  require_compatible(space(), ball_center);
  if (!(ball_radius > 0.0)) throw Error("Region: cut radius must be positive");
  Region out = *this;
  out.cuts_.push_back(BallShape{ball_center, ball_radius});
  const Vector r = Vector::Constant(ball_center.size(), ball_radius);
  out.lower_ = out.lower_.cwiseMax(ball_center - r);
  out.upper_ = out.upper_.cwiseMin(ball_center + r);
  out.empty_box_ = !(out.lower_.array() <= out.upper_.array()).all();
  out.diameter_bound_ = std::min(out.diameter_bound_, 2.0 * ball_radius);
  return out;
}

bool Region::contains(const Vector& x, double tol) const {
  for (const auto& c : cuts_) {
    if (!(distance(space(), x, c.center) < c.radius + tol)) return false;
  }
  return porosity::contains(body_, x, tol);
}

std::optional<Vector> Region::draw(Rng& rng) const {
  if (cuts_.empty()) return draw_from_body(body_, rng);
  if (empty_box_) return std::nullopt;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    Vector x(lower_.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(lower_[i], upper_[i]);
    if (contains(x, 0.0)) return x;
  }
  return std::nullopt;
}

double Region::max_step(const Vector& x, const Vector& d, double limit) const {
  if (!(limit > 0.0)) return 0.0;
  if (contains(x + limit * d, 0.0)) return limit;
  double lo = 0.0, hi = limit;
  for (int it = 0; it < 80 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (contains(x + mid * d, 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace porosity
