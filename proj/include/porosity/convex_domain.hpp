#pragma once

// Bounded closed convex domains C and their relatively open subsets
// U = B(center, radius) ∩ C: membership, diameter and seeded sampling.

#include "porosity/core.hpp"
#include "porosity/normed_space.hpp"
#include "porosity/random.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace porosity {

struct BallShape {
  Vector center;
  double radius = 0.0;
};

struct BoxShape {
  Vector lower;
  Vector upper;
};

struct SimplexShape {
  std::vector<Vector> vertices;
};

struct HullShape {
  std::vector<Vector> points;
};

using Shape = std::variant<BallShape, BoxShape, SimplexShape, HullShape>;

class ConvexBody {
 public:
  static ConvexBody ball(NormSpec space, Vector center, double radius);
  static ConvexBody box(NormSpec space, Vector lower, Vector upper);
  // vertices must be affinely independent
  static ConvexBody simplex(NormSpec space, std::vector<Vector> vertices);
  static ConvexBody hull(NormSpec space, std::vector<Vector> points);

  const NormSpec& space() const noexcept { return space_; }
  const Shape& shape() const noexcept { return shape_; }
  int dim() const noexcept { return space_.dim(); }
  std::string shape_name() const;

  /// True when C has nonempty interior in R^dim.
  bool full_dimensional() const noexcept { return full_dimensional_; }

  /// Coordinatewise bounding box (lower, upper).
  const std::pair<Vector, Vector>& bounding_box() const noexcept { return bbox_; }

  /// Extreme points for polytopes (box corners, simplex/hull points); empty
  /// for balls.
  std::vector<Vector> vertices() const;

  /// A point of C: the center of a ball or box, the vertex centroid otherwise.
  Vector center_point() const;

 private:
  ConvexBody(NormSpec space, Shape shape);

  NormSpec space_;
  Shape shape_;
  std::pair<Vector, Vector> bbox_;
  bool full_dimensional_ = true;
};

/// x ∈ C up to tol: ball by distance, box by coordinate bounds, simplex and
/// hull by the l∞ residual of the nearest convex combination.
bool contains(const ConvexBody& body, const Vector& x, double tol = 0.0);

/// Exact diameter (attained at vertices for polytopes).
double diameter(const ConvexBody& body);

/// l∞ norm of (nearest point of conv(points) in the l2 sense) - x, computed
/// with Wolfe's minimum-norm-point algorithm.
double hull_residual(const std::vector<Vector>& points, const Vector& x);

/// Lattice with `per_axis` points along each side of the bounding box.
struct GridStrategy {
  int per_axis = 2;
};

/// `count` independent draws from the stream `seed`.
struct RandomStrategy {
  std::size_t count = 1;
  std::uint64_t seed = 0;
};

using SampleStrategy = std::variant<GridStrategy, RandomStrategy>;

/// Deterministic points of C. Grid output is in lexicographic order and
/// throws when the lattice misses C entirely.
std::vector<Vector> sample(const ConvexBody& body, const SampleStrategy& strategy);

/// U = B(center, radius) ∩ C, relatively open in C.
class OpenSubset {
 public:
  OpenSubset(Vector center, double radius, ConvexBody parent);

  const Vector& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  const ConvexBody& parent() const noexcept { return parent_; }

  bool contains(const Vector& x) const;

 private:
  Vector center_;
  double radius_;
  ConvexBody parent_;
};

/// U.radius - ||x0 - U.center|| - r. Nonnegative certifies B(x0, r) ∩ C ⊆ U.
double subset_margin(const OpenSubset& U, const Vector& x0, double r);

/// A body optionally cut by open balls; the common sampling domain for C,
/// U and focused budgets.
class Region {
 public:
  explicit Region(ConvexBody body);
  explicit Region(const OpenSubset& U);
  Region(ConvexBody body, Vector ball_center, double ball_radius);

  const ConvexBody& body() const noexcept { return body_; }
  const NormSpec& space() const noexcept { return body_.space(); }

  bool contains(const Vector& x, double tol = 0.0) const;

  /// One point of the region, or nullopt when rejection sampling gives up.
  std::optional<Vector> draw(Rng& rng) const;

  /// Upper bound on the region's diameter.
  double diameter_bound() const noexcept { return diameter_bound_; }

  /// Largest t in [0, limit] (to bisection precision) with x + t*d in the
  /// region; x must belong to the region.
  double max_step(const Vector& x, const Vector& d, double limit) const;

  /// Same region intersected with a further open ball.
  Region restricted(const Vector& ball_center, double ball_radius) const;

 private:
  ConvexBody body_;
  std::vector<BallShape> cuts_;
  Vector lower_, upper_;
  double diameter_bound_ = 0.0;
  bool empty_box_ = false;
};

}  // namespace porosity
