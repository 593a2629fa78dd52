#pragma once

// Expression trees of non-expansive self-maps of C, the sup metric and the
// Lipschitz-constant estimators (global, on a set, local at radius r, and at
// a point).

#include "porosity/convex_domain.hpp"
#include "porosity/core.hpp"
#include "porosity/normed_space.hpp"
#include "porosity/perturbation.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace porosity {

struct MapNode;

/// Immutable handle to a map expression. Every factory certifies that the
/// result maps C into C and, except for Perturbed, that Lip <= 1.
class MapExpr {
 public:
  static MapExpr identity();
  static MapExpr constant(Vector value, const ConvexBody& body);

  /// x -> A x + offset. Needs an operator-norm bound <= 1: exact for
  /// p in {1, 2, inf}, otherwise `asserted_bound` is required (and is checked
  /// against a sampled lower bound). The range is certified on the body's
  /// vertices plus `plan` samples.
  static MapExpr affine(Matrix matrix, Vector offset, const ConvexBody& body, const SamplePlan& plan = {},
                        std::optional<double> asserted_bound = std::nullopt);

  /// x -> anchor + factor (x - anchor), factor in [0, 1], anchor in C.
  static MapExpr scale_toward(Vector anchor, double factor, const ConvexBody& body);

  static MapExpr convex_combo(std::vector<double> weights, std::vector<MapExpr> children);

  /// outer ∘ inner
  static MapExpr compose(MapExpr outer, MapExpr inner);

  /// x -> base(x + gamma(x - x0)). Only structural checks (x0 and x0 + r e in
  /// C, positive r and eps, eps < 2r so the combination weight stays below 1);
  /// the analytic properties are the certify module's job.
  static MapExpr perturbed(MapExpr base, WitnessParams params, const ConvexBody& body);

  /// x -> x^2/2 on a one-dimensional body inside [0, 1].
  static MapExpr half_square(const ConvexBody& body);

  const MapNode& node() const noexcept { return *node_; }
  std::string kind() const;

  /// Raw evaluation without domain checks.
  Vector operator()(const Vector& x) const;

  /// f(y + d) - f(y), propagated through the tree so that linear parts act on
  /// d directly instead of cancelling two nearby values.
  Vector delta(const Vector& y, const Vector& d) const;

  /// f(z) - f(y).
  Vector difference(const Vector& y, const Vector& z) const;

 private:
  explicit MapExpr(std::shared_ptr<const MapNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const MapNode> node_;
};

struct IdentityNode {};

struct ConstantNode {
  Vector value;
};

struct AffineNode {
  Matrix matrix;
  Vector offset;
  double lip_bound = 1.0;
  bool lip_exact = true;
};

struct ScaleTowardNode {
  Vector anchor;
  double factor = 1.0;
};

struct ConvexComboNode {
  std::vector<double> weights;
  std::vector<MapExpr> children;
};

struct ComposeNode {
  MapExpr outer;
  MapExpr inner;
};

struct PerturbedNode {
  MapExpr base;
  WitnessParams params;
  ConvexBody body;
  // inner arguments pulled back into C after rounding drift
  std::shared_ptr<std::atomic<std::uint64_t>> clamp_events;
};

struct HalfSquareNode {};

struct MapNode {
  std::variant<IdentityNode, ConstantNode, AffineNode, ScaleTowardNode, ConvexComboNode, ComposeNode,
               PerturbedNode, HalfSquareNode>
      value;
};

/// Tolerance on inputs to evaluate().
inline constexpr double kInputTol = 1e-9;
/// Tolerance on outputs of evaluate().
inline constexpr double kRangeTol = 1e-6;

/// f(x) with domain checks: x must lie in C within kInputTol and the result
/// within kRangeTol.
Vector evaluate(const MapExpr& f, const ConvexBody& body, const Vector& x);

/// Total clamp events recorded by all Perturbed nodes in f.
std::uint64_t clamp_events(const MapExpr& f);

enum class LipKind { exact, sampled_lower_bound };

std::string to_string(LipKind kind);

struct LipEstimate {
  double value = 0.0;
  LipKind kind = LipKind::sampled_lower_bound;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Pairs closer than this are skipped by every quotient estimator.
inline constexpr double kMinPairDistance = 1e-12;

/// Closed-form Lip(f) on C (Constant, Identity, ScaleToward, Affine on a
/// full-dimensional body with an exact operator norm, HalfSquare).
std::optional<double> exact_lip(const MapExpr& f, const ConvexBody& body);

/// Analytic upper bound on Lip(f) from the tree calculus; +inf when none is
/// available (Perturbed with inadmissible parameters).
double lip_upper_bound(const MapExpr& f);

/// The deterministic pair stream behind every pairwise estimator. Even
/// indices are independent draws; odd indices pair a draw with a short step
/// along an axis, a sign vector or a random direction. With a focus ball half
/// of the base points come from the focus.
class PairStream {
 public:
  PairStream(Region region, const SamplePlan& plan);

  /// Pair `index`, or nullopt when the draw was rejected.
  std::optional<std::pair<Vector, Vector>> operator()(std::size_t index) const;

  const Region& region() const noexcept { return region_; }

 private:
  Region region_;
  std::optional<Region> focus_;
  std::vector<Vector> directions_;
  std::uint64_t seed_;
};

/// Max pairwise quotient over the first plan.count pairs of the stream.
/// Nested prefixes give monotone values.
LipEstimate lip_sampled(const MapExpr& f, const Region& region, const SamplePlan& plan);

/// Lip(f) on C: exact when a closed form exists, else sampled.
LipEstimate lip_global(const MapExpr& f, const ConvexBody& body, const SamplePlan& plan);

/// Lip(f, U) = Lip(f|U).
LipEstimate lip_on_set(const MapExpr& f, const OpenSubset& U, const SamplePlan& plan);

/// Lip(f, x, r): sup of ||f(y) - f(x)|| / ||y - x|| over y in B(x, r) ∩ C.
LipEstimate lip_local(const MapExpr& f, const ConvexBody& body, const Vector& x, double r,
                      const SamplePlan& plan);

struct PointLipEstimate {
  LipEstimate estimate;  // at the smallest radius, after the envelope
  std::vector<double> radii;
  std::vector<double> values;    // lip_local per radius
  std::vector<double> envelope;  // running minimum as r decreases
};

/// Approximates the limsup Lip(f, x) over a decreasing radius schedule.
PointLipEstimate lip_at_point(const MapExpr& f, const ConvexBody& body, const Vector& x,
                              const std::vector<double>& radii, const SamplePlan& plan);

/// Sampled lower bound on sup_x ||f(x) - g(x)||.
double sup_distance(const MapExpr& f, const MapExpr& g, const ConvexBody& body, const SamplePlan& plan);

/// Operator norm of A on lp for p in {1, 2, inf}; nullopt otherwise.
std::optional<double> operator_norm(const Matrix& matrix, const NormSpec& space);

}  // namespace porosity
