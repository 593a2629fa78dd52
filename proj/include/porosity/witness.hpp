#pragma once

// Construction of the porosity witness g for a map f with a < Lip(f, U) <= b:
// the direction search, the radius choice, the proof constants, the
// constant-map witness and a constructive cover of (0, 1) by admissible
// intervals.

#include "porosity/convex_domain.hpp"
#include "porosity/mapping.hpp"
#include "porosity/perturbation.hpp"

#include <utility>
#include <vector>

namespace porosity {

/// True iff a < b and b - a < min{a/16, a(1-b)/(48b)}. Throws unless
/// a, b in (0, 1).
bool check_interval(double a, double b);

/// Largest w with (a, a + w) on the boundary of the interval condition.
double max_interval_width(double a);

struct WitnessConstants {
  double sigma = 0.0;  // 16(b - a)/a
  double eps0 = 0.0;   // sigma r / 2
  double alpha = 0.0;  // b - a (= a sigma / 16)
};

/// Throws StageError("interval") when (a, b) fails the interval condition.
WitnessConstants witness_constants(double a, double b, double r);

struct DirectionPlan {
  SamplePlan pairs;             // pairs drawn from U
  std::size_t top_pairs = 16;   // best pairs whose segments are scanned
  int base_candidates = 16;     // base points per segment
  int octaves = 20;             // t-grid spans [t_max 2^-octaves, t_max]
  int per_octave = 2;
};

struct Direction {
  Vector x0;
  Vector e;
  double pair_quotient = 0.0;  // quotient of the seeding pair
  double min_quotient = 0.0;   // worst forward quotient on the t-grid
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t grid_points = 0;
};

/// Finds x0 in U and a unit e whose forward difference quotients
/// ||f(x0 + t e) - f(x0)|| / t exceed L on a geometric t-grid. Among
/// candidates with equal worst quotient (to 1e-9 relative) the one deepest
/// inside U wins. Throws StageError("direction") when no pair beats L.
Direction find_direction(const MapExpr& f, const OpenSubset& U, double L, const DirectionPlan& plan);

struct RadiusPlan {
  int ladder = 40;      // candidates m, m/2, m/4, ...
  int octaves = 24;     // stretch grid spans [r 2^-octaves, r]
  int per_octave = 4;
};

struct RadiusChoice {
  double r = 0.0;
  double worst_quotient = 0.0;
  double margin = 0.0;  // worst_quotient - a
  std::size_t grid_points = 0;
  int octaves = 0;
  int per_octave = 0;
  int candidates_tried = 0;
};

/// Largest r on the ladder with subset_margin(U, x0, r) >= 0, x0 + r e in U
/// and a stretch quotient above a at every grid point of (0, r]. Throws
/// StageError("radius") when none passes.
RadiusChoice choose_radius(const MapExpr& f, const OpenSubset& U, const Vector& x0, const Vector& e, double a,
                           const RadiusPlan& plan);

struct WitnessPlan {
  SamplePlan lip;  // Lip(f, U) estimate
  DirectionPlan direction;
  RadiusPlan radius;
};

struct Witness {
  MapExpr g;
  WitnessParams params;
  LipEstimate lip_f_on_U;
  Direction direction;
  RadiusChoice radius;
};

/// Full construction: interval check, Lip(f, U) estimate, direction search,
/// radius choice, constants and the Perturbed node. Failures are StageErrors
/// labeled "interval", "direction", "radius" or "epsilon".
Witness build_witness(const MapExpr& f, const OpenSubset& U, double a, double b, double eps,
                      const WitnessPlan& plan);

/// Same, with (x0, e) supplied instead of searched.
Witness build_witness_at(const MapExpr& f, const OpenSubset& U, double a, double b, double eps, const Vector& x0,
                         const Vector& e, const WitnessPlan& plan);

/// g = (1 - eps/R) f + (eps/R) id with R = diam(C). eps = 0 returns f.
MapExpr constant_witness(const MapExpr& f, double eps, const ConvexBody& body);

struct IntervalCover {
  std::vector<std::pair<double, double>> intervals;
  double lo = 0.0;
  double hi = 0.0;

  /// x lies in some open interval of the cover.
  bool covers(double x) const;
};

/// Greedy sweep of [lo, hi] by intervals passing check_interval: each width is
/// half the admissible maximum, consecutive intervals overlap (a_{i+1} =
/// a_i + 0.9 (b_i - a_i)). A finite truncation of a countable cover of (0, 1).
IntervalCover cover_intervals(double lo, double hi);

}  // namespace porosity
