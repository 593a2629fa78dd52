#pragma once

// End-to-end scenarios: witness construction plus the certificate bundle,
// the U_{i,j} subset family and its sweep against an interval cover.

#include "porosity/certify.hpp"
#include "porosity/witness.hpp"

#include <optional>
#include <string>
#include <vector>

namespace porosity {

/// Fault injection for negative controls. Overrides apply to the parameters
/// handed to the certifiers after the witness is built, so a tampered run
/// certifies a claim the construction never made.
struct Tamper {
  bool use_base = false;                 // certify g = f
  std::optional<double> eps_scale;       // params.eps *= s
  std::optional<double> r_scale;         // params.r *= s
  std::optional<double> sigma;           // params.sigma = v
  std::optional<double> b;               // params.b = v
  std::optional<double> e_scale;         // params.e *= s
  std::optional<double> perturb_sigma;   // rebuild g with this sigma
  std::optional<double> lip_f;           // claimed Lip(f)
  std::optional<double> gamma_e_scale;   // gamma built with s e
  std::optional<double> gamma_e_star_scale;
  std::optional<double> gamma_eps;       // gamma built with this eps
  std::optional<double> gamma_leak;      // constant added to gamma off B(0, r)
  std::optional<double> probe_scale;

  bool any() const;
};

enum class WitnessKind { perturbation, constant };

struct Budgets {
  std::size_t lip_pairs = 10000;
  std::size_t direction_pairs = 10000;
  std::size_t check_pairs = 10000;
  std::size_t check_points = 10000;
  std::size_t probes = 20;
};

struct Scenario {
  Scenario(MapExpr f, OpenSubset subset) : map(std::move(f)), U(std::move(subset)) {}

  std::string name;
  MapExpr map;
  OpenSubset U;
  double a = 0.0;
  double b = 0.0;
  double eps = 0.0;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  Budgets budgets;
  Tolerances tol;
  WitnessKind kind = WitnessKind::perturbation;
  std::optional<Vector> x0;  // with e: skip the direction search
  std::optional<Vector> e;
  std::optional<std::pair<Vector, Vector>> probe_pair;  // constant witness only
  Tamper tamper;

  const ConvexBody& body() const noexcept { return U.parent(); }
  const NormSpec& space() const noexcept { return U.parent().space(); }
};

struct ScenarioResult {
  Certificate certificate;
  MapExpr g;
  std::optional<Witness> witness;  // perturbation scenarios
  LipEstimate lip_f_on_U;
};

/// Plans derived from the scenario's seed, budgets and worker count.
WitnessPlan witness_plan(const Scenario& s);
CertifyPlan certify_plan(const Scenario& s);

/// build_witness, then certify_gamma, certify_witness and certify_hole (or
/// the constant-map checks). Construction failures propagate as StageError.
ScenarioResult run_scenario(const Scenario& s);

/// The running example: l2 unit disc, f = ScaleToward(0, 0.801),
/// U = B(0, 1/2), (a, b) = (0.8, 0.801), eps = 0.002.
Scenario demo_scenario();

struct SubsetFamily {
  std::vector<Vector> points;
  std::vector<double> radii;  // 1/2, 1/3, ...
  static constexpr const char* kNote = "finite truncation of a countable family";

  /// U_{i,j} = B(points[i], radii[j]) ∩ C in row-major (i, j) order.
  std::vector<OpenSubset> subsets(const ConvexBody& body) const;
};

SubsetFamily subset_family(const ConvexBody& body, int n_points, int n_radii, std::uint64_t seed);

enum class CellClass { constant, interval, no_contraction_witness, outside_cover };

std::string to_string(CellClass c);

struct SweepCell {
  std::size_t point = 0;
  std::size_t radius = 0;
  double lip = 0.0;
  LipKind kind = LipKind::sampled_lower_bound;
  CellClass cls = CellClass::outside_cover;
  std::optional<std::size_t> interval;  // index into the cover
  bool boundary = false;                // estimate equals some interval endpoint
};

struct SweepReport {
  std::vector<SweepCell> cells;
  static constexpr const char* kNote = "finite truncation of a countable family";
};

/// Estimates Lip(f, U_{i,j}) per cell (seed stream_seed(plan.seed, cell)) and
/// classifies it: 0 is constant, >= 1 - 1e-9 has no contraction witness,
/// otherwise the lowest cover interval with a < v <= b.
SweepReport sweep_family(const MapExpr& f, const ConvexBody& body, const SubsetFamily& fam,
                         const IntervalCover& cover, const SamplePlan& plan);

}  // namespace porosity
