#pragma once

// Machine-checkable certificates for the witness construction and the
// local-Lipschitz fields used to explore R(f) = {x : Lip(f, x) = 1}.

#include "porosity/convex_domain.hpp"
#include "porosity/mapping.hpp"
#include "porosity/perturbation.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace porosity {

enum class CheckMethod { exact, analytic_bound, sampled };

enum class Relation { at_most, at_least, greater, less, equal };

std::string to_string(CheckMethod m);
std::string to_string(Relation r);

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double tol = 0.0;
  double margin = 0.0;  // positive in the passing direction
  Relation relation = Relation::at_most;
  bool pass = false;
  CheckMethod method = CheckMethod::exact;
  std::size_t samples = 0;
  std::optional<std::uint64_t> seed;
};

/// Builds a check and decides it: at_most passes iff value <= bound + tol,
/// at_least iff value >= bound - tol, greater/less are strict, equal iff
/// |value - bound| <= tol.
Check make_check(std::string name, double value, Relation relation, double bound, double tol, CheckMethod method,
                 std::size_t samples = 0, std::optional<std::uint64_t> seed = std::nullopt);

struct Certificate {
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> info;

  bool overall() const;
  const Check* find(const std::string& name) const;
  void append(const Certificate& other);
};

struct Tolerances {
  double exact = 1e-9;     // analytic and exact-arithmetic checks
  double sampled = 1e-6;   // sampled sup-distance checks
  double lip = 1e-9;       // sampled Lip <= 1
  double stretch = 1e-12;  // two-point stretch and the hole chain
  double identity = 1e-12; // constant-map identity
};

struct CertifyPlan {
  SamplePlan pairs;        // pairwise Lipschitz checks
  SamplePlan points;       // sup-distance, support and locality checks
  std::size_t probes = 20; // fuzz probes for the hole and constant-map checks
  Tolerances tol;
  // Known Lip(f); when unset, the exact closed form or the analytic bound of f.
  std::optional<double> lip_f;
  // multiplies the probe weight mu (fault injection; 1 in normal use)
  double probe_scale = 1.0;
};

using PerturbationFn = std::function<Vector(const Vector&)>;

/// Lip(gamma) <= 3 sigma, sup ||gamma|| <= eps, gamma = 0 off B(0, r), and
/// the hypothesis eps < sigma r / 2. `perturbation` replaces gamma (for
/// fault injection); by default the map from `params`.
Certificate certify_gamma(const WitnessParams& params, const NormSpec& space, const CertifyPlan& plan,
                          const PerturbationFn& perturbation = {});

/// Properties (1)-(3) of the witness plus locality g = f off B(x0, r) and the
/// parameter constraints.
Certificate certify_witness(const MapExpr& f, const MapExpr& g, const OpenSubset& U, const WitnessParams& params,
                            const CertifyPlan& plan);

/// Every h with ||h - g|| <= (a sigma/16) eps has Lip(h, U) > a(1 + sigma/8) > b:
/// the exclusion arithmetic, the two-point chain and seeded probes.
Certificate certify_hole(const MapExpr& g, const OpenSubset& U, const WitnessParams& params,
                         const CertifyPlan& plan);

/// Checks for g = (1 - eps/R) f + (eps/R) id with f constant on U. Without an
/// explicit probe pair (u, v), two points of U are drawn from plan.points.
Certificate certify_constant_witness(const MapExpr& f, const MapExpr& g, const OpenSubset& U, double eps,
                                     const ConvexBody& body, const CertifyPlan& plan,
                                     std::optional<std::pair<Vector, Vector>> probe_pair = std::nullopt);

/// Two-point stretch ||g(x0 + eps e) - g(x0)|| / eps.
double stretch_quotient(const MapExpr& g, const WitnessParams& params, const NormSpec& space);

struct LipField {
  std::vector<Vector> grid;
  double radius = 0.0;
  std::vector<double> values;  // Lip(f, x, r) per grid point
  std::vector<LipKind> kinds;
};

/// Lip(f, x, r) at every point of the sampling strategy's output; point i uses
/// the stream seed derived from (plan.seed, i).
LipField lip_field(const MapExpr& f, const ConvexBody& body, double r, const SampleStrategy& grid,
                   const SamplePlan& plan);

struct ThresholdSummary {
  double threshold = 0.0;
  double fraction = 0.0;  // share of grid points with value > threshold
  std::size_t above = 0;
  std::size_t components = 0;  // clusters of exceeding points at link radius
  bool grid_dense = false;     // every probe ball B(p, link) meets an exceeding point
};

struct ResidualReport {
  double link_radius = 0.0;
  std::vector<ThresholdSummary> thresholds;
  static constexpr const char* kDensityNote =
      "grid-dense is a grid-resolution heuristic stand-in for density, not a proof";
};

/// Summaries of {x : Lip(f, x, r) > s} on the field's grid. The link radius
/// defaults to 1.01 times the largest nearest-neighbour distance of the grid.
ResidualReport residual_report(const LipField& field, const NormSpec& space, const std::vector<double>& thresholds,
                               std::optional<double> link_radius = std::nullopt);

}  // namespace porosity
