#pragma once

// Shared vocabulary for the porosity library: vector types, errors,
// sampling plans and the seeded counter-based random streams.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace porosity {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for violated preconditions and invalid inputs.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction failure tagged with the pipeline stage that produced it
/// ("direction", "radius", "epsilon", ...).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Open ball used to concentrate part of a sample budget.
struct FocusBall {
  Vector center;
  double radius = 0.0;
};

/// Budget for every sampled estimator: number of draws (points or pairs),
/// the seed of the counter-based stream and the worker count. Results depend
/// only on (count, seed, focus), never on workers.
struct SamplePlan {
  std::size_t count = 10000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  std::optional<FocusBall> focus;
};

/// Default worker count: POROSITY_WORKERS if set and positive, else 1.
unsigned default_workers();

namespace rng {

/// splitmix64 finalizer; used to derive independent per-index streams.
std::uint64_t mix(std::uint64_t x);

/// Stream for draw `index` under `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace rng

}  // namespace porosity
