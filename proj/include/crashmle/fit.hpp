#ifndef CRASHMLE_FIT_HPP
#define CRASHMLE_FIT_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "crashmle/design.hpp"
#include "crashmle/fit_result.hpp"
#include "crashmle/halton.hpp"
#include "crashmle/model_spec.hpp"
#include "crashmle/optim.hpp"
#include "crashmle/simulation.hpp"
#include "crashmle/table.hpp"

namespace crashmle {

inline constexpr int kDefaultDraws = 200;
inline constexpr int kMinDraws = 25;

struct FitOptions {
  OptimSettings optim;
  int draws = kDefaultDraws;  // mixed families
  std::uint64_t seed = 0;     // mixed families
  HaltonOptions halton;
  bool compute_covariance = true;
  // Count families fit an intercept-only model for ll_restricted; when
  // false it is left NaN.
  bool compute_restricted = true;
  // Starting point on the packed scale; defaults to zeros, with the count
  // constant at log(mean count) and log(alpha) at 0.
  std::optional<Eigen::VectorXd> start;
};

FitResult fit_mnl(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options = {});
FitResult fit_mixed_mnl(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options = {});
FitResult fit_nb(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options = {});
FitResult fit_mixed_nb(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options = {});

// Dispatches on spec.family.
FitResult fit_model(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options = {});

// Default starting point for a design.
Eigen::VectorXd default_start(const DesignMatrix& design);

// Rebuilds the simulation draws a mixed fit used on its estimation sample.
SimulationDraws fit_draws(const FitResult& fit, const DesignMatrix& design);

// Log-likelihood function (packed scale) matching the fit's family;
// `sim` is required for mixed families.
Objective make_objective(const DesignMatrix& design, const SimulationDraws* sim);

}  // namespace crashmle

#endif  // CRASHMLE_FIT_HPP
