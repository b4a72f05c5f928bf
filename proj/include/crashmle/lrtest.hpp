#ifndef CRASHMLE_LRTEST_HPP
#define CRASHMLE_LRTEST_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crashmle/fit.hpp"
#include "crashmle/fit_result.hpp"
#include "crashmle/model_spec.hpp"
#include "crashmle/random.hpp"
#include "crashmle/table.hpp"

namespace crashmle {

struct LrStatistic {
  double x2 = 0.0;
  int dof = 0;
  bool clamped = false;  // a small negative value was set to zero
};

// x2 = -2 (ll_all - ll_a - ll_b), dof = params_a + params_b - params_all.
// Values in [-tolerance, 0) are clamped to 0; anything lower throws FitError
// (the split fits failed to reach their optimum). Throws SpecError if dof <= 0.
LrStatistic lr_statistic(double ll_all, double ll_a, double ll_b, int params_all, int params_a,
                         int params_b, double tolerance = 1e-4);

struct Histogram {
  std::vector<double> edges;  // bins + 1 ascending edges
  std::vector<std::size_t> counts;
};

// Equal-width bins over [0, max(values)].
Histogram make_histogram(const std::vector<double>& values, int bins);

struct LrTestResult {
  double x2 = 0.0;
  int dof = 0;
  double p_asymptotic = 1.0;
  double ll_all = 0.0;
  double ll_a = 0.0;
  double ll_b = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;

  // Monte-Carlo part (present when replicates were run).
  std::optional<double> p_mc;
  bool bias_corrected = false;
  std::optional<Histogram> null_histogram;
  std::vector<double> simulated_x2;  // in replicate order, failures removed
  int replicates = 0;                // requested
  int failed_replicates = 0;
  std::optional<std::uint64_t> seed;

  std::vector<std::string> warnings;
};

// Fits the pooled model and the two flag subsamples; asymptotic p-value.
// Throws FitError if any of the three fits fails to converge.
LrTestResult lr_test(const ObservationTable& table, const ModelSpec& spec,
                     const std::string& flag_column, const FitOptions& options = {});

// Redraws every row's outcome from the fitted pooled model at that row's
// covariates (categorical draw for severity, gamma-Poisson for counts; mixed
// fits draw a fresh coefficient per row first). Covariates are unchanged.
// Throws FitError for an unconverged fit.
ObservationTable simulate_under_null(const FitResult& pooled, const ObservationTable& table,
                                     Rng& rng);

struct McOptions {
  int replicates = 1000;
  std::uint64_t seed = 0;
  int bins = 50;
  // (k + 1) / (R + 1) instead of k / R.
  bool bias_corrected = false;
  // Abort when more than this share of replicates fail.
  double max_failure_share = 0.2;
  FitOptions fit;
};

// Observed statistic plus its Monte-Carlo null distribution: each replicate
// simulates from the pooled fit with its own RNG stream (seed, index), refits
// all three models warm-started at the pooled estimates and records x2.
// p_mc = #(x2_sim >= x2_obs) / #successful replicates.
LrTestResult mc_null_distribution(const ObservationTable& table, const ModelSpec& spec,
                                  const std::string& flag_column, const McOptions& options);

}  // namespace crashmle

#endif  // CRASHMLE_LRTEST_HPP
