#ifndef CRASHMLE_SYNTHGEN_HPP
#define CRASHMLE_SYNTHGEN_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashmle/model_spec.hpp"
#include "crashmle/table.hpp"

namespace crashmle {

// How one covariate column is drawn.
struct CovariateRecipe {
  enum class Kind { normal, uniform, bernoulli, constant };
  std::string name;
  Kind kind = Kind::normal;
  double a = 0.0;  // normal: mean; uniform: lower bound; bernoulli: p; constant: value
  double b = 1.0;  // normal: sd; uniform: upper bound

  static CovariateRecipe normal(std::string name, double mean = 0.0, double sd = 1.0);
  static CovariateRecipe uniform(std::string name, double lo, double hi);
  static CovariateRecipe bernoulli(std::string name, double p);
  static CovariateRecipe constant(std::string name, double value);
};

// True coefficient of one spec term. `scale` is the standard deviation of a
// normal term or the half-width of a uniform one; fixed terms need 0.
struct TrueTerm {
  double location = 0.0;
  double scale = 0.0;
};

struct InfluenceSettings {
  std::string distance_column;
  double true_range = 0.0;  // D
};

struct DgpConfig {
  ModelSpec spec;
  std::vector<TrueTerm> terms;  // one per spec term, same order
  double alpha = 1.0;           // count families
  // Drawn in this order for every row; may include columns the spec does
  // not use (such as a split flag).
  std::vector<CovariateRecipe> covariates;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<InfluenceSettings> influence;

  // Throws SpecError when a term lacks a true value or a recipe, when a
  // scale is negative (or nonzero on a fixed term), or alpha <= 0 for a
  // count family.
  void validate() const;
};

/*
 * Random-number path, one generator seeded with `seed`, row by row:
 *   1. every covariate recipe in order (constants consume nothing);
 *   2. one uniform per random term whose scale is positive, in term order,
 *      mapped through the same transform as the estimator's draws;
 *   3. the outcome: one categorical draw (severity) or a gamma draw followed
 *      by a Poisson draw (counts).
 * A mixed configuration with all scales 0 therefore reproduces the fixed
 * generator's table exactly.
 */
ObservationTable gen_mnl(const DgpConfig& config);
ObservationTable gen_mixed_mnl(const DgpConfig& config);
ObservationTable gen_nb(const DgpConfig& config);
ObservationTable gen_mixed_nb(const DgpConfig& config);

// Severity data whose true predictor uses min(d, true_range) in place of the
// distance column; the table keeps the raw distance. Requires a severity
// family, a nonnegative distance recipe and true_range > 0.
ObservationTable gen_influence(const DgpConfig& config, double true_range,
                               const std::string& distance_column);

// Dispatches on the spec family, or gen_influence when `influence` is set.
ObservationTable generate(const DgpConfig& config);

/*
 * JSON configuration:
 *   {
 *     "spec": "<INI text>"  or  "spec_file": "path relative to the config",
 *     "n": 5000, "seed": 7, "alpha": 1.37,
 *     "params": [{"location": -1.2, "scale": 0.0}, ...],     (term order)
 *     "covariates": [
 *       {"name": "x", "dist": "normal", "mean": 0, "sd": 1},
 *       {"name": "u", "dist": "uniform", "low": 0, "high": 2},
 *       {"name": "flag", "dist": "bernoulli", "p": 0.5},
 *       {"name": "len", "dist": "constant", "value": 1}
 *     ],
 *     "influence": {"column": "u", "true_range": 0.5}          (optional)
 *   }
 */
DgpConfig parse_dgp_config(std::string_view json_text,
                           const std::filesystem::path& base_dir = {});
DgpConfig load_dgp_config(const std::filesystem::path& path);

}  // namespace crashmle

#endif  // CRASHMLE_SYNTHGEN_HPP
