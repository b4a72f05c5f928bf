#ifndef CRASHMLE_INFLUENCE_HPP
#define CRASHMLE_INFLUENCE_HPP

#include <string>
#include <vector>

#include "crashmle/fit.hpp"
#include "crashmle/model_spec.hpp"
#include "crashmle/table.hpp"

namespace crashmle {

// min(d, D). Throws DataError for negative d and SpecError for D <= 0.
[[nodiscard]] double influence_variable(double d, double range);

struct InfluenceProfile {
  std::vector<double> grid;  // ascending candidate D values
  std::vector<double> ll;    // NaN where the fit failed
  std::vector<bool> converged;
  double d_star = 0.0;
  double segment_length = 0.0;  // 2 * d_star
  double ll_star = 0.0;
  bool flat = false;
  std::vector<std::string> warnings;
};

// Grid dmin, dmin + step, ... up to dmax (inclusive within step / 1e6).
std::vector<double> influence_grid(double dmin, double dmax, double step);

struct InfluenceOptions {
  FitOptions fit;
  // Start each grid point from the previous point's estimates. When off,
  // grid points are fit concurrently.
  bool warm_start = true;
  // Profiles whose LL range is below this are reported as flat.
  double flat_tolerance = 1.92;
  double tie_tolerance = 1e-6;
};

// For each D on the grid, replaces the term variable named `distance_column`
// with min(d, D), refits the severity model and records its log-likelihood.
// d_star is the argmax over converged points, ties going to the smallest D.
// Throws SpecError if the spec is not a severity family or has no term on
// the distance column, DataError for negative distances, FitError if no
// grid point converges.
InfluenceProfile search_influence(const ObservationTable& table, const ModelSpec& spec,
                                  const std::string& distance_column, double dmin, double dmax,
                                  double step, const InfluenceOptions& options = {});

}  // namespace crashmle

#endif  // CRASHMLE_INFLUENCE_HPP
