#include "crashmle/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crashmle/csv.hpp"
#include "crashmle/errors.hpp"
#include "crashmle/parallel.hpp"

namespace crashmle {

double influence_variable(double d, double range) {
  if (!(d >= 0.0)) throw DataError("influence: negative distance " + csv::format_double(d));
  if (!(range > 0.0)) throw SpecError("influence: range must be positive");
  return std::min(d, range);
}

std::vector<double> influence_grid(double dmin, double dmax, double step) {
  if (!(dmin > 0.0) || !(step > 0.0) || !(dmax >= dmin)) {
    throw SpecError("influence: need 0 < dmin <= dmax and step > 0");
  }
  std::vector<double> grid;
  const double slack = step * 1e-6;
  for (long k = 0;; ++k) {
    const double d = dmin + static_cast<double>(k) * step;
    if (d > dmax + slack) break;
    grid.push_back(d);
  }
  return grid;
}

InfluenceProfile search_influence(const ObservationTable& table, const ModelSpec& spec,
                                  const std::string& distance_column, double dmin, double dmax,
                                  double step, const InfluenceOptions& options) {
  if (!is_severity(spec.family)) throw SpecError("influence: spec must be a severity model");
  const auto uses = std::any_of(spec.terms.begin(), spec.terms.end(),
                                [&](const Term& t) { return t.variable == distance_column; });
  if (!uses) throw SpecError("influence: spec has no term on '" + distance_column + "'");

  const auto raw = table.column(distance_column);
  for (double d : raw) {
    if (d < 0.0) throw DataError("influence: negative distance in '" + distance_column + "'");
  }
  const std::vector<double> distance(raw.begin(), raw.end());

  InfluenceProfile p;
  p.grid = influence_grid(dmin, dmax, step);
  const std::size_t n = p.grid.size();
  p.ll.assign(n, std::numeric_limits<double>::quiet_NaN());
  p.converged.assign(n, false);

  FitOptions base = options.fit;
  base.compute_covariance = false;
  base.compute_restricted = false;

  auto capped_at = [&](std::size_t g) {
    std::vector<double> capped(distance.size());
    for (std::size_t i = 0; i < distance.size(); ++i) capped[i] = std::min(distance[i], p.grid[g]);
    return capped;
  };
  auto fit_at = [&](std::size_t g, const FitOptions& opts) {
    return fit_model(table.with_column(distance_column, capped_at(g)), spec, opts);
  };

  if (options.warm_start) {
    FitOptions opts = base;
    std::vector<double> previous;
    for (std::size_t g = 0; g < n; ++g) {
      // Once D exceeds every distance the data no longer change; reuse the
      // previous fit so the tail of the profile is exactly constant.
      auto capped = capped_at(g);
      if (g > 0 && capped == previous) {
        p.ll[g] = p.ll[g - 1];
        p.converged[g] = p.converged[g - 1];
        continue;
      }
      previous = capped;
      try {
        auto fit = fit_model(table.with_column(distance_column, std::move(capped)), spec, opts);
        if (fit.converged) {
          p.ll[g] = fit.ll_converged;
          p.converged[g] = true;
          opts.start = fit.theta_hat;
        }
      } catch (const FitError&) {
      }
    }
  } else {
    std::vector<double> ll(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> ok(n, 0);
    parallel_for(n, [&](std::size_t g) {
      try {
        auto fit = fit_at(g, base);
        if (fit.converged) {
          ll[g] = fit.ll_converged;
          ok[g] = 1;
        }
      } catch (const FitError&) {
      }
    });
    p.ll = ll;
    for (std::size_t g = 0; g < n; ++g) p.converged[g] = ok[g] != 0;
  }

  std::size_t failed = 0;
  std::optional<std::size_t> best;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < n; ++g) {
    if (!p.converged[g]) {
      ++failed;
      continue;
    }
    lo = std::min(lo, p.ll[g]);
    hi = std::max(hi, p.ll[g]);
    // Strictly better beyond the tie tolerance moves the argmax upward.
    if (!best || p.ll[g] > p.ll[*best] + options.tie_tolerance) best = g;
  }
  if (!best) throw FitError("influence: no grid point converged");
  if (failed > 0) {
    p.warnings.push_back(std::to_string(failed) + " grid point(s) did not converge and were excluded");
  }
  p.d_star = p.grid[*best];
  p.ll_star = p.ll[*best];
  p.segment_length = 2.0 * p.d_star;
  if (hi - lo < options.flat_tolerance) {
    p.flat = true;
    p.warnings.push_back("flat profile: log-likelihood varies by less than " +
                         csv::format_double(options.flat_tolerance) + " over the grid");
  }
  return p;
}

}  // namespace crashmle
