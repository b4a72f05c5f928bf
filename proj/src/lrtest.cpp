#include "crashmle/lrtest.hpp"

#include <algorithm>
#include <cmath>

#include "crashmle/chi2.hpp"
#include "crashmle/csv.hpp"
#include "crashmle/design.hpp"
#include "crashmle/errors.hpp"
#include "crashmle/halton.hpp"
#include "crashmle/mnl.hpp"
#include "crashmle/parallel.hpp"

namespace crashmle {

LrStatistic lr_statistic(double ll_all, double ll_a, double ll_b, int params_all, int params_a,
                         int params_b, double tolerance) {
  LrStatistic s;
  s.dof = params_a + params_b - params_all;
  if (s.dof <= 0) throw SpecError("lr test: degrees of freedom must be positive");
  s.x2 = -2.0 * (ll_all - ll_a - ll_b);
  if (s.x2 < 0) {
    if (s.x2 < -tolerance) {
      throw FitError("lr test: statistic " + csv::format_double(s.x2) +
                     " is negative beyond tolerance; split fits did not reach their optimum");
    }
    s.x2 = 0.0;
    s.clamped = true;
  }
  return s;
}

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw SpecError("histogram: need at least one bin");
  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  if (top <= 0.0) top = 1.0;
  Histogram h;
  const auto nb = static_cast<std::size_t>(bins);
  for (std::size_t b = 0; b <= nb; ++b) h.edges.push_back(top * static_cast<double>(b) / bins);
  h.counts.assign(nb, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>(v / top * bins);
    h.counts[std::min(b, nb - 1)] += 1;
  }
  return h;
}

namespace {

struct ThreeFits {
  FitResult all;
  FitResult a;
  FitResult b;
};

ThreeFits fit_three(const ObservationTable& table, const ModelSpec& spec,
                    const std::string& flag_column, const FitOptions& pooled_options,
                    const FitOptions& split_options) {
  const auto [part_a, part_b] = split_by_flag(table, flag_column);
  return {fit_model(table, spec, pooled_options), fit_model(part_a, spec, split_options),
          fit_model(part_b, spec, split_options)};
}

}  // namespace

LrTestResult lr_test(const ObservationTable& table, const ModelSpec& spec,
                     const std::string& flag_column, const FitOptions& options) {
  FitOptions opts = options;
  opts.compute_covariance = false;
  opts.compute_restricted = false;
  const auto fits = fit_three(table, spec, flag_column, opts, opts);
  for (const auto* f : {&fits.all, &fits.a, &fits.b}) {
    if (!f->converged) {
      throw FitError("lr test: a " + std::string(f == &fits.all ? "pooled" : "subsample") +
                     " fit (n = " + std::to_string(f->n_obs) + ") did not converge: " + f->status);
    }
  }
  const auto p = static_cast<int>(fits.all.n_params());
  const auto stat = lr_statistic(fits.all.ll_converged, fits.a.ll_converged, fits.b.ll_converged, p,
                                 static_cast<int>(fits.a.n_params()),
                                 static_cast<int>(fits.b.n_params()));
  LrTestResult r;
  r.x2 = stat.x2;
  r.dof = stat.dof;
  r.p_asymptotic = chi2_sf(stat.x2, stat.dof);
  r.ll_all = fits.all.ll_converged;
  r.ll_a = fits.a.ll_converged;
  r.ll_b = fits.b.ll_converged;
  r.n_a = fits.a.n_obs;
  r.n_b = fits.b.n_obs;
  if (stat.clamped) r.warnings.push_back("slightly negative statistic clamped to 0");
  return r;
}

ObservationTable simulate_under_null(const FitResult& pooled, const ObservationTable& table,
                                     Rng& rng) {
  if (!pooled.converged) throw FitError("simulate_under_null: pooled fit did not converge");
  const auto design = build_design(table, pooled.spec);
  if (static_cast<std::size_t>(pooled.theta_hat.size()) != design.n_params()) {
    throw FitError("simulate_under_null: fit does not match the table");
  }
  const auto& theta = pooled.theta_hat;
  const std::size_t n_terms = design.n_terms();
  const auto& random = design.random_terms();

  std::vector<double> coef(n_terms);
  auto draw_row_coefficients = [&](std::size_t) {
    for (std::size_t k = 0; k < n_terms; ++k) coef[k] = theta[static_cast<Eigen::Index>(design.slot(k).location)];
    for (auto k : random) {
      const MixingTerm m{design.term(k).kind, coef[k],
                         std::exp(theta[static_cast<Eigen::Index>(*design.slot(k).log_scale)])};
      coef[k] = transform_draw(rng.uniform(), m);
    }
  };

  if (is_severity(pooled.spec.family)) {
    const std::size_t n_out = design.n_outcomes();
    std::vector<double> eta(n_out);
    std::vector<double> prob(n_out);
    // Outcome indices are in spec order; map back onto the table's labels.
    std::vector<int> to_table(n_out, -1);
    for (std::size_t j = 0; j < n_out; ++j) {
      const auto& labels = table.labels();
      const auto it = std::find(labels.begin(), labels.end(), pooled.spec.outcomes[j]);
      to_table[j] = static_cast<int>(it - labels.begin());
    }
    auto labels = table.labels();
    for (std::size_t j = 0; j < n_out; ++j) {
      if (to_table[j] == static_cast<int>(labels.size())) {
        labels.push_back(pooled.spec.outcomes[j]);
      }
    }
    std::vector<int> outcome(table.n_rows());
    for (std::size_t row = 0; row < table.n_rows(); ++row) {
      draw_row_coefficients(row);
      std::fill(eta.begin(), eta.end(), 0.0);
      for (std::size_t k = 0; k < n_terms; ++k) {
        for (std::size_t j = 0; j < n_out; ++j) {
          if (design.applies(k, j)) eta[j] += coef[k] * design.value(k, row);
        }
      }
      softmax(eta, prob);
      outcome[row] = to_table[static_cast<std::size_t>(rng.categorical(prob))];
    }
    if (labels.size() != table.labels().size()) {
      // Table lacked some model outcome; rebuild with the extended label set.
      std::vector<std::vector<double>> cols;
      for (const auto& name : table.column_names()) {
        const auto c = table.column(name);
        cols.emplace_back(c.begin(), c.end());
      }
      return ObservationTable::severity(table.outcome_column(), labels, std::move(outcome),
                                        table.column_names(), std::move(cols));
    }
    return table.with_outcomes(std::move(outcome));
  }

  const double alpha = std::exp(theta[static_cast<Eigen::Index>(*design.log_alpha_index())]);
  std::vector<std::int64_t> counts(table.n_rows());
  for (std::size_t row = 0; row < table.n_rows(); ++row) {
    draw_row_coefficients(row);
    double eta = 0.0;
    for (std::size_t k = 0; k < n_terms; ++k) eta += coef[k] * design.value(k, row);
    counts[row] = rng.negative_binomial(std::exp(eta), alpha);
  }
  return table.with_counts(std::move(counts));
}

LrTestResult mc_null_distribution(const ObservationTable& table, const ModelSpec& spec,
                                  const std::string& flag_column, const McOptions& options) {
  if (options.replicates < 100) throw SpecError("mc lr test: need at least 100 replicates");

  FitOptions base = options.fit;
  base.compute_covariance = false;
  base.compute_restricted = false;
  base.start.reset();

  LrTestResult result = lr_test(table, spec, flag_column, base);
  FitResult pooled = fit_model(table, spec, base);

  FitOptions warm = base;
  warm.start = pooled.theta_hat;
  const auto reps = static_cast<std::size_t>(options.replicates);
  std::vector<double> x2(reps, 0.0);
  std::vector<char> ok(reps, 0);

  parallel_for(reps, [&](std::size_t rep) {
    Rng rng = Rng::stream(options.seed, rep);
    try {
      const auto synthetic = simulate_under_null(pooled, table, rng);
      const auto fits = fit_three(synthetic, spec, flag_column, warm, warm);
      if (!fits.all.converged || !fits.a.converged || !fits.b.converged) return;
      const auto s = lr_statistic(fits.all.ll_converged, fits.a.ll_converged, fits.b.ll_converged,
                                  static_cast<int>(fits.all.n_params()),
                                  static_cast<int>(fits.a.n_params()),
                                  static_cast<int>(fits.b.n_params()));
      x2[rep] = s.x2;
      ok[rep] = 1;
    } catch (const FitError&) {
      // Counted as a failed replicate below.
    }
  });

  std::size_t exceed = 0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    if (!ok[rep]) {
      ++result.failed_replicates;
      continue;
    }
    result.simulated_x2.push_back(x2[rep]);
    if (x2[rep] >= result.x2) ++exceed;
  }
  result.replicates = options.replicates;
  result.seed = options.seed;
  result.bias_corrected = options.bias_corrected;
  const double failed_share = static_cast<double>(result.failed_replicates) / static_cast<double>(reps);
  if (failed_share > options.max_failure_share) {
    throw FitError("mc lr test: " + std::to_string(result.failed_replicates) + " of " +
                   std::to_string(reps) + " replicates failed to converge (limit " +
                   csv::format_double(options.max_failure_share * 100) + "%)");
  }
  if (result.failed_replicates > 0) {
    result.warnings.push_back(std::to_string(result.failed_replicates) +
                              " replicate(s) dropped after non-converged refits");
  }
  const auto valid = static_cast<double>(result.simulated_x2.size());
  result.p_mc = options.bias_corrected ? (static_cast<double>(exceed) + 1.0) / (valid + 1.0)
                                       : static_cast<double>(exceed) / valid;
  result.null_histogram = make_histogram(result.simulated_x2, options.bins);
  return result;
}

}  // namespace crashmle
