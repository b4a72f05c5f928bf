#include "crashmle/fit_result.hpp"

#include <cmath>
#include <limits>

#include "crashmle/csv.hpp"
#include "crashmle/errors.hpp"

namespace crashmle {

double mcfadden_rho2(double ll, double ll_restricted) {
  if (ll_restricted == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - ll / ll_restricted;
}

FitResult summarize(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& cov, double ll,
                    double ll_restricted, const std::vector<bool>& log_scaled) {
  const Eigen::Index p = theta_hat.size();
  if (cov.rows() != p || cov.cols() != p) throw FitError("summarize: covariance dimension mismatch");
  if (!log_scaled.empty() && static_cast<Eigen::Index>(log_scaled.size()) != p) {
    throw FitError("summarize: log-scale mask dimension mismatch");
  }

  FitResult r;
  r.theta_hat = theta_hat;
  r.covariance = cov;
  r.log_scaled = log_scaled.empty() ? std::vector<bool>(static_cast<std::size_t>(p), false) : log_scaled;
  r.estimates.resize(p);
  r.standard_errors.resize(p);
  r.t_ratios.resize(p);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index k = 0; k < p; ++k) {
    const double var = cov(k, k);
    const double se_packed = (std::isfinite(var) && var >= 0) ? std::sqrt(var) : nan;
    if (r.log_scaled[static_cast<std::size_t>(k)]) {
      r.estimates[k] = std::exp(theta_hat[k]);
      r.standard_errors[k] = r.estimates[k] * se_packed;
    } else {
      r.estimates[k] = theta_hat[k];
      r.standard_errors[k] = se_packed;
    }
    r.t_ratios[k] = r.standard_errors[k] > 0 ? r.estimates[k] / r.standard_errors[k] : nan;
  }

  r.ll_converged = ll;
  r.ll_restricted = ll_restricted;
  r.mcfadden_rho2 = mcfadden_rho2(ll, ll_restricted);
  // Small negative gaps are optimizer noise on nested models.
  if (ll < ll_restricted - 1e-6 * std::max(1.0, std::abs(ll_restricted))) {
    r.rho2_if_transposed = mcfadden_rho2(ll_restricted, ll);
    r.warnings.push_back("log-likelihood at convergence (" + csv::format_double(ll) +
                         ") is below the restricted log-likelihood (" +
                         csv::format_double(ll_restricted) +
                         "); the two values may be transposed (rho2 with values swapped = " +
                         csv::format_double(*r.rho2_if_transposed) + ")");
  }
  return r;
}

}  // namespace crashmle
