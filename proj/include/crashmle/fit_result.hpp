#ifndef CRASHMLE_FIT_RESULT_HPP
#define CRASHMLE_FIT_RESULT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crashmle/model_spec.hpp"

namespace crashmle {

/// Outcome of one maximum-likelihood fit.
///
/// `theta_hat` and `covariance` are on the packed (estimation) scale, where
/// random-coefficient scales and alpha appear as logarithms. `estimates`,
/// `standard_errors` and `t_ratios` are on the reporting scale: log-scaled
/// entries are exponentiated and their standard errors obtained by the delta
/// method. Undefined standard errors (and the matching t-ratios) are NaN.
struct FitResult {
  ModelSpec spec;
  std::vector<std::string> labels;
  std::vector<bool> log_scaled;

  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd covariance;
  std::string covariance_method = "none";

  Eigen::VectorXd estimates;
  Eigen::VectorXd standard_errors;
  Eigen::VectorXd t_ratios;

  double ll_converged = 0.0;
  double ll_restricted = 0.0;
  double mcfadden_rho2 = 0.0;
  // Set when ll_converged < ll_restricted: the index the two values would
  // give if their labels were transposed.
  std::optional<double> rho2_if_transposed;

  bool converged = false;
  std::string status;
  int iterations = 0;
  double gradient_norm = 0.0;
  Eigen::VectorXd start;

  std::size_t n_obs = 0;
  std::optional<int> draws;
  std::optional<std::uint64_t> seed;
  int halton_skip = 0;
  bool halton_shift = false;

  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t n_params() const { return static_cast<std::size_t>(theta_hat.size()); }
};

// Fills the reporting-scale columns, fit statistics and the transposition
// check. `log_scaled` may be empty (all parameters on their natural scale).
FitResult summarize(const Eigen::VectorXd& theta_hat, const Eigen::MatrixXd& cov, double ll,
                    double ll_restricted, const std::vector<bool>& log_scaled = {});

[[nodiscard]] double mcfadden_rho2(double ll, double ll_restricted);

}  // namespace crashmle

#endif  // CRASHMLE_FIT_RESULT_HPP
