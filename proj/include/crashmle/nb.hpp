#ifndef CRASHMLE_NB_HPP
#define CRASHMLE_NB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crashmle/design.hpp"
#include "crashmle/effects.hpp"
#include "crashmle/fit_result.hpp"
#include "crashmle/simulation.hpp"

namespace crashmle {

// log P(A = count) for the NB2 model with mean lambda and variance
// lambda (1 + alpha lambda). Throws FitError for alpha <= 0, lambda <= 0 or a
// negative count.
[[nodiscard]] double nb_logpmf(std::int64_t count, double lambda, double alpha);

// Sum of nb_logpmf over rows with lambda = exp(beta'x), alpha =
// exp(log_alpha). Random terms (if any) contribute their location.
double nb_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design,
                 Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* scores = nullptr);

// Simulated log-likelihood: log of (1/R) sum_r NB(A | lambda_r, alpha), the
// random betas varying across draws and alpha fixed.
double simulated_nb_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design,
                           const SimulationDraws& sim, Eigen::VectorXd* grad = nullptr,
                           Eigen::MatrixXd* scores = nullptr);

// Averaged marginal effect of each variable: mean over rows (and draws, when
// `sim` is given) of lambda * beta_k.
EffectsReport marginal_effects(const FitResult& fit, const DesignMatrix& design,
                               const std::vector<std::string>& variables,
                               const SimulationDraws* sim = nullptr);

}  // namespace crashmle

#endif  // CRASHMLE_NB_HPP
