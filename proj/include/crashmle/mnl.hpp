#ifndef CRASHMLE_MNL_HPP
#define CRASHMLE_MNL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crashmle/design.hpp"

namespace crashmle {

// exp(eta_i - max) / sum_j exp(eta_j - max). Throws FitError on a
// non-finite predictor.
void softmax(std::span<const double> eta, std::span<double> probs);

// Outcome probabilities for one row, in the spec's outcome order. Random
// terms (if any) contribute their location only.
std::vector<double> mnl_prob(const Eigen::VectorXd& theta, const DesignMatrix& design,
                             std::size_t row);

// Sum over rows of log P(observed outcome). Writes the analytic gradient and
// the per-row score matrix when requested. Log-scale parameters get zero
// gradient.
double mnl_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design,
                  Eigen::VectorXd* grad = nullptr, Eigen::MatrixXd* scores = nullptr);

// N * log(1 / I): every outcome equally likely.
[[nodiscard]] double equal_shares_loglik(std::size_t n_rows, std::size_t n_outcomes);

}  // namespace crashmle

#endif  // CRASHMLE_MNL_HPP
