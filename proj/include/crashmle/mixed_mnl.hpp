#ifndef CRASHMLE_MIXED_MNL_HPP
#define CRASHMLE_MIXED_MNL_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "crashmle/design.hpp"
#include "crashmle/simulation.hpp"

namespace crashmle {

// (1/R) sum_r of MNL probabilities with the row's r-th coefficient draw.
std::vector<double> simulated_prob(const Eigen::VectorXd& theta, const DesignMatrix& design,
                                   std::size_t row, const SimulationDraws& sim);

// Simulated log-likelihood sum_n log Ptilde_n(observed) with its analytic
// gradient (common random numbers: `sim` is held fixed).
double simulated_mnl_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design,
                            const SimulationDraws& sim, Eigen::VectorXd* grad = nullptr,
                            Eigen::MatrixXd* scores = nullptr);

}  // namespace crashmle

#endif  // CRASHMLE_MIXED_MNL_HPP
