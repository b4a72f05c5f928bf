#ifndef CRASHMLE_SEVERITY_EFFECTS_HPP
#define CRASHMLE_SEVERITY_EFFECTS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crashmle/design.hpp"
#include "crashmle/effects.hpp"
#include "crashmle/fit_result.hpp"
#include "crashmle/simulation.hpp"

namespace crashmle {

// Averaged elasticities of a fixed-parameter MNL for continuous variables:
// direct <(1 - P_j) b_j x>, cross -<P_j b_j x>, one entry per (equation j
// the variable enters, probability outcome i), averaged over every row.
// Throws SpecError if a variable is not in the model or only takes 0/1.
EffectsReport elasticities(const FitResult& fit, const DesignMatrix& design,
                           const std::vector<std::string>& variables);

// Averaged pseudo-elasticities of a fixed-parameter MNL for 0/1 indicators:
// per row (P_i(x_j = 1) - P_i(x_j = 0)) / P_i(observed x), the indicator
// toggled in equation j only. Throws SpecError for non-binary variables.
EffectsReport pseudo_elasticities(const FitResult& fit, const DesignMatrix& design,
                                  const std::vector<std::string>& variables);

// Both kinds for a mixed MNL, with simulated probabilities and the
// draw-averaged derivative (1/R) sum_r P_ri (1[i = j] - P_rj) b_rj.
EffectsReport mixed_effects(const FitResult& fit, const DesignMatrix& design,
                            const SimulationDraws& sim,
                            const std::vector<std::string>& continuous,
                            const std::vector<std::string>& indicators);

// Row-level elasticities of every outcome's probability with respect to
// `variable` in `equation`'s predictor (before averaging). `sim` may be
// null for a fixed-parameter model.
std::vector<double> row_elasticities(const Eigen::VectorXd& theta, const DesignMatrix& design,
                                     std::size_t row, const std::string& variable,
                                     std::size_t equation, const SimulationDraws* sim = nullptr);

std::vector<double> row_pseudo_elasticities(const Eigen::VectorXd& theta,
                                            const DesignMatrix& design, std::size_t row,
                                            const std::string& variable, std::size_t equation,
                                            const SimulationDraws* sim = nullptr);

}  // namespace crashmle

#endif  // CRASHMLE_SEVERITY_EFFECTS_HPP
