#ifndef CRASHMLE_SIMULATION_HPP
#define CRASHMLE_SIMULATION_HPP

#include <cstddef>
#include <vector>

#include "crashmle/design.hpp"
#include "crashmle/halton.hpp"

namespace crashmle {

/// Standardized draws (Phi^-1(u) or 2u - 1) for every random term of a
/// design, computed once per fit and reused by every likelihood evaluation.
class SimulationDraws {
 public:
  SimulationDraws(const DesignMatrix& design, const DrawMatrix& draws);
  // Degenerate single "draw" with no random terms.
  explicit SimulationDraws(const DesignMatrix& design);

  [[nodiscard]] std::size_t draws() const { return draws_; }
  [[nodiscard]] std::size_t n_random() const { return z_.size(); }
  // z for the q-th random term (design.random_terms()[q]).
  [[nodiscard]] double z(std::size_t q, std::size_t obs, std::size_t r) const {
    return z_[q][obs * draws_ + r];
  }

 private:
  std::size_t draws_ = 1;
  std::vector<std::vector<double>> z_;
};

// Per-term coefficients for one draw: location + exp(log_scale) * z.
void draw_coefficients(const Eigen::VectorXd& theta, const DesignMatrix& design,
                       const SimulationDraws& sim, std::size_t obs, std::size_t r,
                       std::vector<double>& coef);

}  // namespace crashmle

#endif  // CRASHMLE_SIMULATION_HPP
