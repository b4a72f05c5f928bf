#include "crashmle/simulation.hpp"

#include <cmath>

#include "crashmle/errors.hpp"

namespace crashmle {

SimulationDraws::SimulationDraws(const DesignMatrix& design, const DrawMatrix& draws)
    : draws_(draws.draws()) {
  const auto& random = design.random_terms();
  if (draws.dims() < random.size() || draws.n_obs() != design.n_rows()) {
    throw FitError("draw matrix does not match the design");
  }
  for (std::size_t q = 0; q < random.size(); ++q) {
    const CoefKind kind = design.term(random[q]).kind;
    std::vector<double> z(design.n_rows() * draws_);
    for (std::size_t n = 0; n < design.n_rows(); ++n) {
      for (std::size_t r = 0; r < draws_; ++r) z[n * draws_ + r] = standardize_draw(draws.uniform(q, n, r), kind);
    }
    z_.push_back(std::move(z));
  }
}

SimulationDraws::SimulationDraws(const DesignMatrix& design) : draws_(1) {
  if (!design.random_terms().empty()) throw FitError("random terms need a draw matrix");
}

void draw_coefficients(const Eigen::VectorXd& theta, const DesignMatrix& design,
                       const SimulationDraws& sim, std::size_t obs, std::size_t r,
                       std::vector<double>& coef) {
  coef.resize(design.n_terms());
  for (std::size_t k = 0; k < design.n_terms(); ++k) {
    coef[k] = theta[static_cast<Eigen::Index>(design.slot(k).location)];
  }
  const auto& random = design.random_terms();
  for (std::size_t q = 0; q < sim.n_random(); ++q) {
    const std::size_t k = random[q];
    const double scale = std::exp(theta[static_cast<Eigen::Index>(*design.slot(k).log_scale)]);
    coef[k] += scale * sim.z(q, obs, r);
  }
}

}  // namespace crashmle
