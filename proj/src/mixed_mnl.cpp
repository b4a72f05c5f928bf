#include "crashmle/mixed_mnl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crashmle/errors.hpp"
#include "crashmle/mnl.hpp"
#include "crashmle/parallel.hpp"

namespace crashmle {

namespace {

void predictors(const DesignMatrix& design, const std::vector<double>& coef, std::size_t row,
                std::vector<double>& eta) {
  std::fill(eta.begin(), eta.end(), 0.0);
  for (std::size_t k = 0; k < coef.size(); ++k) {
    const double v = coef[k] * design.value(k, row);
    for (std::size_t j = 0; j < eta.size(); ++j) {
      if (design.applies(k, j)) eta[j] += v;
    }
  }
}

}  // namespace

std::vector<double> simulated_prob(const Eigen::VectorXd& theta, const DesignMatrix& design,
                                   std::size_t row, const SimulationDraws& sim) {
  if (static_cast<std::size_t>(theta.size()) != design.n_params()) {
    throw FitError("mixed mnl: parameter vector length does not match the design");
  }
  const std::size_t n_out = design.n_outcomes();
  std::vector<double> coef;
  std::vector<double> eta(n_out);
  std::vector<double> p(n_out);
  std::vector<double> acc(n_out, 0.0);
  for (std::size_t r = 0; r < sim.draws(); ++r) {
    draw_coefficients(theta, design, sim, row, r, coef);
    predictors(design, coef, row, eta);
    softmax(eta, p);
    for (std::size_t j = 0; j < n_out; ++j) acc[j] += p[j];
  }
  for (auto& a : acc) a /= static_cast<double>(sim.draws());
  return acc;
}

double simulated_mnl_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design,
                            const SimulationDraws& sim, Eigen::VectorXd* grad,
                            Eigen::MatrixXd* scores) {
  const std::size_t p = design.n_params();
  if (static_cast<std::size_t>(theta.size()) != p) {
    throw FitError("mixed mnl: parameter vector length does not match the design");
  }
  const std::size_t n = design.n_rows();
  const std::size_t n_out = design.n_outcomes();
  const std::size_t n_terms = design.n_terms();
  const std::size_t n_draws = sim.draws();
  const auto outcome = design.outcomes();
  const auto& random = design.random_terms();
  const bool want_grad = grad != nullptr || scores != nullptr;
  if (scores != nullptr) scores->setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));

  std::vector<double> scale(random.size());
  for (std::size_t q = 0; q < random.size(); ++q) {
    scale[q] = std::exp(theta[static_cast<Eigen::Index>(*design.slot(random[q]).log_scale)]);
  }

  const std::size_t blocks = block_count(n);
  std::vector<double> partial_ll(blocks, 0.0);
  std::vector<Eigen::VectorXd> partial_grad(want_grad ? blocks : 0,
                                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)));

  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> coef;
    std::vector<double> eta(n_out);
    std::vector<double> prob(n_out);
    std::vector<double> log_p(n_draws);
    // Per draw, per term: x_k * (1[k enters observed outcome] - sum_{j in k} P_j).
    std::vector<double> resid(want_grad ? n_draws * n_terms : 0);
    Eigen::VectorXd row_grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    const std::size_t end = std::min(n, (b + 1) * kRowBlock);
    double ll = 0.0;
    for (std::size_t row = b * kRowBlock; row < end; ++row) {
      const auto obs = static_cast<std::size_t>(outcome[row]);
      double top_lp = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < n_draws; ++r) {
        draw_coefficients(theta, design, sim, row, r, coef);
        predictors(design, coef, row, eta);
        double top = eta[0];
        for (double e : eta) top = std::max(top, e);
        double total = 0.0;
        for (std::size_t j = 0; j < n_out; ++j) {
          prob[j] = std::exp(eta[j] - top);
          total += prob[j];
        }
        log_p[r] = eta[obs] - top - std::log(total);
        top_lp = std::max(top_lp, log_p[r]);
        if (!want_grad) continue;
        for (auto& q : prob) q /= total;
        for (std::size_t k = 0; k < n_terms; ++k) {
          double share = 0.0;
          for (std::size_t j = 0; j < n_out; ++j) {
            if (design.applies(k, j)) share += prob[j];
          }
          resid[r * n_terms + k] =
              design.value(k, row) * ((design.applies(k, obs) ? 1.0 : 0.0) - share);
        }
      }
      double sum_w = 0.0;
      for (std::size_t r = 0; r < n_draws; ++r) sum_w += std::exp(log_p[r] - top_lp);
      ll += top_lp + std::log(sum_w) - std::log(static_cast<double>(n_draws));
      if (!want_grad) continue;

      row_grad.setZero();
      for (std::size_t r = 0; r < n_draws; ++r) {
        const double w = std::exp(log_p[r] - top_lp) / sum_w;
        for (std::size_t k = 0; k < n_terms; ++k) {
          row_grad[static_cast<Eigen::Index>(design.slot(k).location)] += w * resid[r * n_terms + k];
        }
        for (std::size_t q = 0; q < random.size(); ++q) {
          const std::size_t k = random[q];
          row_grad[static_cast<Eigen::Index>(*design.slot(k).log_scale)] +=
              w * resid[r * n_terms + k] * scale[q] * sim.z(q, row, r);
        }
      }
      partial_grad[b] += row_grad;
      if (scores != nullptr) scores->row(static_cast<Eigen::Index>(row)) = row_grad.transpose();
    }
    partial_ll[b] = ll;
  });

  double ll = 0.0;
  for (double v : partial_ll) ll += v;
  if (grad != nullptr) {
    grad->setZero(static_cast<Eigen::Index>(p));
    for (const auto& g : partial_grad) *grad += g;
  }
  return ll;
}

}  // namespace crashmle
