#include "crashmle/mnl.hpp"

#include <algorithm>
#include <cmath>

#include "crashmle/errors.hpp"
#include "crashmle/parallel.hpp"

namespace crashmle {

void softmax(std::span<const double> eta, std::span<double> probs) {
  double top = eta[0];
  for (double e : eta) {
    if (!std::isfinite(e)) throw FitError("mnl: non-finite linear predictor");
    top = std::max(top, e);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    probs[j] = std::exp(eta[j] - top);
    total += probs[j];
  }
  for (auto& p : probs) p /= total;
}

std::vector<double> mnl_prob(const Eigen::VectorXd& theta, const DesignMatrix& design,
                             std::size_t row) {
  if (static_cast<std::size_t>(theta.size()) != design.n_params()) {
    throw FitError("mnl: parameter vector length does not match the design");
  }
  const std::size_t n_out = design.n_outcomes();
  std::vector<double> eta(n_out);
  for (std::size_t j = 0; j < n_out; ++j) eta[j] = design.linear_predictor(theta, row, j);
  std::vector<double> probs(n_out);
  softmax(eta, probs);
  return probs;
}

double equal_shares_loglik(std::size_t n_rows, std::size_t n_outcomes) {
  return static_cast<double>(n_rows) * std::log(1.0 / static_cast<double>(n_outcomes));
}

double mnl_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design, Eigen::VectorXd* grad,
                  Eigen::MatrixXd* scores) {
  const std::size_t p = design.n_params();
  if (static_cast<std::size_t>(theta.size()) != p) {
    throw FitError("mnl: parameter vector length does not match the design");
  }
  const std::size_t n = design.n_rows();
  const std::size_t n_out = design.n_outcomes();
  const std::size_t n_terms = design.n_terms();
  const auto outcome = design.outcomes();
  const bool want_grad = grad != nullptr || scores != nullptr;
  if (scores != nullptr) scores->setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));

  std::vector<double> coef(n_terms);
  for (std::size_t k = 0; k < n_terms; ++k) coef[k] = theta[static_cast<Eigen::Index>(design.slot(k).location)];

  const std::size_t blocks = block_count(n);
  std::vector<double> partial_ll(blocks, 0.0);
  std::vector<Eigen::VectorXd> partial_grad(want_grad ? blocks : 0,
                                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)));

  parallel_for(blocks, [&](std::size_t b) {
    std::vector<double> eta(n_out);
    std::vector<double> prob(n_out);
    const std::size_t end = std::min(n, (b + 1) * kRowBlock);
    double ll = 0.0;
    for (std::size_t row = b * kRowBlock; row < end; ++row) {
      std::fill(eta.begin(), eta.end(), 0.0);
      for (std::size_t k = 0; k < n_terms; ++k) {
        const double v = coef[k] * design.value(k, row);
        for (std::size_t j = 0; j < n_out; ++j) {
          if (design.applies(k, j)) eta[j] += v;
        }
      }
      double top = eta[0];
      for (double e : eta) top = std::max(top, e);
      double total = 0.0;
      for (std::size_t j = 0; j < n_out; ++j) {
        prob[j] = std::exp(eta[j] - top);
        total += prob[j];
      }
      const auto obs = static_cast<std::size_t>(outcome[row]);
      ll += eta[obs] - top - std::log(total);
      if (!want_grad) continue;
      for (auto& q : prob) q /= total;
      for (std::size_t k = 0; k < n_terms; ++k) {
        double share = 0.0;
        for (std::size_t j = 0; j < n_out; ++j) {
          if (design.applies(k, j)) share += prob[j];
        }
        const double s = design.value(k, row) * ((design.applies(k, obs) ? 1.0 : 0.0) - share);
        const auto idx = static_cast<Eigen::Index>(design.slot(k).location);
        partial_grad[b][idx] += s;
        if (scores != nullptr) (*scores)(static_cast<Eigen::Index>(row), idx) = s;
      }
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
