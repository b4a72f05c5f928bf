#include "crashmle/nb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>

#include "crashmle/errors.hpp"
#include "crashmle/parallel.hpp"

namespace crashmle {

namespace {

// Parts of log NB(A | lambda, alpha) that do not involve lambda, with
// r = 1/alpha: lgamma(A + r) - lgamma(r) - lgamma(A + 1), and the derivative
// of the first difference with respect to r.
struct CountTerms {
  double value;
  double d_r;
};

CountTerms count_terms(std::int64_t a, double r) {
  const double lfact = std::lgamma(static_cast<double>(a) + 1.0);
  // Direct sums avoid cancellation between two huge lgamma values when r is
  // large (near-Poisson) and are cheap for small counts.
  if (a <= 8 || r > 1e5) {
    double v = 0.0;
    double d = 0.0;
    for (std::int64_t k = 0; k < a; ++k) {
      const double rk = r + static_cast<double>(k);
      v += std::log(rk);
      d += 1.0 / rk;
    }
    return {v - lfact, d};
  }
  const double ar = static_cast<double>(a) + r;
  return {std::lgamma(ar) - std::lgamma(r) - lfact,
          boost::math::digamma(ar) - boost::math::digamma(r)};
}

// Lambda-dependent part and its derivatives.
struct DrawTerms {
  double log_p;
  double d_eta;     // d log p / d log(lambda)
  double d_log_a;   // d log p / d log(alpha), excluding CountTerms::d_r
};

DrawTerms draw_terms(std::int64_t a, double eta, double r, const CountTerms& ct) {
  const double lambda = std::exp(eta);
  const double ad = static_cast<double>(a);
  const double ratio = lambda / r;
  const double l1p = std::log1p(ratio);
  DrawTerms t;
  t.log_p = ct.value - r * l1p + ad * (eta - std::log(r + lambda));
  t.d_eta = (ad - lambda) / (1.0 + lambda / r);
  t.d_log_a = -r * (ct.d_r - l1p + (lambda - ad) / (r + lambda));
  return t;
}

}  // namespace

double nb_logpmf(std::int64_t count, double lambda, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw FitError("nb: alpha must be positive");
  if (!(lambda > 0) || !std::isfinite(lambda)) throw FitError("nb: lambda must be positive");
  if (count < 0) throw FitError("nb: negative count");
  const double r = 1.0 / alpha;
  return draw_terms(count, std::log(lambda), r, count_terms(count, r)).log_p;
}

double nb_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design, Eigen::VectorXd* grad,
                 Eigen::MatrixXd* scores) {
  const std::size_t p = design.n_params();
  if (static_cast<std::size_t>(theta.size()) != p || !design.log_alpha_index()) {
    throw FitError("nb: parameter vector does not match the design");
  }
  const std::size_t n = design.n_rows();
  const std::size_t n_terms = design.n_terms();
  const auto counts = design.counts();
  const auto a_idx = static_cast<Eigen::Index>(*design.log_alpha_index());
  const double r = std::exp(-theta[a_idx]);
  const bool want_grad = grad != nullptr || scores != nullptr;
  if (scores != nullptr) scores->setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));

  std::vector<double> coef(n_terms);
  for (std::size_t k = 0; k < n_terms; ++k) coef[k] = theta[static_cast<Eigen::Index>(design.slot(k).location)];

  const std::size_t blocks = block_count(n);
  std::vector<double> partial_ll(blocks, 0.0);
  std::vector<Eigen::VectorXd> partial_grad(want_grad ? blocks : 0,
                                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)));
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kRowBlock);
    double ll = 0.0;
    for (std::size_t row = b * kRowBlock; row < end; ++row) {
      double eta = 0.0;
      for (std::size_t k = 0; k < n_terms; ++k) eta += coef[k] * design.value(k, row);
      const auto ct = count_terms(counts[row], r);
      const auto t = draw_terms(counts[row], eta, r, ct);
      ll += t.log_p;
      if (!want_grad) continue;
      for (std::size_t k = 0; k < n_terms; ++k) {
        const auto idx = static_cast<Eigen::Index>(design.slot(k).location);
        const double s = t.d_eta * design.value(k, row);
        partial_grad[b][idx] += s;
        if (scores != nullptr) (*scores)(static_cast<Eigen::Index>(row), idx) = s;
      }
      partial_grad[b][a_idx] += t.d_log_a;
      if (scores != nullptr) (*scores)(static_cast<Eigen::Index>(row), a_idx) = t.d_log_a;
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

double simulated_nb_loglik(const Eigen::VectorXd& theta, const DesignMatrix& design,
                           const SimulationDraws& sim, Eigen::VectorXd* grad,
                           Eigen::MatrixXd* scores) {
  const std::size_t p = design.n_params();
  if (static_cast<std::size_t>(theta.size()) != p || !design.log_alpha_index()) {
    throw FitError("nb: parameter vector does not match the design");
  }
  const std::size_t n = design.n_rows();
  const std::size_t n_terms = design.n_terms();
  const std::size_t n_draws = sim.draws();
  const auto counts = design.counts();
  const auto& random = design.random_terms();
  const auto a_idx = static_cast<Eigen::Index>(*design.log_alpha_index());
  const double r = std::exp(-theta[a_idx]);
  const bool want_grad = grad != nullptr || scores != nullptr;
  if (scores != nullptr) scores->setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));

  std::vector<double> scale(random.size());
  for (std::size_t q = 0; q < random.size(); ++q) {
    scale[q] = std::exp(theta[static_cast<Eigen::Index>(*design.slot(random[q]).log_scale)]);
  }
  // Fixed part of the predictor is shared by all draws.
  std::vector<double> loc(n_terms);
  for (std::size_t k = 0; k < n_terms; ++k) loc[k] = theta[static_cast<Eigen::Index>(design.slot(k).location)];

  const std::size_t blocks = block_count(n);
  std::vector<double> partial_ll(blocks, 0.0);
  std::vector<Eigen::VectorXd> partial_grad(want_grad ? blocks : 0,
                                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)));
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<DrawTerms> terms(n_draws);
    Eigen::VectorXd row_grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    const std::size_t end = std::min(n, (b + 1) * kRowBlock);
    double ll = 0.0;
    for (std::size_t row = b * kRowBlock; row < end; ++row) {
      double eta0 = 0.0;
      for (std::size_t k = 0; k < n_terms; ++k) eta0 += loc[k] * design.value(k, row);
      const auto ct = count_terms(counts[row], r);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t d = 0; d < n_draws; ++d) {
        double eta = eta0;
        for (std::size_t q = 0; q < random.size(); ++q) {
          eta += scale[q] * sim.z(q, row, d) * design.value(random[q], row);
        }
        terms[d] = draw_terms(counts[row], eta, r, ct);
        top = std::max(top, terms[d].log_p);
      }
      double sum_w = 0.0;
      for (const auto& t : terms) sum_w += std::exp(t.log_p - top);
      ll += top + std::log(sum_w) - std::log(static_cast<double>(n_draws));
      if (!want_grad) continue;

      row_grad.setZero();
      double w_eta = 0.0;
      for (std::size_t d = 0; d < n_draws; ++d) {
        const double w = std::exp(terms[d].log_p - top) / sum_w;
        w_eta += w * terms[d].d_eta;
        row_grad[a_idx] += w * terms[d].d_log_a;
        for (std::size_t q = 0; q < random.size(); ++q) {
          const std::size_t k = random[q];
          row_grad[static_cast<Eigen::Index>(*design.slot(k).log_scale)] +=
              w * terms[d].d_eta * design.value(k, row) * scale[q] * sim.z(q, row, d);
        }
      }
      for (std::size_t k = 0; k < n_terms; ++k) {
        row_grad[static_cast<Eigen::Index>(design.slot(k).location)] += w_eta * design.value(k, row);
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

EffectsReport marginal_effects(const FitResult& fit, const DesignMatrix& design,
                               const std::vector<std::string>& variables,
                               const SimulationDraws* sim) {
  if (is_severity(design.family())) throw SpecError("marginal effects need a count model");
  const std::size_t n_draws = sim ? sim->draws() : 1;
  EffectsReport report;
  std::vector<double> coef;
  for (const auto& v : variables) {
    const auto terms = design.terms_for(v);
    if (terms.empty() || v == kConstant) {
      throw SpecError("effects: variable '" + v + "' is not in the model");
    }
    double sum = 0.0;
    for (std::size_t row = 0; row < design.n_rows(); ++row) {
      for (std::size_t d = 0; d < n_draws; ++d) {
        if (sim != nullptr) {
          draw_coefficients(fit.theta_hat, design, *sim, row, d, coef);
        } else {
          coef.resize(design.n_terms());
          for (std::size_t k = 0; k < design.n_terms(); ++k) {
            coef[k] = fit.theta_hat[static_cast<Eigen::Index>(design.slot(k).location)];
          }
        }
        double eta = 0.0;
        for (std::size_t k = 0; k < design.n_terms(); ++k) eta += coef[k] * design.value(k, row);
        double beta = 0.0;
        for (auto k : terms) beta += coef[k];
        sum += std::exp(eta) * beta;
      }
    }
    EffectEntry e;
    e.variable = v;
    e.kind = EffectKind::marginal_effect;
    e.value = design.n_rows() ? sum / static_cast<double>(design.n_rows() * n_draws) : 0.0;
    e.direct = true;
    e.elastic = false;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace crashmle
