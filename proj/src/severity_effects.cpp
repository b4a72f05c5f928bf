#include "crashmle/severity_effects.hpp"

#include <algorithm>
#include <cmath>

#include "crashmle/errors.hpp"
#include "crashmle/mnl.hpp"

namespace crashmle {

std::string to_string(EffectKind k) {
  switch (k) {
    case EffectKind::elasticity: return "elasticity";
    case EffectKind::pseudo_elasticity: return "pseudo_elasticity";
    case EffectKind::marginal_effect: return "marginal_effect";
  }
  return "?";
}

std::optional<double> EffectsReport::value(std::string_view variable, std::string_view equation,
                                           std::string_view probability_outcome) const {
  for (const auto& e : entries) {
    if (e.variable == variable && e.equation == equation &&
        e.probability_outcome == probability_outcome) {
      return e.value;
    }
  }
  return std::nullopt;
}

namespace {

std::vector<std::size_t> equations_for(const DesignMatrix& design, const std::string& variable) {
  const auto terms = design.terms_for(variable);
  if (terms.empty() || variable == kConstant) {
    throw SpecError("effects: variable '" + variable + "' is not in the model");
  }
  std::vector<std::size_t> eqs;
  for (std::size_t j = 0; j < design.n_outcomes(); ++j) {
    for (auto k : terms) {
      if (design.applies(k, j)) {
        eqs.push_back(j);
        break;
      }
    }
  }
  return eqs;
}

bool all_binary(const DesignMatrix& design, const std::string& variable) {
  const auto terms = design.terms_for(variable);
  const auto values = design.term_values(terms.front());
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

void check_kind(const DesignMatrix& design, const std::string& variable, bool indicator) {
  const bool binary = all_binary(design, variable);
  if (indicator && !binary) {
    throw SpecError("effects: indicator '" + variable + "' takes values other than 0/1");
  }
  if (!indicator && binary) {
    throw SpecError("effects: '" + variable +
                    "' only takes 0/1 values; declare it as an indicator");
  }
}

// Coefficients for draw r (or the locations when sim is null).
void coefficients(const Eigen::VectorXd& theta, const DesignMatrix& design,
                  const SimulationDraws* sim, std::size_t row, std::size_t r,
                  std::vector<double>& coef) {
  if (sim != nullptr) {
    draw_coefficients(theta, design, *sim, row, r, coef);
    return;
  }
  coef.resize(design.n_terms());
  for (std::size_t k = 0; k < design.n_terms(); ++k) {
    coef[k] = theta[static_cast<Eigen::Index>(design.slot(k).location)];
  }
}

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

double equation_coefficient(const DesignMatrix& design, const std::vector<std::size_t>& terms,
                            const std::vector<double>& coef, std::size_t equation) {
  double b = 0.0;
  for (auto k : terms) {
    if (design.applies(k, equation)) b += coef[k];
  }
  return b;
}

EffectsReport average(const FitResult& fit, const DesignMatrix& design,
                      const std::vector<std::string>& variables, EffectKind kind,
                      const SimulationDraws* sim) {
  const bool indicator = kind == EffectKind::pseudo_elasticity;
  EffectsReport report;
  const auto& outcomes = design.spec().outcomes;
  const double n = static_cast<double>(design.n_rows());
  for (const auto& v : variables) {
    const auto eqs = equations_for(design, v);
    check_kind(design, v, indicator);
    for (auto j : eqs) {
      std::vector<double> sums(design.n_outcomes(), 0.0);
      for (std::size_t row = 0; row < design.n_rows(); ++row) {
        const auto e = indicator ? row_pseudo_elasticities(fit.theta_hat, design, row, v, j, sim)
                                 : row_elasticities(fit.theta_hat, design, row, v, j, sim);
        for (std::size_t i = 0; i < e.size(); ++i) sums[i] += e[i];
      }
      for (std::size_t i = 0; i < sums.size(); ++i) {
        EffectEntry entry;
        entry.variable = v;
        entry.equation = outcomes[j];
        entry.probability_outcome = outcomes[i];
        entry.kind = kind;
        entry.value = design.n_rows() ? sums[i] / n : 0.0;
        entry.direct = i == j;
        entry.elastic = std::abs(entry.value) >= 1.0;
        report.entries.push_back(std::move(entry));
      }
    }
  }
  return report;
}

void require_fixed(const DesignMatrix& design) {
  if (!design.random_terms().empty()) {
    throw SpecError("effects: model has random coefficients; use mixed_effects");
  }
}

}  // namespace

std::vector<double> row_elasticities(const Eigen::VectorXd& theta, const DesignMatrix& design,
                                     std::size_t row, const std::string& variable,
                                     std::size_t equation, const SimulationDraws* sim) {
  const auto terms = design.terms_for(variable);
  if (terms.empty()) throw SpecError("effects: variable '" + variable + "' is not in the model");
  const double x = design.value(terms.front(), row);
  const std::size_t n_out = design.n_outcomes();
  std::vector<double> coef;
  std::vector<double> eta(n_out);
  std::vector<double> prob(n_out);
  std::vector<double> out(n_out, 0.0);

  if (sim == nullptr) {
    coefficients(theta, design, nullptr, row, 0, coef);
    predictors(design, coef, row, eta);
    softmax(eta, prob);
    const double b = equation_coefficient(design, terms, coef, equation);
    for (std::size_t i = 0; i < n_out; ++i) {
      out[i] = (i == equation ? 1.0 - prob[equation] : -prob[equation]) * b * x;
    }
    return out;
  }

  std::vector<double> p_sum(n_out, 0.0);
  std::vector<double> d_sum(n_out, 0.0);
  for (std::size_t r = 0; r < sim->draws(); ++r) {
    coefficients(theta, design, sim, row, r, coef);
    predictors(design, coef, row, eta);
    softmax(eta, prob);
    const double b = equation_coefficient(design, terms, coef, equation);
    for (std::size_t i = 0; i < n_out; ++i) {
      p_sum[i] += prob[i];
      d_sum[i] += prob[i] * ((i == equation ? 1.0 : 0.0) - prob[equation]) * b;
    }
  }
  for (std::size_t i = 0; i < n_out; ++i) out[i] = d_sum[i] * x / p_sum[i];
  return out;
}

std::vector<double> row_pseudo_elasticities(const Eigen::VectorXd& theta,
                                            const DesignMatrix& design, std::size_t row,
                                            const std::string& variable, std::size_t equation,
                                            const SimulationDraws* sim) {
  const auto terms = design.terms_for(variable);
  if (terms.empty()) throw SpecError("effects: variable '" + variable + "' is not in the model");
  const double x = design.value(terms.front(), row);
  const std::size_t n_out = design.n_outcomes();
  const std::size_t n_draws = sim ? sim->draws() : 1;
  std::vector<double> coef;
  std::vector<double> eta(n_out);
  std::vector<double> shifted(n_out);
  std::vector<double> prob(n_out);
  std::vector<double> p_obs(n_out, 0.0);
  std::vector<double> p_on(n_out, 0.0);
  std::vector<double> p_off(n_out, 0.0);
  for (std::size_t r = 0; r < n_draws; ++r) {
    coefficients(theta, design, sim, row, r, coef);
    predictors(design, coef, row, eta);
    const double b = equation_coefficient(design, terms, coef, equation);
    softmax(eta, prob);
    for (std::size_t i = 0; i < n_out; ++i) p_obs[i] += prob[i];
    shifted = eta;
    shifted[equation] += b * (1.0 - x);
    softmax(shifted, prob);
    for (std::size_t i = 0; i < n_out; ++i) p_on[i] += prob[i];
    shifted = eta;
    shifted[equation] -= b * x;
    softmax(shifted, prob);
    for (std::size_t i = 0; i < n_out; ++i) p_off[i] += prob[i];
  }
  std::vector<double> out(n_out);
  // Common 1/R factors cancel in the ratio.
  for (std::size_t i = 0; i < n_out; ++i) out[i] = (p_on[i] - p_off[i]) / p_obs[i];
  return out;
}

EffectsReport elasticities(const FitResult& fit, const DesignMatrix& design,
                           const std::vector<std::string>& variables) {
  require_fixed(design);
  return average(fit, design, variables, EffectKind::elasticity, nullptr);
}

EffectsReport pseudo_elasticities(const FitResult& fit, const DesignMatrix& design,
                                  const std::vector<std::string>& variables) {
  require_fixed(design);
  return average(fit, design, variables, EffectKind::pseudo_elasticity, nullptr);
}

EffectsReport mixed_effects(const FitResult& fit, const DesignMatrix& design,
                            const SimulationDraws& sim,
                            const std::vector<std::string>& continuous,
                            const std::vector<std::string>& indicators) {
  auto report = average(fit, design, continuous, EffectKind::elasticity, &sim);
  auto pseudo = average(fit, design, indicators, EffectKind::pseudo_elasticity, &sim);
  report.entries.insert(report.entries.end(), pseudo.entries.begin(), pseudo.entries.end());
  return report;
}

}  // namespace crashmle
