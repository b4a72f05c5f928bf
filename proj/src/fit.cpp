#include "crashmle/fit.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "crashmle/csv.hpp"
#include "crashmle/errors.hpp"
#include "crashmle/mixed_mnl.hpp"
#include "crashmle/mnl.hpp"
#include "crashmle/nb.hpp"

namespace crashmle {

namespace {

constexpr double kDivergence = 50.0;
constexpr double kPoissonBoundaryAlpha = 1e-6;

void require_family(const ModelSpec& spec, Family f) {
  if (spec.family != f) {
    throw SpecError("expected family " + to_string(f) + ", spec declares " + to_string(spec.family));
  }
}

std::unique_ptr<SimulationDraws> make_draws(const DesignMatrix& design, int draws,
                                            std::uint64_t seed, const HaltonOptions& halton) {
  if (draws < kMinDraws) {
    throw FitError("simulated likelihood needs at least " + std::to_string(kMinDraws) +
                   " draws (got " + std::to_string(draws) + ")");
  }
  DrawMatrix matrix(design.n_rows(), static_cast<std::size_t>(draws), design.random_terms().size(),
                    seed, halton);
  return std::make_unique<SimulationDraws>(design, matrix);
}

ScoreFunction make_scores(const DesignMatrix& design, const SimulationDraws* sim) {
  return [&design, sim](const Eigen::VectorXd& theta) {
    Eigen::MatrixXd s;
    if (is_severity(design.family())) {
      if (sim) {
        simulated_mnl_loglik(theta, design, *sim, nullptr, &s);
      } else {
        mnl_loglik(theta, design, nullptr, &s);
      }
    } else if (sim) {
      simulated_nb_loglik(theta, design, *sim, nullptr, &s);
    } else {
      nb_loglik(theta, design, nullptr, &s);
    }
    return s;
  };
}

double count_restricted_ll(const ObservationTable& table, const ModelSpec& spec,
                           const FitOptions& options) {
  ModelSpec restricted;
  restricted.family = Family::nb;
  restricted.outcome_column = spec.outcome_column;
  restricted.terms = {Term{std::string(kConstant), {}, CoefKind::fixed}};
  FitOptions inner;
  inner.optim = options.optim;
  inner.compute_covariance = false;
  inner.compute_restricted = false;
  const auto fit = fit_nb(table, restricted, inner);
  return fit.ll_converged;
}

FitResult run_fit(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options) {
  spec.validate();
  options.optim.validate();
  if (table.n_rows() == 0) throw FitError("cannot fit " + to_string(spec.family) + " on an empty sample");
  const auto design = build_design(table, spec);
  const bool severity = is_severity(spec.family);
  const bool mixed = is_mixed(spec.family);

  std::vector<std::string> warnings;
  if (severity) {
    std::vector<std::size_t> tally(design.n_outcomes(), 0);
    for (int o : design.outcomes()) ++tally[static_cast<std::size_t>(o)];
    for (std::size_t j = 0; j < tally.size(); ++j) {
      if (tally[j] == 0) warnings.push_back("outcome '" + spec.outcomes[j] + "' has no observations");
    }
  } else {
    bool all_zero = true;
    for (auto c : design.counts()) all_zero = all_zero && c == 0;
    if (all_zero) throw FitError("all counts are zero; the overdispersion parameter is unidentified");
  }

  std::unique_ptr<SimulationDraws> sim;
  if (mixed) sim = make_draws(design, options.draws, options.seed, options.halton);
  const auto objective = make_objective(design, sim.get());

  Eigen::VectorXd theta0 = options.start ? *options.start : default_start(design);
  if (static_cast<std::size_t>(theta0.size()) != design.n_params()) {
    throw FitError("starting point has " + std::to_string(theta0.size()) + " entries, model has " +
                   std::to_string(design.n_params()));
  }
  const auto opt = maximize(objective, theta0, options.optim);

  CovarianceEstimate cov;
  if (options.compute_covariance) {
    const auto scores = make_scores(design, sim.get());
    cov = covariance(objective, opt.theta, options.optim, &scores);
    if (!cov.defined) warnings.push_back("Hessian and BHHH estimates are singular; standard errors undefined");
    else if (cov.method == "bhhh") warnings.push_back("Hessian not negative definite; BHHH covariance used");
  } else {
    const auto p = static_cast<Eigen::Index>(design.n_params());
    cov.matrix = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
    cov.method = "none";
  }

  double ll_restricted = std::numeric_limits<double>::quiet_NaN();
  if (severity) {
    ll_restricted = equal_shares_loglik(design.n_rows(), design.n_outcomes());
  } else if (options.compute_restricted) {
    ll_restricted = count_restricted_ll(table, spec, options);
  }

  FitResult fit = summarize(opt.theta, cov.matrix, opt.value, ll_restricted, design.log_scaled());
  fit.spec = spec;
  fit.labels = design.param_labels();
  fit.covariance_method = cov.method;
  fit.converged = opt.converged;
  fit.status = to_string(opt.status);
  fit.iterations = opt.iterations;
  fit.gradient_norm = opt.gradient_norm;
  fit.start = opt.start;
  fit.n_obs = design.n_rows();
  if (mixed) {
    fit.draws = options.draws;
    fit.seed = options.seed;
    fit.halton_skip = static_cast<int>(options.halton.skip);
    fit.halton_shift = options.halton.random_shift;
  }
  fit.warnings.insert(fit.warnings.begin(), warnings.begin(), warnings.end());

  // Separation shows up as coefficients running off with the likelihood
  // still improving.
  const auto log_scaled = design.log_scaled();
  const Eigen::Index diverging = [&] {
    for (Eigen::Index k = 0; k < opt.theta.size(); ++k) {
      if (!log_scaled[static_cast<std::size_t>(k)] && std::abs(opt.theta[k]) > kDivergence) return k;
    }
    return Eigen::Index{-1};
  }();
  bool empty_outcome = false;
  for (const auto& w : warnings) empty_outcome = empty_outcome || w.find("no observations") != std::string::npos;
  if (severity && (empty_outcome || diverging >= 0)) {
    fit.converged = false;
    fit.status = "separation";
    fit.warnings.push_back("estimates diverge (perfect or quasi-complete separation); not converged");
  } else if (diverging >= 0) {
    fit.converged = false;
    fit.status = "diverged";
    fit.warnings.push_back("parameter '" + fit.labels[static_cast<std::size_t>(diverging)] +
                           "' diverges; not converged");
  }
  if (design.log_alpha_index()) {
    const double alpha = std::exp(opt.theta[static_cast<Eigen::Index>(*design.log_alpha_index())]);
    if (alpha < kPoissonBoundaryAlpha) {
      fit.warnings.push_back("overdispersion alpha = " + csv::format_double(alpha) +
                             " is at the boundary: Poisson-equivalent");
    }
  }
  if (!fit.converged && fit.status == "iteration_limit") {
    fit.warnings.push_back("iteration limit reached before the gradient tolerance was met");
  }
  return fit;
}

}  // namespace

Eigen::VectorXd default_start(const DesignMatrix& design) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(design.n_params()));
  if (!is_severity(design.family())) {
    double mean = 0.0;
    for (auto c : design.counts()) mean += static_cast<double>(c);
    mean /= std::max<double>(1.0, static_cast<double>(design.n_rows()));
    for (std::size_t k = 0; k < design.n_terms(); ++k) {
      if (design.term(k).variable == kConstant) {
        theta[static_cast<Eigen::Index>(design.slot(k).location)] = std::log(std::max(mean, 1e-3));
        break;
      }
    }
  }
  return theta;
}

Objective make_objective(const DesignMatrix& design, const SimulationDraws* sim) {
  if (is_mixed(design.family()) && sim == nullptr) throw FitError("mixed family needs simulation draws");
  if (is_severity(design.family())) {
    if (sim) {
      return [&design, sim](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
        return simulated_mnl_loglik(t, design, *sim, g);
      };
    }
    return [&design](const Eigen::VectorXd& t, Eigen::VectorXd* g) { return mnl_loglik(t, design, g); };
  }
  if (sim) {
    return [&design, sim](const Eigen::VectorXd& t, Eigen::VectorXd* g) {
      return simulated_nb_loglik(t, design, *sim, g);
    };
  }
  return [&design](const Eigen::VectorXd& t, Eigen::VectorXd* g) { return nb_loglik(t, design, g); };
}

SimulationDraws fit_draws(const FitResult& fit, const DesignMatrix& design) {
  if (!fit.draws || !fit.seed) throw FitError("fit carries no draw settings");
  HaltonOptions h;
  h.skip = static_cast<std::size_t>(fit.halton_skip);
  h.random_shift = fit.halton_shift;
  DrawMatrix matrix(design.n_rows(), static_cast<std::size_t>(*fit.draws), design.random_terms().size(),
                    *fit.seed, h);
  return SimulationDraws(design, matrix);
}

FitResult fit_mnl(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options) {
  require_family(spec, Family::mnl);
  return run_fit(table, spec, options);
}

FitResult fit_mixed_mnl(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options) {
  require_family(spec, Family::mixed_mnl);
  return run_fit(table, spec, options);
}

FitResult fit_nb(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options) {
  require_family(spec, Family::nb);
  return run_fit(table, spec, options);
}

FitResult fit_mixed_nb(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options) {
  require_family(spec, Family::mixed_nb);
  return run_fit(table, spec, options);
}

FitResult fit_model(const ObservationTable& table, const ModelSpec& spec, const FitOptions& options) {
  return run_fit(table, spec, options);
}

}  // namespace crashmle
