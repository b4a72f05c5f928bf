// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset, e.g. `acceptance 4 12`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

#include "crashmle/chi2.hpp"
#include "crashmle/design.hpp"
#include "crashmle/errors.hpp"
#include "crashmle/fit.hpp"
#include "crashmle/fit_result.hpp"
#include "crashmle/halton.hpp"
#include "crashmle/influence.hpp"
#include "crashmle/lrtest.hpp"
#include "crashmle/mixed_mnl.hpp"
#include "crashmle/mnl.hpp"
#include "crashmle/nb.hpp"
#include "crashmle/severity_effects.hpp"
#include "crashmle/simulation.hpp"
#include "crashmle/synthgen.hpp"

using namespace crashmle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// 1. Restricted log-likelihood of three equally likely outcomes.
Outcome restricted_loglik() {
  const double ll = equal_shares_loglik(3666, 3);
  return {std::abs(ll - -4027.51) <= 0.1, fmt("N ln(1/3) at N = 3666 is %.4f (published -4027.51)", ll)};
}

// 2. McFadden rho2 for both published tables, including the transposition check.
Outcome mcfadden() {
  const Eigen::VectorXd none;
  const auto t1 = summarize(none, Eigen::MatrixXd(), -1828.38, -4027.51);
  const auto t2 = summarize(none, Eigen::MatrixXd(), -1963.29, -472.77);
  const bool ok1 = std::abs(t1.mcfadden_rho2 - 0.546) <= 0.001 && t1.warnings.empty();
  const bool warned = !t2.warnings.empty() && t2.warnings.front().find("transposed") != std::string::npos;
  const bool ok2 = t2.rho2_if_transposed && std::abs(*t2.rho2_if_transposed - 0.759) <= 0.001 && warned;
  return {ok1 && ok2, fmt("severity rho2 = %.4f; frequency rho2 with labels swapped = %.4f", t1.mcfadden_rho2,
                          t2.rho2_if_transposed.value_or(NAN)) +
                          (warned ? ", swapped-label warning emitted" : ", no warning")};
}

// 3. Share of a normal(-1.85, 2.65) coefficient below zero.
Outcome sign_share_check() {
  const double s = sign_share({CoefKind::random_normal, -1.85, 2.65});
  const double oracle = testsupport::phi(1.85 / 2.65);
  return {std::abs(s - 0.757) <= 0.001 && std::abs(s - oracle) < 1e-12,
          fmt("fraction below zero = %.5f (erfc oracle %.5f)", s, oracle)};
}

// 4. Chi-square survival function and quantiles behind both published tests.
Outcome chi2_values() {
  struct Case {
    bool quantile;
    double arg, dof, expected, tol;
  };
  const Case cases[] = {{false, 27.21, 21, 0.164, 0.001}, {false, 23.00, 10, 0.0107, 0.0005},
                        {false, 26.59, 21, 0.185, 0.001}, {true, 0.90, 21, 29.62, 0.01},
                        {true, 0.90, 10, 15.99, 0.01}};
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    const double v = c.quantile ? chi2_quantile(c.arg, c.dof) : chi2_sf(c.arg, c.dof);
    ok = ok && std::abs(v - c.expected) <= c.tol;
    detail += (detail.empty() ? "" : ", ") + std::string(c.quantile ? "q(" : "sf(") + fmt("%g, %g) = ", c.arg, c.dof) +
              fmt("%.5g", v);
  }
  return {ok, detail};
}

// 5. Marginal effect over coefficient is the same for every variable.
Outcome marginal_effect_ratio() {
  const auto cfg = testsupport::dgp(
      "[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = urban\n[term]\nvar = curve\n"
      "[term]\nvar = aadt\n[term]\nvar = ramps\n",
      {{0.9}, {0.6}, {-0.05}, {0.3}, {0.15}},
      {CovariateRecipe::bernoulli("urban", 0.4), CovariateRecipe::uniform("curve", 0, 8),
       CovariateRecipe::normal("aadt", 2, 1), CovariateRecipe::uniform("ramps", 0, 4)},
      2000, 55, 1.37);
  const auto table = generate(cfg);
  const auto fit = fit_nb(table, cfg.spec);
  const auto design = build_design(table, cfg.spec);
  const std::vector<std::string> vars = {"urban", "curve", "aadt", "ramps"};
  const auto me = marginal_effects(fit, design, vars);
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < vars.size(); ++k) {
    const double ratio = *me.value(vars[k]) / fit.estimates[static_cast<Eigen::Index>(k + 1)];
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  // The published table: every (effect, coefficient) pair, each rounded to
  // three significant figures, must admit one common ratio.
  const double published[][4] = {{71.9, 0.05, 1.80, 0.005},     {-2.24, 0.005, -0.0562, 0.00005},
                                 {2.04, 0.005, 0.0509, 0.00005},  {37.5, 0.05, 0.937, 0.0005},
                                 {6.52, 0.005, 0.163, 0.0005},    {-43.4, 0.05, -1.08, 0.005},
                                 {-50.1, 0.05, -1.25, 0.005},     {-36.2, 0.05, -0.905, 0.0005}};
  double common_lo = -INFINITY, common_hi = INFINITY;
  for (const auto& p : published) {
    const double a = std::abs(p[0]), b = std::abs(p[2]);
    common_lo = std::max(common_lo, (a - p[1]) / (b + p[3]));
    common_hi = std::min(common_hi, (a + p[1]) / (b - p[3]));
  }
  const bool ok = fit.converged && hi - lo < 1e-10 && common_lo <= common_hi;
  return {ok, fmt("fitted ratio spread %.3g", hi - lo) + fmt(" (ratio %.4f); published ratios share [%.3f, ", lo,
                                                             common_lo) +
                  fmt("%.3f]", common_hi)};
}

// 6. Fixed-parameter MNL recovery over 20 seeds.
Outcome mnl_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const std::string spec = std::string(testsupport::kSeverityHeader) +
                           "[term]\nvar = constant\noutcomes = fatal\n"
                           "[term]\nvar = constant\noutcomes = injury\n"
                           "[term]\nvar = x\noutcomes = injury\n"
                           "[term]\nvar = z\noutcomes = fatal, injury\n"
                           "[term]\nvar = w\noutcomes = fatal\n"
                           "[term]\nvar = v\noutcomes = injury\n";
  const std::vector<double> truth = {-1.2, 0.4, 0.8, -0.5, 0.6, -0.7};
  int inside = 0, total = 0, failed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = testsupport::dgp(spec, {{-1.2}, {0.4}, {0.8}, {-0.5}, {0.6}, {-0.7}},
                                      {CovariateRecipe::normal("x"), CovariateRecipe::uniform("z", 0, 2),
                                       CovariateRecipe::bernoulli("w", 0.3), CovariateRecipe::normal("v", 0.5, 1.5)},
                                      20000, 1000 + seed);
    const auto fit = fit_mnl(generate(cfg), cfg.spec);
    if (!fit.converged) ++failed;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      ++total;
      if (std::abs(fit.estimates[i] - truth[k]) <= 3 * fit.standard_errors[i]) ++inside;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double share = static_cast<double>(inside) / total;
  return {share >= 0.95 && failed == 0 && secs < 60,
          fmt("%.1f%% of coefficients within 3 SE", 100 * share) + fmt(" (%.0f non-converged), %.1f s", failed, secs)};
}

// 7. Mixed MNL recovery and simulated probability against quadrature.
Outcome mixed_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const auto spec = parse_spec(std::string(testsupport::kMixedHeader) +
                               "[term]\nvar = constant\noutcomes = fatal\n"
                               "[term]\nvar = constant\noutcomes = injury\n"
                               "[term]\nvar = x\noutcomes = injury\ndist = normal\n");
  DgpConfig cfg;
  cfg.spec = spec;
  cfg.terms = {{-0.3}, {0.2}, {1.5, 2.0}};
  cfg.covariates = {CovariateRecipe::normal("x")};
  cfg.n = 3000;
  cfg.seed = 7;
  FitOptions o;
  o.draws = 500;
  const auto fit = fit_mixed_mnl(generate(cfg), spec, o);
  const double loc_err = std::abs(fit.estimates[2] - 1.5) / 1.5;
  const double scale_err = std::abs(fit.estimates[3] - 2.0) / 2.0;

  const auto row = ObservationTable::severity("sev", {"fatal", "injury", "pdo"}, {1}, {"x"}, {{1.3}});
  const auto d = build_design(row, spec);
  Eigen::VectorXd th(4);
  th << -0.4, 0.3, 0.6, std::log(1.7);
  const DrawMatrix m(1, 100000, 1, 0);
  const SimulationDraws sim(d, m);
  const auto p = simulated_prob(th, d, 0, sim);
  double worst = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quad = testsupport::normal_expectation([&](double z) {
      const double e_f = std::exp(-0.4);
      const double e_i = std::exp(0.3 + (0.6 + 1.7 * z) * 1.3);
      const double w = i == 0 ? e_f : (i == 1 ? e_i : 1.0);
      return w / (e_f + e_i + 1.0);
    });
    worst = std::max(worst, std::abs(p[i] - quad));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {fit.converged && loc_err < 0.15 && scale_err < 0.15 && worst < 1e-3 && secs < 300,
          fmt("location error %.1f%%, scale error %.1f%%", 100 * loc_err, 100 * scale_err) +
              fmt("; |P_sim - P_GH| max %.2e at R = 1e5; %.1f s", worst, secs)};
}

// 8. Negative binomial recovery including the overdispersion parameter.
Outcome nb_recovery() {
  const auto start = std::chrono::steady_clock::now();
  const auto cfg = testsupport::dgp(
      "[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = x\n[term]\nvar = d\n"
      "[term]\nvar = len\n",
      {{0.8}, {0.5}, {-0.4}, {0.9}},
      {CovariateRecipe::normal("x"), CovariateRecipe::bernoulli("d", 0.4), CovariateRecipe::uniform("len", -1, 1)},
      5000, 88, 1.37);
  const auto fit = fit_nb(generate(cfg), cfg.spec);
  const std::vector<double> truth = {0.8, 0.5, -0.4, 0.9, 1.37};
  double worst = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    worst = std::max(worst, std::abs(fit.estimates[i] - truth[k]) / fit.standard_errors[i]);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {fit.converged && worst < 3 && secs < 30,
          fmt("alpha = %.3f, largest |error|/SE = %.2f", fit.estimates[4], worst) + fmt(", %.1f s", secs)};
}

// 9. Mixed NB fitted to fixed-parameter data finds no significant scale.
Outcome mixed_nb_degeneracy() {
  const auto start = std::chrono::steady_clock::now();
  int insignificant = 0, undefined = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = testsupport::dgp(
        "[model]\nfamily = mixed_nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = x\ndist = normal\n"
        "[term]\nvar = d\n",
        {{0.8}, {0.5, 0.0}, {-0.4}}, {CovariateRecipe::normal("x"), CovariateRecipe::bernoulli("d", 0.4)}, 1000,
        500 + seed, 0.8);
    FitOptions o;
    o.draws = 200;
    o.compute_restricted = false;
    const auto fit = fit_mixed_nb(generate(cfg), cfg.spec, o);
    const double t = fit.t_ratios[2];
    if (std::isnan(t)) ++undefined;
    if (t < 1.96) ++insignificant;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {insignificant >= 18 && secs < 300,
          fmt("scale t-ratio < 1.96 in %.0f/20 seeds", insignificant) +
              fmt(" (%.0f with undefined t), %.1f s", undefined, secs)};
}

// 10. Analytic gradients against central differences.
Outcome gradients() {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd(0, 0.6);
  auto random_theta = [&](Eigen::Index p) {
    Eigen::VectorXd th(p);
    for (Eigen::Index k = 0; k < p; ++k) th[k] = nd(gen);
    return th;
  };
  double worst_mnl = 0, worst_mixed = 0, worst_nb = 0;

  const auto mnl_cfg = testsupport::dgp(std::string(testsupport::kSeverityHeader) +
                                            "[term]\nvar = constant\noutcomes = fatal\n"
                                            "[term]\nvar = x\noutcomes = injury\n"
                                            "[term]\nvar = z\noutcomes = fatal, injury\n",
                                        {{-0.5}, {0.5}, {0.3}},
                                        {CovariateRecipe::normal("x"), CovariateRecipe::uniform("z", 0, 2)}, 400, 1);
  const auto dm = build_design(generate(mnl_cfg), mnl_cfg.spec);
  for (int rep = 0; rep < 5; ++rep) {
    const auto th = random_theta(3);
    Eigen::VectorXd g;
    mnl_loglik(th, dm, &g);
    const auto fd = testsupport::fd_gradient([&](const Eigen::VectorXd& t) { return mnl_loglik(t, dm); }, th, 1e-6);
    worst_mnl = std::max(worst_mnl, testsupport::rel_error(g, fd));
  }

  const auto mixed_cfg = testsupport::dgp(std::string(testsupport::kMixedHeader) +
                                              "[term]\nvar = constant\noutcomes = fatal\n"
                                              "[term]\nvar = x\noutcomes = injury\ndist = normal\n"
                                              "[term]\nvar = u\noutcomes = fatal\ndist = uniform\n",
                                          {{-0.5}, {0.8, 1.0}, {0.3, 0.7}},
                                          {CovariateRecipe::normal("x"), CovariateRecipe::normal("u")}, 300, 2);
  const auto dx = build_design(generate(mixed_cfg), mixed_cfg.spec);
  const DrawMatrix draws(dx.n_rows(), 50, 2, 0);
  const SimulationDraws sim(dx, draws);
  for (int rep = 0; rep < 5; ++rep) {
    const auto th = random_theta(5);
    Eigen::VectorXd g;
    simulated_mnl_loglik(th, dx, sim, &g);
    const auto fd = testsupport::fd_gradient(
        [&](const Eigen::VectorXd& t) { return simulated_mnl_loglik(t, dx, sim); }, th, 1e-6);
    worst_mixed = std::max(worst_mixed, testsupport::rel_error(g, fd));
  }

  const auto nb_cfg = testsupport::dgp(
      "[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = x\n[term]\nvar = d\n",
      {{0.8}, {0.5}, {-0.4}}, {CovariateRecipe::normal("x"), CovariateRecipe::bernoulli("d", 0.4)}, 500, 3, 1.37);
  const auto dn = build_design(generate(nb_cfg), nb_cfg.spec);
  for (int rep = 0; rep < 5; ++rep) {
    const auto th = random_theta(4);
    Eigen::VectorXd g;
    nb_loglik(th, dn, &g);
    const auto fd = testsupport::fd_gradient([&](const Eigen::VectorXd& t) { return nb_loglik(t, dn); }, th, 1e-6);
    worst_nb = std::max(worst_nb, testsupport::rel_error(g, fd));
  }
  const double worst = std::max({worst_mnl, worst_mixed, worst_nb});
  return {worst < 1e-5, fmt("max relative error: MNL %.2e, mixed MNL %.2e", worst_mnl, worst_mixed) +
                            fmt(", NB %.2e", worst_nb)};
}

// 11. Elasticities against finite-difference probability changes.
Outcome elasticity_oracles() {
  const auto cfg = testsupport::dgp(std::string(testsupport::kSeverityHeader) +
                                        "[term]\nvar = constant\noutcomes = fatal\n"
                                        "[term]\nvar = constant\noutcomes = injury\n"
                                        "[term]\nvar = x\noutcomes = fatal\n"
                                        "[term]\nvar = z\noutcomes = injury\n"
                                        "[term]\nvar = x\noutcomes = injury\n",
                                    {{-0.7}, {0.2}, {0.9}, {-0.6}, {0.4}},
                                    {CovariateRecipe::normal("x", 1, 1), CovariateRecipe::uniform("z", 0.5, 3)}, 200,
                                    11);
  const auto table = generate(cfg);
  const auto d = build_design(table, cfg.spec);
  Eigen::VectorXd th(5);
  th << -0.7, 0.2, 0.9, -0.6, 0.4;
  double worst_fd = 0, worst_sum = 0;
  for (std::size_t row = 0; row < table.n_rows(); ++row) {
    const auto p = mnl_prob(th, d, row);
    for (const char* var : {"x", "z"}) {
      for (std::size_t eq : {0u, 1u}) {
        if (std::string(var) == "z" && eq == 0) continue;
        const auto e = row_elasticities(th, d, row, var, eq);
        double weighted = 0;
        for (std::size_t i = 0; i < 3; ++i) weighted += p[i] * e[i];
        worst_sum = std::max(worst_sum, std::abs(weighted));
      }
    }
    // z enters the injury equation only, so perturbing the column in place
    // is the derivative the injury-equation elasticity describes.
    const auto z = table.column("z");
    const double z0 = z[row];
    const double h = 1e-6 * std::max(1.0, std::abs(z0));
    std::vector<double> zp(z.begin(), z.end()), zm(z.begin(), z.end());
    zp[row] += h;
    zm[row] -= h;
    const auto pp = mnl_prob(th, build_design(table.with_column("z", zp), cfg.spec), row);
    const auto pm = mnl_prob(th, build_design(table.with_column("z", zm), cfg.spec), row);
    const auto e = row_elasticities(th, d, row, "z", 1);
    for (std::size_t i = 0; i < 3; ++i) {
      const double fd = (pp[i] - pm[i]) / (2 * h) * z0 / p[i];
      worst_fd = std::max(worst_fd, std::abs(e[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return {worst_fd < 1e-5 && worst_sum < 1e-10,
          fmt("max elasticity vs finite difference %.2e, max |sum P_i E_i| %.2e", worst_fd, worst_sum)};
}

double ks_distance(std::vector<double> x, double dof) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - chi2_sf(x[i], dof);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

DgpConfig null_frequency(std::size_t n, std::uint64_t seed) {
  return testsupport::dgp("[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = x\n",
                          {{1.2}, {0.4}}, {CovariateRecipe::normal("x"), CovariateRecipe::bernoulli("flag", 0.5)}, n,
                          seed, 0.7);
}

// 12. Size of the Monte-Carlo LR test and shape of the simulated null.
Outcome mc_lr_size() {
  const auto start = std::chrono::steady_clock::now();
  int rejections = 0, outer_failed = 0, valid_outer = 0;
  for (std::uint64_t e = 0; e < 200; ++e) {
    const auto cfg = null_frequency(122, 10000 + e);
    McOptions o;
    o.replicates = 500;
    o.seed = 20000 + e;
    try {
      const auto r = mc_null_distribution(generate(cfg), cfg.spec, "flag", o);
      ++valid_outer;
      if (*r.p_mc <= 0.05) ++rejections;
    } catch (const FitError&) {
      ++outer_failed;
    }
  }
  const double size = valid_outer ? static_cast<double>(rejections) / valid_outer : NAN;

  const auto big = null_frequency(5000, 31337);
  McOptions o;
  o.replicates = 2000;
  o.seed = 4242;
  const auto r = mc_null_distribution(generate(big), big.spec, "flag", o);
  const double ks = ks_distance(r.simulated_x2, r.dof);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = std::abs(size - 0.05) <= 0.03 && outer_failed == 0 && ks <= 0.05 && secs <= 1800;
  return {ok, fmt("rejection rate %.3f over %.0f experiments", size, valid_outer) +
                  fmt(" (%.0f failed); KS distance at N = 5000 = %.4f", outer_failed, ks) + fmt(", %.0f s", secs)};
}

// 13. Distance-of-influence search.
Outcome influence_search() {
  const auto start = std::chrono::steady_clock::now();
  const std::string spec = std::string(testsupport::kSeverityHeader) +
                           "[term]\nvar = constant\noutcomes = fatal\n"
                           "[term]\nvar = constant\noutcomes = injury\n"
                           "[term]\nvar = dist\noutcomes = injury\n"
                           "[term]\nvar = x\noutcomes = fatal, injury\n";
  int hits = 0;
  bool tails_flat = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto cfg = testsupport::dgp(spec, {{-1.5}, {1.0}, {-4.0}, {0.4}},
                                      {CovariateRecipe::uniform("dist", 0.0, 1.0), CovariateRecipe::normal("x")}, 5000,
                                      700 + seed);
    const auto table = gen_influence(cfg, 0.5, "dist");
    const auto p = search_influence(table, cfg.spec, "dist", 0.1, 2.0, 0.05);
    if (std::abs(p.d_star - 0.5) <= 0.05 + 1e-9) ++hits;
    if (std::getenv("ACCEPTANCE_VERBOSE")) std::printf("  seed %d d_star %.2f\n", static_cast<int>(seed), p.d_star);
    const auto d = table.column("dist");
    const double dmax = *std::max_element(d.begin(), d.end());
    std::vector<double> tail;
    for (std::size_t g = 0; g < p.grid.size(); ++g) {
      if (p.grid[g] >= dmax) tail.push_back(p.ll[g]);
    }
    if (tail.size() < 2) tails_flat = false;
    for (double v : tail) tails_flat = tails_flat && v == tail.front();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {hits >= 18 && tails_flat && secs < 300,
          fmt("d_star within one step in %.0f/20 seeds, tail %s", hits) + (tails_flat ? "exactly flat" : "NOT flat") +
              fmt(", %.1f s", secs)};
}

// 14. Seeded CLI commands rerun byte-identically.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path work = fs::path(CRASHMLE_WORK_DIR) / "acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  {
    std::ofstream(work / "mixed.ini") << "[model]\nfamily = mixed_mnl\noutcome = sev\noutcomes = fatal, injury, pdo\n"
                                         "base = pdo\n[term]\nvar = constant\noutcomes = fatal\n"
                                         "[term]\nvar = x\noutcomes = injury\ndist = normal\n"
                                         "[term]\nvar = d\noutcomes = fatal\n";
    std::ofstream(work / "nb.ini") << "[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n"
                                      "[term]\nvar = x\n";
    std::ofstream(work / "sev.json")
        << R"({"spec_file": "mixed.ini", "n": 400, "seed": 9,
               "params": [{"location": -1.0}, {"location": 0.8, "scale": 1.0}, {"location": -0.8}],
               "covariates": [{"name": "x", "dist": "normal", "mean": 0, "sd": 1},
                              {"name": "d", "dist": "uniform", "low": 0, "high": 2},
                              {"name": "flag", "dist": "bernoulli", "p": 0.5}]})";
    std::ofstream(work / "cnt.json")
        << R"({"spec_file": "nb.ini", "n": 300, "seed": 4, "alpha": 0.7,
               "params": [{"location": 1.0}, {"location": 0.4}],
               "covariates": [{"name": "x", "dist": "normal", "mean": 0, "sd": 1},
                              {"name": "flag", "dist": "bernoulli", "p": 0.5}]})";
  }
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"simulate --dgp sev.json --out sev{}.csv", {"sev{}.csv"}},
      {"simulate --dgp cnt.json --out cnt{}.csv --seed 5", {"cnt{}.csv"}},
      {"fit --data sev1.csv --spec mixed.ini --draws 50 --seed 3 --out fit{}", {"fit{}.json"}},
      {"effects --fit fit1.json --data sev1.csv --continuous x --out eff{}", {"eff{}.json", "eff{}.csv"}},
      {"lrtest --data cnt1.csv --spec nb.ini --split flag --mc 100 --seed 8 --out lr{}",
       {"lr{}.json", "lr{}_histogram.csv"}},
      {"influence --data sev1.csv --spec mixed.ini --distance d --dmin 0.2 --dmax 2 --step 0.3 --draws 30 --seed 2 "
       "--out inf{}",
       {"inf{}.json", "inf{}.csv"}},
  };
  auto expand = [](std::string s, int run) {
    for (auto pos = s.find("{}"); pos != std::string::npos; pos = s.find("{}")) s.replace(pos, 2, std::to_string(run));
    return s;
  };
  int compared = 0;
  std::string problem;
  for (const auto& [cmd, outputs] : commands) {
    for (int run = 1; run <= 2; ++run) {
      // The second run uses a different worker count.
      const std::string line = "cd \"" + work.string() + "\" && \"" + CRASHMLE_CLI_PATH + "\" --threads " +
                               (run == 1 ? "1" : "0") + " " + expand(cmd, run) + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0 && problem.empty()) problem = "command failed: " + expand(cmd, run);
    }
    for (const auto& out : outputs) {
      const auto a = slurp(work / expand(out, 1));
      const auto b = slurp(work / expand(out, 2));
      ++compared;
      if ((a.empty() || a != b) && problem.empty()) problem = "outputs differ: " + expand(out, 1);
    }
  }
  return {problem.empty(), problem.empty() ? fmt("%.0f output pairs byte-identical across reruns", compared) : problem};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"restricted log-likelihood identity", restricted_loglik},
      {"McFadden rho2 and transposed labels", mcfadden},
      {"sign share of a normal coefficient", sign_share_check},
      {"chi-square survival and quantiles", chi2_values},
      {"marginal effect / coefficient constant", marginal_effect_ratio},
      {"MNL parameter recovery", mnl_recovery},
      {"mixed MNL recovery and quadrature", mixed_recovery},
      {"NB recovery including alpha", nb_recovery},
      {"mixed NB zero-scale degeneracy", mixed_nb_degeneracy},
      {"analytic gradients", gradients},
      {"elasticity oracles", elasticity_oracles},
      {"Monte-Carlo LR test size", mc_lr_size},
      {"influence search", influence_search},
      {"determinism of seeded commands", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const int id = static_cast<int>(c) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[c].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
