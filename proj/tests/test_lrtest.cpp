#include <cmath>
#include <random>

#include "doctest.h"
#include "test_support.hpp"

#include "crashmle/chi2.hpp"
#include "crashmle/design.hpp"
#include "crashmle/errors.hpp"
#include "crashmle/fit.hpp"
#include "crashmle/lrtest.hpp"
#include "crashmle/mnl.hpp"
#include "crashmle/parallel.hpp"
#include "crashmle/synthgen.hpp"

using namespace crashmle;

TEST_CASE("lr statistic") {
  const auto s = lr_statistic(-100, -60, -38, 10, 10, 10);
  CHECK(s.x2 == doctest::Approx(4.0));
  CHECK(s.dof == 10);
  CHECK_FALSE(s.clamped);

  const auto nested = lr_statistic(-98.5, -60.25, -38.25, 4, 4, 4);
  CHECK(nested.x2 == 0.0);

  const auto noisy = lr_statistic(-98.49999, -60.25, -38.25001, 4, 4, 4);
  CHECK(noisy.x2 == 0.0);
  CHECK(noisy.clamped);

  CHECK_THROWS_AS(lr_statistic(-90, -60, -38, 4, 4, 4), FitError);
  CHECK_THROWS_AS(lr_statistic(-100, -60, -38, 10, 5, 5), SpecError);
  CHECK_THROWS_AS(lr_statistic(-100, -60, -38, 10, 6, 3), SpecError);

  // The frequency test: 12 parameters pooled, an 11-parameter model in each
  // bin would give 10 degrees of freedom.
  CHECK(lr_statistic(-500, -240, -248.5, 12, 11, 11).dof == 10);
  CHECK(lr_statistic(-500, -240, -248.5, 12, 11, 11).x2 == doctest::Approx(23.0));
}

TEST_CASE("chi-square survival function: published values") {
  CHECK(std::abs(chi2_sf(27.21, 21) - 0.164) < 1e-3);
  CHECK(std::abs(chi2_sf(23.00, 10) - 0.0107) < 5e-4);
  CHECK(std::abs(chi2_sf(26.59, 21) - 0.185) < 1e-3);
  CHECK(chi2_sf(0.0, 3) == 1.0);
}

TEST_CASE("chi-square survival function: adaptive Simpson oracle") {
  for (double k : {1.0, 2.0, 3.0, 5.0, 10.0, 21.0, 40.0}) {
    double prev = 1.0;
    for (double x : {0.5, 1.0, 2.5, 5.0, 10.0, 15.0, 23.0, 27.21, 40.0, 60.0}) {
      // Integrate the lower part for small x (near the mode) and the upper
      // tail otherwise; both are smooth on the chosen intervals except the
      // k = 1 singularity at 0, which the lower integral avoids.
      double sf;
      if (k == 1.0) {
        // Substitute x = t^2 to remove the singularity.
        const double lower = testsupport::adaptive_simpson(
            [&](double t) { return 2 * t * testsupport::chi2_pdf(t * t, k); }, 1e-300, std::sqrt(x), 1e-13);
        sf = 1.0 - lower;
      } else {
        sf = testsupport::adaptive_simpson([&](double t) { return testsupport::chi2_pdf(t, k); }, x, x + 400, 1e-13);
      }
      const double p = chi2_sf(x, k);
      CHECK(std::abs(p - sf) < 1e-8);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      CHECK(p <= prev);
      prev = p;
    }
  }
}

TEST_CASE("chi-square quantile") {
  CHECK(std::abs(chi2_quantile(0.90, 21) - 29.62) < 0.01);
  CHECK(std::abs(chi2_quantile(0.90, 10) - 15.99) < 0.01);
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> up(0.001, 0.999);
  std::uniform_int_distribution<int> ud(1, 60);
  for (int rep = 0; rep < 200; ++rep) {
    const double p = up(gen);
    const int d = ud(gen);
    CHECK(std::abs(chi2_sf(chi2_quantile(p, d), d) - (1 - p)) < 1e-8);
  }
  CHECK_THROWS_AS(chi2_quantile(0.0, 3), SpecError);
  CHECK_THROWS_AS(chi2_quantile(1.0, 3), SpecError);
  CHECK_THROWS_AS(chi2_sf(-1.0, 3), SpecError);
  CHECK_THROWS_AS(chi2_sf(1.0, 0), SpecError);
}

namespace {

FitResult converged_fit(const ModelSpec& spec, Eigen::VectorXd theta) {
  FitResult f;
  f.spec = spec;
  f.theta_hat = std::move(theta);
  f.converged = true;
  return f;
}

}  // namespace

TEST_CASE("simulating under the null") {
  const auto spec = parse_spec(std::string(testsupport::kSeverityHeader) +
                               "[term]\nvar = constant\noutcomes = fatal\n"
                               "[term]\nvar = constant\noutcomes = injury\n"
                               "[term]\nvar = x\noutcomes = injury\n");
  SUBCASE("degenerate fit reproduces its single outcome") {
    const auto table = ObservationTable::severity("sev", {"fatal", "injury", "pdo"}, std::vector<int>(50, 2), {"x"},
                                                  {std::vector<double>(50, 0.3)});
    Eigen::VectorXd th(3);
    th << -60.0, 60.0, 0.0;
    Rng rng(1);
    const auto sim = simulate_under_null(converged_fit(spec, th), table, rng);
    for (int o : sim.outcome_index()) CHECK(o == 1);
    CHECK(sim.column("x")[7] == 0.3);
  }
  SUBCASE("outcome shares match the fitted probabilities") {
    const std::size_t n = 100000;
    const auto table = ObservationTable::severity("sev", {"fatal", "injury", "pdo"}, std::vector<int>(n, 0), {"x"},
                                                  {std::vector<double>(n, 0.8)});
    Eigen::VectorXd th(3);
    th << -1.2, 0.1, 0.5;
    const auto d = build_design(table, spec);
    const auto p = mnl_prob(th, d, 0);
    Rng rng(2);
    const auto sim = simulate_under_null(converged_fit(spec, th), table, rng);
    std::vector<double> share(3, 0.0);
    for (int o : sim.outcome_index()) share[static_cast<std::size_t>(o)] += 1.0 / n;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(share[i] - p[i]) < 3 * std::sqrt(p[i] * (1 - p[i]) / n));
    }
  }
  SUBCASE("unconverged fits are refused") {
    const auto table = ObservationTable::severity("sev", {"fatal", "injury", "pdo"}, {0}, {"x"}, {{1.0}});
    auto f = converged_fit(spec, Eigen::VectorXd::Zero(3));
    f.converged = false;
    Rng rng(3);
    CHECK_THROWS_AS(simulate_under_null(f, table, rng), FitError);
  }
}

TEST_CASE("negative binomial resampling moments") {
  const auto spec = parse_spec("[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n");
  const std::size_t n = 100000;
  const auto table = ObservationTable::frequency("crashes", std::vector<std::int64_t>(n, 1), {}, {});
  const double lambda = 6.5;
  const double alpha = 1.37;
  Eigen::VectorXd th(2);
  th << std::log(lambda), std::log(alpha);
  Rng rng(4);
  const auto sim = simulate_under_null(converged_fit(spec, th), table, rng);
  double m1 = 0, m2 = 0;
  for (auto c : sim.counts()) {
    m1 += static_cast<double>(c);
    m2 += static_cast<double>(c) * static_cast<double>(c);
  }
  m1 /= n;
  const double var = m2 / n - m1 * m1;
  const double v = lambda * (1 + alpha * lambda);
  CHECK(std::abs(m1 - lambda) < 3 * std::sqrt(v / n));
  // Var of the sample variance: (mu4 - sigma^4) / n with NB central moments.
  const double r = 1 / alpha;
  const double p = r / (r + lambda);
  const double kurt_excess = 6.0 / r + p * p / (r * (1 - p));
  const double mu4 = v * v * (3 + kurt_excess);
  CHECK(std::abs(var - v) < 3 * std::sqrt((mu4 - v * v) / n));
}

namespace {

DgpConfig null_frequency(std::size_t n, std::uint64_t seed) {
  return testsupport::dgp("[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = x\n",
                          {{1.2}, {0.4}},
                          {CovariateRecipe::normal("x"), CovariateRecipe::bernoulli("flag", 0.4)}, n, seed, 0.7);
}

}  // namespace

TEST_CASE("asymptotic lr test on pooled-null data") {
  const auto cfg = null_frequency(600, 5);
  const auto table = generate(cfg);
  const auto r = lr_test(table, cfg.spec, "flag");
  CHECK(r.dof == 3);
  CHECK(r.x2 >= 0);
  CHECK(r.p_asymptotic >= 0);
  CHECK(r.p_asymptotic <= 1);
  CHECK(r.p_asymptotic == doctest::Approx(chi2_sf(r.x2, 3)));
  CHECK(r.x2 == doctest::Approx(-2 * (r.ll_all - r.ll_a - r.ll_b)));
  CHECK(r.n_a + r.n_b == 600);
}

TEST_CASE("Monte-Carlo null distribution is seed-deterministic and order-invariant") {
  const auto cfg = null_frequency(150, 6);
  const auto table = generate(cfg);
  McOptions o;
  o.replicates = 120;
  o.seed = 42;
  o.bins = 12;
  set_thread_limit(1);
  const auto a = mc_null_distribution(table, cfg.spec, "flag", o);
  set_thread_limit(4);
  const auto b = mc_null_distribution(table, cfg.spec, "flag", o);
  set_thread_limit(0);
  REQUIRE(a.p_mc.has_value());
  CHECK(*a.p_mc == *b.p_mc);
  CHECK(a.simulated_x2 == b.simulated_x2);
  CHECK(*a.p_mc >= 0.0);
  CHECK(*a.p_mc <= 1.0);
  REQUIRE(a.null_histogram.has_value());
  CHECK(a.null_histogram->counts.size() == 12);
  CHECK(a.null_histogram->edges.front() == 0.0);
  std::size_t total = 0;
  for (auto c : a.null_histogram->counts) total += c;
  CHECK(total == a.simulated_x2.size());
  CHECK(a.simulated_x2.size() + static_cast<std::size_t>(a.failed_replicates) == 120);

  std::size_t exceed = 0;
  for (double x : a.simulated_x2) exceed += x >= a.x2 ? 1 : 0;
  CHECK(*a.p_mc == doctest::Approx(static_cast<double>(exceed) / static_cast<double>(a.simulated_x2.size())));

  o.bias_corrected = true;
  const auto c = mc_null_distribution(table, cfg.spec, "flag", o);
  CHECK(*c.p_mc == doctest::Approx((static_cast<double>(exceed) + 1) / (static_cast<double>(a.simulated_x2.size()) + 1)));

  o.seed = 43;
  o.bias_corrected = false;
  const auto d = mc_null_distribution(table, cfg.spec, "flag", o);
  CHECK(d.simulated_x2 != a.simulated_x2);

  o.replicates = 99;
  CHECK_THROWS_AS(mc_null_distribution(table, cfg.spec, "flag", o), SpecError);
}

TEST_CASE("histogram binning") {
  const auto h = make_histogram({0.0, 1.0, 2.0, 3.0, 4.0}, 4);
  CHECK(h.edges == std::vector<double>{0, 1, 2, 3, 4});
  CHECK(h.counts == std::vector<std::size_t>{1, 1, 1, 2});
}
