#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "crashmle/errors.hpp"
#include "crashmle/halton.hpp"
#include "crashmle/random.hpp"
#include "crashmle/synthgen.hpp"

using namespace crashmle;

namespace {

std::string csv_of(const ObservationTable& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

std::vector<double> shares(const ObservationTable& t) {
  std::vector<double> s(t.labels().size(), 0.0);
  for (int o : t.outcome_index()) s[static_cast<std::size_t>(o)] += 1.0 / static_cast<double>(t.n_rows());
  return s;
}

const char* kTwoOutcomeMixed = "[model]\nfamily = mixed_mnl\noutcome = y\noutcomes = a, b\nbase = b\n";

}  // namespace

TEST_CASE("equal shares at theta = 0") {
  const auto cfg = testsupport::dgp(std::string(testsupport::kSeverityHeader) +
                                        "[term]\nvar = constant\noutcomes = fatal\n"
                                        "[term]\nvar = x\noutcomes = injury\n",
                                    {{0.0}, {0.0}}, {CovariateRecipe::normal("x")}, 30000, 1);
  const auto s = shares(gen_mnl(cfg));
  for (double v : s) CHECK(std::abs(v - 1.0 / 3) < 3 * std::sqrt(2.0 / 9 / 30000));
}

TEST_CASE("a dominant predictor saturates its outcome") {
  const auto cfg = testsupport::dgp(std::string(testsupport::kSeverityHeader) +
                                        "[term]\nvar = constant\noutcomes = injury\n",
                                    {{10.0}}, {}, 5000, 2);
  CHECK(shares(gen_mnl(cfg))[1] > 0.99);
}

TEST_CASE("generators are pure functions of config and seed") {
  const auto cfg = testsupport::dgp(std::string(testsupport::kSeverityHeader) +
                                        "[term]\nvar = constant\noutcomes = fatal\n"
                                        "[term]\nvar = x\noutcomes = injury\n",
                                    {{-0.5}, {0.7}},
                                    {CovariateRecipe::normal("x"), CovariateRecipe::bernoulli("flag", 0.3)}, 500, 11);
  CHECK(csv_of(gen_mnl(cfg)) == csv_of(gen_mnl(cfg)));
  auto other = cfg;
  other.seed = 12;
  CHECK(csv_of(gen_mnl(cfg)) != csv_of(gen_mnl(other)));
  CHECK(gen_mnl(cfg).column("flag").size() == 500);
}

TEST_CASE("mixed generator with zero scales reproduces the fixed generator") {
  const std::string terms = "[term]\nvar = constant\noutcomes = fatal\n[term]\nvar = x\noutcomes = injury\n";
  const auto fixed = testsupport::dgp(std::string(testsupport::kSeverityHeader) + terms, {{-0.5}, {0.7}},
                                      {CovariateRecipe::normal("x")}, 800, 4);
  auto mixed = testsupport::dgp(std::string(testsupport::kMixedHeader) + terms + "dist = normal\n",
                                {{-0.5}, {0.7, 0.0}}, {CovariateRecipe::normal("x")}, 800, 4);
  CHECK(csv_of(gen_mnl(fixed)) == csv_of(gen_mixed_mnl(mixed)));
}

TEST_CASE("share of negative drawn coefficients") {
  // With x = 1000 the outcome reveals the sign of the drawn coefficient.
  const auto cfg = testsupport::dgp(std::string(kTwoOutcomeMixed) + "[term]\nvar = x\noutcomes = a\ndist = normal\n",
                                    {{-1.85, 2.65}}, {CovariateRecipe::constant("x", 1000.0)}, 100000, 5);
  const double negative = shares(gen_mixed_mnl(cfg))[1];
  const double mc_sd = std::sqrt(0.757 * 0.243 / 100000);
  CHECK(std::abs(negative - testsupport::phi(1.85 / 2.65)) < 3 * mc_sd + 0.002);
  CHECK(std::abs(negative - 0.757) < 3 * mc_sd + 0.002);
}

TEST_CASE("uniform coefficients stay inside their support") {
  for (double u = 1e-12; u < 1; u += 0.0137) {
    const double b = transform_draw(u, {CoefKind::random_uniform, 0.4, 1.3});
    CHECK(b >= 0.4 - 1.3);
    CHECK(b <= 0.4 + 1.3);
  }
  // Thresholds just outside [b - s, b + s]: every drawn coefficient lies on
  // one side, so the outcome is deterministic.
  for (double threshold : {-1.02, 1.02}) {
    const auto cfg = testsupport::dgp(std::string(kTwoOutcomeMixed) +
                                          "[term]\nvar = x\noutcomes = a\ndist = uniform\n"
                                          "[term]\nvar = c\noutcomes = a\n",
                                      {{0.0, 1.0}, {-threshold}},
                                      {CovariateRecipe::constant("x", 1e4), CovariateRecipe::constant("c", 1e4)},
                                      20000, 6);
    const auto t = gen_mixed_mnl(cfg);
    std::size_t first = 0;
    for (int o : t.outcome_index()) first += o == 0 ? 1 : 0;
    CHECK(first == (threshold < 0 ? t.n_rows() : 0));
  }
}

TEST_CASE("negative binomial draws") {
  const char* spec = "[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n";
  SUBCASE("geometric case") {
    const auto t = gen_nb(testsupport::dgp(spec, {{0.0}}, {}, 100000, 7, 1.0));
    double zeros = 0;
    for (auto c : t.counts()) zeros += c == 0 ? 1.0 : 0.0;
    zeros /= 100000;
    CHECK(std::abs(zeros - 0.5) < 3 * std::sqrt(0.25 / 100000));
  }
  SUBCASE("variance identity") {
    const double lambda = 4.0;
    const double alpha = 1.37;
    const std::size_t n = 200000;
    const auto t = gen_nb(testsupport::dgp(spec, {{std::log(lambda)}}, {}, n, 8, alpha));
    double m1 = 0, m2 = 0;
    for (auto c : t.counts()) {
      m1 += static_cast<double>(c);
      m2 += static_cast<double>(c) * static_cast<double>(c);
    }
    m1 /= static_cast<double>(n);
    const double var = m2 / static_cast<double>(n) - m1 * m1;
    const double v = lambda * (1 + alpha * lambda);
    const double r = 1 / alpha;
    const double p = r / (r + lambda);
    const double mu4 = v * v * (3 + 6.0 / r + p * p / (r * (1 - p)));
    CHECK(std::abs(m1 - lambda) < 3 * std::sqrt(v / static_cast<double>(n)));
    CHECK(std::abs(var - v) < 3 * std::sqrt((mu4 - v * v) / static_cast<double>(n)));
  }
  SUBCASE("Poisson limit") {
    const std::size_t n = 200000;
    const auto t = gen_nb(testsupport::dgp(spec, {{std::log(3.0)}}, {}, n, 9, 1e-8));
    double m1 = 0, m2 = 0;
    for (auto c : t.counts()) {
      m1 += static_cast<double>(c);
      m2 += static_cast<double>(c) * static_cast<double>(c);
    }
    m1 /= static_cast<double>(n);
    const double var = m2 / static_cast<double>(n) - m1 * m1;
    // Var of the Poisson sample variance: (mu4 - sigma^4)/n = (3l^2 + l - l^2)/n.
    CHECK(std::abs(var - 3.0) < 3 * std::sqrt((2 * 9.0 + 3.0) / static_cast<double>(n)));
    CHECK(std::abs(m1 - 3.0) < 3 * std::sqrt(3.0 / static_cast<double>(n)));
  }
}

TEST_CASE("mixed nb generator") {
  const char* spec = "[model]\nfamily = mixed_nb\noutcome = crashes\n[term]\nvar = constant\n"
                     "[term]\nvar = x\ndist = normal\n";
  const auto cfg = testsupport::dgp(spec, {{0.5}, {0.2, 0.3}}, {CovariateRecipe::normal("x")}, 300, 10, 0.9);
  const auto t = gen_mixed_nb(cfg);
  CHECK(t.n_rows() == 300);
  CHECK(t.mode() == OutcomeMode::frequency);
  CHECK_THROWS_AS(gen_nb(cfg), SpecError);
}

TEST_CASE("influence generator") {
  const std::string terms = "[term]\nvar = constant\noutcomes = fatal\n[term]\nvar = d\noutcomes = injury\n";
  const auto cfg = testsupport::dgp(std::string(testsupport::kSeverityHeader) + terms, {{-0.5}, {-1.2}},
                                    {CovariateRecipe::uniform("d", 0.0, 2.0)}, 1000, 12);
  SUBCASE("a cap beyond every distance changes nothing") {
    CHECK(csv_of(gen_influence(cfg, 5.0, "d")) == csv_of(gen_mnl(cfg)));
  }
  SUBCASE("the stored distance is the raw one") {
    const auto t = gen_influence(cfg, 0.5, "d");
    double mx = 0;
    for (double v : t.column("d")) mx = std::max(mx, v);
    CHECK(mx > 1.5);
    CHECK(csv_of(t) != csv_of(gen_mnl(cfg)));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(gen_influence(cfg, 0.0, "d"), SpecError);
    CHECK_THROWS_AS(gen_influence(cfg, 0.5, "missing"), SpecError);
    auto neg = cfg;
    neg.covariates[0] = CovariateRecipe::normal("d");
    CHECK_THROWS_AS(gen_influence(neg, 0.5, "d"), SpecError);
  }
}

TEST_CASE("config validation") {
  const std::string terms = "[term]\nvar = constant\noutcomes = fatal\n[term]\nvar = x\noutcomes = injury\n";
  auto good = testsupport::dgp(std::string(testsupport::kSeverityHeader) + terms, {{0.1}, {0.2}},
                               {CovariateRecipe::normal("x")}, 10, 1);
  CHECK_NOTHROW(good.validate());
  auto missing_param = good;
  missing_param.terms.pop_back();
  CHECK_THROWS_AS(gen_mnl(missing_param), SpecError);
  auto missing_recipe = good;
  missing_recipe.covariates.clear();
  CHECK_THROWS_AS(gen_mnl(missing_recipe), SpecError);
  auto scaled_fixed = good;
  scaled_fixed.terms[1].scale = 0.5;
  CHECK_THROWS_AS(gen_mnl(scaled_fixed), SpecError);
  auto zero_rows = good;
  zero_rows.n = 0;
  CHECK_THROWS_AS(gen_mnl(zero_rows), SpecError);
  auto nb = testsupport::dgp("[model]\nfamily = nb\noutcome = c\n[term]\nvar = constant\n", {{0.0}}, {}, 10, 1, 0.0);
  CHECK_THROWS_AS(gen_nb(nb), SpecError);
  auto negative_scale = testsupport::dgp(std::string(kTwoOutcomeMixed) + "[term]\nvar = x\noutcomes = a\ndist = normal\n",
                                         {{0.0, -1.0}}, {CovariateRecipe::normal("x")}, 10, 1);
  CHECK_THROWS_AS(gen_mixed_mnl(negative_scale), SpecError);
}

TEST_CASE("json configuration") {
  const std::string text = R"({
    "spec": "[model]\nfamily = nb\noutcome = crashes\n[term]\nvar = constant\n[term]\nvar = x\n",
    "n": 50, "seed": 3, "alpha": 1.37,
    "params": [{"location": 0.5}, {"location": -0.2}],
    "covariates": [{"name": "x", "dist": "uniform", "low": 0, "high": 4},
                   {"name": "flag", "dist": "bernoulli", "p": 0.5}]
  })";
  const auto c = parse_dgp_config(text);
  CHECK(c.n == 50);
  CHECK(c.seed == 3);
  CHECK(c.alpha == 1.37);
  CHECK(c.covariates[0].kind == CovariateRecipe::Kind::uniform);
  CHECK(c.covariates[0].b == 4.0);
  const auto t = generate(c);
  CHECK(t.n_rows() == 50);
  for (double v : t.column("x")) {
    CHECK(v >= 0.0);
    CHECK(v <= 4.0);
  }
  CHECK_THROWS_AS(parse_dgp_config(R"({"n": 5})"), SpecError);
  CHECK_THROWS_AS(parse_dgp_config("not json"), SpecError);
  std::string unknown = text;
  unknown.insert(unknown.find("\"n\""), "\"colour\": 1, ");
  CHECK_THROWS_AS(parse_dgp_config(unknown), SpecError);
}

TEST_CASE("rng streams and variates") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng s0 = Rng::stream(5, 0), s1 = Rng::stream(5, 1);
  CHECK(s0.uniform() != s1.uniform());
  Rng g(6);
  double mean = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) mean += g.gamma(0.4, 2.5);
  mean /= n;
  CHECK(std::abs(mean - 1.0) < 3 * std::sqrt(0.4 * 2.5 * 2.5 / n));
  double pmean = 0;
  for (int i = 0; i < n; ++i) pmean += static_cast<double>(g.poisson(37.5));
  pmean /= n;
  CHECK(std::abs(pmean - 37.5) < 3 * std::sqrt(37.5 / n));
}
