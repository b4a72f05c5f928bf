#include "crashmle/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "crashmle/errors.hpp"
#include "crashmle/halton.hpp"
#include "crashmle/mnl.hpp"
#include "crashmle/random.hpp"

namespace crashmle {

CovariateRecipe CovariateRecipe::normal(std::string name, double mean, double sd) {
  return {std::move(name), Kind::normal, mean, sd};
}
CovariateRecipe CovariateRecipe::uniform(std::string name, double lo, double hi) {
  return {std::move(name), Kind::uniform, lo, hi};
}
CovariateRecipe CovariateRecipe::bernoulli(std::string name, double p) {
  return {std::move(name), Kind::bernoulli, p, 0.0};
}
CovariateRecipe CovariateRecipe::constant(std::string name, double value) {
  return {std::move(name), Kind::constant, value, 0.0};
}

void DgpConfig::validate() const {
  spec.validate();
  if (n == 0) throw SpecError("dgp: n must be positive");
  if (terms.size() != spec.terms.size()) {
    throw SpecError("dgp: " + std::to_string(spec.terms.size()) + " terms but " +
                    std::to_string(terms.size()) + " true parameters");
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& t = terms[k];
    if (!std::isfinite(t.location) || !std::isfinite(t.scale) || t.scale < 0.0) {
      throw SpecError("dgp: invalid true value for term '" + spec.terms[k].variable + "'");
    }
    if (!is_random(spec.terms[k].kind) && t.scale != 0.0) {
      throw SpecError("dgp: fixed term '" + spec.terms[k].variable + "' has a nonzero scale");
    }
  }
  if (!is_severity(spec.family) && !(alpha > 0.0 && std::isfinite(alpha))) {
    throw SpecError("dgp: alpha must be positive");
  }
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    const auto& c = covariates[i];
    if (c.name.empty() || c.name == kConstant) throw SpecError("dgp: invalid covariate name");
    for (std::size_t j = 0; j < i; ++j) {
      if (covariates[j].name == c.name) throw SpecError("dgp: duplicate covariate '" + c.name + "'");
    }
    using K = CovariateRecipe::Kind;
    if (c.kind == K::normal && !(c.b >= 0.0)) throw SpecError("dgp: negative sd for '" + c.name + "'");
    if (c.kind == K::uniform && !(c.b > c.a)) throw SpecError("dgp: empty range for '" + c.name + "'");
    if (c.kind == K::bernoulli && !(c.a >= 0.0 && c.a <= 1.0)) {
      throw SpecError("dgp: probability out of range for '" + c.name + "'");
    }
  }
  for (const auto& var : spec.variables()) {
    const auto found = std::any_of(covariates.begin(), covariates.end(),
                                   [&](const CovariateRecipe& c) { return c.name == var; });
    if (!found) throw SpecError("dgp: no covariate recipe for '" + var + "'");
  }
}

namespace {

double draw_covariate(const CovariateRecipe& c, Rng& rng) {
  using K = CovariateRecipe::Kind;
  switch (c.kind) {
    case K::normal: return c.a + c.b * rng.normal();
    case K::uniform: return rng.uniform(c.a, c.b);
    case K::bernoulli: return rng.bernoulli(c.a) ? 1.0 : 0.0;
    case K::constant: return c.a;
  }
  return 0.0;
}

struct Cap {
  std::size_t column;  // index into covariates
  double range;
};

ObservationTable run(const DgpConfig& config, std::optional<Cap> cap) {
  config.validate();
  const auto& spec = config.spec;
  const std::size_t n_cov = config.covariates.size();
  const std::size_t n_terms = spec.terms.size();

  // Covariate index per term (npos for the constant).
  constexpr auto npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> source(n_terms, npos);
  for (std::size_t k = 0; k < n_terms; ++k) {
    if (spec.terms[k].variable == kConstant) continue;
    for (std::size_t c = 0; c < n_cov; ++c) {
      if (config.covariates[c].name == spec.terms[k].variable) source[k] = c;
    }
  }

  const bool severity = is_severity(spec.family);
  const std::size_t n_out = severity ? spec.outcomes.size() : 1;
  std::vector<std::uint8_t> mask(n_terms * n_out, 0);
  if (severity) {
    for (std::size_t k = 0; k < n_terms; ++k) {
      for (const auto& o : spec.terms[k].outcomes) mask[k * n_out + spec.outcome_position(o)] = 1;
    }
  }

  Rng rng(config.seed);
  std::vector<std::vector<double>> columns(n_cov, std::vector<double>(config.n));
  std::vector<int> outcome;
  std::vector<std::int64_t> counts;
  (severity ? outcome.resize(config.n) : counts.resize(config.n));

  std::vector<double> x(n_cov);
  std::vector<double> coef(n_terms);
  std::vector<double> eta(n_out);
  std::vector<double> prob(n_out);
  for (std::size_t row = 0; row < config.n; ++row) {
    for (std::size_t c = 0; c < n_cov; ++c) {
      x[c] = draw_covariate(config.covariates[c], rng);
      columns[c][row] = x[c];
    }
    if (cap) {
      if (x[cap->column] < 0.0) throw SpecError("dgp: distance recipe produced a negative value");
    }
    for (std::size_t k = 0; k < n_terms; ++k) {
      const auto& t = config.terms[k];
      coef[k] = t.location;
      if (is_random(spec.terms[k].kind) && t.scale > 0.0) {
        coef[k] = transform_draw(rng.uniform(), MixingTerm{spec.terms[k].kind, t.location, t.scale});
      }
    }
    auto value = [&](std::size_t k) {
      if (source[k] == npos) return 1.0;
      const double v = x[source[k]];
      return (cap && source[k] == cap->column) ? std::min(v, cap->range) : v;
    };
    if (severity) {
      std::fill(eta.begin(), eta.end(), 0.0);
      for (std::size_t k = 0; k < n_terms; ++k) {
        const double v = coef[k] * value(k);
        for (std::size_t j = 0; j < n_out; ++j) {
          if (mask[k * n_out + j]) eta[j] += v;
        }
      }
      softmax(eta, prob);
      outcome[row] = rng.categorical(prob);
    } else {
      double e = 0.0;
      for (std::size_t k = 0; k < n_terms; ++k) e += coef[k] * value(k);
      counts[row] = rng.negative_binomial(std::exp(e), config.alpha);
    }
  }

  std::vector<std::string> names;
  for (const auto& c : config.covariates) names.push_back(c.name);
  if (severity) {
    return ObservationTable::severity(spec.outcome_column, spec.outcomes, std::move(outcome),
                                      std::move(names), std::move(columns));
  }
  return ObservationTable::frequency(spec.outcome_column, std::move(counts), std::move(names),
                                     std::move(columns));
}

void require_family(const DgpConfig& config, Family f) {
  if (config.spec.family != f) {
    throw SpecError("dgp: generator for " + to_string(f) + " given a " +
                    to_string(config.spec.family) + " spec");
  }
}

}  // namespace

ObservationTable gen_mnl(const DgpConfig& config) {
  require_family(config, Family::mnl);
  return run(config, std::nullopt);
}

ObservationTable gen_mixed_mnl(const DgpConfig& config) {
  require_family(config, Family::mixed_mnl);
  return run(config, std::nullopt);
}

ObservationTable gen_nb(const DgpConfig& config) {
  require_family(config, Family::nb);
  return run(config, std::nullopt);
}

ObservationTable gen_mixed_nb(const DgpConfig& config) {
  require_family(config, Family::mixed_nb);
  return run(config, std::nullopt);
}

ObservationTable gen_influence(const DgpConfig& config, double true_range,
                               const std::string& distance_column) {
  if (!is_severity(config.spec.family)) throw SpecError("dgp: influence data needs a severity spec");
  if (!(true_range > 0.0)) throw SpecError("dgp: influence range must be positive");
  const auto& cov = config.covariates;
  const auto it = std::find_if(cov.begin(), cov.end(),
                               [&](const CovariateRecipe& c) { return c.name == distance_column; });
  if (it == cov.end()) throw SpecError("dgp: no recipe for distance column '" + distance_column + "'");
  using K = CovariateRecipe::Kind;
  const bool nonnegative = (it->kind == K::uniform && it->a >= 0.0) ||
                           (it->kind == K::constant && it->a >= 0.0) || it->kind == K::bernoulli;
  if (!nonnegative) throw SpecError("dgp: distance recipe must be nonnegative");
  return run(config, Cap{static_cast<std::size_t>(it - cov.begin()), true_range});
}

ObservationTable generate(const DgpConfig& config) {
  if (config.influence) {
    return gen_influence(config, config.influence->true_range, config.influence->distance_column);
  }
  switch (config.spec.family) {
    case Family::mnl: return gen_mnl(config);
    case Family::mixed_mnl: return gen_mixed_mnl(config);
    case Family::nb: return gen_nb(config);
    case Family::mixed_nb: return gen_mixed_nb(config);
  }
  throw SpecError("dgp: unknown family");
}

namespace {

using nlohmann::json;

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SpecError(std::string("dgp: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw SpecError("dgp: unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

DgpConfig parse_dgp_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("dgp: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SpecError("dgp: configuration must be a JSON object");
  reject_unknown(j, {"spec", "spec_file", "n", "seed", "alpha", "params", "covariates", "influence"},
                 "configuration");

  DgpConfig c;
  try {
    if (j.contains("spec") == j.contains("spec_file")) {
      throw SpecError("dgp: give exactly one of 'spec' and 'spec_file'");
    }
    if (j.contains("spec")) {
      c.spec = parse_spec(j.at("spec").get<std::string>());
    } else {
      c.spec = load_spec(base_dir / j.at("spec_file").get<std::string>());
    }
    const auto n = j.at("n").get<std::int64_t>();
    if (n <= 0) throw SpecError("dgp: n must be positive");
    c.n = static_cast<std::size_t>(n);
    c.seed = j.value("seed", std::uint64_t{0});
    c.alpha = number_or(j, "alpha", 1.0);
    for (const auto& p : j.at("params")) {
      reject_unknown(p, {"location", "scale"}, "params");
      c.terms.push_back({p.at("location").get<double>(), number_or(p, "scale", 0.0)});
    }
    for (const auto& cv : j.at("covariates")) {
      const auto name = cv.at("name").get<std::string>();
      const auto dist = cv.at("dist").get<std::string>();
      if (dist == "normal") {
        reject_unknown(cv, {"name", "dist", "mean", "sd"}, "covariate '" + name + "'");
        c.covariates.push_back(CovariateRecipe::normal(name, number_or(cv, "mean", 0.0),
                                                       number_or(cv, "sd", 1.0)));
      } else if (dist == "uniform") {
        reject_unknown(cv, {"name", "dist", "low", "high"}, "covariate '" + name + "'");
        c.covariates.push_back(CovariateRecipe::uniform(name, number_or(cv, "low", 0.0),
                                                        number_or(cv, "high", 1.0)));
      } else if (dist == "bernoulli") {
        reject_unknown(cv, {"name", "dist", "p"}, "covariate '" + name + "'");
        c.covariates.push_back(CovariateRecipe::bernoulli(name, cv.at("p").get<double>()));
      } else if (dist == "constant") {
        reject_unknown(cv, {"name", "dist", "value"}, "covariate '" + name + "'");
        c.covariates.push_back(CovariateRecipe::constant(name, cv.at("value").get<double>()));
      } else {
        throw SpecError("dgp: unknown covariate distribution '" + dist + "'");
      }
    }
    if (j.contains("influence")) {
      const auto& inf = j.at("influence");
      reject_unknown(inf, {"column", "true_range"}, "influence");
      c.influence = InfluenceSettings{inf.at("column").get<std::string>(),
                                      inf.at("true_range").get<double>()};
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("dgp: malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

DgpConfig load_dgp_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("dgp: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dgp_config(ss.str(), path.parent_path());
}

}  // namespace crashmle
