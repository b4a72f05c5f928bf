#include "crashmle/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "crashmle/csv.hpp"
#include "crashmle/errors.hpp"

namespace crashmle {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a_hex(ss.str());
}

json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["data_path"] = m.data_path;
  j["data_hash"] = m.data_hash;
  j["spec_path"] = m.spec_path;
  j["spec_hash"] = m.spec_hash;
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  j["draws"] = m.draws ? json(*m.draws) : json(nullptr);
  j["version"] = m.version;
  return j;
}

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double to_double(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Eigen::VectorXd vector_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(a[i]);
  return v;
}

}  // namespace

json to_json(const FitResult& fit) {
  json j;
  j["family"] = to_string(fit.spec.family);
  j["spec"] = to_ini(fit.spec);
  j["converged"] = fit.converged;
  j["status"] = fit.status;
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = number(fit.gradient_norm);
  j["n_obs"] = fit.n_obs;
  j["n_params"] = fit.n_params();
  j["ll_converged"] = number(fit.ll_converged);
  j["ll_restricted"] = number(fit.ll_restricted);
  j["mcfadden_rho2"] = number(fit.mcfadden_rho2);
  j["rho2_if_transposed"] = fit.rho2_if_transposed ? number(*fit.rho2_if_transposed) : json(nullptr);
  j["draws"] = fit.draws ? json(*fit.draws) : json(nullptr);
  j["seed"] = fit.seed ? json(*fit.seed) : json(nullptr);
  j["halton_skip"] = fit.halton_skip;
  j["halton_shift"] = fit.halton_shift;
  j["covariance_method"] = fit.covariance_method;
  json params = json::array();
  for (std::size_t k = 0; k < fit.n_params(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    json p;
    p["label"] = k < fit.labels.size() ? fit.labels[k] : std::string();
    p["log_scaled"] = k < fit.log_scaled.size() && fit.log_scaled[k];
    p["theta"] = number(fit.theta_hat[i]);
    p["estimate"] = number(fit.estimates.size() > i ? fit.estimates[i] : fit.theta_hat[i]);
    p["se"] = fit.standard_errors.size() > i ? number(fit.standard_errors[i]) : json(nullptr);
    p["t"] = fit.t_ratios.size() > i ? number(fit.t_ratios[i]) : json(nullptr);
    params.push_back(p);
  }
  j["parameters"] = params;
  json cov = json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    cov.push_back(vector_json(fit.covariance.row(r).transpose()));
  }
  j["covariance"] = cov;
  j["start"] = vector_json(fit.start);
  j["warnings"] = fit.warnings;
  return j;
}

FitResult fit_from_json(const json& j) {
  try {
    FitResult f;
    f.spec = parse_spec(j.at("spec").get<std::string>());
    f.converged = j.at("converged").get<bool>();
    f.status = j.at("status").get<std::string>();
    f.iterations = j.at("iterations").get<int>();
    f.gradient_norm = to_double(j.at("gradient_norm"));
    f.n_obs = j.at("n_obs").get<std::size_t>();
    f.ll_converged = to_double(j.at("ll_converged"));
    f.ll_restricted = to_double(j.at("ll_restricted"));
    f.mcfadden_rho2 = to_double(j.at("mcfadden_rho2"));
    if (!j.at("rho2_if_transposed").is_null()) {
      f.rho2_if_transposed = j.at("rho2_if_transposed").get<double>();
    }
    if (!j.at("draws").is_null()) f.draws = j.at("draws").get<int>();
    if (!j.at("seed").is_null()) f.seed = j.at("seed").get<std::uint64_t>();
    f.halton_skip = j.at("halton_skip").get<int>();
    f.halton_shift = j.at("halton_shift").get<bool>();
    f.covariance_method = j.at("covariance_method").get<std::string>();
    const auto& params = j.at("parameters");
    const auto p = static_cast<Eigen::Index>(params.size());
    f.theta_hat.resize(p);
    f.estimates.resize(p);
    f.standard_errors.resize(p);
    f.t_ratios.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
      const auto& e = params[static_cast<std::size_t>(k)];
      f.labels.push_back(e.at("label").get<std::string>());
      f.log_scaled.push_back(e.at("log_scaled").get<bool>());
      f.theta_hat[k] = to_double(e.at("theta"));
      f.estimates[k] = to_double(e.at("estimate"));
      f.standard_errors[k] = to_double(e.at("se"));
      f.t_ratios[k] = to_double(e.at("t"));
    }
    const auto& cov = j.at("covariance");
    f.covariance.resize(static_cast<Eigen::Index>(cov.size()), p);
    for (std::size_t r = 0; r < cov.size(); ++r) {
      f.covariance.row(static_cast<Eigen::Index>(r)) = vector_from(cov[r]).transpose();
    }
    f.start = vector_from(j.at("start"));
    f.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!f.theta_hat.allFinite()) throw DataError("fit file has undefined estimates");
    return f;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fit file: ") + e.what());
  }
}

json to_json(const EffectsReport& report) {
  json a = json::array();
  for (const auto& e : report.entries) {
    json j;
    j["variable"] = e.variable;
    j["equation"] = e.equation;
    j["probability_outcome"] = e.probability_outcome;
    j["kind"] = to_string(e.kind);
    j["value"] = number(e.value);
    j["direct"] = e.direct;
    j["elastic"] = e.elastic;
    a.push_back(j);
  }
  return json{{"effects", a}};
}

json to_json(const LrTestResult& r) {
  json j;
  j["x2"] = number(r.x2);
  j["dof"] = r.dof;
  j["p_asymptotic"] = number(r.p_asymptotic);
  j["ll_all"] = number(r.ll_all);
  j["ll_a"] = number(r.ll_a);
  j["ll_b"] = number(r.ll_b);
  j["n_a"] = r.n_a;
  j["n_b"] = r.n_b;
  j["p_mc"] = r.p_mc ? number(*r.p_mc) : json(nullptr);
  j["bias_corrected"] = r.bias_corrected;
  j["replicates"] = r.replicates;
  j["failed_replicates"] = r.failed_replicates;
  j["valid_replicates"] = r.simulated_x2.size();
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  if (r.null_histogram) {
    j["histogram"] = {{"edges", r.null_histogram->edges},
                      {"counts", r.null_histogram->counts},
                      {"observed_x2", number(r.x2)}};
  } else {
    j["histogram"] = nullptr;
  }
  j["warnings"] = r.warnings;
  return j;
}

json to_json(const InfluenceProfile& p) {
  json pts = json::array();
  for (std::size_t g = 0; g < p.grid.size(); ++g) {
    pts.push_back({{"D", p.grid[g]}, {"ll", number(p.ll[g])}, {"converged", bool(p.converged[g])}});
  }
  json j;
  j["profile"] = pts;
  j["d_star"] = p.d_star;
  j["segment_length"] = p.segment_length;
  j["ll_star"] = number(p.ll_star);
  j["flat"] = p.flat;
  j["warnings"] = p.warnings;
  return j;
}

namespace {

std::string csv_line(const std::vector<std::string>& fields) {
  std::ostringstream os;
  csv::write_record(os, fields);
  return os.str();
}

std::string num_field(double x) { return std::isfinite(x) ? csv::format_double(x) : std::string(); }

}  // namespace

std::string effects_csv(const EffectsReport& report) {
  std::string out = csv_line({"variable", "equation", "probability_outcome", "kind", "value",
                              "direct", "elastic"});
  for (const auto& e : report.entries) {
    out += csv_line({e.variable, e.equation, e.probability_outcome, to_string(e.kind),
                     num_field(e.value), e.direct ? "1" : "0", e.elastic ? "1" : "0"});
  }
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = csv_line({"bin_left", "bin_right", "count"});
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out += csv_line({csv::format_double(h.edges[b]), csv::format_double(h.edges[b + 1]),
                     std::to_string(h.counts[b])});
  }
  return out;
}

std::string profile_csv(const InfluenceProfile& p) {
  std::string out = csv_line({"D", "ll", "converged"});
  for (std::size_t g = 0; g < p.grid.size(); ++g) {
    out += csv_line({csv::format_double(p.grid[g]), num_field(p.ll[g]), p.converged[g] ? "1" : "0"});
  }
  return out;
}

std::string format_sig3(double x) {
  if (!std::isfinite(x)) return "n/a";
  if (x == 0.0) return "0";
  const int mag = static_cast<int>(std::floor(std::log10(std::abs(x))));
  int decimals = std::max(0, 2 - mag);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  std::string s = buf;
  // Rounding can add a digit (0.9996 -> 1.000); redo with one decimal fewer.
  const double rounded = std::abs(std::strtod(buf, nullptr));
  if (decimals > 0 && rounded > 0 && static_cast<int>(std::floor(std::log10(rounded))) > mag) {
    std::snprintf(buf, sizeof buf, "%.*f", decimals - 1, x);
    s = buf;
  }
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  if (s.rfind("-0.", 0) == 0) s.erase(1, 1);
  return s;
}

std::string format_t(double t) {
  if (!std::isfinite(t)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", t);
  return buf;
}

namespace {

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

}  // namespace

std::string format_fit_table(const FitResult& fit) {
  struct Row {
    std::string variable;
    std::string outcomes;
    std::string cell;
  };
  std::vector<Row> rows;
  auto cell = [&](std::size_t k) {
    const auto i = static_cast<Eigen::Index>(k);
    return format_sig3(fit.estimates[i]) + " (" + format_t(fit.t_ratios[i]) + ")";
  };
  std::size_t idx = 0;
  for (const auto& term : fit.spec.terms) {
    rows.push_back({term.variable, join(term.outcomes), cell(idx++)});
    if (term.kind == CoefKind::random_normal) {
      rows.push_back({"  sd of " + term.variable, "", cell(idx++)});
    } else if (term.kind == CoefKind::random_uniform) {
      const auto i = static_cast<Eigen::Index>(idx);
      rows.push_back({"  spread of " + term.variable, "",
                      cell(idx) + "  [spread/sqrt(3) = " +
                          format_sig3(fit.estimates[i] / std::sqrt(3.0)) + "]"});
      ++idx;
    }
  }
  if (!is_severity(fit.spec.family) && idx < fit.n_params()) {
    rows.push_back({"alpha", "", cell(idx++)});
  }

  std::size_t w1 = 8;
  std::size_t w2 = 7;
  for (const auto& r : rows) {
    w1 = std::max(w1, r.variable.size());
    w2 = std::max(w2, r.outcomes.size());
  }
  std::ostringstream os;
  os << "Estimation results (" << to_string(fit.spec.family) << ")\n";
  os << pad("Variable", w1 + 2) << pad(is_severity(fit.spec.family) ? "Outcome" : "", w2 + 2)
     << "Estimate (t)\n";
  for (const auto& r : rows) os << pad(r.variable, w1 + 2) << pad(r.outcomes, w2 + 2) << r.cell << '\n';
  os << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", fit.ll_converged);
  os << "Log-likelihood at convergence: " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.2f", fit.ll_restricted);
  os << "Restricted log-likelihood: " << (std::isfinite(fit.ll_restricted) ? buf : "n/a") << '\n';
  os << "Number of parameters: " << fit.n_params() << '\n';
  os << "Number of observations: " << fit.n_obs << '\n';
  std::snprintf(buf, sizeof buf, "%.3f", fit.mcfadden_rho2);
  os << "McFadden rho2: " << (std::isfinite(fit.mcfadden_rho2) ? buf : "n/a") << '\n';
  if (fit.draws) os << "Simulation draws: " << *fit.draws << " (Halton)\n";
  os << "Converged: " << (fit.converged ? "yes" : "no") << " (" << fit.status << ", "
     << fit.iterations << " iterations)\n";
  for (const auto& w : fit.warnings) os << "Warning: " << w << '\n';
  return os.str();
}

std::string format_lrtest(const LrTestResult& r) {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "X2 = %.2f, dof = %d, asymptotic p = %.4g\n", r.x2, r.dof,
                r.p_asymptotic);
  os << buf;
  std::snprintf(buf, sizeof buf, "LL pooled = %.2f, LL A = %.2f (n = %zu), LL B = %.2f (n = %zu)\n",
                r.ll_all, r.ll_a, r.n_a, r.ll_b, r.n_b);
  os << buf;
  if (r.p_mc) {
    std::snprintf(buf, sizeof buf, "Monte-Carlo p = %.4g (%zu valid of %d replicates%s)\n", *r.p_mc,
                  r.simulated_x2.size(), r.replicates, r.bias_corrected ? ", bias-corrected" : "");
    os << buf;
  }
  for (const auto& w : r.warnings) os << "Warning: " << w << '\n';
  return os.str();
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_json(const json& j, const std::filesystem::path& path) { write_text(j.dump(2) + "\n", path); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace crashmle
