// crashmle: command-line front end for fitting severity and frequency
// models, effects, likelihood-ratio tests, influence searches and
// synthetic data generation.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crashmle/errors.hpp"
#include "crashmle/fit.hpp"
#include "crashmle/influence.hpp"
#include "crashmle/lrtest.hpp"
#include "crashmle/nb.hpp"
#include "crashmle/parallel.hpp"
#include "crashmle/report.hpp"
#include "crashmle/severity_effects.hpp"
#include "crashmle/synthgen.hpp"
#include "crashmle/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace crashmle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string header(const RunManifest& m) {
  std::string s = "# crashmle " + m.version + " " + m.command + "\n# generated " + utc_now() + "\n";
  if (!m.data_path.empty()) s += "# data " + m.data_path + " (fnv1a " + m.data_hash + ")\n";
  if (!m.spec_path.empty()) s += "# spec " + m.spec_path + " (fnv1a " + m.spec_hash + ")\n";
  if (m.seed) s += "# seed " + std::to_string(*m.seed) + "\n";
  if (m.draws) s += "# draws " + std::to_string(*m.draws) + "\n";
  return s + "\n";
}

RunManifest manifest(const std::string& command, const std::string& data, const std::string& spec) {
  RunManifest m;
  m.command = command;
  m.version = kVersion;
  if (!data.empty()) {
    m.data_path = data;
    m.data_hash = file_hash(data);
  }
  if (!spec.empty()) {
    m.spec_path = spec;
    m.spec_hash = file_hash(spec);
  }
  return m;
}

json with_manifest(const RunManifest& m, const std::string& key, json body) {
  json j;
  j["manifest"] = to_json(m);
  j[key] = std::move(body);
  return j;
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
  return fs::path(prefix + suffix);
}

// Optimizer and simulation settings from an optional JSON file.
FitOptions load_settings(const std::string& path) {
  FitOptions o;
  if (path.empty()) return o;
  const json j = read_json(path);
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "max_iterations") o.optim.max_iterations = value.get<int>();
      else if (key == "gradient_tolerance") o.optim.gradient_tolerance = value.get<double>();
      else if (key == "step_tolerance") o.optim.step_tolerance = value.get<double>();
      else if (key == "hessian_step") o.optim.hessian_step = value.get<double>();
      else if (key == "max_step") o.optim.max_step = value.get<double>();
      else if (key == "halton_skip") o.halton.skip = value.get<std::size_t>();
      else if (key == "halton_shift") o.halton.random_shift = value.get<bool>();
      else if (key == "covariance") o.compute_covariance = value.get<bool>();
      else throw SpecError("settings: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("settings: ") + e.what());
  }
  o.optim.validate();
  return o;
}

LoadOptions load_options_for(const ModelSpec& spec, std::vector<std::string> extra = {}) {
  LoadOptions lo;
  lo.mode = is_severity(spec.family) ? OutcomeMode::severity : OutcomeMode::frequency;
  lo.outcome_column = spec.outcome_column;
  lo.outcome_labels = spec.outcomes;
  lo.columns = spec.variables();
  for (auto& v : extra) {
    if (v.empty() || v == kConstant) continue;
    if (std::find(lo.columns.begin(), lo.columns.end(), v) == lo.columns.end()) {
      lo.columns.push_back(std::move(v));
    }
  }
  return lo;
}

void note_dropped(const ObservationTable& t) {
  if (t.dropped_rows() > 0) {
    std::cerr << "note: " << t.dropped_rows() << " row(s) with missing values dropped\n";
  }
}

void apply_draws(const ModelSpec& spec, std::optional<int> draws, std::optional<std::uint64_t> seed,
                 FitOptions& o) {
  if (is_mixed(spec.family)) {
    if (!draws) throw SpecError("mixed families require --draws");
    o.draws = *draws;
  }
  if (seed) o.seed = *seed;
}

struct FitArgs {
  std::string data, spec, out, settings;
  std::optional<int> draws;
  std::optional<std::uint64_t> seed;
};

int cmd_fit(const FitArgs& a) {
  const auto spec = load_spec(a.spec);
  const auto table = load_csv(a.data, load_options_for(spec));
  note_dropped(table);
  auto opts = load_settings(a.settings);
  apply_draws(spec, a.draws, a.seed, opts);
  const auto fit = fit_model(table, spec, opts);

  auto m = manifest("fit", a.data, a.spec);
  m.seed = fit.seed;
  m.draws = fit.draws;
  write_json(with_manifest(m, "fit", to_json(fit)), with_suffix(a.out, ".json"));
  const auto text = format_fit_table(fit);
  write_text(header(m) + text, with_suffix(a.out, ".txt"));
  std::cout << text;
  if (!fit.converged) {
    std::cerr << "error: fit did not converge (" << fit.status << "); partial results written\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

struct EffectsArgs {
  std::string fit, data, out;
  std::vector<std::string> continuous, indicators;
};

int cmd_effects(const EffectsArgs& a) {
  const auto j = read_json(a.fit);
  const auto fit = fit_from_json(j.contains("fit") ? j.at("fit") : j);
  std::vector<std::string> extra = a.continuous;
  extra.insert(extra.end(), a.indicators.begin(), a.indicators.end());
  const auto table = load_csv(a.data, load_options_for(fit.spec, extra));
  note_dropped(table);
  if (table.n_rows() != fit.n_obs) {
    std::cerr << "warning: data has " << table.n_rows() << " rows, fit used " << fit.n_obs << "\n";
  }
  const auto design = build_design(table, fit.spec);
  if (design.n_params() != fit.n_params()) throw SpecError("fit file does not match the data");

  EffectsReport report;
  if (is_severity(fit.spec.family)) {
    if (is_mixed(fit.spec.family)) {
      const auto sim = fit_draws(fit, design);
      report = mixed_effects(fit, design, sim, a.continuous, a.indicators);
    } else {
      report = elasticities(fit, design, a.continuous);
      auto pseudo = pseudo_elasticities(fit, design, a.indicators);
      report.entries.insert(report.entries.end(), pseudo.entries.begin(), pseudo.entries.end());
    }
  } else {
    if (is_mixed(fit.spec.family)) {
      const auto sim = fit_draws(fit, design);
      report = marginal_effects(fit, design, extra, &sim);
    } else {
      report = marginal_effects(fit, design, extra);
    }
  }
  auto m = manifest("effects", a.data, a.fit);
  m.seed = fit.seed;
  m.draws = fit.draws;
  write_json(with_manifest(m, "effects", to_json(report)["effects"]), with_suffix(a.out, ".json"));
  write_text(effects_csv(report), with_suffix(a.out, ".csv"));
  std::cout << effects_csv(report);
  return kExitOk;
}

struct LrArgs {
  std::string data, spec, split, out, settings;
  std::optional<int> mc;
  std::optional<int> draws;
  std::uint64_t seed = 0;
  int bins = 50;
  bool bias_corrected = false;
};

int cmd_lrtest(const LrArgs& a) {
  const auto spec = load_spec(a.spec);
  const auto table = load_csv(a.data, load_options_for(spec, {a.split}));
  note_dropped(table);
  auto opts = load_settings(a.settings);
  apply_draws(spec, a.draws, a.seed, opts);

  LrTestResult r;
  if (a.mc) {
    McOptions mc;
    mc.replicates = *a.mc;
    mc.seed = a.seed;
    mc.bins = a.bins;
    mc.bias_corrected = a.bias_corrected;
    mc.fit = opts;
    r = mc_null_distribution(table, spec, a.split, mc);
  } else {
    r = lr_test(table, spec, a.split, opts);
  }
  auto m = manifest("lrtest", a.data, a.spec);
  if (a.mc || is_mixed(spec.family)) m.seed = a.seed;
  if (is_mixed(spec.family)) m.draws = opts.draws;
  write_json(with_manifest(m, "lrtest", to_json(r)), with_suffix(a.out, ".json"));
  const auto text = format_lrtest(r);
  write_text(header(m) + text, with_suffix(a.out, ".txt"));
  if (r.null_histogram) write_text(histogram_csv(*r.null_histogram), with_suffix(a.out, "_histogram.csv"));
  std::cout << text;
  return kExitOk;
}

struct InfluenceArgs {
  std::string data, spec, distance, out, settings;
  double dmin = 0.1, dmax = 2.0, step = 0.05;
  bool cold = false;
  std::optional<int> draws;
  std::optional<std::uint64_t> seed;
};

int cmd_influence(const InfluenceArgs& a) {
  const auto spec = load_spec(a.spec);
  const auto table = load_csv(a.data, load_options_for(spec, {a.distance}));
  note_dropped(table);
  InfluenceOptions io;
  io.fit = load_settings(a.settings);
  apply_draws(spec, a.draws, a.seed, io.fit);
  io.warm_start = !a.cold;
  const auto p = search_influence(table, spec, a.distance, a.dmin, a.dmax, a.step, io);
  auto m = manifest("influence", a.data, a.spec);
  if (is_mixed(spec.family)) {
    m.seed = io.fit.seed;
    m.draws = io.fit.draws;
  }
  write_json(with_manifest(m, "influence", to_json(p)), with_suffix(a.out, ".json"));
  write_text(profile_csv(p), with_suffix(a.out, ".csv"));
  std::cout << "D* = " << p.d_star << " (segment length " << p.segment_length << "), LL = " << p.ll_star
            << '\n';
  for (const auto& w : p.warnings) std::cout << "Warning: " << w << '\n';
  const bool all_converged = std::all_of(p.converged.begin(), p.converged.end(), [](bool b) { return b; });
  return all_converged ? kExitOk : kExitNotConverged;
}

struct SimulateArgs {
  std::string dgp, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
};

int cmd_simulate(const SimulateArgs& a) {
  auto config = load_dgp_config(a.dgp);
  if (a.seed) config.seed = *a.seed;
  if (a.n) config.n = *a.n;
  const auto table = generate(config);
  write_csv(table, fs::path(a.out));
  std::cout << "wrote " << table.n_rows() << " rows to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-likelihood toolkit for accident severity and frequency models"};
  app.set_version_flag("--version", std::string("crashmle ") + kVersion);
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Maximum worker threads (0 = hardware concurrency)");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit the model described by a spec file");
  fit->add_option("--data", fa.data, "Input CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--spec", fa.spec, "Model spec file")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", fa.out, "Output prefix (writes PREFIX.json and PREFIX.txt)")->required();
  fit->add_option("--draws", fa.draws, "Halton draws per observation (mixed families)");
  fit->add_option("--seed", fa.seed, "Seed for randomized Halton shifts");
  fit->add_option("--settings", fa.settings, "Optimizer settings JSON")->check(CLI::ExistingFile);

  EffectsArgs ea;
  auto* eff = app.add_subcommand("effects", "Averaged elasticities or marginal effects of a fit");
  eff->add_option("--fit", ea.fit, "Fit JSON written by 'fit'")->required()->check(CLI::ExistingFile);
  eff->add_option("--data", ea.data, "CSV the model was fitted on")->required()->check(CLI::ExistingFile);
  eff->add_option("--continuous", ea.continuous, "Continuous variables")->delimiter(',');
  eff->add_option("--indicator", ea.indicators, "0/1 indicator variables")->delimiter(',');
  eff->add_option("--out", ea.out, "Output prefix (writes PREFIX.json and PREFIX.csv)")->required();

  LrArgs la;
  auto* lr = app.add_subcommand("lrtest", "Likelihood-ratio test of pooling across a 0/1 split");
  lr->add_option("--data", la.data, "Input CSV")->required()->check(CLI::ExistingFile);
  lr->add_option("--spec", la.spec, "Model spec file")->required()->check(CLI::ExistingFile);
  lr->add_option("--split", la.split, "0/1 column defining the two subsamples")->required();
  lr->add_option("--mc", la.mc, "Monte-Carlo replicates for the simulated null (>= 100)");
  lr->add_option("--seed", la.seed, "Seed for the Monte-Carlo replicates");
  lr->add_option("--bins", la.bins, "Histogram bins")->check(CLI::PositiveNumber);
  lr->add_flag("--bias-corrected", la.bias_corrected, "Use (k + 1) / (R + 1) for the p-value");
  lr->add_option("--draws", la.draws, "Halton draws per observation (mixed families)");
  lr->add_option("--settings", la.settings, "Optimizer settings JSON")->check(CLI::ExistingFile);
  lr->add_option("--out", la.out, "Output prefix")->required();

  InfluenceArgs ia;
  auto* inf = app.add_subcommand("influence", "Grid search for a feature's distance of influence");
  inf->add_option("--data", ia.data, "Input CSV")->required()->check(CLI::ExistingFile);
  inf->add_option("--spec", ia.spec, "Severity spec with a term on the distance column")
      ->required()
      ->check(CLI::ExistingFile);
  inf->add_option("--distance", ia.distance, "Distance column (miles)")->required();
  inf->add_option("--dmin", ia.dmin, "Smallest candidate range")->capture_default_str();
  inf->add_option("--dmax", ia.dmax, "Largest candidate range")->capture_default_str();
  inf->add_option("--step", ia.step, "Grid step")->capture_default_str();
  inf->add_flag("--no-warm-start", ia.cold, "Fit grid points independently (in parallel)");
  inf->add_option("--draws", ia.draws, "Halton draws per observation (mixed families)");
  inf->add_option("--seed", ia.seed, "Seed for randomized Halton shifts");
  inf->add_option("--settings", ia.settings, "Optimizer settings JSON")->check(CLI::ExistingFile);
  inf->add_option("--out", ia.out, "Output prefix (writes PREFIX.json and PREFIX.csv)")->required();

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset from a DGP config");
  sim->add_option("--dgp", sa.dgp, "DGP configuration JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sa.out, "Output CSV")->required();
  sim->add_option("--seed", sa.seed, "Override the config's seed");
  sim->add_option("--n", sa.n, "Override the config's row count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    set_thread_limit(threads);
    if (*fit) return cmd_fit(fa);
    if (*eff) return cmd_effects(ea);
    if (*lr) return cmd_lrtest(la);
    if (*inf) return cmd_influence(ia);
    if (*sim) return cmd_simulate(sa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
