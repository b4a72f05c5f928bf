#ifndef CRASHMLE_REPORT_HPP
#define CRASHMLE_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "crashmle/effects.hpp"
#include "crashmle/fit_result.hpp"
#include "crashmle/influence.hpp"
#include "crashmle/lrtest.hpp"

namespace crashmle {

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
[[nodiscard]] std::string fnv1a_hex(std::string_view bytes);
// Throws DataError when the file cannot be read.
[[nodiscard]] std::string file_hash(const std::filesystem::path& path);

// Inputs that determine a command's outputs. Deliberately free of wall-clock
// time so that reruns produce identical files; timestamps go to the text
// report only.
struct RunManifest {
  std::string command;
  std::string data_path;
  std::string data_hash;
  std::string spec_path;
  std::string spec_hash;
  std::optional<std::uint64_t> seed;
  std::optional<int> draws;
  std::string version;
};

nlohmann::json to_json(const RunManifest& m);

nlohmann::json to_json(const FitResult& fit);
// Inverse of to_json(FitResult); throws DataError on malformed input.
FitResult fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EffectsReport& report);
nlohmann::json to_json(const LrTestResult& result);
nlohmann::json to_json(const InfluenceProfile& profile);

// CSV outputs: (variable, equation, probability_outcome, kind, value,
// direct, elastic); (bin_left, bin_right, count); (D, ll, converged).
std::string effects_csv(const EffectsReport& report);
std::string histogram_csv(const Histogram& histogram);
std::string profile_csv(const InfluenceProfile& profile);

// Three significant figures with the leading zero dropped: 0.609 -> ".609",
// -0.0123 -> "-.0123", 12.34 -> "12.3". Non-finite values render as "n/a".
[[nodiscard]] std::string format_sig3(double x);
// Two decimals, e.g. "3.69"; "n/a" when undefined.
[[nodiscard]] std::string format_t(double t);

// Coefficient table: one row per term (variable, outcome set, estimate and
// t-ratio), a scale row under each random term, then the footer in the
// order: log-likelihood at convergence, restricted log-likelihood, number
// of parameters, number of observations, McFadden rho2.
std::string format_fit_table(const FitResult& fit);

std::string format_lrtest(const LrTestResult& result);

// Serialized with two-space indentation and a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
void write_text(const std::string& text, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace crashmle

#endif  // CRASHMLE_REPORT_HPP
