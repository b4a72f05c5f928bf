#ifndef CRASHMLE_DESIGN_HPP
#define CRASHMLE_DESIGN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "crashmle/model_spec.hpp"
#include "crashmle/table.hpp"

namespace crashmle {

// Positions of one term's parameters in the packed vector.
struct ParamSlot {
  std::size_t location = 0;
  std::optional<std::size_t> log_scale;  // random terms only
};

/// Packed parameter layout plus per-term covariate values for one
/// (table, spec) pair.
///
/// Packing: terms in spec order, each contributing its location and, for
/// random terms, the log of its scale right after. Count families append
/// log(alpha) as the last parameter.
class DesignMatrix {
 public:
  [[nodiscard]] Family family() const { return spec_.family; }
  [[nodiscard]] const ModelSpec& spec() const { return spec_; }
  [[nodiscard]] std::size_t n_params() const { return n_params_; }
  [[nodiscard]] std::size_t n_rows() const { return n_rows_; }
  [[nodiscard]] std::size_t n_terms() const { return spec_.terms.size(); }
  [[nodiscard]] std::size_t n_outcomes() const { return n_outcomes_; }
  [[nodiscard]] std::size_t base_index() const { return base_; }

  [[nodiscard]] const Term& term(std::size_t k) const { return spec_.terms[k]; }
  [[nodiscard]] const ParamSlot& slot(std::size_t k) const { return slots_[k]; }
  [[nodiscard]] std::optional<std::size_t> log_alpha_index() const { return log_alpha_; }

  // Covariate value of term k on row n (1 for the constant).
  [[nodiscard]] double value(std::size_t k, std::size_t n) const { return values_[k][n]; }
  [[nodiscard]] std::span<const double> term_values(std::size_t k) const { return values_[k]; }
  // Whether term k enters outcome j's linear predictor (severity only).
  [[nodiscard]] bool applies(std::size_t k, std::size_t j) const {
    return mask_[k * n_outcomes_ + j] != 0;
  }

  // Terms using a column, in spec order.
  [[nodiscard]] std::vector<std::size_t> terms_for(const std::string& variable) const;
  // Term indices with random coefficients, in spec order.
  [[nodiscard]] const std::vector<std::size_t>& random_terms() const { return random_terms_; }

  [[nodiscard]] std::span<const int> outcomes() const { return outcome_; }
  [[nodiscard]] std::span<const std::int64_t> counts() const { return counts_; }

  // Fixed-coefficient linear predictor: random terms contribute their location.
  // Zero for the base outcome by construction.
  [[nodiscard]] double linear_predictor(const Eigen::VectorXd& theta, std::size_t row,
                                        std::size_t outcome) const;
  // Count families: beta'x with random terms at their location.
  [[nodiscard]] double count_predictor(const Eigen::VectorXd& theta, std::size_t row) const;

  // Human-readable name per packed parameter, e.g. "age[fatal,injury]" or
  // "two_vehicle[injury]:log_sd".
  [[nodiscard]] std::vector<std::string> param_labels() const;
  // True where the packed parameter is estimated on the log scale.
  [[nodiscard]] std::vector<bool> log_scaled() const;

  friend DesignMatrix build_design(const ObservationTable& table, const ModelSpec& spec);

 private:
  ModelSpec spec_;
  std::size_t n_rows_ = 0;
  std::size_t n_outcomes_ = 1;
  std::size_t base_ = 0;
  std::size_t n_params_ = 0;
  std::vector<ParamSlot> slots_;
  std::optional<std::size_t> log_alpha_;
  std::vector<std::vector<double>> values_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> random_terms_;
  std::vector<int> outcome_;
  std::vector<std::int64_t> counts_;
};

// Throws SpecError for unknown variables, an empty term list, or a
// table/family mode mismatch. Severity tables are re-indexed to the spec's
// outcome order.
DesignMatrix build_design(const ObservationTable& table, const ModelSpec& spec);

}  // namespace crashmle

#endif  // CRASHMLE_DESIGN_HPP
