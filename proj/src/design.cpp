#include "crashmle/design.hpp"

#include <algorithm>

#include "crashmle/errors.hpp"

namespace crashmle {

DesignMatrix build_design(const ObservationTable& table, const ModelSpec& spec) {
  spec.validate();
  if (spec.terms.empty()) throw SpecError("design: empty term list");
  const bool severity = is_severity(spec.family);
  if (severity != (table.mode() == OutcomeMode::severity)) {
    throw SpecError("design: family " + to_string(spec.family) + " does not match the table's outcome type");
  }

  DesignMatrix d;
  d.spec_ = spec;
  d.n_rows_ = table.n_rows();
  d.n_outcomes_ = severity ? spec.outcomes.size() : 1;
  d.base_ = severity ? spec.base_index() : 0;

  std::size_t next = 0;
  for (std::size_t k = 0; k < spec.terms.size(); ++k) {
    const auto& t = spec.terms[k];
    ParamSlot slot{next++, std::nullopt};
    if (is_random(t.kind)) {
      slot.log_scale = next++;
      d.random_terms_.push_back(k);
    }
    d.slots_.push_back(slot);

    if (t.variable == kConstant) {
      d.values_.emplace_back(d.n_rows_, 1.0);
    } else {
      if (!table.has_column(t.variable)) {
        throw SpecError("design: unknown variable '" + t.variable + "'");
      }
      const auto col = table.column(t.variable);
      d.values_.emplace_back(col.begin(), col.end());
    }

    for (std::size_t j = 0; j < d.n_outcomes_; ++j) {
      const bool on = severity
                          ? std::find(t.outcomes.begin(), t.outcomes.end(), spec.outcomes[j]) !=
                                t.outcomes.end()
                          : true;
      d.mask_.push_back(on ? 1 : 0);
    }
  }
  if (!severity) d.log_alpha_ = next++;
  d.n_params_ = next;

  if (severity) {
    // Map table label order onto spec outcome order.
    std::vector<int> remap;
    for (const auto& label : table.labels()) {
      const auto it = std::find(spec.outcomes.begin(), spec.outcomes.end(), label);
      remap.push_back(it == spec.outcomes.end() ? -1
                                                : static_cast<int>(it - spec.outcomes.begin()));
    }
    d.outcome_.reserve(d.n_rows_);
    for (int idx : table.outcome_index()) {
      const int mapped = remap[static_cast<std::size_t>(idx)];
      if (mapped < 0) {
        throw DataError("design: observed outcome '" + table.labels()[static_cast<std::size_t>(idx)] +
                        "' is not in the model's outcome set");
      }
      d.outcome_.push_back(mapped);
    }
  } else {
    d.counts_.assign(table.counts().begin(), table.counts().end());
  }
  return d;
}

std::vector<std::size_t> DesignMatrix::terms_for(const std::string& variable) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < spec_.terms.size(); ++k) {
    if (spec_.terms[k].variable == variable) out.push_back(k);
  }
  return out;
}

double DesignMatrix::linear_predictor(const Eigen::VectorXd& theta, std::size_t row,
                                      std::size_t outcome) const {
  if (outcome == base_) return 0.0;
  double eta = 0.0;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (applies(k, outcome)) eta += theta[static_cast<Eigen::Index>(slots_[k].location)] * values_[k][row];
  }
  return eta;
}

double DesignMatrix::count_predictor(const Eigen::VectorXd& theta, std::size_t row) const {
  double eta = 0.0;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    eta += theta[static_cast<Eigen::Index>(slots_[k].location)] * values_[k][row];
  }
  return eta;
}

std::vector<std::string> DesignMatrix::param_labels() const {
  std::vector<std::string> labels(n_params_);
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const auto& t = spec_.terms[k];
    std::string name = t.variable;
    if (!t.outcomes.empty()) {
      name += "[";
      for (std::size_t i = 0; i < t.outcomes.size(); ++i) name += (i ? "," : "") + t.outcomes[i];
      name += "]";
    }
    labels[slots_[k].location] = name;
    if (slots_[k].log_scale) {
      labels[*slots_[k].log_scale] =
          name + (t.kind == CoefKind::random_normal ? ":log_sd" : ":log_spread");
    }
  }
  if (log_alpha_) labels[*log_alpha_] = "log_alpha";
  return labels;
}

std::vector<bool> DesignMatrix::log_scaled() const {
  std::vector<bool> out(n_params_, false);
  for (const auto& s : slots_) {
    if (s.log_scale) out[*s.log_scale] = true;
  }
  if (log_alpha_) out[*log_alpha_] = true;
  return out;
}

}  // namespace crashmle
