#ifndef CRASHMLE_EFFECTS_HPP
#define CRASHMLE_EFFECTS_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crashmle {

enum class EffectKind { elasticity, pseudo_elasticity, marginal_effect };

[[nodiscard]] std::string to_string(EffectKind k);

/// One averaged effect. For severity models `equation` is the outcome whose
/// linear predictor the variable enters and `probability_outcome` the
/// outcome whose probability responds; both are empty for count models.
struct EffectEntry {
  std::string variable;
  std::string equation;
  std::string probability_outcome;
  EffectKind kind = EffectKind::elasticity;
  double value = 0.0;
  bool direct = true;
  bool elastic = false;  // |value| >= 1
};

struct EffectsReport {
  std::vector<EffectEntry> entries;

  [[nodiscard]] std::optional<double> value(std::string_view variable, std::string_view equation = {},
                                            std::string_view probability_outcome = {}) const;
};

}  // namespace crashmle

#endif  // CRASHMLE_EFFECTS_HPP
