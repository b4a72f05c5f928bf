#include "crashmle/chi2.hpp"

#include <cmath>
#include <cstdint>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include "crashmle/errors.hpp"

namespace crashmle {

double chi2_sf(double x, double dof) {
  if (!(x >= 0) || !std::isfinite(dof) || !(dof >= 1)) {
    throw SpecError("chi2_sf: need x >= 0 and dof >= 1");
  }
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0 && p < 1) || !std::isfinite(dof) || !(dof >= 1)) {
    throw SpecError("chi2_quantile: need 0 < p < 1 and dof >= 1");
  }
  const double target = 1.0 - p;
  auto f = [&](double x) { return chi2_sf(x, dof) - target; };
  double lo = 0.0;
  double hi = std::max(1.0, dof);
  while (f(hi) > 0) {
    lo = hi;
    hi *= 2.0;
  }
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, [](double l, double h) { return std::abs(h - l) <= 1e-12 * std::max(1.0, h); },
      max_iter);
  return 0.5 * (a + b);
}

}  // namespace crashmle
