#ifndef CRASHMLE_CHI2_HPP
#define CRASHMLE_CHI2_HPP

namespace crashmle {

// Upper tail P(X > x) of chi-square(dof), i.e. Q(dof/2, x/2).
// Throws SpecError for x < 0 or dof < 1.
[[nodiscard]] double chi2_sf(double x, double dof);

// x with P(X <= x) = p, found by bracketed root finding on chi2_sf.
// Throws SpecError unless 0 < p < 1 and dof >= 1.
[[nodiscard]] double chi2_quantile(double p, double dof);

}  // namespace crashmle

#endif  // CRASHMLE_CHI2_HPP
