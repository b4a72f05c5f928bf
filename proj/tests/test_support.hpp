#ifndef CRASHMLE_TEST_SUPPORT_HPP
#define CRASHMLE_TEST_SUPPORT_HPP

// Independent numerical oracles and small fixtures shared by the test
// binaries. Nothing here calls into the library's numerical routines.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crashmle/model_spec.hpp"
#include "crashmle/synthgen.hpp"
#include "crashmle/table.hpp"

namespace testsupport {

// Central finite differences with a fixed absolute step.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x;
    Eigen::VectorXd b = x;
    const double step = h * std::max(1.0, std::abs(x[i]));
    a[i] += step;
    b[i] -= step;
    g[i] = (f(a) - f(b)) / (2 * step);
  }
  return g;
}

// Relative error with a floor of 1 on the scale, as used by the gradient
// checks.
inline double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// Gauss-Hermite nodes/weights for weight exp(-x^2) via Golub-Welsch.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    w[i] = std::sqrt(M_PI) * v0 * v0;
  }
  return {es.eigenvalues(), w};
}

// E[f(Z)] for Z ~ N(0, 1) by Gauss-Hermite quadrature.
inline double normal_expectation(const std::function<double(double)>& f, int nodes = 64) {
  const auto [x, w] = gauss_hermite(nodes);
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) s += w[i] * f(std::sqrt(2.0) * x[i]);
  return s / std::sqrt(M_PI);
}

// Adaptive Simpson quadrature on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double eps, int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double tol,
          int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) {
          return left + right + (left + right - whole) / 15;
        }
        return rec(lo, mid, flo, flm, fmid, left, tol / 2, d - 1) +
               rec(mid, hi, fmid, frm, fhi, right, tol / 2, d - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), eps, depth);
}

// Chi-square density, written out from its definition.
inline double chi2_pdf(double x, double k) {
  if (x <= 0) return 0.0;
  return std::exp((k / 2 - 1) * std::log(x) - x / 2 - (k / 2) * std::log(2.0) - std::lgamma(k / 2));
}

// Standard normal CDF via erfc (independent of the library's helper).
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline crashmle::ModelSpec severity_spec(std::string family_block, std::string terms) {
  return crashmle::parse_spec(family_block + terms);
}

// Three-outcome MNL header used across the severity tests.
inline const char* kSeverityHeader =
    "[model]\nfamily = mnl\noutcome = sev\noutcomes = fatal, injury, pdo\nbase = pdo\n";
inline const char* kMixedHeader =
    "[model]\nfamily = mixed_mnl\noutcome = sev\noutcomes = fatal, injury, pdo\nbase = pdo\n";

inline crashmle::DgpConfig dgp(const std::string& spec_text, std::vector<crashmle::TrueTerm> terms,
                               std::vector<crashmle::CovariateRecipe> covariates, std::size_t n,
                               std::uint64_t seed, double alpha = 1.0) {
  crashmle::DgpConfig c;
  c.spec = crashmle::parse_spec(spec_text);
  c.terms = std::move(terms);
  c.covariates = std::move(covariates);
  c.n = n;
  c.seed = seed;
  c.alpha = alpha;
  return c;
}

}  // namespace testsupport

#endif  // CRASHMLE_TEST_SUPPORT_HPP
