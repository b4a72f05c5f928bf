#include "crashmle/optim.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "crashmle/errors.hpp"

namespace crashmle {

void OptimSettings::validate() const {
  if (max_iterations <= 0) throw FitError("optim: max_iterations must be positive");
  if (!(gradient_tolerance > 0) || !(step_tolerance > 0) || !(hessian_step > 0) ||
      !(max_step > 0)) {
    throw FitError("optim: tolerances must be positive");
  }
}

std::string to_string(OptimStatus s) {
  switch (s) {
    case OptimStatus::converged: return "converged";
    case OptimStatus::iteration_limit: return "iteration_limit";
    case OptimStatus::step_too_small: return "step_too_small";
    case OptimStatus::nonfinite_objective: return "nonfinite_objective";
  }
  return "?";
}

namespace {

bool gradient_ok(const Eigen::VectorXd& g, double f, double tol) {
  return g.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, std::abs(f));
}

}  // namespace

OptimResult maximize(const Objective& objective, const Eigen::VectorXd& theta0,
                     const OptimSettings& settings) {
  settings.validate();
  const Eigen::Index p = theta0.size();

  OptimResult res;
  res.start = theta0;
  Eigen::VectorXd x = theta0;
  Eigen::VectorXd g(p);
  double f = objective(x, &g);
  ++res.evaluations;
  if (!std::isfinite(f) || !g.allFinite()) {
    throw FitError("optim: objective is not finite at the starting point");
  }
  res.start_value = f;

  // Inverse of the (negated) Hessian approximation.
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(p, p);
  bool scaled = false;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;

  res.status = OptimStatus::iteration_limit;
  int iter = 0;
  // Once the scaled test passes, a few extra iterations bring the raw
  // gradient down as well; BFGS converges superlinearly there, so they are
  // cheap and remove most of the remaining error in theta.
  constexpr int kPolishIterations = 5;
  int polish = 0;
  for (; iter < settings.max_iterations; ++iter) {
    if (gradient_ok(g, f, settings.gradient_tolerance)) {
      if (polish >= kPolishIterations ||
          g.lpNorm<Eigen::Infinity>() <= 1e-2 * settings.gradient_tolerance) {
        res.status = OptimStatus::converged;
        break;
      }
      ++polish;
    }

    Eigen::VectorXd dir = h * g;
    double slope = g.dot(dir);
    if (!(slope > 0) || !dir.allFinite()) {
      h.setIdentity();
      dir = g;
      slope = g.squaredNorm();
    }
    const double dir_norm = dir.lpNorm<Eigen::Infinity>();
    if (dir_norm > settings.max_step) {
      dir *= settings.max_step / dir_norm;
      slope = g.dot(dir);
    }

    double t = 1.0;
    Eigen::VectorXd x_new(p);
    Eigen::VectorXd g_new(p);
    double f_new = 0.0;
    bool accepted = false;
    bool saw_nonfinite = false;
    for (int k = 0; k < kMaxHalvings; ++k) {
      x_new = x + t * dir;
      f_new = objective(x_new, &g_new);
      ++res.evaluations;
      if (!std::isfinite(f_new) || !g_new.allFinite()) {
        saw_nonfinite = true;
      } else if (f_new >= f + kArmijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (gradient_ok(g, f, settings.gradient_tolerance)) {
        res.status = OptimStatus::converged;
        break;
      }
      if (h.isIdentity()) {
        res.status = saw_nonfinite ? OptimStatus::nonfinite_objective
                                   : OptimStatus::step_too_small;
        break;
      }
      // Retry from steepest ascent before giving up.
      h.setIdentity();
      scaled = false;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    // y is the change in the gradient of -f.
    const Eigen::VectorXd y = g - g_new;
    x = x_new;
    f = f_new;
    g = g_new;

    const double step_size =
        (s.array().abs() / x.array().abs().max(1.0)).maxCoeff();
    if (step_size <= settings.step_tolerance) {
      res.status = gradient_ok(g, f, settings.gradient_tolerance) ? OptimStatus::converged
                                                                   : OptimStatus::step_too_small;
      ++iter;
      break;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h = Eigen::MatrixXd::Identity(p, p) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
    }
  }

  if (res.status == OptimStatus::iteration_limit && gradient_ok(g, f, settings.gradient_tolerance)) {
    res.status = OptimStatus::converged;
  }
  res.theta = x;
  res.value = f;
  res.gradient = g;
  res.iterations = iter;
  res.gradient_norm = g.lpNorm<Eigen::Infinity>();
  res.converged = res.status == OptimStatus::converged;
  return res;
}

Eigen::VectorXd numeric_gradient(const Objective& objective, const Eigen::VectorXd& theta,
                                 double relative_step) {
  Eigen::VectorXd g(theta.size());
  Eigen::VectorXd x = theta;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double h = relative_step * std::max(1.0, std::abs(theta[k]));
    x[k] = theta[k] + h;
    const double up = objective(x, nullptr);
    x[k] = theta[k] - h;
    const double down = objective(x, nullptr);
    x[k] = theta[k];
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

namespace {

bool invert_spd(const Eigen::MatrixXd& a, Eigen::MatrixXd& inverse) {
  if (!a.allFinite()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  // Reject numerically singular matrices.
  const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  const double ratio = diag.minCoeff() / diag.maxCoeff();
  if (!(ratio > 1e-7)) return false;
  inverse = llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  return inverse.allFinite();
}

}  // namespace

CovarianceEstimate covariance(const Objective& objective, const Eigen::VectorXd& theta_hat,
                              const OptimSettings& settings, const ScoreFunction* scores) {
  const Eigen::Index p = theta_hat.size();
  Eigen::MatrixXd hess(p, p);
  Eigen::VectorXd x = theta_hat;
  Eigen::VectorXd g_up(p);
  Eigen::VectorXd g_down(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double h = settings.hessian_step * std::max(1.0, std::abs(theta_hat[k]));
    x[k] = theta_hat[k] + h;
    objective(x, &g_up);
    x[k] = theta_hat[k] - h;
    objective(x, &g_down);
    x[k] = theta_hat[k];
    hess.col(k) = (g_up - g_down) / (2 * h);
  }
  hess = 0.5 * (hess + hess.transpose()).eval();

  CovarianceEstimate est;
  est.hessian = hess;
  Eigen::MatrixXd inv;
  if (invert_spd(-hess, inv)) {
    est.matrix = inv;
    est.defined = true;
    est.method = "hessian";
    return est;
  }
  if (scores != nullptr) {
    const Eigen::MatrixXd s = (*scores)(theta_hat);
    const Eigen::MatrixXd opg = s.transpose() * s;
    if (invert_spd(opg, inv)) {
      est.matrix = inv;
      est.defined = true;
      est.method = "bhhh";
      return est;
    }
  }
  est.matrix = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
  est.method = "undefined";
  return est;
}

}  // namespace crashmle
