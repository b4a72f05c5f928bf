#ifndef CRASHMLE_OPTIM_HPP
#define CRASHMLE_OPTIM_HPP

#include <functional>
#include <string>

#include <Eigen/Core>

namespace crashmle {

struct OptimSettings {
  int max_iterations = 1000;
  // Converged when ||grad||_inf <= gradient_tolerance * max(1, |f|).
  double gradient_tolerance = 1e-6;
  // Stop when a step moves no coordinate by more than this (relative).
  double step_tolerance = 1e-10;
  // Relative central-difference step for the numerical Hessian.
  double hessian_step = 1e-5;
  // Cap on the infinity norm of a trial step.
  double max_step = 5.0;

  void validate() const;
};

// Returns f(theta); writes the gradient when `grad` is non-null. The
// function must be deterministic.
using Objective = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd* grad)>;

// Per-observation score matrix (rows = observations), used for BHHH.
using ScoreFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd& theta)>;

enum class OptimStatus {
  converged,
  iteration_limit,
  step_too_small,       // line search or step tolerance stalled before the gradient test
  nonfinite_objective,  // objective stayed NaN/inf after full step shrinkage
};

[[nodiscard]] std::string to_string(OptimStatus s);

struct OptimResult {
  Eigen::VectorXd theta;  // best point found
  double value = 0.0;
  Eigen::VectorXd gradient;
  bool converged = false;
  OptimStatus status = OptimStatus::iteration_limit;
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;  // infinity norm at `theta`
  Eigen::VectorXd start;
  double start_value = 0.0;
};

// BFGS ascent with Armijo backtracking. Throws FitError if the objective is
// not finite at theta0.
OptimResult maximize(const Objective& objective, const Eigen::VectorXd& theta0,
                     const OptimSettings& settings);

struct CovarianceEstimate {
  Eigen::MatrixXd matrix;  // NaN-filled when undefined
  bool defined = false;
  std::string method;      // "hessian", "bhhh" or "undefined"
  Eigen::MatrixXd hessian;
};

// Inverse of the negative Hessian, the Hessian taken by central differences
// of the analytic gradient and symmetrized. If it is not negative definite
// the BHHH outer-product estimate is used when `scores` is supplied;
// otherwise (or if that is singular too) the estimate is undefined.
CovarianceEstimate covariance(const Objective& objective, const Eigen::VectorXd& theta_hat,
                              const OptimSettings& settings,
                              const ScoreFunction* scores = nullptr);

// Central finite-difference gradient, used by tests and diagnostics.
Eigen::VectorXd numeric_gradient(const Objective& objective, const Eigen::VectorXd& theta,
                                 double relative_step = 1e-5);

}  // namespace crashmle

#endif  // CRASHMLE_OPTIM_HPP
