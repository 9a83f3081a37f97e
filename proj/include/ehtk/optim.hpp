// Quasi-Newton minimization used by the EH fitter and the VQE warm start.
#pragma once

#include "ehtk/core.hpp"

#include <functional>

namespace ehtk {

/// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const RVector& x, RVector& grad)>;

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  /// Stop when the objective itself falls below this value (useful for
  /// non-negative costs that reach zero).
  double value_floor = -std::numeric_limits<double>::infinity();
};

struct BfgsResult {
  RVector x;
  double value = 0;
  double gradient_norm = 0;
  int iterations = 0;
  bool converged = false;
};

/// BFGS with an Armijo backtracking line search. The inverse-Hessian
/// approximation is reset to identity whenever the curvature condition fails.
BfgsResult minimize_bfgs(const Objective& f, RVector x0, const BfgsOptions& opts = {});

/// Central finite-difference gradient, for objectives without an analytic one.
Objective with_numeric_gradient(std::function<double(const RVector&)> f, double step = 1e-6);

}  // namespace ehtk
