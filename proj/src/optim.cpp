#include "ehtk/optim.hpp"

#include <cmath>

namespace ehtk {

BfgsResult minimize_bfgs(const Objective& f, RVector x0, const BfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  RVector g(n);
  res.value = f(res.x, g);
  RMatrix hinv = RMatrix::Identity(n, n);
  bool scaled = false;

  for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
    res.gradient_norm = g.norm();
    if (res.gradient_norm <= opts.gradient_tolerance || res.value <= opts.value_floor) {
      res.converged = true;
      return res;
    }
    RVector dir = -hinv * g;
    double slope = g.dot(dir);
    if (slope >= 0) {
      hinv.setIdentity();
      scaled = false;
      dir = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    RVector x_new(n), g_new(n);
    double f_new = 0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      x_new = res.x + step * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent along the quasi-Newton direction; retry once from steepest descent.
      if (!hinv.isIdentity()) {
        hinv.setIdentity();
        scaled = false;
        continue;
      }
      break;
    }
    const RVector s = x_new - res.x;
    const RVector y = g_new - g;
    const double sy = s.dot(y);
    res.x = x_new;
    res.value = f_new;
    g = g_new;
    if (sy > 1e-300 * s.norm() * y.norm() && sy > 0) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const RMatrix id = RMatrix::Identity(n, n);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  res.gradient_norm = g.norm();
  res.converged = res.gradient_norm <= opts.gradient_tolerance || res.value <= opts.value_floor;
  return res;
}

Objective with_numeric_gradient(std::function<double(const RVector&)> f, double step) {
  return [f = std::move(f), step](const RVector& x, RVector& grad) {
    grad.resize(x.size());
    RVector xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      xp(i) = x(i) + step;
      const double fp = f(xp);
      xp(i) = x(i) - step;
      const double fm = f(xp);
      xp(i) = x(i);
      grad(i) = (fp - fm) / (2 * step);
    }
    return f(x);
  };
}

}  // namespace ehtk
