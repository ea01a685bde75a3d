#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ionsim::numerics {

using Func1D = std::function<double(double)>;

// Adaptive Simpson quadrature on [a,b].
double adaptive_simpson(const Func1D& f, double a, double b,
                        double rel_tol = 1e-8, double abs_tol = 1e-300,
                        int max_depth = 48);

// Integral over [lo,hi] split into log-spaced panels (panels_per_decade
// adaptive-Simpson intervals per decade). Intended for slowly decaying
// spectral integrands spanning many decades. Requires 0 < lo < hi.
double integrate_log_panels(const Func1D& f, double lo, double hi,
                            double rel_tol = 1e-6, int panels_per_decade = 4);

// Golden-section / parabolic (Brent) minimization on [a,b].
struct ScalarMin {
  double x = 0.0;
  double fx = 0.0;
};
ScalarMin brent_minimize(const Func1D& f, double a, double b, double tol = 1e-10);

// Bisection for f(x)=0 with f(a), f(b) of opposite sign.
double bisect(const Func1D& f, double a, double b, double x_tol,
              int max_iter = 200);

// Levenberg-Marquardt least squares with numeric Jacobian and box bounds.
struct FitOptions {
  int max_iter = 300;
  double ftol = 1e-12;   // relative decrease of chi2 for convergence
  double step_rel = 1e-6; // relative finite-difference step
};

struct FitResult {
  std::vector<double> params;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;
};

// model(params, x) -> y. Throws std::runtime_error on divergence; the
// message carries the final residual norm.
using FitModel = std::function<double(const std::vector<double>&, double)>;

FitResult fit_least_squares(const FitModel& model,
                            const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            std::vector<double> p0,
                            const std::vector<double>& lower,
                            const std::vector<double>& upper,
                            const FitOptions& opts = {});

// Ordinary least-squares line fit; returns slope, intercept and the
// standard error of the slope.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};
LineFit linear_regression(const std::vector<double>& xs,
                          const std::vector<double>& ys);

} // namespace ionsim::numerics
