#pragma once

#include <functional>
#include <string>
#include <vector>

namespace remsim {

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> stderrs;
  double residual_norm = 0;  // sqrt(sum w r^2) at the solution
  bool converged = false;
  int iterations = 0;
  std::string diagnostic;
  // weighted squared-residual cost after each accepted step, nonincreasing
  std::vector<double> cost_trace;

  double param(const std::string& name) const;
  double stderr_of(const std::string& name) const;
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;  // relative step and relative cost change
};

using ModelFn = std::function<double(double x, const std::vector<double>& p)>;

// Damped Gauss-Newton (Levenberg-Marquardt) with a numeric Jacobian.
// weights empty means uniform; otherwise w_i multiplies the squared residual.
FitResult least_squares(const ModelFn& model, const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::vector<double>& weights,
                        std::vector<double> initial,
                        std::vector<std::string> names,
                        const LeastSquaresOptions& opt = {});

// Voigt profile fit with Poisson weights 1/max(y,1); params
// {center, lorentzian_fwhm, gaussian_fwhm, area}. Widths and area are kept
// positive by fitting their magnitudes.
FitResult fit_voigt(const std::vector<double>& x, const std::vector<double>& y);

// offset + amplitude * exp(-4 ln2 (x-center)^2 / fwhm^2);
// params {center, fwhm, amplitude, offset}
FitResult fit_gaussian_peak(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& weights = {});

enum class ExpModel { decay, echo_envelope };

// amplitude * exp(-x/tau) + offset; params {amplitude, tau, offset}
FitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y,
                          ExpModel model = ExpModel::decay,
                          const std::vector<double>& weights = {});

// offset + amplitude * cos(2 pi x / period + phase);
// params {amplitude, period, phase, offset}
FitResult fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y);

// adds exp(-damping*x) on the oscillatory term; params
// {amplitude, period, phase, offset, damping}
FitResult fit_damped_sinusoid(const std::vector<double>& x,
                              const std::vector<double>& y);

}  // namespace remsim
