#include "remsim/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "remsim/units.hpp"
#include "remsim/voigt.hpp"

namespace remsim {

double FitResult::param(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw std::out_of_range("no fit parameter named " + name);
}

double FitResult::stderr_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return stderrs[i];
  throw std::out_of_range("no fit parameter named " + name);
}

namespace {

double cost_of(const ModelFn& model, const std::vector<double>& x,
               const std::vector<double>& y, const std::vector<double>& w,
               const std::vector<double>& p, Eigen::VectorXd* residuals) {
  double cost = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = std::sqrt(wi) * (y[i] - model(x[i], p));
    if (residuals) (*residuals)(static_cast<int>(i)) = r;
    cost += r * r;
  }
  return cost;
}

}  // namespace

FitResult least_squares(const ModelFn& model, const std::vector<double>& x,
                        const std::vector<double>& y,
                        const std::vector<double>& weights,
                        std::vector<double> initial, std::vector<std::string> names,
                        const LeastSquaresOptions& opt) {
  const int n = static_cast<int>(x.size());
  const int k = static_cast<int>(initial.size());
  if (y.size() != x.size() || (!weights.empty() && weights.size() != x.size()))
    throw std::invalid_argument("least_squares: data size mismatch");
  if (n < k) throw std::invalid_argument("least_squares: fewer points than parameters");

  FitResult out;
  out.names = std::move(names);
  out.params = initial;
  out.stderrs.assign(k, 0.0);

  std::vector<double> p = initial;
  Eigen::VectorXd r(n);
  double cost = cost_of(model, x, y, weights, p, &r);
  out.cost_trace.push_back(cost);

  Eigen::MatrixXd J(n, k);
  double lambda = 1e-3;
  bool stop = false;

  for (int iter = 0; iter < opt.max_iterations && !stop; ++iter) {
    out.iterations = iter + 1;
    // central-difference Jacobian of the weighted residual vector
    for (int j = 0; j < k; ++j) {
      const double h = 1e-6 * std::max(std::abs(p[j]), 1e-6);
      std::vector<double> pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      for (int i = 0; i < n; ++i) {
        const double wi = weights.empty() ? 1.0 : weights[i];
        J(i, j) = std::sqrt(wi) * (model(x[i], pm) - model(x[i], pp)) / (2 * h);
      }
    }
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd jtr = -J.transpose() * r;

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      Eigen::MatrixXd damped = jtj;
      for (int j = 0; j < k; ++j)
        damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(jtr);
      if (!step.allFinite()) {
        lambda *= 4;
        continue;
      }
      std::vector<double> pnew = p;
      for (int j = 0; j < k; ++j) pnew[j] += step(j);
      Eigen::VectorXd rnew(n);
      const double cnew = cost_of(model, x, y, weights, pnew, &rnew);
      if (std::isfinite(cnew) && cnew <= cost) {
        double max_rel_step = 0;
        for (int j = 0; j < k; ++j)
          max_rel_step = std::max(
              max_rel_step, std::abs(step(j)) / (std::abs(p[j]) + opt.tolerance));
        const double rel_cost_drop = (cost - cnew) / std::max(cost, 1e-300);
        p = pnew;
        r = rnew;
        cost = cnew;
        out.cost_trace.push_back(cost);
        accepted = true;
        lambda = std::max(lambda / 3, 1e-12);
        if (max_rel_step < opt.tolerance && rel_cost_drop < opt.tolerance) stop = true;
      } else {
        lambda *= 4;
      }
    }
    if (!accepted) stop = true;  // damping exhausted, current p is the best found
  }

  out.params = p;
  out.residual_norm = std::sqrt(cost);
  out.converged = true;

  // covariance = (J^T W J)^-1 * s^2 at the solution
  for (int j = 0; j < k; ++j) {
    const double h = 1e-6 * std::max(std::abs(p[j]), 1e-6);
    std::vector<double> pp = p, pm = p;
    pp[j] += h;
    pm[j] -= h;
    for (int i = 0; i < n; ++i) {
      const double wi = weights.empty() ? 1.0 : weights[i];
      J(i, j) = std::sqrt(wi) * (model(x[i], pp) - model(x[i], pm)) / (2 * h);
    }
  }
  const Eigen::MatrixXd jtj = J.transpose() * J;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (!lu.isInvertible()) {
    out.converged = false;
    out.diagnostic = "singular Jacobian at optimum";
    return out;
  }
  const double s2 = n > k ? cost / (n - k) : 0.0;
  const Eigen::MatrixXd cov = lu.inverse() * s2;
  for (int j = 0; j < k; ++j)
    out.stderrs[j] = cov(j, j) > 0 ? std::sqrt(cov(j, j)) : 0.0;
  return out;
}

namespace {

// quartile positions of the weighted empirical distribution, for initializers
double weighted_quantile(const std::vector<double>& x, const std::vector<double>& y,
                         double q) {
  double total = 0;
  for (double v : y) total += std::max(v, 0.0);
  if (total <= 0) return x.empty() ? 0.0 : x[x.size() / 2];
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += std::max(y[i], 0.0);
    if (acc >= q * total) return x[i];
  }
  return x.back();
}

std::vector<double> poisson_weights(const std::vector<double>& y) {
  std::vector<double> w(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) w[i] = 1.0 / std::max(y[i], 1.0);
  return w;
}

}  // namespace

FitResult fit_voigt(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 8) throw std::invalid_argument("fit_voigt: need at least 8 bins");
  double total = 0, mean = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    total += std::max(y[i], 0.0);
    mean += std::max(y[i], 0.0) * x[i];
  }
  mean = total > 0 ? mean / total : 0.0;
  const double iqr = weighted_quantile(x, y, 0.75) - weighted_quantile(x, y, 0.25);
  const double spacing =
      x.size() > 1 ? std::abs(x[1] - x[0]) : 1.0;
  const double width0 = std::max(iqr, spacing);
  const double area0 = std::max(total * spacing, 1e-12);

  const ModelFn model = [](double xx, const std::vector<double>& p) {
    VoigtParams vp{std::abs(p[1]), std::abs(p[2]), p[0], std::abs(p[3])};
    return voigt_density(xx, vp);
  };
  auto res = least_squares(model, x, y, poisson_weights(y),
                           {mean, width0 / 2, width0 / 2, area0},
                           {"center", "lorentzian_fwhm", "gaussian_fwhm", "area"});
  for (std::size_t j = 1; j < res.params.size(); ++j)
    res.params[j] = std::abs(res.params[j]);
  return res;
}

FitResult fit_gaussian_peak(const std::vector<double>& x, const std::vector<double>& y,
                            const std::vector<double>& weights) {
  if (x.size() < 4)
    throw std::invalid_argument("fit_gaussian_peak: need at least 4 points");
  std::size_t imax = 0;
  double ymin = y[0];
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > y[imax]) imax = i;
    ymin = std::min(ymin, y[i]);
  }
  const double amp0 = std::max(y[imax] - ymin, 1e-12);
  // crude width from the half-height crossings around the peak
  double left = x.front(), right = x.back();
  for (std::size_t i = imax; i-- > 0;)
    if (y[i] - ymin < amp0 / 2) {
      left = x[i];
      break;
    }
  for (std::size_t i = imax; i < y.size(); ++i)
    if (y[i] - ymin < amp0 / 2) {
      right = x[i];
      break;
    }
  const double fwhm0 = std::max(std::abs(right - left),
                                std::abs(x[1] - x[0]));

  const double ln16 = 4 * std::log(2.0);
  const ModelFn model = [ln16](double xx, const std::vector<double>& p) {
    const double d = xx - p[0];
    const double f = std::abs(p[1]);
    return p[3] + p[2] * std::exp(-ln16 * d * d / (f * f));
  };
  auto res = least_squares(model, x, y, weights, {x[imax], fwhm0, amp0, ymin},
                           {"center", "fwhm", "amplitude", "offset"});
  res.params[1] = std::abs(res.params[1]);
  return res;
}

FitResult fit_exponential(const std::vector<double>& x, const std::vector<double>& y,
                          ExpModel kind, const std::vector<double>& weights) {
  if (x.size() < 3)
    throw std::invalid_argument("fit_exponential: need at least 3 points");
  // echo envelopes decay to zero by construction; pinning the offset keeps
  // sparse long-delay tails from leaking into tau
  const double c0 = kind == ExpModel::echo_envelope
                        ? 0.0
                        : *std::min_element(y.begin(), y.end());
  const double a0 = std::max(y.front() - c0, 1e-12);
  // log-slope estimate over the points clearly above the floor
  double tau0 = (x.back() - x.front()) / 2;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (y[i] - c0 < a0 * 0.2) continue;
    const double ratio = (y[i] - c0) / a0;
    if (ratio > 0 && ratio < 0.95) {
      tau0 = -(x[i] - x.front()) / std::log(ratio);
      break;
    }
  }
  if (kind == ExpModel::echo_envelope) {
    const ModelFn model = [](double xx, const std::vector<double>& p) {
      return p[0] * std::exp(-xx / std::abs(p[1]));
    };
    auto res = least_squares(model, x, y, weights, {a0, std::abs(tau0)},
                             {"amplitude", "tau"});
    res.params[1] = std::abs(res.params[1]);
    res.names.push_back("offset");
    res.params.push_back(0.0);
    res.stderrs.push_back(0.0);
    return res;
  }
  const ModelFn model = [](double xx, const std::vector<double>& p) {
    return p[0] * std::exp(-xx / std::abs(p[1])) + p[2];
  };
  auto res = least_squares(model, x, y, weights, {a0, std::abs(tau0), c0},
                           {"amplitude", "tau", "offset"});
  res.params[1] = std::abs(res.params[1]);
  return res;
}

namespace {

FitResult sinusoid_impl(const std::vector<double>& x, const std::vector<double>& y,
                        bool damped) {
  if (x.size() < (damped ? 6u : 5u))
    throw std::invalid_argument("fit_sinusoid: too few points");
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double amp0 = 0;
  for (double v : y) amp0 = std::max(amp0, std::abs(v - mean));
  // period guess from mean spacing of sign changes of y - mean
  std::vector<double> crossings;
  for (std::size_t i = 1; i < y.size(); ++i)
    if ((y[i - 1] - mean) * (y[i] - mean) < 0) crossings.push_back(x[i]);
  double period0 = (x.back() - x.front()) / 2;
  if (crossings.size() >= 2)
    period0 = 2 * (crossings.back() - crossings.front()) /
              static_cast<double>(crossings.size() - 1);
  const double phase0 =
      std::abs(y.front() - mean) > 0.5 * amp0 ? (y.front() > mean ? 0.0 : kPi) : kPi / 2;

  const ModelFn model = [damped](double xx, const std::vector<double>& p) {
    const double osc = std::cos(2 * kPi * xx / p[1] + p[2]);
    const double env = damped ? std::exp(-p[4] * xx) : 1.0;
    return p[3] + p[0] * env * osc;
  };
  std::vector<double> init = {amp0, period0, phase0, mean};
  std::vector<std::string> names = {"amplitude", "period", "phase", "offset"};
  if (damped) {
    init.push_back(0.0);
    names.emplace_back("damping");
  }
  return least_squares(model, x, y, {}, init, names);
}

}  // namespace

FitResult fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y) {
  return sinusoid_impl(x, y, false);
}

FitResult fit_damped_sinusoid(const std::vector<double>& x,
                              const std::vector<double>& y) {
  return sinusoid_impl(x, y, true);
}

}  // namespace remsim
