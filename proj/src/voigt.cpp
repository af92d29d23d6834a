#include "remsim/voigt.hpp"

#include <cmath>
#include <stdexcept>

#include "remsim/units.hpp"

namespace remsim {
namespace {

// Weideman expansion constants for N = 40: L = sqrt(N/sqrt(2)) and the
// polynomial coefficients a_N..a_1 (highest power first), generated from the
// FFT prescription in the paper and frozen here.
constexpr double kWeidemanL = 5.3182958969449885;
constexpr double kWeidemanA[40] = {
    -1.73569809987918647e-15, 1.20167491075928095e-15,  1.15191702207494847e-14,
    -5.23171636632440398e-15, -7.07108802215940845e-14, 1.37782240476640457e-14,
    4.53414489094346555e-13,  1.20333095291956798e-13,  -2.90771851041427015e-12,
    -2.72777356258302445e-12, 1.77141856738671790e-11,  3.47274209389070152e-11,
    -9.05513886095832302e-11, -3.56323504036026841e-10, 2.10859907312510581e-10,
    3.01778042555156406e-09,  3.24974658294507890e-09,  -1.83156168342968342e-08,
    -6.35177348301541098e-08, 1.41986423729534295e-08,  5.91213695302905726e-07,
    1.48356611331720142e-06,  -1.06601389841627292e-06, -1.80074471447234073e-05,
    -5.59130926423487940e-05, -3.93936314548380510e-05, 4.39807015986967025e-04,
    2.70540563307372899e-03,  1.00481862427835352e-02,  2.92029164712418812e-02,
    7.18236177907432827e-02,  1.55042638024795038e-01,  2.99894379961500590e-01,
    5.26652898827708604e-01,  8.47217457659381501e-01,  1.25638156757651331e+00,
    1.72538308481797786e+00,  2.20151379487831189e+00,  2.61605415276185971e+00,
    2.89962450938970484e+00};

constexpr double kInvSqrtPi = 0.5641895835477563;

}  // namespace

std::complex<double> faddeeva(std::complex<double> z) {
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> lmiz = kWeidemanL - iz;  // L - iz
  const std::complex<double> Z = (kWeidemanL + iz) / lmiz;
  std::complex<double> poly = 0.0;
  for (double a : kWeidemanA) poly = poly * Z + a;
  return 2.0 * poly / (lmiz * lmiz) + kInvSqrtPi / lmiz;
}

double voigt_density(double x, const VoigtParams& p) {
  // evaluate on the folded offset so the profile is symmetric to the bit
  const double dx = std::abs(x - p.center);
  const double gamma = p.lorentzian_fwhm;
  const double fg = p.gaussian_fwhm;
  if (gamma <= 0 && fg <= 0) throw std::invalid_argument("degenerate profile");
  if (fg <= 0) {
    const double hwhm = gamma / 2;
    return p.area * (hwhm / kPi) / (dx * dx + hwhm * hwhm);
  }
  const double sigma = fg / kGaussFwhmPerSigma;
  if (gamma <= 0) {
    return p.area * std::exp(-dx * dx / (2 * sigma * sigma)) /
           (sigma * std::sqrt(2 * kPi));
  }
  const std::complex<double> z(dx / (sigma * std::sqrt(2.0)),
                               gamma / 2 / (sigma * std::sqrt(2.0)));
  return p.area * faddeeva(z).real() / (sigma * std::sqrt(2 * kPi));
}

double voigt_fwhm(const VoigtParams& p) {
  const double peak = voigt_density(p.center, p);
  // upper bracket: Lorentzian + Gaussian widths always bound the Voigt width
  double hi = p.lorentzian_fwhm + p.gaussian_fwhm;
  double lo = hi / 4;
  while (voigt_density(p.center + lo / 2, p) < peak / 2) lo /= 2;
  while (voigt_density(p.center + hi / 2, p) > peak / 2) hi *= 2;
  for (int i = 0; i < 200 && (hi - lo) > 1e-14 * hi; ++i) {
    const double mid = (lo + hi) / 2;
    if (voigt_density(p.center + mid / 2, p) > peak / 2)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace remsim
