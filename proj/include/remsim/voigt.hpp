#pragma once

#include <complex>

namespace remsim {

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im(z) >= 0.
// Rational expansion after Weideman, SIAM J. Numer. Anal. 31 (1994), N = 40
// terms; relative error on Re(w) stays below 6e-9 over the upper half plane,
// comfortably past the 1e-6 the Voigt evaluations need.
std::complex<double> faddeeva(std::complex<double> z);

struct VoigtParams {
  double lorentzian_fwhm = 0;  // GHz
  double gaussian_fwhm = 0;    // GHz
  double center = 0;           // GHz
  double area = 1;
};

// Unit-area Lorentzian-Gaussian convolution scaled by p.area, in 1/GHz.
// Pure limits are special-cased; both widths zero throws
// std::invalid_argument("degenerate profile").
double voigt_density(double x, const VoigtParams& p);

// Full width at half maximum found by bisection on the profile itself.
double voigt_fwhm(const VoigtParams& p);

}  // namespace remsim
