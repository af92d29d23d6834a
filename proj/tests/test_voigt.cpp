#include <cmath>
#include <complex>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "remsim/voigt.hpp"

using namespace remsim;

TEST_CASE("faddeeva function matches reference values") {
  // w(0) = 1 and two independently computed points, one complex, one real.
  // On the real axis Re w(x) = exp(-x^2).
  CHECK(faddeeva({0, 0}).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(faddeeva({0, 0}).imag() == doctest::Approx(0.0).epsilon(1e-12));

  const auto w11 = faddeeva({1.0, 1.0});
  CHECK(w11.real() == doctest::Approx(0.30474420525691254).epsilon(1e-9));
  CHECK(w11.imag() == doctest::Approx(0.20821893820283162).epsilon(1e-9));

  const auto w2 = faddeeva({2.0, 0.0});
  CHECK(w2.real() == doctest::Approx(std::exp(-4.0)).epsilon(1e-9));
  CHECK(w2.imag() == doctest::Approx(0.3400262170660662).epsilon(1e-9));
}

TEST_CASE("voigt_density reduces to the pure limits") {
  SUBCASE("no Lorentzian part is a plain Gaussian") {
    VoigtParams p{0.0, 0.27, 0.0, 1.0};
    const double sigma = 0.27 / (2 * std::sqrt(2 * std::log(2.0)));
    for (double x : {0.0, 0.05, 0.13, 0.27, 0.6, 1.4}) {
      const double gauss =
          std::exp(-x * x / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * oracle::kPi));
      CHECK(voigt_density(x, p) == doctest::Approx(gauss).epsilon(1e-8));
    }
  }
  SUBCASE("no Gaussian part is a plain Lorentzian") {
    VoigtParams p{0.14, 0.0, 0.0, 1.0};
    const double hwhm = 0.07;
    for (double x : {0.0, 0.07, 0.2, 0.9}) {
      const double lor = hwhm / (oracle::kPi * (x * x + hwhm * hwhm));
      CHECK(voigt_density(x, p) == doctest::Approx(lor).epsilon(1e-8));
    }
  }
  SUBCASE("both widths zero is rejected") {
    VoigtParams p{0.0, 0.0, 0.0, 1.0};
    CHECK_THROWS_AS(voigt_density(0.1, p), std::invalid_argument);
  }
}

TEST_CASE("voigt_density agrees with direct convolution quadrature") {
  VoigtParams p{0.14, 0.27, 0.0, 1.0};
  for (double x : {0.0, 0.1, 0.25, 0.5, 1.0}) {
    const double ref = oracle::voigt_convolution(x, 0.14, 0.27);
    CHECK(voigt_density(x, p) == doctest::Approx(ref).epsilon(1e-6));
  }
  // quadrature value at the center, frozen: 2.2701664
  CHECK(voigt_density(0.0, p) == doctest::Approx(2.2701664).epsilon(1e-6));
}

TEST_CASE("voigt profile FWHM for the measured line widths") {
  VoigtParams p{0.14, 0.27, 0.0, 1.0};
  const double fwhm = voigt_fwhm(p);
  // bisection on the quadrature convolution gives 0.3525311
  CHECK(fwhm == doctest::Approx(0.3525311).epsilon(2e-4));
  CHECK(fwhm == doctest::Approx(oracle::voigt_fwhm_bisect(0.14, 0.27)).epsilon(2e-4));
}

TEST_CASE("voigt_density integrates to the configured area") {
  for (double area : {1.0, 2.5}) {
    VoigtParams p{0.14, 0.27, 0.3, area};
    const double span = 50 * (p.lorentzian_fwhm + p.gaussian_fwhm);
    const double got = oracle::simpson(
        [&](double x) { return voigt_density(x, p); }, p.center - span,
        p.center + span, 20000);
    // the Lorentzian tail beyond 50 combined widths carries ~area*3e-3;
    // compare against the truncated analytic mass instead of the full area
    const double hwhm = p.lorentzian_fwhm / 2;
    const double tail = area * (1 - 2 / oracle::kPi * std::atan(span / hwhm));
    CHECK(got == doctest::Approx(area - tail).epsilon(1e-4));
  }
}

TEST_CASE("voigt_density is exactly symmetric about its center") {
  // dyadic center and offsets so that center +- dx are exact doubles; the
  // evaluation itself must then be bit-for-bit symmetric
  VoigtParams p{0.11, 0.27, 0.375, 1.0};
  for (double dx : {0.125, 0.25, 0.5, 2.0})
    CHECK(voigt_density(p.center + dx, p) == voigt_density(p.center - dx, p));
}
