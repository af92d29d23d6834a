#include <cmath>
#include <vector>

#include "doctest.h"
#include "remsim/spin.hpp"
#include "remsim/units.hpp"

using namespace remsim;

namespace {

EmitterRecord emitter_of(SatelliteClass cls, SpinClass spin, double offset = 0) {
  EmitterRecord e;
  e.satellite_class = cls;
  e.spin_class = spin;
  e.frequency_offset_ghz = offset;
  return e;
}

SpinParams bare_params(double b_mt) {
  SpinParams p;
  p.b_field_mt = b_mt;
  p.class_g_offset = 0;  // no misalignment branches
  return p;
}

}  // namespace

TEST_CASE("zero field leaves the doublets degenerate") {
  SpinParams p = bare_params(0.0);
  const auto e = emitter_of(SatelliteClass::main, SpinClass::I, 0.55);
  const auto f = transition_frequencies(p, e);
  CHECK(f.f_sp_low == 0.55);
  CHECK(f.f_sp_high == 0.55);
  CHECK(f.f_sf_red == 0.55);
  CHECK(f.f_sf_blue == 0.55);
}

TEST_CASE("Zeeman splittings at 350 mT for g = 9 and 10") {
  SpinParams p = bare_params(350.0);
  const auto e = emitter_of(SatelliteClass::main, SpinClass::I);
  const auto s = splittings(p, e);
  // |g_e - g_g| * 13.996 GHz/T * 0.35 T = 4.8986 GHz
  CHECK(s.delta_sp_mhz == doctest::Approx(4898.6).epsilon(1e-10));
  // (g_g + g_e)/|g_e - g_g| = 19 exactly for 9 and 10
  CHECK(s.delta_sf_mhz / s.delta_sp_mhz == doctest::Approx(19.0).epsilon(1e-12));
}

TEST_CASE("sum rule ties the four lines to the optical offset") {
  SpinParams p;
  p.b_field_mt = 215.0;
  p.satellite_g_correction[SatelliteClass::D] = {0.024, 0.036};
  for (auto spin : {SpinClass::I, SpinClass::II}) {
    for (auto cls : {SatelliteClass::main, SatelliteClass::D}) {
      const auto e = emitter_of(cls, spin, -1.63);
      const auto f = transition_frequencies(p, e);
      CHECK(f.f_sf_blue + f.f_sf_red ==
            doctest::Approx(f.f_sp_low + f.f_sp_high).epsilon(1e-13));
      CHECK(f.f_sf_blue + f.f_sf_red ==
            doctest::Approx(2 * e.frequency_offset_ghz).epsilon(1e-13));
    }
  }
}

TEST_CASE("splittings are linear in the applied field") {
  const auto e = emitter_of(SatelliteClass::main, SpinClass::I);
  const auto at = [&](double b_mt) { return splittings(bare_params(b_mt), e); };
  const auto s1 = at(100.0), s2 = at(200.0), s4 = at(400.0);
  CHECK(2 * s1.delta_sp_mhz == doctest::Approx(s2.delta_sp_mhz).epsilon(1e-12));
  CHECK(2 * s2.delta_sp_mhz == doctest::Approx(s4.delta_sp_mhz).epsilon(1e-12));
  CHECK(2 * s1.delta_sf_mhz == doctest::Approx(s2.delta_sf_mhz).epsilon(1e-12));
  CHECK(2 * s2.delta_sf_mhz == doctest::Approx(s4.delta_sf_mhz).epsilon(1e-12));
}

TEST_CASE("swapping the two g factors changes neither splitting") {
  SpinParams p = bare_params(120.0);
  const auto e = emitter_of(SatelliteClass::main, SpinClass::I);
  const auto a = splittings(p, e);
  std::swap(p.g_ground, p.g_excited);
  const auto b = splittings(p, e);
  CHECK(a.delta_sp_mhz == doctest::Approx(b.delta_sp_mhz).epsilon(1e-14));
  CHECK(a.delta_sf_mhz == doctest::Approx(b.delta_sf_mhz).epsilon(1e-14));
}

TEST_CASE("magnetic subclasses branch the spin-flip splitting only") {
  SpinParams p;
  p.b_field_mt = 2.5;  // default class_g_offset 0.02
  const auto s1 = splittings(p, emitter_of(SatelliteClass::main, SpinClass::I));
  const auto s2 = splittings(p, emitter_of(SatelliteClass::main, SpinClass::II));
  // both g factors shift by +-offset/2, so the SP difference cancels and the
  // SF difference is 2 * (offset/2) * 2 * 13.996 GHz/T * B
  CHECK(s1.delta_sp_mhz == doctest::Approx(s2.delta_sp_mhz).epsilon(1e-12));
  const double expected_mhz = 2 * 0.02 * kBohrGHzPerTesla * 2.5e-3 * 1e3;
  CHECK(s1.delta_sf_mhz - s2.delta_sf_mhz ==
        doctest::Approx(expected_mhz).epsilon(1e-10));
  CHECK(expected_mhz == doctest::Approx(1.3996).epsilon(1e-12));
}

TEST_CASE("satellite g corrections move the spin-flip line past the hole") {
  SpinParams p;
  p.b_field_mt = 2.5;
  p.class_g_offset = 0;
  p.satellite_g_correction[SatelliteClass::D] = {0.024, 0.036};
  const auto main_s = splittings(p, emitter_of(SatelliteClass::main, SpinClass::I));
  const auto d_s = splittings(p, emitter_of(SatelliteClass::D, SpinClass::I));
  // (dg_g + dg_e) * 13.996 GHz/T * 2.5 mT = 2.0994 MHz
  const double offset = d_s.delta_sf_mhz - main_s.delta_sf_mhz;
  CHECK(offset == doctest::Approx(2.0994).epsilon(1e-9));
  const double hole_fwhm_mhz = 1.0;
  CHECK(std::abs(offset) > hole_fwhm_mhz);
}

TEST_CASE("hole_spectrum is the Gaussian comparison band") {
  std::vector<double> grid;
  for (double d = -4.0; d <= 4.0 + 1e-9; d += 0.05) grid.push_back(d);
  const double fwhm = 1.6;
  const auto prof = hole_spectrum(fwhm, grid);
  REQUIRE(prof.size() == grid.size());

  std::size_t peak = 0;
  for (std::size_t i = 0; i < prof.size(); ++i)
    if (prof[i] > prof[peak]) peak = i;
  CHECK(grid[peak] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(prof[peak] == doctest::Approx(1.0).epsilon(1e-12));

  // half depth exactly one FWHM apart
  const auto value_at = [&](double x) {
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (std::abs(grid[i] - x) < 1e-9) return prof[i];
    return -1.0;
  };
  CHECK(value_at(fwhm / 2) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(value_at(-fwhm / 2) == doctest::Approx(0.5).epsilon(1e-9));
}
