#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "remsim/cavity.hpp"
#include "remsim/config.hpp"
#include "remsim/rng.hpp"
#include "remsim/units.hpp"

using namespace remsim;

TEST_CASE("fundamental waist of the plano-concave geometry") {
  CavityGeometry g;

  SUBCASE("no membrane reproduces the closed-form waist") {
    g.membrane_thickness_um = 0;
    // sqrt((lambda/pi) * sqrt(L (R - L))) at R = 65, L = 24, 1536.48 nm
    CHECK(fundamental_waist_um(g) == doctest::Approx(3.9169).epsilon(1e-3));
  }
  SUBCASE("membrane path correction lands on the measured waist") {
    const double w0 = fundamental_waist_um(g);
    CHECK(w0 > 3.7);
    CHECK(w0 < 4.0);
    // L_eff = (L - d) + d/n = 19.5556 um, frozen arithmetic
    CHECK(w0 == doctest::Approx(3.81836).epsilon(1e-4));
  }
  SUBCASE("waist collapses as the length approaches instability") {
    g.membrane_thickness_um = 0;
    double prev = fundamental_waist_um(g);
    for (double frac : {0.9, 0.99, 0.999}) {
      g.mirror_separation_um = frac * g.radius_of_curvature_um;
      const double w0 = fundamental_waist_um(g);
      CHECK(w0 < prev);
      prev = w0;
    }
    CHECK(prev < 1.1);  // w0 -> 0 at the boundary
  }
  SUBCASE("unstable length is rejected") {
    g.membrane_thickness_um = 0;
    g.mirror_separation_um = 70;
    CHECK_THROWS_AS(fundamental_waist_um(g), ConfigError);
  }
}

TEST_CASE("purcell_factor_at follows the standing-wave mode intensity") {
  CavityGeometry g;
  const double w0 = fundamental_waist_um(g);
  const double lambda_medium_um = g.wavelength_nm * 1e-3 / g.membrane_index;

  SUBCASE("peak on axis at an antinode") {
    CHECK(purcell_factor_at(0.0, g.antinode_offset_um, g) == 116.0);
  }
  SUBCASE("zero at a node") {
    const double node = g.antinode_offset_um + lambda_medium_um / 4;
    CHECK(purcell_factor_at(0.0, node, g) < 1e-12);
  }
  SUBCASE("one waist off axis gives the e^-2 intensity factor") {
    CHECK(purcell_factor_at(w0, g.antinode_offset_um, g) ==
          doctest::Approx(116.0 * std::exp(-2.0)).epsilon(1e-9));
  }
  SUBCASE("monotone nonincreasing in radius at fixed height") {
    for (double z : {0.0, 0.1, 0.2134}) {
      double prev = purcell_factor_at(0.0, z, g);
      for (double r = 0.25; r <= 8.0; r += 0.25) {
        const double p = purcell_factor_at(r, z, g);
        CHECK(p <= prev);
        prev = p;
      }
    }
  }
}

TEST_CASE("enhanced_lifetime identities") {
  CHECK(enhanced_lifetime_ms(0.0, 11.4) == 11.4);
  // 110-fold reduction: 11.4 ms / (1 + 109)
  CHECK(enhanced_lifetime_ms(109.0, 11.4) == doctest::Approx(0.104).epsilon(0.01));
  // the strongly coupled reference emitter at 131 us
  CHECK(enhanced_lifetime_ms(86.0, 11.4) ==
        doctest::Approx(0.131034).epsilon(1e-5));

  SUBCASE("exact inverse relation and monotonicity") {
    double prev = enhanced_lifetime_ms(0.0, 11.4);
    for (double p : {0.5, 3.0, 35.0, 86.0, 109.0, 116.0}) {
      const double lt = enhanced_lifetime_ms(p, 11.4);
      CHECK(lt * (1 + p) == doctest::Approx(11.4).epsilon(1e-14));
      CHECK(lt < prev);
      prev = lt;
    }
  }
}

TEST_CASE("cavity_line_filter is the resonator Lorentzian") {
  CavityGeometry g;
  CHECK(cavity_line_filter(0.0, g) == 1.0);
  CHECK(cavity_line_filter(32.5, g) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(cavity_line_filter(-32.5, g) == doctest::Approx(0.5).epsilon(1e-12));
  // spin-flip line 6 GHz away is suppressed below 2e-4: no enhancement
  CHECK(cavity_line_filter(6000.0, g) < 2e-4);
  for (double d : {1.0, 10.0, 65.0, 300.0}) {
    CHECK(cavity_line_filter(d, g) == cavity_line_filter(-d, g));
    CHECK(cavity_line_filter(d, g) > 0.0);
    CHECK(cavity_line_filter(d, g) < 1.0);
  }
}

TEST_CASE("purcell_census assigns, counts and histograms") {
  CavityGeometry g;

  SUBCASE("single centered emitter gets the peak factor") {
    std::vector<EmitterRecord> one(1);
    one[0].id = 7;
    one[0].radial_um = 0;
    one[0].axial_um = g.antinode_offset_um;
    auto census = purcell_census(one, g, g.bulk_lifetime_ms, 35.0);
    REQUIRE(census.assignments.size() == 1);
    CHECK(census.assignments[0].emitter_id == 7);
    CHECK(census.assignments[0].purcell == 116.0);
    CHECK(census.assignments[0].lifetime_ms ==
          doctest::Approx(11.4 / 117.0).epsilon(1e-12));
    CHECK(census.count_above_threshold == 1);
    CHECK(one[0].purcell == 116.0);
  }

  SUBCASE("histogram totals and worker-count invariance") {
    ModeRegion region;
    std::vector<EmitterRecord> emitters(20000);
    Rng rng(5150);
    for (std::size_t i = 0; i < emitters.size(); ++i) {
      emitters[i].id = static_cast<long>(i);
      emitters[i].radial_um = region.radius_um * std::sqrt(rng.uniform());
      emitters[i].axial_um = rng.uniform(region.axial_min_um, region.axial_max_um);
    }
    auto a = emitters;
    auto b = emitters;
    const auto c1 = purcell_census(a, g, g.bulk_lifetime_ms, 35.0, 1);
    const auto c6 = purcell_census(b, g, g.bulk_lifetime_ms, 35.0, 6);

    CHECK(c1.histogram.total() + c1.histogram.overflow() ==
          doctest::Approx(20000.0));
    CHECK(c1.count_above_threshold == c6.count_above_threshold);
    long diff = 0;
    for (std::size_t i = 0; i < c1.assignments.size(); ++i)
      if (c1.assignments[i].purcell != c6.assignments[i].purcell) ++diff;
    for (std::size_t i = 0; i < c1.histogram.size(); ++i)
      if (c1.histogram.count(i) != c6.histogram.count(i)) ++diff;
    CHECK(diff == 0);
  }

  SUBCASE("histogram matches the dense grid integration of the mode volume") {
    ModeRegion region;
    const std::size_t n = 2000000;
    std::vector<EmitterRecord> emitters(n);
    Rng rng(86);
    for (std::size_t i = 0; i < n; ++i) {
      emitters[i].radial_um = region.radius_um * std::sqrt(rng.uniform());
      emitters[i].axial_um = rng.uniform(region.axial_min_um, region.axial_max_um);
    }
    auto census = purcell_census(emitters, g, g.bulk_lifetime_ms, 35.0, 4);

    const double k = 2 * kPi * g.membrane_index / (g.wavelength_nm * 1e-3);
    const auto fractions = oracle::purcell_bin_fractions(
        g.peak_purcell, fundamental_waist_um(g), k, g.antinode_offset_um,
        region.radius_um, region.axial_min_um, region.axial_max_um,
        census.histogram.size());

    double max_rel = 0;
    int compared = 0;
    for (std::size_t b = 0; b < fractions.size(); ++b) {
      const double expected = fractions[b] * static_cast<double>(n);
      // bins where sampling noise would swamp a 5% band are skipped
      if (expected < 4000) continue;
      ++compared;
      max_rel = std::max(
          max_rel, std::abs(census.histogram.count(b) - expected) / expected);
    }
    CHECK(compared >= 10);
    CHECK(max_rel < 0.05);
  }
}
