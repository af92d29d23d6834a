#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "remsim/crystal.hpp"
#include "remsim/fitting.hpp"
#include "remsim/rng.hpp"

using namespace remsim;

namespace {

// occurrence probabilities of the satellite classes under independent
// Bernoulli(eu) occupation of the default shells (site counts 1, 2, 3, 1):
// a class requires its own shell occupied and every other near shell empty
struct ClassLaw {
  double main, a, b, c, d, other;
};

ClassLaw class_probabilities(double eu) {
  const double q = 1 - eu;
  const double q2 = q * q, q4 = q2 * q2;
  ClassLaw law;
  law.main = q4 * q2 * q;  // q^7, all seven sites empty
  law.a = (1 - q) * q4 * q2;
  law.b = (1 - q2) * q4 * q;
  law.c = (1 - q2 * q) * q4;
  law.d = (1 - q) * q4 * q2;
  law.other = 1 - law.main - law.a - law.b - law.c - law.d;
  return law;
}

}  // namespace

TEST_CASE("zero co-dopant concentration leaves a pure Gaussian main line") {
  CrystalConfig cfg;
  cfg.europium_concentration = 0;
  cfg.validate();
  Rng rng(404);
  const auto emitters = sample_ensemble(300000, cfg, ModeRegion{}, rng);

  long off_class = 0;
  for (const auto& e : emitters)
    if (e.satellite_class != SatelliteClass::main) ++off_class;
  CHECK(off_class == 0);

  auto hist = spectrum_histogram(emitters, 0.02,
                                 [](const EmitterRecord&) { return 1.0; });
  std::vector<double> x, y;
  for (const auto& [center, count] : hist.items()) {
    x.push_back(center);
    y.push_back(count);
  }
  const auto fit = fit_voigt(x, y);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.param("lorentzian_fwhm")) < 0.02);
  CHECK(std::abs(fit.param("gaussian_fwhm")) ==
        doctest::Approx(0.27).epsilon(0.05));
}

TEST_CASE("satellite class rates follow the exact shell-occupancy law") {
  CrystalConfig cfg;  // defaults: eu = 1e-4, shells with 1, 2, 3, 1 sites
  const long n = 10000000;
  Rng rng(71);
  long counts[6] = {0, 0, 0, 0, 0, 0};
  for (long i = 0; i < n; ++i) {
    const auto occupied = sample_occupied_shells(cfg, rng);
    const auto [shift, cls] = codopant_shift(occupied, cfg, rng);
    ++counts[static_cast<int>(cls)];
  }
  const auto law = class_probabilities(cfg.europium_concentration);

  // single-site shell D within 3 binomial std of site_count * eu
  const double expected_d = law.d * n;
  const double sigma_d = std::sqrt(law.d * (1 - law.d) * n);
  CHECK(std::abs(counts[4] - expected_d) < 3 * sigma_d);

  // two-site shell carries twice the single-site amplitude
  const double ratio = static_cast<double>(counts[2]) / counts[4];
  const double expected_ratio = law.b / law.d;  // (2 - eu)/(1 - eu)
  const double sigma_ratio =
      ratio * std::sqrt(1.0 / counts[2] + 1.0 / counts[4]);
  CHECK(std::abs(ratio - expected_ratio) < 3 * sigma_ratio);
  CHECK(expected_ratio == doctest::Approx(2.0).epsilon(1e-3));

  // chi-square across classes; double occupation is ~1e-8 likely, so pool
  // it with main to keep every category testable
  std::vector<double> observed = {
      static_cast<double>(counts[0] + counts[5]), static_cast<double>(counts[1]),
      static_cast<double>(counts[2]), static_cast<double>(counts[3]),
      static_cast<double>(counts[4])};
  std::vector<double> expected = {(law.main + law.other) * n, law.a * n,
                                  law.b * n, law.c * n, law.d * n};
  // 0.001 upper quantile of chi-square with 4 degrees of freedom
  CHECK(oracle::chi_square(observed, expected) < 18.467);
}

TEST_CASE("codopant_shift composes shell shifts with the continuum") {
  CrystalConfig cfg;
  Rng rng(9);

  SUBCASE("forced single shell sets the class and the line position") {
    // occupied entries are row positions in the shell table; row 1 is the
    // two-site shell at -0.9 GHz. The continuum Lorentzian has no mean, so
    // check the sample median.
    std::vector<double> shifts;
    long off_class = 0;
    for (int i = 0; i < 20000; ++i) {
      const auto [shift, cls] = codopant_shift({1}, cfg, rng);
      if (cls != SatelliteClass::B) ++off_class;
      shifts.push_back(shift);
    }
    CHECK(off_class == 0);
    std::nth_element(shifts.begin(), shifts.begin() + shifts.size() / 2,
                     shifts.end());
    CHECK(shifts[shifts.size() / 2] == doctest::Approx(-0.9).epsilon(0.03));
  }
  SUBCASE("two occupied shells fall outside every satellite") {
    const auto [shift, cls] = codopant_shift({0, 3}, cfg, rng);
    CHECK(cls == SatelliteClass::other);
  }
  SUBCASE("no occupied shell is the main class") {
    const auto [shift, cls] = codopant_shift({}, cfg, rng);
    CHECK(cls == SatelliteClass::main);
  }
}

TEST_CASE("sample_ensemble populates every record field") {
  CrystalConfig cfg;
  ModeRegion region;
  Rng rng(12345);

  SUBCASE("zero emitters give an empty list") {
    CHECK(sample_ensemble(0, cfg, region, rng).empty());
  }
  SUBCASE("records respect the configured bounds") {
    const auto emitters = sample_ensemble(100000, cfg, region, rng);
    long out_of_bounds = 0, spin_one = 0;
    for (const auto& e : emitters) {
      if (e.radial_um < 0 || e.radial_um > region.radius_um) ++out_of_bounds;
      if (e.axial_um < region.axial_min_um || e.axial_um > region.axial_max_um)
        ++out_of_bounds;
      if (e.sd_sigma_mhz < cfg.sd_sigma_min_mhz ||
          e.sd_sigma_mhz > cfg.sd_sigma_max_mhz)
        ++out_of_bounds;
      if (e.spin_class == SpinClass::I) ++spin_one;
    }
    CHECK(out_of_bounds == 0);
    // even split between the magnetic subclasses
    CHECK(std::abs(spin_one - 50000.0) < 4 * std::sqrt(100000.0 * 0.25));
  }
}

TEST_CASE("parallel ensemble sampling is independent of the worker count") {
  CrystalConfig cfg;
  ModeRegion region;
  const auto one = sample_ensemble_parallel(50000, cfg, region, 77, 1);
  const auto many = sample_ensemble_parallel(50000, cfg, region, 77, 7);
  REQUIRE(one.size() == many.size());
  long mismatches = 0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    if (one[i].id != many[i].id ||
        one[i].frequency_offset_ghz != many[i].frequency_offset_ghz ||
        one[i].satellite_class != many[i].satellite_class ||
        one[i].radial_um != many[i].radial_um ||
        one[i].axial_um != many[i].axial_um ||
        one[i].sd_sigma_mhz != many[i].sd_sigma_mhz ||
        one[i].spin_class != many[i].spin_class)
      ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("spectrum_histogram bookkeeping") {
  SUBCASE("single emitter lands in a single bin") {
    EmitterRecord e;
    e.frequency_offset_ghz = 0;
    auto hist = spectrum_histogram({e}, 0.02,
                                   [](const EmitterRecord&) { return 1.0; });
    REQUIRE(hist.items().size() == 1);
    CHECK(hist.items()[0].first == doctest::Approx(0.0));
    CHECK(hist.items()[0].second == 1.0);
  }
  SUBCASE("empty input gives an empty histogram") {
    auto hist = spectrum_histogram({}, 0.02,
                                   [](const EmitterRecord&) { return 1.0; });
    CHECK(hist.empty());
  }
  SUBCASE("total equals the sum of weights and order does not matter") {
    CrystalConfig cfg;
    Rng rng(3);
    auto emitters = sample_ensemble(20000, cfg, ModeRegion{}, rng);
    // integer weights keep the sparse accumulation exact, which is what
    // makes the permutation check legitimate at the bit level
    auto weight = [](const EmitterRecord& e) { return 1.0 + (e.id % 3); };
    double total = 0;
    for (const auto& e : emitters) total += weight(e);
    auto hist = spectrum_histogram(emitters, 0.05, weight);
    CHECK(hist.total() == doctest::Approx(total).epsilon(1e-12));

    auto shuffled = emitters;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(99));
    auto hist2 = spectrum_histogram(shuffled, 0.05, weight);
    REQUIRE(hist.items().size() == hist2.items().size());
    long diff = 0;
    for (std::size_t i = 0; i < hist.items().size(); ++i) {
      if (hist.items()[i].first != hist2.items()[i].first ||
          hist.items()[i].second != hist2.items()[i].second)
        ++diff;
    }
    CHECK(diff == 0);
  }
}
