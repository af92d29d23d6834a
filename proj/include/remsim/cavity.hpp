#pragma once

#include <vector>

#include "remsim/config.hpp"
#include "remsim/crystal.hpp"
#include "remsim/histogram.hpp"

namespace remsim {

struct CavityGeometry {
  double radius_of_curvature_um = 65;
  double mirror_separation_um = 24;
  double wavelength_nm = 1536.48;
  double membrane_thickness_um = 10;
  double membrane_index = 1.8;
  double cavity_fwhm_mhz = 65;
  double peak_purcell = 116;
  double outcoupling_efficiency = 0.75;
  // standing-wave reference: axial coordinate of a field antinode inside the
  // membrane; the physical registration is not known, only its existence
  double antinode_offset_um = 0;
  double bulk_lifetime_ms = 11.4;

  void validate() const;
  static CavityGeometry from_config(const Config& cfg);
};

// Plano-concave fundamental waist with the optical-path membrane correction
// L_eff = (L - d) + d/n. Throws ConfigError("unstable geometry") for
// L_eff >= R.
double fundamental_waist_um(const CavityGeometry& g);

// peak_purcell * exp(-2 r^2/w0^2) * cos^2(k_medium (z - antinode))
double purcell_factor_at(double radial_um, double axial_um, const CavityGeometry& g);

double enhanced_lifetime_ms(double purcell, double bulk_lifetime_ms);

// Lorentzian enhancement weight, 1 at resonance, 1/2 at +-fwhm/2.
double cavity_line_filter(double detuning_mhz, const CavityGeometry& g);

struct PurcellAssignment {
  long emitter_id = 0;
  double purcell = 0;
  double lifetime_ms = 0;
};

struct CensusResult {
  std::vector<PurcellAssignment> assignments;  // emitter order preserved
  Histogram1D histogram;                       // purcell values, [0, peak]
  long count_above_threshold = 0;
};

// Fills emitter.purcell in place and reports the distribution.
CensusResult purcell_census(std::vector<EmitterRecord>& emitters,
                            const CavityGeometry& g, double bulk_lifetime_ms,
                            double threshold, int workers = 1,
                            std::size_t histogram_bins = 29);

}  // namespace remsim
