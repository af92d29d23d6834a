#pragma once

#include <map>
#include <vector>

#include "remsim/config.hpp"
#include "remsim/crystal.hpp"

namespace remsim {

struct SatelliteGCorrection {
  double dg_ground = 0;
  double dg_excited = 0;
};

struct SpinParams {
  double g_ground = 9;
  double g_excited = 10;
  double b_field_mt = 0;
  // field-misalignment branches: class I gets +offset/2 on both g factors,
  // class II gets -offset/2
  double class_g_offset = 0.02;
  std::map<SatelliteClass, SatelliteGCorrection> satellite_g_correction;
  double bohr_frequency_constant = kBohrGHzPerTesla;  // GHz per Tesla per g

  void validate() const;
  static SpinParams from_config(const Config& cfg);
};

// Optical transition offsets relative to the zero-field line, GHz.
struct TransitionFrequencies {
  double f_sp_low = 0;
  double f_sp_high = 0;
  double f_sf_red = 0;
  double f_sf_blue = 0;
};

TransitionFrequencies transition_frequencies(const SpinParams& p,
                                             const EmitterRecord& emitter);

struct SplittingPair {
  double delta_sp_mhz = 0;
  double delta_sf_mhz = 0;
};

SplittingPair splittings(const SpinParams& p, const EmitterRecord& emitter);

// Gaussian comparison band for hole-burning scans: peak 1 at zero pump
// detuning, half depth at +-fwhm/2.
std::vector<double> hole_spectrum(double spin_inhomogeneous_fwhm_mhz,
                                  const std::vector<double>& pump_detuning_grid_mhz);

}  // namespace remsim
