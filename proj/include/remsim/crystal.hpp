#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "remsim/config.hpp"
#include "remsim/histogram.hpp"
#include "remsim/rng.hpp"

namespace remsim {

// One near lattice shell around the dopant; a co-dopant on any of its
// site_count equivalent sites shifts the optical line by `shift_ghz`.
struct ShellRow {
  int shell_index = 0;
  int site_count = 1;
  double shift_ghz = 0;
};

struct CrystalConfig {
  // fraction of Y sites, calibrated so the mode region holds ~360 resolvable
  // satellite emitters above the census threshold
  double erbium_concentration = 5.355e-7;
  double europium_concentration = 1e-4;    // fraction of Y sites
  std::vector<ShellRow> shell_table = {
      {1, 1, -1.6}, {2, 2, -0.9}, {3, 3, 0.9}, {4, 1, 1.5}};
  double lorentzian_per_concentration = 1.1e3;  // GHz per unit Eu fraction
  // concentration-independent Lorentzian broadening on top of the co-dopant
  // continuum; the measured line is wider than the continuum law alone
  double lorentzian_floor_ghz = 0;
  double gaussian_fwhm = 0.27;                  // GHz
  double center_wavelength_nm = 1536.48;
  // stationary spectral-diffusion std per emitter, log-uniform over this band
  double sd_sigma_min_mhz = 0.085;
  double sd_sigma_max_mhz = 0.425;

  void validate() const;  // throws ConfigError on violated invariants
  static CrystalConfig from_config(const Config& cfg);
};

enum class SatelliteClass { main, A, B, C, D, other };
enum class SpinClass { I, II };

const char* to_string(SatelliteClass c);
const char* to_string(SpinClass c);
SatelliteClass satellite_class_from_string(const std::string& s);

struct EmitterRecord {
  long id = 0;
  double frequency_offset_ghz = 0;
  SatelliteClass satellite_class = SatelliteClass::main;
  double radial_um = 0;
  double axial_um = 0;
  double purcell = 0;      // assigned by the cavity census
  double sd_sigma_mhz = 0;
  SpinClass spin_class = SpinClass::I;
};

// cylinder the ensemble positions are drawn from, in mode coordinates
struct ModeRegion {
  double radius_um = 8;
  double axial_min_um = 0;
  double axial_max_um = 10;
};

// Occupied near-shell sites for one emitter: one entry per occupied site,
// holding the row index into config.shell_table.
std::vector<int> sample_occupied_shells(const CrystalConfig& config, Rng& rng);

// Frequency shift of one emitter: sum of occupied near-shell shifts, plus the
// Lorentzian continuum of all farther co-dopants, plus the Gaussian strain
// term. Class follows the single occupied shell, or main (none) / other (two
// or more occupied sites).
std::pair<double, SatelliteClass> codopant_shift(
    const std::vector<int>& occupied_shells, const CrystalConfig& config, Rng& rng);

std::vector<EmitterRecord> sample_ensemble(long n_emitters,
                                           const CrystalConfig& config,
                                           const ModeRegion& region, Rng& rng);

// Deterministically partitioned version: per-chunk substreams of `seed`,
// identical output for any worker count.
std::vector<EmitterRecord> sample_ensemble_parallel(long n_emitters,
                                                    const CrystalConfig& config,
                                                    const ModeRegion& region,
                                                    uint64_t seed, int workers);

// Weighted count of emitters per frequency bin (bin centers at integer
// multiples of bin_width).
SparseHistogram spectrum_histogram(
    const std::vector<EmitterRecord>& emitters, double bin_width_ghz,
    const std::function<double(const EmitterRecord&)>& weight);

}  // namespace remsim
