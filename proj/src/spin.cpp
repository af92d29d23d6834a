#include "remsim/spin.hpp"

#include <cmath>

namespace remsim {

void SpinParams::validate() const {
  if (g_ground <= 0 || g_excited <= 0) throw ConfigError("spin: g factors must be > 0");
  if (b_field_mt < 0) throw ConfigError("spin.b_field_mt < 0");
}

SpinParams SpinParams::from_config(const Config& cfg) {
  SpinParams p;
  p.g_ground = cfg.num("spin", "g_ground", p.g_ground);
  p.g_excited = cfg.num("spin", "g_excited", p.g_excited);
  p.b_field_mt = cfg.num("spin", "b_field_mt", p.b_field_mt);
  p.class_g_offset = cfg.num("spin", "class_g_offset", p.class_g_offset);
  p.bohr_frequency_constant =
      cfg.num("spin", "bohr_frequency_constant", p.bohr_frequency_constant);
  for (const auto& row : cfg.rows("spin", "satellite_g_correction")) {
    if (row.size() != 3)
      throw ConfigError(
          "spin.satellite_g_correction rows need (class, dg_ground, dg_excited)");
    SatelliteGCorrection corr;
    corr.dg_ground = std::stod(row[1]);
    corr.dg_excited = std::stod(row[2]);
    p.satellite_g_correction[satellite_class_from_string(row[0])] = corr;
  }
  p.validate();
  return p;
}

namespace {

// Effective doublet splittings in GHz for this emitter's satellite and spin
// class. The misalignment branch adds half the offset to both g factors so
// that swapping g_ground and g_excited leaves both observables unchanged.
std::pair<double, double> doublet_splittings(const SpinParams& p,
                                             const EmitterRecord& e) {
  SatelliteGCorrection corr;
  if (const auto it = p.satellite_g_correction.find(e.satellite_class);
      it != p.satellite_g_correction.end())
    corr = it->second;
  const double branch =
      (e.spin_class == SpinClass::I ? 0.5 : -0.5) * p.class_g_offset;
  const double b_tesla = p.b_field_mt * 1e-3;
  const double delta_g =
      (p.g_ground + corr.dg_ground + branch) * p.bohr_frequency_constant * b_tesla;
  const double delta_e =
      (p.g_excited + corr.dg_excited + branch) * p.bohr_frequency_constant * b_tesla;
  return {delta_g, delta_e};
}

}  // namespace

TransitionFrequencies transition_frequencies(const SpinParams& p,
                                             const EmitterRecord& emitter) {
  const auto [delta_g, delta_e] = doublet_splittings(p, emitter);
  const double f0 = emitter.frequency_offset_ghz;
  TransitionFrequencies f;
  f.f_sp_low = f0 - std::abs(delta_e - delta_g) / 2;
  f.f_sp_high = f0 + std::abs(delta_e - delta_g) / 2;
  f.f_sf_red = f0 - (delta_e + delta_g) / 2;
  f.f_sf_blue = f0 + (delta_e + delta_g) / 2;
  return f;
}

SplittingPair splittings(const SpinParams& p, const EmitterRecord& emitter) {
  const auto f = transition_frequencies(p, emitter);
  SplittingPair s;
  s.delta_sp_mhz = ghz_to_mhz(std::abs(f.f_sp_high - f.f_sp_low));
  s.delta_sf_mhz = ghz_to_mhz(f.f_sf_blue - f.f_sf_red);
  return s;
}

std::vector<double> hole_spectrum(double spin_inhomogeneous_fwhm_mhz,
                                  const std::vector<double>& pump_detuning_grid_mhz) {
  if (spin_inhomogeneous_fwhm_mhz <= 0)
    throw ConfigError("hole_spectrum: fwhm must be > 0");
  const double ln16 = 4 * std::log(2.0);
  const double f2 = spin_inhomogeneous_fwhm_mhz * spin_inhomogeneous_fwhm_mhz;
  std::vector<double> out;
  out.reserve(pump_detuning_grid_mhz.size());
  for (double d : pump_detuning_grid_mhz)
    out.push_back(std::exp(-ln16 * d * d / f2));
  return out;
}

}  // namespace remsim
