#include "remsim/cavity.hpp"

#include <cmath>

#include "remsim/parallel.hpp"
#include "remsim/units.hpp"

namespace remsim {

void CavityGeometry::validate() const {
  if (!(mirror_separation_um > 0) ||
      !(mirror_separation_um < radius_of_curvature_um))
    throw ConfigError("cavity: need 0 < mirror_separation < radius_of_curvature");
  if (wavelength_nm <= 0 || cavity_fwhm_mhz <= 0 || peak_purcell <= 0 ||
      membrane_index <= 0 || membrane_thickness_um < 0)
    throw ConfigError("cavity: widths, index and peak enhancement must be positive");
  if (outcoupling_efficiency <= 0 || outcoupling_efficiency > 1)
    throw ConfigError("cavity.outcoupling_efficiency outside (0,1]");
  if (bulk_lifetime_ms <= 0) throw ConfigError("cavity.bulk_lifetime_ms <= 0");
}

CavityGeometry CavityGeometry::from_config(const Config& cfg) {
  CavityGeometry g;
  g.radius_of_curvature_um =
      cfg.num("cavity", "radius_of_curvature", g.radius_of_curvature_um);
  g.mirror_separation_um =
      cfg.num("cavity", "mirror_separation", g.mirror_separation_um);
  g.wavelength_nm = cfg.num("cavity", "wavelength", g.wavelength_nm);
  g.membrane_thickness_um =
      cfg.num("cavity", "membrane_thickness", g.membrane_thickness_um);
  g.membrane_index = cfg.num("cavity", "membrane_index", g.membrane_index);
  g.cavity_fwhm_mhz = cfg.num("cavity", "cavity_fwhm", g.cavity_fwhm_mhz);
  g.peak_purcell = cfg.num("cavity", "peak_purcell", g.peak_purcell);
  g.outcoupling_efficiency =
      cfg.num("cavity", "outcoupling_efficiency", g.outcoupling_efficiency);
  g.antinode_offset_um = cfg.num("cavity", "antinode_offset", g.antinode_offset_um);
  g.bulk_lifetime_ms = cfg.num("cavity", "bulk_lifetime_ms", g.bulk_lifetime_ms);
  g.validate();
  return g;
}

double fundamental_waist_um(const CavityGeometry& g) {
  const double lambda_um = g.wavelength_nm * 1e-3;
  const double l_eff = (g.mirror_separation_um - g.membrane_thickness_um) +
                       g.membrane_thickness_um / g.membrane_index;
  const double r = g.radius_of_curvature_um;
  if (l_eff >= r) throw ConfigError("unstable geometry");
  return std::sqrt(lambda_um / kPi * std::sqrt(l_eff * (r - l_eff)));
}

double purcell_factor_at(double radial_um, double axial_um,
                         const CavityGeometry& g) {
  const double w0 = fundamental_waist_um(g);
  const double k_med = 2 * kPi * g.membrane_index / (g.wavelength_nm * 1e-3);
  const double c = std::cos(k_med * (axial_um - g.antinode_offset_um));
  return g.peak_purcell * std::exp(-2 * radial_um * radial_um / (w0 * w0)) * c * c;
}

double enhanced_lifetime_ms(double purcell, double bulk_lifetime_ms) {
  return bulk_lifetime_ms / (1.0 + purcell);
}

double cavity_line_filter(double detuning_mhz, const CavityGeometry& g) {
  const double x = 2 * detuning_mhz / g.cavity_fwhm_mhz;
  return 1.0 / (1.0 + x * x);
}

CensusResult purcell_census(std::vector<EmitterRecord>& emitters,
                            const CavityGeometry& g, double bulk_lifetime_ms,
                            double threshold, int workers,
                            std::size_t histogram_bins) {
  CensusResult res;
  // nextafter keeps the exact peak value inside the top bin
  res.histogram = Histogram1D(
      0.0, std::nextafter(g.peak_purcell, 2 * g.peak_purcell), histogram_bins);
  res.assignments.resize(emitters.size());

  struct Part {
    Histogram1D hist;
    long above = 0;
  };
  auto parts = chunked_map<Part>(
      emitters.size(), 8192, workers,
      [&](std::size_t, std::size_t first, std::size_t last) {
        Part part{res.histogram, 0};  // copies the empty layout
        for (std::size_t i = first; i < last; ++i) {
          auto& e = emitters[i];
          e.purcell = purcell_factor_at(e.radial_um, e.axial_um, g);
          res.assignments[i] = {e.id, e.purcell,
                                enhanced_lifetime_ms(e.purcell, bulk_lifetime_ms)};
          part.hist.add(e.purcell);
          if (e.purcell > threshold) ++part.above;
        }
        return part;
      });
  for (const auto& part : parts) {
    res.histogram.merge(part.hist);
    res.count_above_threshold += part.above;
  }
  return res;
}

}  // namespace remsim
