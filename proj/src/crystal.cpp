#include "remsim/crystal.hpp"

#include <cmath>
#include <set>

#include "remsim/parallel.hpp"

namespace remsim {

void CrystalConfig::validate() const {
  if (erbium_concentration < 0 || erbium_concentration >= 1)
    throw ConfigError("crystal.erbium_concentration outside [0,1)");
  if (europium_concentration < 0 || europium_concentration >= 1)
    throw ConfigError("crystal.europium_concentration outside [0,1)");
  std::set<double> shifts;
  for (const auto& row : shell_table) {
    if (row.site_count < 1) throw ConfigError("crystal.shell_table: site_count < 1");
    if (!std::isfinite(row.shift_ghz))
      throw ConfigError("crystal.shell_table: shift not finite");
    if (!shifts.insert(row.shift_ghz).second)
      throw ConfigError("crystal.shell_table: duplicate shell shift");
  }
  if (gaussian_fwhm < 0) throw ConfigError("crystal.gaussian_fwhm < 0");
  if (lorentzian_floor_ghz < 0) throw ConfigError("crystal.lorentzian_floor < 0");
  if (sd_sigma_min_mhz <= 0 || sd_sigma_max_mhz < sd_sigma_min_mhz)
    throw ConfigError("crystal.sd_sigma band invalid");
}

CrystalConfig CrystalConfig::from_config(const Config& cfg) {
  CrystalConfig c;
  c.erbium_concentration = cfg.num("crystal", "erbium_concentration",
                                   c.erbium_concentration);
  c.europium_concentration = cfg.num("crystal", "europium_concentration",
                                     c.europium_concentration);
  c.lorentzian_per_concentration = cfg.num("crystal", "lorentzian_per_concentration",
                                           c.lorentzian_per_concentration);
  c.lorentzian_floor_ghz = cfg.num("crystal", "lorentzian_floor_ghz",
                                   c.lorentzian_floor_ghz);
  c.gaussian_fwhm = cfg.num("crystal", "gaussian_fwhm", c.gaussian_fwhm);
  c.center_wavelength_nm = cfg.num("crystal", "center_wavelength",
                                   c.center_wavelength_nm);
  c.sd_sigma_min_mhz = cfg.num("crystal", "sd_sigma_min_mhz", c.sd_sigma_min_mhz);
  c.sd_sigma_max_mhz = cfg.num("crystal", "sd_sigma_max_mhz", c.sd_sigma_max_mhz);
  const auto rows = cfg.num_rows("crystal", "shell_table");
  if (!rows.empty()) {
    c.shell_table.clear();
    for (const auto& r : rows) {
      if (r.size() != 3)
        throw ConfigError("crystal.shell_table rows need (index, count, shift_GHz)");
      c.shell_table.push_back({static_cast<int>(r[0]), static_cast<int>(r[1]), r[2]});
    }
  }
  c.validate();
  return c;
}

const char* to_string(SatelliteClass c) {
  switch (c) {
    case SatelliteClass::main: return "main";
    case SatelliteClass::A: return "A";
    case SatelliteClass::B: return "B";
    case SatelliteClass::C: return "C";
    case SatelliteClass::D: return "D";
    case SatelliteClass::other: return "other";
  }
  return "?";
}

const char* to_string(SpinClass c) { return c == SpinClass::I ? "I" : "II"; }

SatelliteClass satellite_class_from_string(const std::string& s) {
  if (s == "main") return SatelliteClass::main;
  if (s == "A") return SatelliteClass::A;
  if (s == "B") return SatelliteClass::B;
  if (s == "C") return SatelliteClass::C;
  if (s == "D") return SatelliteClass::D;
  if (s == "other") return SatelliteClass::other;
  throw ConfigError("unknown satellite class: " + s);
}

namespace {

// Table rows map to satellite labels by position; anything past the fourth
// row has no single-letter label and falls into `other`.
SatelliteClass class_of_row(std::size_t row) {
  switch (row) {
    case 0: return SatelliteClass::A;
    case 1: return SatelliteClass::B;
    case 2: return SatelliteClass::C;
    case 3: return SatelliteClass::D;
    default: return SatelliteClass::other;
  }
}

}  // namespace

std::vector<int> sample_occupied_shells(const CrystalConfig& config, Rng& rng) {
  std::vector<int> occupied;
  for (std::size_t row = 0; row < config.shell_table.size(); ++row)
    for (int s = 0; s < config.shell_table[row].site_count; ++s)
      if (rng.bernoulli(config.europium_concentration))
        occupied.push_back(static_cast<int>(row));
  return occupied;
}

std::pair<double, SatelliteClass> codopant_shift(
    const std::vector<int>& occupied_shells, const CrystalConfig& config, Rng& rng) {
  double shift = 0;
  for (int row : occupied_shells) shift += config.shell_table[row].shift_ghz;

  SatelliteClass cls = SatelliteClass::main;
  if (occupied_shells.size() == 1)
    cls = class_of_row(static_cast<std::size_t>(occupied_shells[0]));
  else if (occupied_shells.size() >= 2)
    cls = SatelliteClass::other;

  const double cont_fwhm =
      config.lorentzian_per_concentration * config.europium_concentration +
      config.lorentzian_floor_ghz;
  if (cont_fwhm > 0) shift += (cont_fwhm / 2) * rng.cauchy();
  if (config.gaussian_fwhm > 0)
    shift += rng.normal(0.0, config.gaussian_fwhm / kGaussFwhmPerSigma);
  return {shift, cls};
}

namespace {

EmitterRecord sample_one(long id, const CrystalConfig& config,
                         const ModeRegion& region, Rng& rng) {
  EmitterRecord e;
  e.id = id;
  const auto occupied = sample_occupied_shells(config, rng);
  const auto [shift, cls] = codopant_shift(occupied, config, rng);
  e.frequency_offset_ghz = shift;
  e.satellite_class = cls;
  // uniform over the cylinder cross-section, so radius ~ R sqrt(u)
  e.radial_um = region.radius_um * std::sqrt(rng.uniform());
  e.axial_um = rng.uniform(region.axial_min_um, region.axial_max_um);
  e.sd_sigma_mhz = config.sd_sigma_min_mhz *
                   std::exp(rng.uniform() * std::log(config.sd_sigma_max_mhz /
                                                     config.sd_sigma_min_mhz));
  e.spin_class = rng.bernoulli(0.5) ? SpinClass::I : SpinClass::II;
  return e;
}

constexpr std::size_t kEnsembleChunk = 4096;

}  // namespace

std::vector<EmitterRecord> sample_ensemble(long n_emitters,
                                           const CrystalConfig& config,
                                           const ModeRegion& region, Rng& rng) {
  std::vector<EmitterRecord> out;
  out.reserve(static_cast<std::size_t>(std::max(n_emitters, 0L)));
  for (long i = 0; i < n_emitters; ++i)
    out.push_back(sample_one(i, config, region, rng));
  return out;
}

std::vector<EmitterRecord> sample_ensemble_parallel(long n_emitters,
                                                    const CrystalConfig& config,
                                                    const ModeRegion& region,
                                                    uint64_t seed, int workers) {
  if (n_emitters <= 0) return {};
  auto chunks = chunked_map<std::vector<EmitterRecord>>(
      static_cast<std::size_t>(n_emitters), kEnsembleChunk, workers,
      [&](std::size_t chunk, std::size_t first, std::size_t last) {
        Rng rng = Rng::substream(seed, 0x0c1, chunk);
        std::vector<EmitterRecord> part;
        part.reserve(last - first);
        for (std::size_t i = first; i < last; ++i)
          part.push_back(sample_one(static_cast<long>(i), config, region, rng));
        return part;
      });
  std::vector<EmitterRecord> out;
  out.reserve(static_cast<std::size_t>(n_emitters));
  for (auto& part : chunks)
    out.insert(out.end(), part.begin(), part.end());
  return out;
}

SparseHistogram spectrum_histogram(
    const std::vector<EmitterRecord>& emitters, double bin_width_ghz,
    const std::function<double(const EmitterRecord&)>& weight) {
  SparseHistogram hist(bin_width_ghz);
  for (const auto& e : emitters)
    hist.add(e.frequency_offset_ghz, weight ? weight(e) : 1.0);
  return hist;
}

}  // namespace remsim
