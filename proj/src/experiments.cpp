#include "remsim/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "remsim/cavity.hpp"
#include "remsim/crystal.hpp"
#include "remsim/csv.hpp"
#include "remsim/dephasing.hpp"
#include "remsim/detection.hpp"
#include "remsim/histogram.hpp"
#include "remsim/manifest.hpp"
#include "remsim/parallel.hpp"
#include "remsim/pulse.hpp"
#include "remsim/rng.hpp"
#include "remsim/spin.hpp"
#include "remsim/units.hpp"

namespace remsim {

namespace {

// Per-experiment seed tags keep "all" runs independent while everything
// stays derived from the one CLI seed.
enum SeedTag : uint64_t {
  kSeedSpectrum = 0x01,
  kSeedSatellite = 0x02,
  kSeedG2 = 0x03,
  kSeedSd = 0x04,
  kSeedLifetimes = 0x05,
  kSeedSpinSpectrum = 0x06,
  kSeedSplitting = 0x07,
  kSeedRabi = 0x08,
  kSeedHahn = 0x09,
  kSeedXy4 = 0x0a,
};

ModeRegion mode_region(const CavityGeometry& g) {
  ModeRegion region;
  region.radius_um = 2 * fundamental_waist_um(g);
  region.axial_min_um = 0;
  region.axial_max_um = g.membrane_thickness_um;
  return region;
}

double cavity_branching(double purcell_effective) {
  return purcell_effective / (1 + purcell_effective);
}

double capture_fraction(double purcell_effective, double bulk_lifetime_ms,
                        double window_us) {
  const double tau_us = ms_to_us(bulk_lifetime_ms) / (1 + purcell_effective);
  return 1 - std::exp(-window_us / tau_us);
}

// End-to-end per-pulse click probability of one emitter: excitation, emission
// into the cavity channel, arrival inside the gate, detection chain.
// cavity_weight is the Lorentzian line filter at the emitter's detuning; it
// scales the Purcell enhancement itself, so both branching and capture react.
double click_probability(double purcell, double cavity_weight, double p_excite,
                         const CavityGeometry& g, const DetectorConfig& det,
                         double window_us) {
  const double pe = purcell * cavity_weight;
  return p_excite * cavity_branching(pe) *
         capture_fraction(pe, g.bulk_lifetime_ms, window_us) *
         g.outcoupling_efficiency * det.efficiency * det.path_efficiency;
}

double dark_probability(const DetectorConfig& det, double window_us) {
  return det.dark_rate_hz * window_us * 1e-6;
}

// Gaussian with unit peak, used for probe kernels and hole shapes.
double peak_gaussian(double x, double center, double fwhm) {
  const double d = (x - center) / fwhm;
  return std::exp(-4 * std::log(2.0) * d * d);
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  const long n = std::lround((hi - lo) / step);
  grid.reserve(n + 1);
  for (long i = 0; i <= n; ++i) grid.push_back(lo + i * step);
  return grid;
}

void note_fit(ExperimentOutcome& out, const std::string& name, FitResult fit) {
  out.all_converged = out.all_converged && fit.converged;
  out.fits.emplace(name, std::move(fit));
}

// --------------------------------------------------------------------------
// inhomogeneous line scan

struct SpectrumSettings {
  long n_emitters = 1000000;
  double scan_half_span_ghz = 2.2;
  double step_mhz = 25;
  long repetitions = 200;
  double sweep_span_mhz = 100;
  double rap_rabi_peak_mhz = 2.8;
  double rap_duration_us = 4.0;
  double fit_half_range_ghz = 0.8;

  static SpectrumSettings read(const Config& cfg, bool paper_scale) {
    SpectrumSettings s;
    s.n_emitters = cfg.integer("spectrum", "n_emitters", s.n_emitters);
    s.scan_half_span_ghz =
        cfg.num("spectrum", "scan_half_span_ghz", s.scan_half_span_ghz);
    s.step_mhz = cfg.num("spectrum", "step_mhz", s.step_mhz);
    s.repetitions = cfg.integer("spectrum", "repetitions", s.repetitions);
    s.sweep_span_mhz = cfg.num("spectrum", "sweep_span_mhz", s.sweep_span_mhz);
    s.rap_rabi_peak_mhz = cfg.num("spectrum", "rap_rabi_peak_mhz", s.rap_rabi_peak_mhz);
    s.rap_duration_us = cfg.num("spectrum", "rap_duration_us", s.rap_duration_us);
    s.fit_half_range_ghz =
        cfg.num("spectrum", "fit_half_range_ghz", s.fit_half_range_ghz);
    if (paper_scale) s.repetitions *= 4;  // 800 sweeps in the campaign
    return s;
  }
};

// Numerical Lorentzian x Gaussian convolution, kept free of the closed-form
// profile code so --oracle exercises an independent route.
double voigt_by_quadrature(double x, double lorentz_fwhm, double gauss_fwhm) {
  const double sigma = gauss_fwhm / kGaussFwhmPerSigma;
  const double half = lorentz_fwhm / 2;
  const double span = 8 * sigma;
  const int n = 4000;  // Simpson panels over +-8 sigma
  const double h = 2 * span / n;
  double sum = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = -span + i * h;
    const double gauss = std::exp(-t * t / (2 * sigma * sigma)) /
                         (sigma * std::sqrt(2 * kPi));
    const double d = x - t;
    const double lorentz = (half / kPi) / (d * d + half * half);
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    sum += w * gauss * lorentz;
  }
  return sum * h / 3;
}

ExperimentOutcome spectrum_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "spectrum";
  const auto settings = SpectrumSettings::read(cfg, opt.paper_scale);
  const auto crystal = CrystalConfig::from_config(cfg);
  const auto cavity = CavityGeometry::from_config(cfg);
  const auto detector = DetectorConfig::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedSpectrum);

  PulseSpec sweep;
  sweep.shape = PulseShape::square_chirp;
  sweep.duration_us = settings.rap_duration_us;
  sweep.sweep_span_mhz = settings.sweep_span_mhz;
  sweep.chirp_rate_mhz_per_us = settings.sweep_span_mhz / settings.rap_duration_us;
  sweep.rabi_peak_mhz = settings.rap_rabi_peak_mhz;
  sweep.validate();
  // adiabatic transfer is flat across the swept band; evaluate mid-band
  const double p_excite =
      rap_excitation_probability(sweep, settings.sweep_span_mhz / 2);

  auto emitters = sample_ensemble_parallel(settings.n_emitters, crystal,
                                           mode_region(cavity), seed, opt.workers);
  purcell_census(emitters, cavity, cavity.bulk_lifetime_ms, 35, opt.workers);

  const double window_us = detector.gate_window_us;
  auto click_at = [&](const EmitterRecord& e, double detuning_mhz) {
    return click_probability(e.purcell, cavity_line_filter(detuning_mhz, cavity),
                             p_excite, cavity, detector, window_us);
  };

  // display normalization: counts per average resonant single emitter
  double mean_resonant_click = 0;
  for (const auto& e : emitters) mean_resonant_click += click_at(e, 0);
  mean_resonant_click /= std::max<std::size_t>(1, emitters.size());
  const double norm = settings.repetitions * std::max(mean_resonant_click, 1e-300);

  // frequency-ordered view for the per-step band lookup
  std::vector<std::size_t> order(emitters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return emitters[a].frequency_offset_ghz < emitters[b].frequency_offset_ghz;
  });
  std::vector<double> sorted_freq(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    sorted_freq[i] = emitters[order[i]].frequency_offset_ghz;

  const auto grid = linear_grid(-settings.scan_half_span_ghz,
                                settings.scan_half_span_ghz,
                                mhz_to_ghz(settings.step_mhz));
  const double half_band_ghz = mhz_to_ghz(settings.sweep_span_mhz / 2);
  const double dark_mean = settings.repetitions * dark_probability(detector, window_us);

  const std::size_t n_class = 6;
  std::vector<double> fit_x, fit_y;
  std::filesystem::create_directories(opt.out_dir);
  CsvWriter csv(opt.out_dir + "/spectrum.csv",
                {"nu_ghz", "counts", "normalized", "expected_normalized", "main",
                 "sat_a", "sat_b", "sat_c", "sat_d", "other"});
  out.outputs.push_back("spectrum.csv");

  for (std::size_t step = 0; step < grid.size(); ++step) {
    const double nu = grid[step];
    const auto lo = std::lower_bound(sorted_freq.begin(), sorted_freq.end(),
                                     nu - half_band_ghz);
    const auto hi = std::upper_bound(sorted_freq.begin(), sorted_freq.end(),
                                     nu + half_band_ghz);
    double mu = 0;
    std::vector<double> mu_class(n_class, 0.0);
    for (auto it = lo; it != hi; ++it) {
      const auto& e = emitters[order[it - sorted_freq.begin()]];
      const double c = settings.repetitions *
                       click_at(e, ghz_to_mhz(e.frequency_offset_ghz - nu));
      mu += c;
      mu_class[static_cast<std::size_t>(e.satellite_class)] += c;
    }
    Rng rng = Rng::substream(seed, 0x57e9, step);
    const double counts = static_cast<double>(rng.poisson(mu + dark_mean));
    csv.row({nu, counts, counts / norm, (mu + dark_mean) / norm,
             mu_class[0] / norm, mu_class[1] / norm, mu_class[2] / norm,
             mu_class[3] / norm, mu_class[4] / norm, mu_class[5] / norm});
    if (std::abs(nu) <= settings.fit_half_range_ghz) {
      fit_x.push_back(nu);
      fit_y.push_back(counts);
    }
  }

  const double fit_total = std::accumulate(fit_y.begin(), fit_y.end(), 0.0);
  if (fit_total > 50) {
    FitResult voigt = fit_voigt(fit_x, fit_y);
    out.metrics["lorentzian_fwhm_ghz"] = std::abs(voigt.param("lorentzian_fwhm"));
    out.metrics["gaussian_fwhm_ghz"] = std::abs(voigt.param("gaussian_fwhm"));
    out.metrics["line_center_ghz"] = voigt.param("center");
    note_fit(out, "voigt_profile", std::move(voigt));
  } else {
    out.notes["voigt_profile"] = "too few counts in the fit range, fit skipped";
  }

  // satellite visibility relative to the main line, from class counts; every
  // class shares the same line shape, so count ratio equals amplitude ratio
  std::array<long, 6> class_counts{};
  for (const auto& e : emitters)
    ++class_counts[static_cast<std::size_t>(e.satellite_class)];
  const double eu = crystal.europium_concentration;
  const char* names[] = {"a", "b", "c", "d"};
  double z_max = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& row = crystal.shell_table[k];
    const long n_sat = class_counts[k + 1];
    const long n_main = class_counts[0];
    const double ratio = static_cast<double>(n_sat) / std::max<long>(1, n_main);
    const double expected = row.site_count * eu / (1 - eu);
    const double sigma = std::sqrt(std::max<long>(1, n_sat)) /
                         std::max<long>(1, n_main);
    const double z = (ratio - expected) / sigma;
    out.metrics[std::string("satellite_ratio_") + names[k]] = ratio;
    out.metrics[std::string("satellite_ratio_expected_") + names[k]] = expected;
    out.metrics[std::string("satellite_ratio_z_") + names[k]] = z;
    z_max = std::max(z_max, std::abs(z));
  }
  out.metrics["satellite_ratio_z_max"] = z_max;

  const double peak_normalized =
      *std::max_element(fit_y.begin(), fit_y.end()) / norm;
  const double floor_normalized = std::max(dark_mean, 1.0) / norm;
  out.metrics["dynamic_range_decades"] =
      std::log10(peak_normalized / floor_normalized);
  out.metrics["excitation_probability"] = p_excite;

  if (opt.with_oracle) {
    // sampled main-class frequency law against direct numerical convolution
    const double gamma = crystal.lorentzian_per_concentration * eu +
                         crystal.lorentzian_floor_ghz;
    auto hist = spectrum_histogram(emitters, 0.05, [](const EmitterRecord& e) {
      return e.satellite_class == SatelliteClass::main ? 1.0 : 0.0;
    });
    double max_rel = 0;
    const double n_main = static_cast<double>(class_counts[0]);
    for (const auto& [center, weight] : hist.items()) {
      if (std::abs(center) > 0.5) continue;
      const double expected =
          n_main * 0.05 * voigt_by_quadrature(center, gamma, crystal.gaussian_fwhm);
      if (expected < 1000) continue;
      max_rel = std::max(max_rel, std::abs(weight - expected) / expected);
    }
    out.metrics["oracle_line_max_rel_dev"] = max_rel;
  }
  return out;
}

// --------------------------------------------------------------------------
// satellite occupancy scaling

ExperimentOutcome satellite_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "satellite-scan";
  const auto crystal = CrystalConfig::from_config(cfg);
  const long n_draws = cfg.integer("satellite_scan", "n_draws", 10000000);
  const uint64_t seed = mix_seed(opt.seed, kSeedSatellite);

  constexpr std::size_t kChunk = 65536;
  using Counts = std::array<long, 6>;
  auto parts = chunked_map<Counts>(
      static_cast<std::size_t>(n_draws), kChunk, opt.workers,
      [&](std::size_t chunk, std::size_t first, std::size_t last) {
        Rng rng = Rng::substream(seed, 0xa77, chunk);
        Counts c{};
        for (std::size_t i = first; i < last; ++i) {
          const auto occupied = sample_occupied_shells(crystal, rng);
          SatelliteClass cls = SatelliteClass::main;
          if (occupied.size() == 1) {
            const int row = occupied[0];
            cls = static_cast<SatelliteClass>(row + 1);
          } else if (occupied.size() >= 2) {
            cls = SatelliteClass::other;
          }
          ++c[static_cast<std::size_t>(cls)];
        }
        return c;
      });
  Counts counts{};
  for (const auto& p : parts)
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];

  int total_sites = 0;
  for (const auto& row : crystal.shell_table) total_sites += row.site_count;
  const double eu = crystal.europium_concentration;

  std::filesystem::create_directories(opt.out_dir);
  CsvWriter csv(opt.out_dir + "/satellite_counts.csv",
                {"class_index", "site_count", "count", "fraction",
                 "expected_fraction", "z_binomial"});
  out.outputs.push_back("satellite_counts.csv");

  auto single_class_prob = [&](int site_count) {
    return site_count * eu * std::pow(1 - eu, total_sites - 1);
  };
  const double p_main = std::pow(1 - eu, total_sites);

  const char* names[] = {"a", "b", "c", "d"};
  for (std::size_t cls = 0; cls < 6; ++cls) {
    double expected_p = 0;
    int site_count = 0;
    if (cls == 0) {
      expected_p = p_main;
    } else if (cls <= 4) {
      site_count = crystal.shell_table[cls - 1].site_count;
      expected_p = single_class_prob(site_count);
    } else {
      expected_p = 1 - p_main;
      for (const auto& row : crystal.shell_table)
        expected_p -= single_class_prob(row.site_count);
    }
    const double fraction = static_cast<double>(counts[cls]) / n_draws;
    const double sigma =
        std::sqrt(expected_p * (1 - expected_p) / n_draws);
    const double z = (fraction - expected_p) / std::max(sigma, 1e-300);
    csv.row({static_cast<double>(cls), static_cast<double>(site_count),
             static_cast<double>(counts[cls]), fraction, expected_p, z});
    if (cls >= 1 && cls <= 4) {
      out.metrics[std::string("satellite_z_") + names[cls - 1]] = z;
    }
  }

  // headline check: satellite-D to main amplitude ratio vs the binomial law
  const double ratio_d = static_cast<double>(counts[4]) / counts[0];
  const double expected_ratio = crystal.shell_table[3].site_count * eu / (1 - eu);
  const double ratio_sigma = std::sqrt(static_cast<double>(counts[4])) / counts[0];
  out.metrics["satellite_d_ratio"] = ratio_d;
  out.metrics["satellite_d_expected"] = expected_ratio;
  out.metrics["satellite_d_z"] = (ratio_d - expected_ratio) / ratio_sigma;
  out.metrics["n_draws"] = static_cast<double>(n_draws);
  return out;
}

// --------------------------------------------------------------------------
// single-emitter photon statistics

struct G2Settings {
  long n_pulses = 2400000;
  double period_us = 250;
  long max_lag = 800;
  double b_field_mt = 2.5;
  double spin_t1_s = 10;
  double rap_rabi_peak_mhz = 0.5;
  double rap_chirp_mhz_per_us = 0.6;
  double rap_sweep_span_mhz = 2.5;
  double cyclicity_attempts = 205;
  long dark_calibration_pulses = 600000;
  double purcell_select_threshold = 100;
  long pool_emitters = 200000;

  static G2Settings read(const Config& cfg, bool paper_scale) {
    G2Settings s;
    s.n_pulses = cfg.integer("g2", "n_pulses", s.n_pulses);
    s.period_us = cfg.num("g2", "period_us", s.period_us);
    s.max_lag = cfg.integer("g2", "max_lag", s.max_lag);
    s.b_field_mt = cfg.num("g2", "b_field_mt", s.b_field_mt);
    s.spin_t1_s = cfg.num("g2", "spin_t1_s", s.spin_t1_s);
    s.rap_rabi_peak_mhz = cfg.num("g2", "rap_rabi_peak_mhz", s.rap_rabi_peak_mhz);
    s.rap_chirp_mhz_per_us =
        cfg.num("g2", "rap_chirp_mhz_per_us", s.rap_chirp_mhz_per_us);
    s.rap_sweep_span_mhz =
        cfg.num("g2", "rap_sweep_span_mhz", s.rap_sweep_span_mhz);
    s.cyclicity_attempts = cfg.num("g2", "cyclicity_attempts", s.cyclicity_attempts);
    s.dark_calibration_pulses =
        cfg.integer("g2", "dark_calibration_pulses", s.dark_calibration_pulses);
    s.purcell_select_threshold =
        cfg.num("g2", "purcell_select_threshold", s.purcell_select_threshold);
    s.pool_emitters = cfg.integer("g2", "pool_emitters", s.pool_emitters);
    if (paper_scale) s.n_pulses *= 4;
    return s;
  }
};

struct DriveResult {
  std::vector<Emission> emissions;
  long excitations = 0;
};

// Sequential pulsed drive of one emitter. With spin_selective the drive
// frequency alternates with pulse parity and only the matching spin state is
// excited; each radiative decay flips the spin with probability q_flip.
// Emissions are cavity-channel photons that reach the outcoupler, so the
// 1/(1+P) free-space fraction is thinned away here.
DriveResult simulate_drive(const PulseSchedule& schedule, double purcell,
                           double bulk_lifetime_ms, double p_excite, double q_flip,
                           double spin_relax_per_period, bool spin_selective,
                           uint64_t seed) {
  Rng rng(seed);
  DriveResult result;
  result.emissions.reserve(
      static_cast<std::size_t>(schedule.n_pulses * p_excite * 0.55));
  EmitterDynamicState state;
  SpinBranching branching{q_flip};
  const double branch_keep = cavity_branching(purcell);
  for (long pulse = 0; pulse < schedule.n_pulses; ++pulse) {
    if (spin_relax_per_period > 0 && rng.bernoulli(spin_relax_per_period))
      state.spin = rng.bernoulli(0.5) ? EmitterDynamicState::Spin::high
                                      : EmitterDynamicState::Spin::low;
    const bool drives_low = !schedule.alternating || (pulse % 2 == 0);
    const bool addressed =
        !spin_selective ||
        (drives_low == (state.spin == EmitterDynamicState::Spin::low));
    if (!addressed || !rng.bernoulli(p_excite)) continue;
    ++result.excitations;
    state.electronic = EmitterDynamicState::Electronic::excited;
    state.w = 1;
    const DecayEvent decay =
        sample_decay(state, purcell, bulk_lifetime_ms, branching, rng);
    state.spin = decay.new_spin;
    state.electronic = EmitterDynamicState::Electronic::ground;
    state.w = -1;
    if (decay.channel != DecayChannel::sp_cavity) continue;
    if (!rng.bernoulli(branch_keep)) continue;
    result.emissions.push_back(
        {pulse * schedule.period_us + decay.emission_time_us, pulse});
  }
  return result;
}

ExperimentOutcome g2_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "g2";
  const auto settings = G2Settings::read(cfg, opt.paper_scale);
  const auto crystal = CrystalConfig::from_config(cfg);
  const auto cavity = CavityGeometry::from_config(cfg);
  const auto detector = DetectorConfig::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedG2);

  PulseSpec rap;
  rap.shape = PulseShape::square_chirp;
  rap.rabi_peak_mhz = settings.rap_rabi_peak_mhz;
  rap.chirp_rate_mhz_per_us = settings.rap_chirp_mhz_per_us;
  rap.sweep_span_mhz = settings.rap_sweep_span_mhz;
  rap.duration_us = settings.rap_sweep_span_mhz / settings.rap_chirp_mhz_per_us;
  rap.validate();
  const double p_excite =
      rap_excitation_probability(rap, settings.rap_sweep_span_mhz / 2);
  const double q_flip = 1.0 / (settings.cyclicity_attempts * p_excite);

  // seeded pick of a strongly enhanced emitter from a fresh ensemble
  auto pool = sample_ensemble_parallel(settings.pool_emitters, crystal,
                                       mode_region(cavity), mix_seed(seed, 0x9001),
                                       opt.workers);
  purcell_census(pool, cavity, cavity.bulk_lifetime_ms,
                 settings.purcell_select_threshold, opt.workers);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool[i].purcell > settings.purcell_select_threshold) candidates.push_back(i);
  if (candidates.empty())
    throw std::runtime_error(
        "g2: no emitter above purcell_select_threshold in the sampled pool");
  Rng pick = Rng::substream(seed, 0x5e1, 0);
  const auto& emitter =
      pool[candidates[static_cast<std::size_t>(pick.uniform() * candidates.size())]];
  out.notes["selected_emitter"] = std::to_string(emitter.id);
  out.metrics["selected_purcell"] = emitter.purcell;

  std::filesystem::create_directories(opt.out_dir);

  // dark-only calibration run: laser off, same gating
  PulseSchedule dark_schedule{settings.period_us, settings.dark_calibration_pulses,
                              detector.gate_window_us, false};
  const auto dark_series = detect_stream({}, detector, dark_schedule,
                                         cavity.outcoupling_efficiency,
                                         mix_seed(seed, 0xdc), opt.workers);
  const double p_dark_hat =
      static_cast<double>(dark_series.tags.size()) / settings.dark_calibration_pulses;
  out.metrics["dark_click_probability"] = p_dark_hat;

  // phase 1: field off, both doublets degenerate, emitter always addressed;
  // clean antibunching plus the dark-count floor
  {
    PulseSchedule schedule{settings.period_us, settings.n_pulses,
                           detector.gate_window_us, false};
    const auto drive =
        simulate_drive(schedule, emitter.purcell, cavity.bulk_lifetime_ms,
                       p_excite, 0.0, 0.0, false, mix_seed(seed, 0xd21e));
    const auto series = detect_stream(drive.emissions, detector, schedule,
                                      cavity.outcoupling_efficiency,
                                      mix_seed(seed, 0xde70), opt.workers);
    const auto est = pulsed_g2(series, 40, true);
    const double rate = est.mean_tags_per_pulse;
    const double rho = std::clamp((rate - p_dark_hat) / rate, 1e-9, 1.0);
    out.metrics["raw_g2_zero"] = est.g2_zero;
    out.metrics["raw_g2_zero_stderr"] = est.g2_zero_stderr;
    out.metrics["signal_fraction"] = rho;
    out.metrics["corrected_g2_zero"] = background_correct(est.g2_zero, rho);
    out.metrics["click_probability"] = rate - p_dark_hat;

    CsvWriter csv(opt.out_dir + "/g2_antibunching.csv", {"lag", "g2", "stderr"});
    csv.row({0.0, est.g2_zero, est.g2_zero_stderr});
    for (std::size_t i = 0; i < est.lags.size(); ++i)
      csv.row({static_cast<double>(est.lags[i]), est.g2[i], est.stderr_[i]});
    out.outputs.push_back("g2_antibunching.csv");
  }

  // phase 2: field on, alternating two-frequency drive; spin memory shows as
  // same-frequency bunching and cross-frequency antibunching
  {
    PulseSchedule schedule{settings.period_us, settings.n_pulses,
                           detector.gate_window_us, true};
    const double relax =
        1 - std::exp(-(settings.period_us * 1e-6) / settings.spin_t1_s);
    const auto drive =
        simulate_drive(schedule, emitter.purcell, cavity.bulk_lifetime_ms,
                       p_excite, q_flip, relax, true, mix_seed(seed, 0xd22e));
    const auto series = detect_stream(drive.emissions, detector, schedule,
                                      cavity.outcoupling_efficiency,
                                      mix_seed(seed, 0xde71), opt.workers);
    const auto same = pulsed_g2(series, settings.max_lag, true);
    const auto cross = pulsed_g2(series, settings.max_lag, false);
    const auto same_fit = bunching_fit(same);
    const auto cross_fit = bunching_fit(cross);

    out.metrics["bunching_attempts"] = same_fit.decay_attempts;
    out.metrics["bunching_attempts_stderr"] = same_fit.decay_attempts_stderr;
    out.metrics["bunching_amplitude"] = same_fit.amplitude;
    out.metrics["cross_attempts"] = cross_fit.decay_attempts;
    out.metrics["cross_attempts_stderr"] = cross_fit.decay_attempts_stderr;
    out.metrics["cross_amplitude"] = cross_fit.amplitude;
    const double joint = std::hypot(same_fit.decay_attempts_stderr,
                                    cross_fit.decay_attempts_stderr);
    out.metrics["bunching_cross_z"] =
        (same_fit.decay_attempts - cross_fit.decay_attempts) / std::max(joint, 1e-12);
    out.metrics["q_flip"] = q_flip;
    out.metrics["excitation_probability"] = p_excite;

    CsvWriter same_csv(opt.out_dir + "/g2_same.csv", {"lag", "g2", "stderr"});
    for (std::size_t i = 0; i < same.lags.size(); ++i)
      same_csv.row({static_cast<double>(same.lags[i]), same.g2[i], same.stderr_[i]});
    CsvWriter cross_csv(opt.out_dir + "/g2_cross.csv", {"lag", "g2", "stderr"});
    for (std::size_t i = 0; i < cross.lags.size(); ++i)
      cross_csv.row(
          {static_cast<double>(cross.lags[i]), cross.g2[i], cross.stderr_[i]});
    out.outputs.push_back("g2_same.csv");
    out.outputs.push_back("g2_cross.csv");

    note_fit(out, "bunching_same", same_fit.fit);
    note_fit(out, "bunching_cross", cross_fit.fit);
  }

  if (opt.with_oracle) {
    // two equal independent emitters, no darks: g2(0) must land on the
    // enumerated value 2 q^2 / (2 q)^2 = 1/2 regardless of q
    DetectorConfig ideal = detector;
    ideal.dark_rate_hz = 0;
    PulseSchedule schedule{settings.period_us, 400000, detector.gate_window_us,
                           false};
    std::vector<Emission> merged;
    for (int which = 0; which < 2; ++which) {
      const auto drive =
          simulate_drive(schedule, emitter.purcell, cavity.bulk_lifetime_ms,
                         p_excite, 0.0, 0.0, false, mix_seed(seed, 0xe1 + which));
      merged.insert(merged.end(), drive.emissions.begin(), drive.emissions.end());
    }
    std::sort(merged.begin(), merged.end(), [](const Emission& a, const Emission& b) {
      return a.pulse_index != b.pulse_index ? a.pulse_index < b.pulse_index
                                            : a.time_us < b.time_us;
    });
    const auto series = detect_stream(merged, ideal, schedule,
                                      cavity.outcoupling_efficiency,
                                      mix_seed(seed, 0xe9), opt.workers);
    const auto est = pulsed_g2(series, 4, true);
    out.metrics["oracle_two_emitter_g2"] = est.g2_zero;
    out.metrics["oracle_two_emitter_expected"] = 0.5;
  }
  return out;
}

// --------------------------------------------------------------------------
// spectral diffusion census

struct SdSettings {
  long n_emitters = 300;
  double minutes = 30;
  long n_frames = 720;
  double scan_half_span_mhz = 2.0;
  double step_mhz = 0.04;
  double probe_fwhm_mhz = 0.12;
  double rep_period_us = 250;
  double peak_click_probability = 0.0315;
  double wander_tau_s = 0.01;
  long drift_emitters = 12;
  long drift_frames = 9;
  double drift_frame_minutes = 20;
  double drift_pass_s = 2.0;

  static SdSettings read(const Config& cfg, bool paper_scale) {
    SdSettings s;
    s.n_emitters = cfg.integer("sd", "n_emitters", s.n_emitters);
    s.minutes = cfg.num("sd", "minutes", s.minutes);
    s.n_frames = cfg.integer("sd", "n_frames", s.n_frames);
    s.scan_half_span_mhz = cfg.num("sd", "scan_half_span_mhz", s.scan_half_span_mhz);
    s.step_mhz = cfg.num("sd", "step_mhz", s.step_mhz);
    s.probe_fwhm_mhz = cfg.num("sd", "probe_fwhm_mhz", s.probe_fwhm_mhz);
    s.rep_period_us = cfg.num("sd", "rep_period_us", s.rep_period_us);
    s.peak_click_probability =
        cfg.num("sd", "peak_click_probability", s.peak_click_probability);
    s.wander_tau_s = cfg.num("sd", "wander_tau_s", s.wander_tau_s);
    s.drift_emitters = cfg.integer("sd", "drift_emitters", s.drift_emitters);
    s.drift_frames = cfg.integer("sd", "drift_frames", s.drift_frames);
    s.drift_frame_minutes =
        cfg.num("sd", "drift_frame_minutes", s.drift_frame_minutes);
    s.drift_pass_s = cfg.num("sd", "drift_pass_s", s.drift_pass_s);
    if (paper_scale) s.minutes *= 2;
    return s;
  }
};

// One emitter's averaged scan: the probe steps across the line while the
// line's center follows its own OU trajectory; counts per dwell are Poisson.
std::vector<double> accumulate_sd_scan(const std::vector<double>& grid_mhz,
                                       double sigma_mhz, double tau_ms,
                                       double probe_fwhm_mhz, long n_frames,
                                       double dwell_s, double resonant_rate_hz,
                                       double dark_rate_hz, Rng& rng) {
  std::vector<double> counts(grid_mhz.size(), 0.0);
  double x = sigma_mhz * rng.normal();  // stationary start
  const double dwell_us = dwell_s * 1e6;
  for (long frame = 0; frame < n_frames; ++frame) {
    for (std::size_t i = 0; i < grid_mhz.size(); ++i) {
      x = ou_evolve(x, dwell_us, sigma_mhz, tau_ms, rng);
      const double lambda =
          dwell_s * (resonant_rate_hz * peak_gaussian(grid_mhz[i], x, probe_fwhm_mhz) +
                     dark_rate_hz);
      counts[i] += static_cast<double>(rng.poisson(lambda));
    }
  }
  return counts;
}

ExperimentOutcome sd_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "sd";
  const auto settings = SdSettings::read(cfg, opt.paper_scale);
  const auto crystal = CrystalConfig::from_config(cfg);
  const auto detector = DetectorConfig::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedSd);

  const auto grid = linear_grid(-settings.scan_half_span_mhz,
                                settings.scan_half_span_mhz, settings.step_mhz);
  const double total_s = settings.minutes * 60;
  const double dwell_s = total_s / (settings.n_frames * grid.size());
  const double resonant_rate_hz =
      settings.peak_click_probability / (settings.rep_period_us * 1e-6);
  const double tau_ms = settings.wander_tau_s * 1e3;

  struct PerEmitter {
    double sigma_true = 0;
    FitResult fit;
  };
  auto results = chunked_map<std::vector<PerEmitter>>(
      static_cast<std::size_t>(settings.n_emitters), 4, opt.workers,
      [&](std::size_t chunk, std::size_t first, std::size_t last) {
        Rng rng = Rng::substream(seed, 0x5d, chunk);
        std::vector<PerEmitter> block;
        for (std::size_t i = first; i < last; ++i) {
          PerEmitter r;
          const double log_lo = std::log(crystal.sd_sigma_min_mhz);
          const double log_hi = std::log(crystal.sd_sigma_max_mhz);
          r.sigma_true = std::exp(rng.uniform(log_lo, log_hi));
          const auto counts = accumulate_sd_scan(
              grid, r.sigma_true, tau_ms, settings.probe_fwhm_mhz,
              settings.n_frames, dwell_s, resonant_rate_hz, detector.dark_rate_hz,
              rng);
          std::vector<double> weights(counts.size());
          for (std::size_t j = 0; j < counts.size(); ++j)
            weights[j] = 1.0 / std::max(counts[j], 1.0);
          r.fit = fit_gaussian_peak(grid, counts, weights);
          block.push_back(std::move(r));
        }
        return block;
      });

  std::filesystem::create_directories(opt.out_dir);
  CsvWriter per_emitter(opt.out_dir + "/sd_linewidths.csv",
                        {"emitter", "sd_sigma_true_mhz", "fitted_fwhm_mhz",
                         "fwhm_stderr_mhz", "converged"});
  out.outputs.push_back("sd_linewidths.csv");

  // bins of 0.05 MHz centered on 0.2 .. 1.0; histogram support doubles as the
  // outlier definition
  Histogram1D hist(0.175, 1.025, 17);
  long id = 0, outliers = 0, total = 0;
  for (const auto& block : results) {
    for (const auto& r : block) {
      // the scan records the line convolved with the probe; quadrature
      // deconvolution recovers the intrinsic width
      const double raw = std::abs(r.fit.param("fwhm"));
      const double fwhm = std::sqrt(std::max(
          raw * raw - settings.probe_fwhm_mhz * settings.probe_fwhm_mhz, 1e-12));
      const double se = r.fit.stderr_of("fwhm") * raw / std::max(fwhm, 1e-6);
      per_emitter.row({static_cast<double>(id++), r.sigma_true, fwhm, se,
                       r.fit.converged ? 1.0 : 0.0});
      out.all_converged = out.all_converged && r.fit.converged;
      hist.add(fwhm);
      ++total;
      if (fwhm < 0.175 || fwhm > 1.025) ++outliers;
    }
  }
  CsvWriter hist_csv(opt.out_dir + "/sd_histogram.csv", {"fwhm_mhz", "count"});
  for (std::size_t b = 0; b < hist.counts().size(); ++b)
    hist_csv.row({hist.center(b), hist.counts()[b]});
  out.outputs.push_back("sd_histogram.csv");

  out.metrics["sd_outlier_fraction"] = static_cast<double>(outliers) / total;
  out.metrics["sd_emitters"] = static_cast<double>(total);

  // Long-run stability: repeated long frames on a few emitters.  Each frame
  // accumulates many fast passes and its fitted center estimates the
  // frame-averaged line position.  The wander is only observed while the probe
  // sits inside the line, so the center averages the process over an effective
  // time of frame_length * on-line duty; its variance is the averaged-OU value
  // 2 sigma^2 tau / T_on plus the fit's own statistical floor.  Frames last
  // far longer than the correlation time and carry independent trajectories.
  {
    const double frame_s = settings.drift_frame_minutes * 60;
    const long n_passes =
        std::max<long>(1, std::lround(frame_s / settings.drift_pass_s));
    const double pass_dwell_s = frame_s / (n_passes * grid.size());
    const double gauss_area = std::sqrt(M_PI / (4 * std::log(2.0)));
    double ratio_sum = 0;
    long emitters_used = 0;
    double min_frame_counts = 1e300;
    Rng rng = Rng::substream(seed, 0xd41f, 0);
    for (long e = 0; e < settings.drift_emitters; ++e) {
      const double sigma = std::exp(rng.uniform(std::log(crystal.sd_sigma_min_mhz),
                                                std::log(crystal.sd_sigma_max_mhz)));
      std::vector<double> centers;
      double stderr_sq = 0;
      for (long f = 0; f < settings.drift_frames; ++f) {
        const auto counts = accumulate_sd_scan(
            grid, sigma, tau_ms, settings.probe_fwhm_mhz, n_passes, pass_dwell_s,
            resonant_rate_hz, detector.dark_rate_hz, rng);
        min_frame_counts = std::min(
            min_frame_counts, std::accumulate(counts.begin(), counts.end(), 0.0));
        std::vector<double> weights(counts.size());
        for (std::size_t j = 0; j < counts.size(); ++j)
          weights[j] = 1.0 / std::max(counts[j], 1.0);
        auto fit = fit_gaussian_peak(grid, counts, weights);
        if (!fit.converged) continue;
        centers.push_back(fit.param("center"));
        const double se = fit.stderr_of("center");
        stderr_sq += se * se;
      }
      if (centers.size() < 2) continue;
      double mean = 0;
      for (double c : centers) mean += c;
      mean /= centers.size();
      double var = 0;
      for (double c : centers) var += (c - mean) * (c - mean);
      var /= (centers.size() - 1);
      const double line_fwhm =
          std::hypot(2.3548200450309493 * sigma, settings.probe_fwhm_mhz);
      const double duty =
          gauss_area * line_fwhm / (2 * settings.scan_half_span_mhz);
      const double t_on_s = frame_s * duty;
      const double predicted = 2 * sigma * sigma * settings.wander_tau_s / t_on_s +
                               stderr_sq / centers.size();
      ratio_sum += var / predicted;
      ++emitters_used;
    }
    out.metrics["drift_scatter_ratio"] = ratio_sum / std::max<long>(1, emitters_used);
    out.metrics["drift_min_frame_counts"] = min_frame_counts;
  }
  return out;
}

// --------------------------------------------------------------------------
// Purcell census and lifetimes

struct LifetimeSettings {
  double y_site_density_per_um3 = 9.35e9;
  double purcell_threshold = 35;
  long photons_per_emitter = 10000;
  long photons_reference = 20000;
  double reference_lifetime_us = 131;
  double fit_window_us = 600;
  double fit_bin_us = 10;

  static LifetimeSettings read(const Config& cfg) {
    LifetimeSettings s;
    s.y_site_density_per_um3 =
        cfg.num("lifetimes", "y_site_density_per_um3", s.y_site_density_per_um3);
    s.purcell_threshold = cfg.num("lifetimes", "purcell_threshold", s.purcell_threshold);
    s.photons_per_emitter =
        cfg.integer("lifetimes", "photons_per_emitter", s.photons_per_emitter);
    s.photons_reference =
        cfg.integer("lifetimes", "photons_reference", s.photons_reference);
    s.reference_lifetime_us =
        cfg.num("lifetimes", "reference_lifetime_us", s.reference_lifetime_us);
    s.fit_window_us = cfg.num("lifetimes", "fit_window_us", s.fit_window_us);
    s.fit_bin_us = cfg.num("lifetimes", "fit_bin_us", s.fit_bin_us);
    return s;
  }
};

// Exact per-bin occupation probabilities of the standing-wave Purcell factor
// over the mode region: the radial direction integrates in closed form over
// uniform-in-area radii, the axial direction measures cos^2 level sets with
// arccos on each half-period, including the partial ones at the membrane
// faces. Used by --oracle as an independent check on the sampled census.
std::vector<double> census_bin_probabilities(const CavityGeometry& g,
                                             double region_radius_um,
                                             std::size_t n_bins) {
  const double w0 = fundamental_waist_um(g);
  const double peak = g.peak_purcell;
  const double s_max = 2 * region_radius_um * region_radius_um / (w0 * w0);
  const double k_med = 2 * kPi * g.membrane_index / (g.wavelength_nm * 1e-3);
  const double z_lo = 0, z_hi = g.membrane_thickness_um;
  const double total_z = z_hi - z_lo;

  // fraction of z in [z_lo, z_hi] with cos^2(k (z - antinode)) >= c
  auto axial_fraction_above = [&](double c) {
    if (c <= 0) return 1.0;
    if (c >= 1) return 0.0;
    const double theta = std::acos(std::sqrt(c));  // in [0, pi/2]
    const double half_period = kPi / k_med;
    auto phase_of = [&](double z) { return k_med * (z - g.antinode_offset_um); };
    // measure of {z : |phase mod pi| <= theta around each antinode}
    const double p0 = phase_of(z_lo), p1 = phase_of(z_hi);
    auto count_below = [&](double p) {
      // integral over (-inf, p] of the indicator, one theta-window per pi
      const double period_index = std::floor(p / kPi);
      const double frac = p - period_index * kPi;  // in [0, pi)
      double partial;
      if (frac < theta)
        partial = frac;
      else if (frac < kPi - theta)
        partial = theta;
      else
        partial = theta + (frac - (kPi - theta));
      return period_index * 2 * theta + partial;
    };
    return (count_below(p1) - count_below(p0)) / (k_med * total_z) * 1.0;
  };

  std::vector<double> probs(n_bins, 0.0);
  const double bin_width = peak / n_bins;
  const int n_s = 20000;
  const double ds = s_max / n_s;
  for (int i = 0; i < n_s; ++i) {
    const double s = (i + 0.5) * ds;
    const double u = std::exp(-s);  // transverse factor, s uniform on [0, s_max]
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double lo = b * bin_width, hi = (b + 1) * bin_width;
      const double c_lo = lo / (peak * u), c_hi = hi / (peak * u);
      const double frac =
          axial_fraction_above(c_lo) - axial_fraction_above(std::min(c_hi, 1.0));
      probs[b] += frac / n_s;
    }
  }
  return probs;
}

ExperimentOutcome lifetimes_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "lifetimes";
  const auto settings = LifetimeSettings::read(cfg);
  const auto crystal = CrystalConfig::from_config(cfg);
  const auto cavity = CavityGeometry::from_config(cfg);
  const auto detector = DetectorConfig::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedLifetimes);

  const auto region = mode_region(cavity);
  const double volume = kPi * region.radius_um * region.radius_um *
                        (region.axial_max_um - region.axial_min_um);
  const long n_total = std::lround(crystal.erbium_concentration *
                                   settings.y_site_density_per_um3 * volume);
  out.metrics["region_emitters"] = static_cast<double>(n_total);

  auto emitters = sample_ensemble_parallel(n_total, crystal, region, seed,
                                           opt.workers);
  auto census = purcell_census(emitters, cavity, cavity.bulk_lifetime_ms,
                               settings.purcell_threshold, opt.workers);

  long count_bcd = 0;
  std::vector<std::size_t> bright;  // resolvable satellite emitters above threshold
  for (std::size_t i = 0; i < emitters.size(); ++i) {
    const auto cls = emitters[i].satellite_class;
    const bool in_bcd = cls == SatelliteClass::B || cls == SatelliteClass::C ||
                        cls == SatelliteClass::D;
    if (in_bcd && emitters[i].purcell > settings.purcell_threshold) {
      ++count_bcd;
      bright.push_back(i);
    }
  }
  out.metrics["count_p35_bcd"] = static_cast<double>(count_bcd);
  out.metrics["count_p35_all"] = static_cast<double>(census.count_above_threshold);
  out.metrics["max_purcell_sampled"] =
      std::max_element(emitters.begin(), emitters.end(),
                       [](const EmitterRecord& a, const EmitterRecord& b) {
                         return a.purcell < b.purcell;
                       })
          ->purcell;
  out.metrics["max_purcell_modeled"] =
      purcell_factor_at(0, cavity.antinode_offset_um, cavity);
  out.metrics["enhanced_lifetime_109_ms"] =
      enhanced_lifetime_ms(109, cavity.bulk_lifetime_ms);

  std::filesystem::create_directories(opt.out_dir);
  CsvWriter hist_csv(opt.out_dir + "/purcell_hist.csv",
                     {"purcell_center", "count"});
  const auto& hist = census.histogram;
  for (std::size_t b = 0; b < hist.counts().size(); ++b)
    hist_csv.row({hist.center(b), hist.counts()[b]});
  out.outputs.push_back("purcell_hist.csv");

  // per-emitter decay fits over the resolvable set, photon-count limited
  const double bulk_us = ms_to_us(cavity.bulk_lifetime_ms);
  const auto bin_grid = linear_grid(settings.fit_bin_us / 2,
                                    settings.fit_window_us - settings.fit_bin_us / 2,
                                    settings.fit_bin_us);
  CsvWriter fits_csv(opt.out_dir + "/lifetime_fits.csv",
                     {"emitter", "purcell_true", "tau_true_us", "tau_fit_us",
                      "tau_stderr_us", "purcell_fit"});
  out.outputs.push_back("lifetime_fits.csv");

  auto fit_decay_histogram = [&](double tau_us, long n_photons, Rng& rng,
                                 double dark_floor_per_bin) {
    std::vector<double> counts(bin_grid.size(), 0.0);
    for (long k = 0; k < n_photons; ++k) {
      const double t = rng.exponential(1.0 / tau_us);
      if (t >= settings.fit_window_us) continue;
      counts[static_cast<std::size_t>(t / settings.fit_bin_us)] += 1;
    }
    if (dark_floor_per_bin > 0)
      for (auto& c : counts)
        c += static_cast<double>(rng.poisson(dark_floor_per_bin));
    std::vector<double> weights(counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j)
      weights[j] = 1.0 / std::max(counts[j], 1.0);
    return fit_exponential(bin_grid, counts, ExpModel::decay, weights);
  };

  double max_purcell_fit = 0;
  Rng census_rng = Rng::substream(seed, 0xf17, 0);
  for (std::size_t idx : bright) {
    const double purcell = emitters[idx].purcell;
    const double tau = bulk_us / (1 + purcell);
    auto fit = fit_decay_histogram(tau, settings.photons_per_emitter, census_rng, 0);
    const double tau_fit = std::abs(fit.param("tau"));
    const double purcell_fit = bulk_us / tau_fit - 1;
    max_purcell_fit = std::max(max_purcell_fit, purcell_fit);
    fits_csv.row({static_cast<double>(emitters[idx].id), purcell, tau,
                  tau_fit, fit.stderr_of("tau"), purcell_fit});
    out.all_converged = out.all_converged && fit.converged;
  }
  out.metrics["max_purcell_fitted"] = max_purcell_fit;

  // reference decay through the full tag pipeline at fixed photon budget
  {
    const double purcell_ref = bulk_us / settings.reference_lifetime_us - 1;
    const double p_click = click_probability(purcell_ref, 1.0, 1.0, cavity,
                                             detector, settings.fit_window_us);
    const long n_pulses =
        std::lround(settings.photons_reference / std::max(p_click, 1e-9));
    PulseSchedule schedule{settings.fit_window_us + 50, n_pulses,
                           settings.fit_window_us, false};
    const auto drive =
        simulate_drive(schedule, purcell_ref, cavity.bulk_lifetime_ms, 1.0, 0.0,
                       0.0, false, mix_seed(seed, 0x8ef));
    const auto series = detect_stream(drive.emissions, detector, schedule,
                                      cavity.outcoupling_efficiency,
                                      mix_seed(seed, 0x8f0), opt.workers);
    auto hist_ref = fluorescence_bins(series, settings.fit_bin_us);
    std::vector<double> xs, ys, ws;
    for (std::size_t b = 0; b < hist_ref.counts().size(); ++b) {
      xs.push_back(hist_ref.center(b));
      ys.push_back(hist_ref.counts()[b]);
      ws.push_back(1.0 / std::max(hist_ref.counts()[b], 1.0));
    }
    auto fit = fit_exponential(xs, ys, ExpModel::decay, ws);
    out.metrics["lifetime_reference_us"] = std::abs(fit.param("tau"));
    out.metrics["lifetime_reference_stderr_us"] = fit.stderr_of("tau");
    out.metrics["reference_detected_photons"] =
        static_cast<double>(series.tags.size());
    CsvWriter decay_csv(opt.out_dir + "/reference_decay.csv",
                        {"delay_us", "counts"});
    for (std::size_t b = 0; b < hist_ref.counts().size(); ++b)
      decay_csv.row({hist_ref.center(b), hist_ref.counts()[b]});
    out.outputs.push_back("reference_decay.csv");
    note_fit(out, "reference_decay", std::move(fit));
  }

  if (opt.with_oracle) {
    const auto probs = census_bin_probabilities(cavity, region.radius_um,
                                                hist.counts().size());
    double max_rel = 0;
    const double n = static_cast<double>(emitters.size());
    for (std::size_t b = 0; b < probs.size(); ++b) {
      const double expected = n * probs[b];
      if (expected < 500) continue;
      max_rel = std::max(max_rel,
                         std::abs(hist.counts()[b] - expected) / expected);
    }
    out.metrics["oracle_census_max_rel_dev"] = max_rel;
  }
  return out;
}

// --------------------------------------------------------------------------
// spin-resolved single-emitter spectrum

struct SpinSpectrumSettings {
  double b_field_mt = 0.2;
  double scan_half_span_mhz = 35;
  double step_mhz = 0.25;
  long n_frames = 240;
  double dwell_ms = 250;
  double sd_sigma_mhz = 0.2123;
  double sf_sigma_scale = 6.4;
  double sf_amplitude_ratio = 0.3;
  double probe_fwhm_mhz = 0.04;
  double sf_probe_fwhm_mhz = 0.5;
  double peak_rate_hz = 126;

  static SpinSpectrumSettings read(const Config& cfg, bool paper_scale) {
    SpinSpectrumSettings s;
    s.b_field_mt = cfg.num("spin_spectrum", "b_field_mt", s.b_field_mt);
    s.scan_half_span_mhz =
        cfg.num("spin_spectrum", "scan_half_span_mhz", s.scan_half_span_mhz);
    s.step_mhz = cfg.num("spin_spectrum", "step_mhz", s.step_mhz);
    s.n_frames = cfg.integer("spin_spectrum", "n_frames", s.n_frames);
    s.dwell_ms = cfg.num("spin_spectrum", "dwell_ms", s.dwell_ms);
    s.sd_sigma_mhz = cfg.num("spin_spectrum", "sd_sigma_mhz", s.sd_sigma_mhz);
    s.sf_sigma_scale = cfg.num("spin_spectrum", "sf_sigma_scale", s.sf_sigma_scale);
    s.sf_amplitude_ratio =
        cfg.num("spin_spectrum", "sf_amplitude_ratio", s.sf_amplitude_ratio);
    s.probe_fwhm_mhz = cfg.num("spin_spectrum", "probe_fwhm_mhz", s.probe_fwhm_mhz);
    s.sf_probe_fwhm_mhz =
        cfg.num("spin_spectrum", "sf_probe_fwhm_mhz", s.sf_probe_fwhm_mhz);
    s.peak_rate_hz = cfg.num("spin_spectrum", "peak_rate_hz", s.peak_rate_hz);
    if (paper_scale) s.n_frames *= 2;
    return s;
  }
};

ExperimentOutcome spin_spectrum_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "spin-spectrum";
  const auto settings = SpinSpectrumSettings::read(cfg, opt.paper_scale);
  auto spin = SpinParams::from_config(cfg);
  spin.b_field_mt = settings.b_field_mt;
  const auto detector = DetectorConfig::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedSpinSpectrum);

  EmitterRecord emitter;  // main-line class-I emitter at zero static offset
  const auto freq = transition_frequencies(spin, emitter);
  struct Line {
    const char* name;
    double center_mhz;
    double amplitude;
    double noise_scale;
  };
  const std::array<Line, 4> lines = {{
      {"sp_low", ghz_to_mhz(freq.f_sp_low), 1.0, 1.0},
      {"sp_high", ghz_to_mhz(freq.f_sp_high), 1.0, 1.0},
      {"sf_red", ghz_to_mhz(freq.f_sf_red), settings.sf_amplitude_ratio,
       settings.sf_sigma_scale},
      {"sf_blue", ghz_to_mhz(freq.f_sf_blue), settings.sf_amplitude_ratio,
       settings.sf_sigma_scale},
  }};

  // Two overlaid scans of the same emitter: a narrow probe resolves the
  // strong spin-preserving pair, a broadened probe lifts the weak spin-flip
  // lines out of the dark floor.  Each scan's probe width is deconvolved from
  // its fitted linewidths.
  const auto grid = linear_grid(-settings.scan_half_span_mhz,
                                settings.scan_half_span_mhz, settings.step_mhz);
  const double dwell_s = settings.dwell_ms * 1e-3;
  const double tau_ms = 1000;
  const auto scan = [&](double probe_fwhm, uint64_t stream) {
    Rng rng = Rng::substream(seed, 0x55, stream);
    std::vector<double> counts(grid.size(), 0.0);
    double x = settings.sd_sigma_mhz * rng.normal();
    for (long frame = 0; frame < settings.n_frames; ++frame) {
      for (std::size_t i = 0; i < grid.size(); ++i) {
        x = ou_evolve(x, settings.dwell_ms * 1e3, settings.sd_sigma_mhz, tau_ms,
                      rng);
        double rate = detector.dark_rate_hz;
        for (const auto& line : lines)
          rate += settings.peak_rate_hz * line.amplitude *
                  peak_gaussian(grid[i], line.center_mhz + line.noise_scale * x,
                                probe_fwhm);
        counts[i] += static_cast<double>(rng.poisson(rate * dwell_s));
      }
    }
    return counts;
  };
  const auto counts_narrow = scan(settings.probe_fwhm_mhz, 0);
  const auto counts_broad = scan(settings.sf_probe_fwhm_mhz, 1);

  std::filesystem::create_directories(opt.out_dir);
  CsvWriter csv(opt.out_dir + "/spin_spectrum.csv",
                {"detuning_mhz", "counts_narrow", "counts_broad"});
  for (std::size_t i = 0; i < grid.size(); ++i)
    csv.row({grid[i], counts_narrow[i], counts_broad[i]});
  out.outputs.push_back("spin_spectrum.csv");

  // per-line Gaussian fits in windows around the known centers
  double sp_fwhm = 0, sf_fwhm = 0, sp_amp = 0, sf_amp = 0;
  std::map<std::string, double> centers_fit;
  for (const auto& line : lines) {
    const bool is_sp = line.noise_scale == 1.0;
    const double probe =
        is_sp ? settings.probe_fwhm_mhz : settings.sf_probe_fwhm_mhz;
    const auto& counts = is_sp ? counts_narrow : counts_broad;
    const double expected_fwhm = std::hypot(
        kGaussFwhmPerSigma * settings.sd_sigma_mhz * line.noise_scale, probe);
    const double half_window = std::max(2.0 * expected_fwhm, 1.2);
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (std::abs(grid[i] - line.center_mhz) > half_window) continue;
      xs.push_back(grid[i]);
      ys.push_back(counts[i]);
      ws.push_back(1.0 / std::max(counts[i], 1.0));
    }
    auto fit = fit_gaussian_peak(xs, ys, ws);
    const double raw = std::abs(fit.param("fwhm"));
    const double fwhm = std::sqrt(std::max(raw * raw - probe * probe, 1e-12));
    const double amp = fit.param("amplitude");
    centers_fit[line.name] = fit.param("center");
    if (is_sp) {
      sp_fwhm += fwhm / 2;
      sp_amp += amp / 2;
    } else {
      sf_fwhm += fwhm / 2;
      sf_amp += amp / 2;
    }
    note_fit(out, std::string("line_") + line.name, std::move(fit));
  }
  out.metrics["sp_fwhm_mhz"] = sp_fwhm;
  out.metrics["sf_fwhm_mhz"] = sf_fwhm;
  out.metrics["sf_sp_fwhm_ratio"] = sf_fwhm / sp_fwhm;
  out.metrics["sf_sp_amplitude_ratio"] = sf_amp / sp_amp;
  out.metrics["sp_splitting_fit_mhz"] =
      centers_fit["sp_high"] - centers_fit["sp_low"];
  const auto split = splittings(spin, emitter);
  out.metrics["sp_splitting_mhz"] = split.delta_sp_mhz;
  out.metrics["sf_splitting_mhz"] = split.delta_sf_mhz;
  return out;
}

// --------------------------------------------------------------------------
// satellite-resolved splitting probe

struct SplittingSettings {
  double b_field_mt = 2.5;
  double hole_fwhm_mhz = 1.0;
  double scan_half_span_mhz = 6;
  double step_mhz = 0.1;
  double peak_counts = 400;
  double floor_counts = 5;

  static SplittingSettings read(const Config& cfg) {
    SplittingSettings s;
    s.b_field_mt = cfg.num("splitting", "b_field_mt", s.b_field_mt);
    s.hole_fwhm_mhz = cfg.num("splitting", "hole_fwhm_mhz", s.hole_fwhm_mhz);
    s.scan_half_span_mhz =
        cfg.num("splitting", "scan_half_span_mhz", s.scan_half_span_mhz);
    s.step_mhz = cfg.num("splitting", "step_mhz", s.step_mhz);
    s.peak_counts = cfg.num("splitting", "peak_counts", s.peak_counts);
    s.floor_counts = cfg.num("splitting", "floor_counts", s.floor_counts);
    return s;
  }
};

ExperimentOutcome splitting_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "splitting";
  const auto settings = SplittingSettings::read(cfg);
  auto spin = SpinParams::from_config(cfg);
  spin.b_field_mt = settings.b_field_mt;
  const uint64_t seed = mix_seed(opt.seed, kSeedSplitting);

  const std::array<SatelliteClass, 5> satellites = {
      SatelliteClass::main, SatelliteClass::A, SatelliteClass::B,
      SatelliteClass::C, SatelliteClass::D};
  const std::array<SpinClass, 2> classes = {SpinClass::I, SpinClass::II};

  // reference splittings of the main line per spin class
  std::map<SpinClass, SplittingPair> main_ref;
  for (auto cls : classes) {
    EmitterRecord e;
    e.spin_class = cls;
    main_ref[cls] = splittings(spin, e);
  }

  std::filesystem::create_directories(opt.out_dir);
  std::ofstream table(opt.out_dir + "/splitting_results.csv");
  table << "satellite,spin_class,delta_sp_true_mhz,delta_sp_fit_mhz,"
           "delta_sp_stderr_mhz,delta_sf_true_mhz,delta_sf_fit_mhz,"
           "delta_sf_stderr_mhz,sf_offset_from_main_mhz,resolved\n";
  out.outputs.push_back("splitting_results.csv");

  // pump-probe line scan: Gaussian contrast of the configured hole width
  // centered on the true transition splitting, Poisson counting noise
  auto scan_and_fit = [&](double true_center_mhz, double scan_center_mhz,
                          Rng& rng) {
    const auto grid = linear_grid(scan_center_mhz - settings.scan_half_span_mhz,
                                  scan_center_mhz + settings.scan_half_span_mhz,
                                  settings.step_mhz);
    std::vector<double> ys(grid.size()), ws(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double mu =
          settings.floor_counts +
          settings.peak_counts *
              peak_gaussian(grid[i], true_center_mhz, settings.hole_fwhm_mhz);
      ys[i] = static_cast<double>(rng.poisson(mu));
      ws[i] = 1.0 / std::max(ys[i], 1.0);
    }
    return fit_gaussian_peak(grid, ys, ws);
  };

  std::size_t scan_index = 0;
  double max_abs_pull = 0;
  for (auto sat : satellites) {
    for (auto cls : classes) {
      EmitterRecord e;
      e.satellite_class = sat;
      e.spin_class = cls;
      const auto truth = splittings(spin, e);
      Rng rng = Rng::substream(seed, 0x591, scan_index++);
      auto sp_fit = scan_and_fit(truth.delta_sp_mhz,
                                 main_ref[cls].delta_sp_mhz, rng);
      auto sf_fit = scan_and_fit(truth.delta_sf_mhz,
                                 main_ref[cls].delta_sf_mhz, rng);
      const double sf_offset =
          sf_fit.param("center") - main_ref[cls].delta_sf_mhz;
      const bool resolved = std::abs(sf_offset) > settings.hole_fwhm_mhz;
      table << to_string(sat) << ',' << to_string(cls) << ','
            << csv_num(truth.delta_sp_mhz) << ','
            << csv_num(sp_fit.param("center")) << ','
            << csv_num(sp_fit.stderr_of("center")) << ','
            << csv_num(truth.delta_sf_mhz) << ','
            << csv_num(sf_fit.param("center")) << ','
            << csv_num(sf_fit.stderr_of("center")) << ','
            << csv_num(sf_offset) << ',' << (resolved ? 1 : 0) << '\n';

      const std::string tag = std::string(to_string(sat)) + "_" +
                              to_string(cls);
      out.metrics["sf_offset_" + tag] = sf_offset;
      out.metrics["resolved_" + tag] = resolved ? 1.0 : 0.0;
      const double pull =
          (sf_fit.param("center") - truth.delta_sf_mhz) /
          std::max(sf_fit.stderr_of("center"), 1e-12);
      max_abs_pull = std::max(max_abs_pull, std::abs(pull));
      out.all_converged =
          out.all_converged && sp_fit.converged && sf_fit.converged;
      out.fits.emplace("sp_" + tag, std::move(sp_fit));
      out.fits.emplace("sf_" + tag, std::move(sf_fit));
    }
  }
  out.metrics["max_center_pull"] = max_abs_pull;
  out.metrics["hole_fwhm_mhz"] = settings.hole_fwhm_mhz;
  // the two spin classes' branch separation on the main line
  out.metrics["class_branch_separation_mhz"] =
      main_ref[SpinClass::I].delta_sf_mhz - main_ref[SpinClass::II].delta_sf_mhz;
  return out;
}

// --------------------------------------------------------------------------
// coherent drive

struct RabiSettings {
  double pulse_fwhm_us = 0.32;
  long n_points = 81;
  double max_area_pi = 4;
  long repetitions = 30000;
  double emitter_purcell = 110;

  static RabiSettings read(const Config& cfg, bool paper_scale) {
    RabiSettings s;
    s.pulse_fwhm_us = cfg.num("rabi", "pulse_fwhm_us", s.pulse_fwhm_us);
    s.n_points = cfg.integer("rabi", "n_points", s.n_points);
    s.max_area_pi = cfg.num("rabi", "max_area_pi", s.max_area_pi);
    s.repetitions = cfg.integer("rabi", "repetitions", s.repetitions);
    s.emitter_purcell = cfg.num("rabi", "emitter_purcell", s.emitter_purcell);
    if (paper_scale) s.repetitions *= 4;
    return s;
  }
};

ExperimentOutcome rabi_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "rabi";
  const auto settings = RabiSettings::read(cfg, opt.paper_scale);
  const auto cavity = CavityGeometry::from_config(cfg);
  const auto detector = DetectorConfig::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedRabi);

  // Gaussian pulse area = 2 pi Omega_peak * integral of the envelope;
  // express the scan in units of pi
  const double envelope_area_us = settings.pulse_fwhm_us *
                                  std::sqrt(kPi / (4 * std::log(2.0)));
  const double chain = cavity_branching(settings.emitter_purcell) *
                       capture_fraction(settings.emitter_purcell,
                                        cavity.bulk_lifetime_ms,
                                        detector.gate_window_us) *
                       cavity.outcoupling_efficiency * detector.efficiency *
                       detector.path_efficiency;
  const double dark_mean =
      settings.repetitions * dark_probability(detector, detector.gate_window_us);

  std::filesystem::create_directories(opt.out_dir);
  CsvWriter csv(opt.out_dir + "/rabi_scan.csv",
                {"area_pi", "rabi_peak_mhz", "excited_population", "counts"});
  out.outputs.push_back("rabi_scan.csv");

  std::vector<double> xs(settings.n_points), ys(settings.n_points);
  Rng rng = Rng::substream(seed, 0x4ab1, 0);
  for (long i = 0; i < settings.n_points; ++i) {
    const double area_pi =
        settings.max_area_pi * static_cast<double>(i) / (settings.n_points - 1);
    const double rabi_peak_mhz = area_pi / (2 * envelope_area_us);
    PulseSpec pulse;
    pulse.shape = PulseShape::gaussian;
    pulse.duration_us = settings.pulse_fwhm_us;
    pulse.rabi_peak_mhz = rabi_peak_mhz;
    EmitterDynamicState state;
    state = gaussian_pulse_rotation(pulse, state);
    const double p = state.excited_population();
    const double mu = settings.repetitions * p * chain + dark_mean;
    const double counts = static_cast<double>(rng.poisson(mu));
    xs[i] = area_pi;
    ys[i] = counts;
    csv.row({area_pi, rabi_peak_mhz, p, counts});
  }

  auto plain = fit_sinusoid(xs, ys);
  auto damped = fit_damped_sinusoid(xs, ys);
  out.metrics["rabi_period_area_pi"] = std::abs(plain.param("period"));
  out.metrics["rabi_damping"] = damped.param("damping");
  out.metrics["rabi_damping_stderr"] = damped.stderr_of("damping");
  out.metrics["damping_zero_consistent"] =
      std::abs(damped.param("damping")) < 2 * damped.stderr_of("damping") ? 1.0
                                                                          : 0.0;
  note_fit(out, "rabi_sinusoid", std::move(plain));
  note_fit(out, "rabi_damped", std::move(damped));
  return out;
}

struct EchoSettings {
  double t1_us = 131;
  long n_delays = 18;
  double min_total_us = 40;
  double max_total_us = 660;
  long n_trajectories = 10000;

  static EchoSettings read(const Config& cfg, const std::string& section,
                           bool paper_scale) {
    EchoSettings s;
    if (section == "xy4") {
      s.t1_us = 290;
      s.max_total_us = 900;
      s.min_total_us = 50;
      s.n_delays = 16;
      s.n_trajectories = 6000;
    }
    s.t1_us = cfg.num(section, "t1_us", s.t1_us);
    s.n_delays = cfg.integer(section, "n_delays", s.n_delays);
    s.min_total_us = cfg.num(section, "min_total_us", s.min_total_us);
    s.max_total_us = cfg.num(section, "max_total_us", s.max_total_us);
    s.n_trajectories = cfg.integer(section, "n_trajectories", s.n_trajectories);
    if (paper_scale) s.n_trajectories *= 4;
    return s;
  }
};

FitResult fit_echo_decay(const std::vector<CoherencePoint>& points) {
  std::vector<double> xs, ys, ws;
  for (const auto& p : points) {
    xs.push_back(p.total_time_us);
    ys.push_back(p.amplitude);
    const double err = std::max(p.mc_std, 1e-4);
    ws.push_back(1.0 / (err * err));
  }
  return fit_exponential(xs, ys, ExpModel::echo_envelope, ws);
}

void write_echo_csv(const std::string& path,
                    const std::vector<CoherencePoint>& points) {
  CsvWriter csv(path, {"total_us", "amplitude", "mc_std"});
  for (const auto& p : points) csv.row({p.total_time_us, p.amplitude, p.mc_std});
}

ExperimentOutcome hahn_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "hahn";
  const auto settings = EchoSettings::read(cfg, "hahn", opt.paper_scale);
  NoiseModel noise = NoiseModel::from_config(cfg);
  // lifetime-limit preset: the echo must reach T2 = 2 T1
  noise.pure_dephasing_enabled =
      cfg.boolean("hahn", "pure_dephasing", false);
  const uint64_t seed = mix_seed(opt.seed, kSeedHahn);

  const auto delays = linear_grid(settings.min_total_us, settings.max_total_us,
                                  (settings.max_total_us - settings.min_total_us) /
                                      (settings.n_delays - 1));
  const auto points = dd_coherence_scan(DecouplingKind::hahn, delays, noise,
                                        settings.t1_us, settings.n_trajectories,
                                        seed, opt.workers);
  std::filesystem::create_directories(opt.out_dir);
  write_echo_csv(opt.out_dir + "/hahn_scan.csv", points);
  out.outputs.push_back("hahn_scan.csv");

  auto fit = fit_echo_decay(points);
  const double t2 = std::abs(fit.param("tau"));
  out.metrics["t2_us"] = t2;
  out.metrics["t2_stderr_us"] = fit.stderr_of("tau");
  out.metrics["t2_over_2t1"] = t2 / (2 * settings.t1_us);
  out.metrics["t1_us"] = settings.t1_us;
  note_fit(out, "hahn_decay", std::move(fit));
  return out;
}

ExperimentOutcome xy4_impl(const Config& cfg, const RunOptions& opt) {
  ExperimentOutcome out;
  out.name = "xy4";
  const auto settings = EchoSettings::read(cfg, "xy4", opt.paper_scale);
  const NoiseModel noise = NoiseModel::from_config(cfg);
  const uint64_t seed = mix_seed(opt.seed, kSeedXy4);

  const auto delays = linear_grid(settings.min_total_us, settings.max_total_us,
                                  (settings.max_total_us - settings.min_total_us) /
                                      (settings.n_delays - 1));
  const auto xy4_points = dd_coherence_scan(DecouplingKind::xy4, delays, noise,
                                            settings.t1_us, settings.n_trajectories,
                                            seed, opt.workers);
  const auto hahn_points = dd_coherence_scan(DecouplingKind::hahn, delays, noise,
                                             settings.t1_us,
                                             settings.n_trajectories,
                                             mix_seed(seed, 0x11), opt.workers);
  std::filesystem::create_directories(opt.out_dir);
  write_echo_csv(opt.out_dir + "/xy4_scan.csv", xy4_points);
  write_echo_csv(opt.out_dir + "/hahn_reference.csv", hahn_points);
  out.outputs.push_back("xy4_scan.csv");
  out.outputs.push_back("hahn_reference.csv");

  auto xy4_fit = fit_echo_decay(xy4_points);
  auto hahn_fit = fit_echo_decay(hahn_points);
  const double t2_xy4 = std::abs(xy4_fit.param("tau"));
  const double t2_hahn = std::abs(hahn_fit.param("tau"));
  out.metrics["t2_us"] = t2_xy4;
  out.metrics["t2_stderr_us"] = xy4_fit.stderr_of("tau");
  out.metrics["t2_over_2t1"] = t2_xy4 / (2 * settings.t1_us);
  out.metrics["hahn_t2_us"] = t2_hahn;
  out.metrics["hahn_t2_stderr_us"] = hahn_fit.stderr_of("tau");
  // the one-pulse echo must decay strictly faster than the lifetime bound
  out.metrics["hahn_below_bound_z"] =
      (2 * settings.t1_us - t2_hahn) /
      std::max(hahn_fit.stderr_of("tau"), 1e-12);
  out.metrics["noise_sigma_mhz"] = noise.ou_sigma_mhz;
  out.metrics["noise_tau_ms"] = noise.ou_tau_ms;
  note_fit(out, "xy4_decay", std::move(xy4_fit));
  note_fit(out, "hahn_reference", std::move(hahn_fit));
  return out;
}

// --------------------------------------------------------------------------
// schema sweep: every key any experiment may read, so that a full config
// validates cleanly no matter which single experiment runs

void touch_known_keys(const Config& cfg) {
  cfg.integer("run", "seed", 0);
  cfg.integer("run", "workers", 0);
  CrystalConfig::from_config(cfg);
  CavityGeometry::from_config(cfg);
  SpinParams::from_config(cfg);
  NoiseModel::from_config(cfg);
  DetectorConfig::from_config(cfg);
  SpectrumSettings::read(cfg, false);
  cfg.integer("satellite_scan", "n_draws", 0);
  G2Settings::read(cfg, false);
  SdSettings::read(cfg, false);
  LifetimeSettings::read(cfg);
  SpinSpectrumSettings::read(cfg, false);
  SplittingSettings::read(cfg);
  RabiSettings::read(cfg, false);
  EchoSettings::read(cfg, "hahn", false);
  EchoSettings::read(cfg, "xy4", false);
  cfg.boolean("hahn", "pure_dephasing", false);
}

using ExperimentFn = ExperimentOutcome (*)(const Config&, const RunOptions&);

struct Entry {
  const char* name;
  ExperimentFn fn;
};

constexpr Entry kExperiments[] = {
    {"spectrum", spectrum_impl},     {"satellite-scan", satellite_impl},
    {"g2", g2_impl},                 {"sd", sd_impl},
    {"lifetimes", lifetimes_impl},   {"spin-spectrum", spin_spectrum_impl},
    {"splitting", splitting_impl},   {"rabi", rabi_impl},
    {"hahn", hahn_impl},             {"xy4", xy4_impl},
};

void write_run_outputs(const ExperimentOutcome& outcome, const Config& cfg,
                       const RunOptions& opt) {
  RunManifest manifest;
  manifest.experiment = outcome.name;
  manifest.config_digest = cfg.digest();
  manifest.seed = opt.seed;
  manifest.workers = opt.workers;
  manifest.outputs = outcome.outputs;
  manifest.outputs.push_back("summary.json");
  manifest.metrics = outcome.metrics;
  manifest.notes = outcome.notes;
  manifest.write(opt.out_dir);
  write_fit_summary(opt.out_dir, outcome.fits, outcome.metrics);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "spectrum", "satellite-scan", "g2",   "sd",   "lifetimes",
      "spin-spectrum", "splitting", "rabi", "hahn", "xy4"};
  return names;
}

ExperimentOutcome run_inhomogeneous_scan(const Config& cfg, const RunOptions& opt) {
  return spectrum_impl(cfg, opt);
}
ExperimentOutcome run_satellite_scan(const Config& cfg, const RunOptions& opt) {
  return satellite_impl(cfg, opt);
}
ExperimentOutcome run_autocorrelation(const Config& cfg, const RunOptions& opt) {
  return g2_impl(cfg, opt);
}
ExperimentOutcome run_spectral_diffusion(const Config& cfg, const RunOptions& opt) {
  return sd_impl(cfg, opt);
}
ExperimentOutcome run_lifetime_census(const Config& cfg, const RunOptions& opt) {
  return lifetimes_impl(cfg, opt);
}
ExperimentOutcome run_spin_spectrum(const Config& cfg, const RunOptions& opt) {
  return spin_spectrum_impl(cfg, opt);
}
ExperimentOutcome run_splitting_probe(const Config& cfg, const RunOptions& opt) {
  return splitting_impl(cfg, opt);
}
ExperimentOutcome run_rabi(const Config& cfg, const RunOptions& opt) {
  return rabi_impl(cfg, opt);
}
ExperimentOutcome run_hahn(const Config& cfg, const RunOptions& opt) {
  return hahn_impl(cfg, opt);
}
ExperimentOutcome run_xy4(const Config& cfg, const RunOptions& opt) {
  return xy4_impl(cfg, opt);
}

ExperimentOutcome run_experiment(const std::string& name, const Config& cfg,
                                 const RunOptions& opt) {
  touch_known_keys(cfg);
  cfg.check_all_consumed();

  if (name == "all") {
    ExperimentOutcome combined;
    combined.name = "all";
    for (const auto& sub : experiment_names()) {
      RunOptions sub_opt = opt;
      sub_opt.out_dir = opt.out_dir + "/" + sub;
      ExperimentOutcome outcome = run_experiment(sub, cfg, sub_opt);
      combined.all_converged = combined.all_converged && outcome.all_converged;
      combined.metrics[sub + "_converged"] = outcome.all_converged ? 1.0 : 0.0;
      combined.outputs.push_back(sub + "/manifest.json");
    }
    std::filesystem::create_directories(opt.out_dir);
    write_run_outputs(combined, cfg, opt);
    return combined;
  }

  for (const auto& entry : kExperiments) {
    if (name == entry.name) {
      ExperimentOutcome outcome = entry.fn(cfg, opt);
      write_run_outputs(outcome, cfg, opt);
      return outcome;
    }
  }
  throw ConfigError("unknown experiment: " + name);
}

}  // namespace remsim
