#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "remsim/pulse.hpp"
#include "remsim/rng.hpp"

namespace remsim {

// Exact Ornstein-Uhlenbeck marginal update over dt: mean x e^{-dt/tau},
// variance sigma^2 (1 - e^{-2dt/tau}).
double ou_evolve(double offset_mhz, double dt_us, double sigma_mhz, double tau_ms,
                 Rng& rng);

// Joint exact draw of (X(h), integral of X over [0,h]) given X(0) = x0.
// The pair is Gaussian; its moments follow from the OU covariance
//   Cov[X(s),X(t)] = sigma^2 (e^{-|t-s|/tau} - e^{-(t+s)/tau}),
// and a 2x2 Cholesky factor turns two unit normals into an unbiased sample.
// Phases integrated this way carry no time-discretization error.
std::pair<double, double> ou_segment(double x0, double h_us, double sigma_mhz,
                                     double tau_ms, Rng& rng);

struct EchoPulse {
  double time_us = 0;
  double phase = 0;  // pi-pulse axis, kept for sequence bookkeeping
};

struct EchoStats {
  double amplitude = 0;  // in [-1, 1]
  double mc_std = 0;     // Monte Carlo standard error of the amplitude
};

// Phase-toggled coherence of a pi-pulse sequence: Monte Carlo mean of
// cos(phi) over OU trajectories, times the population-coherence envelope
// exp(-total/(2 t1)) and the superhyperfine modulation. Pulses must be
// strictly ordered inside (0, total_time).
EchoStats echo_amplitude_stats(const std::vector<EchoPulse>& sequence,
                               double total_time_us, const NoiseModel& noise,
                               double t1_us, long n_trajectories, uint64_t seed,
                               int workers = 1);

double echo_amplitude(const std::vector<EchoPulse>& sequence, double total_time_us,
                      const NoiseModel& noise, double t1_us, long n_trajectories,
                      uint64_t seed, int workers = 1);

enum class DecouplingKind { hahn, xy4 };

std::vector<EchoPulse> decoupling_sequence(DecouplingKind kind, double total_time_us);

struct CoherencePoint {
  double total_time_us = 0;
  double amplitude = 0;
  double mc_std = 0;
};

// echo_amplitude per total evolution time, for exponential fitting.
std::vector<CoherencePoint> dd_coherence_scan(DecouplingKind kind,
                                              const std::vector<double>& total_times_us,
                                              const NoiseModel& noise, double t1_us,
                                              long n_trajectories, uint64_t seed,
                                              int workers = 1);

}  // namespace remsim
