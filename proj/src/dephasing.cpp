#include "remsim/dephasing.hpp"

#include <cmath>
#include <stdexcept>

#include "remsim/parallel.hpp"
#include "remsim/units.hpp"

namespace remsim {

double ou_evolve(double offset_mhz, double dt_us, double sigma_mhz, double tau_ms,
                 Rng& rng) {
  if (dt_us < 0) throw std::invalid_argument("ou_evolve: dt < 0");
  if (dt_us == 0) return offset_mhz;
  const double e = std::exp(-dt_us / ms_to_us(tau_ms));
  return offset_mhz * e + sigma_mhz * std::sqrt(1 - e * e) * rng.normal();
}

std::pair<double, double> ou_segment(double x0, double h_us, double sigma_mhz,
                                     double tau_ms, Rng& rng) {
  const double tau = ms_to_us(tau_ms);
  const double y = h_us / tau;
  const double em = -std::expm1(-y);  // 1 - e^{-y} without cancellation
  const double e = 1 - em;
  const double s2 = sigma_mhz * sigma_mhz;
  const double mean_x = x0 * e;
  const double mean_i = x0 * tau * em;
  const double var_x = s2 * em * (2 - em);
  // 2y - 3 + 4e^{-y} - e^{-2y}; the terms cancel to O(y^3), which the naive
  // grouping loses entirely once tau exceeds the segment by ~1e5
  const double bracket = y < 0.01
                             ? (2.0 / 3) * y * y * y * (1 - 0.75 * y + 0.35 * y * y)
                             : 2 * (y - em) - em * em;
  const double var_i = s2 * tau * tau * bracket;
  const double cov = s2 * tau * em * em;
  const double n1 = rng.normal(), n2 = rng.normal();
  if (var_x <= 0) return {mean_x, mean_i};
  const double sx = std::sqrt(var_x);
  const double x = mean_x + sx * n1;
  const double resid = var_i - cov * cov / var_x;
  const double integral = mean_i + (cov / sx) * n1 +
                          (resid > 0 ? std::sqrt(resid) : 0.0) * n2;
  return {x, integral};
}

namespace {

void check_sequence(const std::vector<EchoPulse>& seq, double total) {
  double prev = 0;
  for (const auto& p : seq) {
    if (!(p.time_us > prev) || !(p.time_us < total))
      throw std::invalid_argument("echo sequence: overlapping or out-of-range pulses");
    prev = p.time_us;
  }
}

// toggled OU phase integral in rad for one (sigma, tau) component
double toggled_phase(const std::vector<double>& boundaries, double sigma_mhz,
                     double tau_ms, Rng& rng) {
  double x = sigma_mhz * rng.normal();  // stationary start
  double phi = 0;
  double sign = 1;
  for (std::size_t j = 0; j + 1 < boundaries.size(); ++j) {
    const double h = boundaries[j + 1] - boundaries[j];
    const auto [x1, integral] = ou_segment(x, h, sigma_mhz, tau_ms, rng);
    phi += sign * integral;
    x = x1;
    sign = -sign;
  }
  return 2 * kPi * phi;
}

constexpr std::size_t kTrajectoryChunk = 256;

}  // namespace

EchoStats echo_amplitude_stats(const std::vector<EchoPulse>& sequence,
                               double total_time_us, const NoiseModel& noise,
                               double t1_us, long n_trajectories, uint64_t seed,
                               int workers) {
  if (n_trajectories < 1)
    throw std::invalid_argument("echo_amplitude: n_trajectories < 1");
  check_sequence(sequence, total_time_us);

  std::vector<double> boundaries;
  boundaries.reserve(sequence.size() + 2);
  boundaries.push_back(0);
  for (const auto& p : sequence) boundaries.push_back(p.time_us);
  boundaries.push_back(total_time_us);

  const bool noise_on = noise.pure_dephasing_enabled && noise.ou_sigma_mhz > 0;

  double mean = 1.0, var = 0.0;
  if (noise_on) {
    struct Part {
      double sum = 0, sum2 = 0;
    };
    auto parts = chunked_map<Part>(
        static_cast<std::size_t>(n_trajectories), kTrajectoryChunk, workers,
        [&](std::size_t chunk, std::size_t first, std::size_t last) {
          Rng rng = Rng::substream(seed, 0xec40, chunk);
          Part part;
          for (std::size_t i = first; i < last; ++i) {
            const double phi =
                toggled_phase(boundaries, noise.ou_sigma_mhz, noise.ou_tau_ms, rng);
            const double c = std::cos(phi);
            part.sum += c;
            part.sum2 += c * c;
          }
          return part;
        });
    double sum = 0, sum2 = 0;
    for (const auto& part : parts) {
      sum += part.sum;
      sum2 += part.sum2;
    }
    const double n = static_cast<double>(n_trajectories);
    mean = sum / n;
    var = std::max(0.0, sum2 / n - mean * mean) / n;
  }

  double envelope = std::exp(-total_time_us / (2 * t1_us));
  if (noise.shf_depth > 0) {
    const double s = std::sin(kPi * noise.shf_frequency_mhz * total_time_us);
    envelope *= 1 - noise.shf_depth * s * s;
  }
  return {mean * envelope, std::sqrt(var) * envelope};
}

double echo_amplitude(const std::vector<EchoPulse>& sequence, double total_time_us,
                      const NoiseModel& noise, double t1_us, long n_trajectories,
                      uint64_t seed, int workers) {
  return echo_amplitude_stats(sequence, total_time_us, noise, t1_us, n_trajectories,
                              seed, workers)
      .amplitude;
}

std::vector<EchoPulse> decoupling_sequence(DecouplingKind kind,
                                           double total_time_us) {
  if (kind == DecouplingKind::hahn) return {{total_time_us / 2, 0.0}};
  // four pi pulses at odd eighths, axes alternating x, y, x, y
  std::vector<EchoPulse> seq;
  for (int i = 0; i < 4; ++i)
    seq.push_back({(2 * i + 1) * total_time_us / 8, (i % 2) * kPi / 2});
  return seq;
}

std::vector<CoherencePoint> dd_coherence_scan(DecouplingKind kind,
                                              const std::vector<double>& total_times_us,
                                              const NoiseModel& noise, double t1_us,
                                              long n_trajectories, uint64_t seed,
                                              int workers) {
  double prev = 0;
  for (double t : total_times_us) {
    if (t <= prev)
      throw std::invalid_argument("dd_coherence_scan: delays must increase");
    prev = t;
  }
  std::vector<CoherencePoint> out;
  out.reserve(total_times_us.size());
  for (std::size_t i = 0; i < total_times_us.size(); ++i) {
    const double t = total_times_us[i];
    const auto stats =
        echo_amplitude_stats(decoupling_sequence(kind, t), t, noise, t1_us,
                             n_trajectories, mix_seed(seed, i), workers);
    out.push_back({t, stats.amplitude, stats.mc_std});
  }
  return out;
}

}  // namespace remsim
