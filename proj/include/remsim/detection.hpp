#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "remsim/config.hpp"
#include "remsim/fitting.hpp"
#include "remsim/histogram.hpp"

namespace remsim {

struct DetectorConfig {
  double efficiency = 0.40;        // detector quantum efficiency
  double dark_rate_hz = 10.2;
  double dead_time_us = 0.1;
  double gate_window_us = 250;     // post-pulse acceptance gate
  // lumped transmission of everything between outcoupler and detector,
  // set so the end-to-end click probability per pulse lands near 3% for a
  // strongly enhanced emitter
  double path_efficiency = 0.242;

  void validate() const;
  static DetectorConfig from_config(const Config& cfg);
};

enum class TagChannel { freq_a, freq_b, dark };

const char* to_string(TagChannel c);

struct TimeTag {
  double timestamp_us = 0;
  long pulse_index = 0;
  TagChannel channel = TagChannel::freq_a;  // dark only as diagnostic truth
};

// Excitation pulse k fires at k*period; its gate covers
// [k*period, k*period + window]. With `alternating` the drive frequency
// toggles with pulse parity (even = freq_a).
struct PulseSchedule {
  double period_us = 250;
  long n_pulses = 0;
  double window_us = 250;
  bool alternating = false;
};

// one cavity-channel photon reaching the outcoupler
struct Emission {
  double time_us = 0;  // absolute
  long pulse_index = 0;
};

struct TimeTagSeries {
  std::vector<TimeTag> tags;  // nondecreasing timestamps
  PulseSchedule schedule;     // carried alongside, not serialized
};

// Bernoulli-thins emissions by efficiency*path_efficiency*outcoupling, adds
// gated dark counts, enforces detector dead time inside each gate window
// (the first tag of a window is never dropped). Deterministically
// partitioned by pulse block.
TimeTagSeries detect_stream(const std::vector<Emission>& emissions,
                            const DetectorConfig& cfg, const PulseSchedule& schedule,
                            double outcoupling_efficiency, uint64_t seed,
                            int workers = 1);

void write_time_tags(const TimeTagSeries& series, const std::string& path);
TimeTagSeries read_time_tags(const std::string& path, const PulseSchedule& schedule);

struct CorrelationEstimate {
  std::vector<long> lags;      // pulse separations, ascending, excluding 0
  std::vector<double> g2;
  std::vector<double> stderr_; // binomial error from coincidence counts
  double g2_zero = 0;          // within-window pairing
  double g2_zero_stderr = 0;
  double mean_tags_per_pulse = 0;
};

// Ratio-of-rates estimator on tag counts per gate window. Channels are
// derived from pulse parity, never from tag labels, so simulated dark tags
// stay indistinguishable from signal. same_channel=false correlates the two
// alternating drive frequencies (odd separations).
CorrelationEstimate pulsed_g2(const TimeTagSeries& series, long max_lag,
                              bool same_channel = true);

// (raw - (1 - rho^2)) / rho^2 with rho the signal fraction of the count rate
double background_correct(double raw_g2_zero, double signal_fraction);

struct BunchingFit {
  double amplitude = 0;        // fitted shoulder height, negative for dips
  double decay_attempts = 0;   // exponential constant in pulse units
  double decay_attempts_stderr = 0;
  bool shoulders_present = false;
  FitResult fit;
};

// g2(k) = 1 + A exp(-k/k0) over the nonzero lags
BunchingFit bunching_fit(const CorrelationEstimate& est);

// Histogram of tag delays after their pulse, for lifetime fitting.
Histogram1D fluorescence_bins(const TimeTagSeries& series, double bin_us);

}  // namespace remsim
