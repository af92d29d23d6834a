#include "remsim/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "remsim/csv.hpp"
#include "remsim/parallel.hpp"
#include "remsim/rng.hpp"

namespace remsim {

void DetectorConfig::validate() const {
  if (efficiency < 0 || efficiency > 1 || path_efficiency < 0 || path_efficiency > 1)
    throw ConfigError("detector: efficiencies outside [0,1]");
  if (dead_time_us < 0) throw ConfigError("detector.dead_time_us < 0");
  if (dark_rate_hz < 0) throw ConfigError("detector.dark_rate_hz < 0");
  if (gate_window_us <= 0) throw ConfigError("detector.gate_window_us <= 0");
}

DetectorConfig DetectorConfig::from_config(const Config& cfg) {
  DetectorConfig d;
  d.efficiency = cfg.num("detector", "efficiency", d.efficiency);
  d.dark_rate_hz = cfg.num("detector", "dark_rate_hz", d.dark_rate_hz);
  d.dead_time_us = cfg.num("detector", "dead_time_us", d.dead_time_us);
  d.gate_window_us = cfg.num("detector", "gate_window_us", d.gate_window_us);
  d.path_efficiency = cfg.num("detector", "path_efficiency", d.path_efficiency);
  d.validate();
  return d;
}

const char* to_string(TagChannel c) {
  switch (c) {
    case TagChannel::freq_a: return "freq_a";
    case TagChannel::freq_b: return "freq_b";
    case TagChannel::dark: return "dark";
  }
  return "?";
}

namespace {

constexpr std::size_t kPulseBlock = 65536;

TagChannel drive_channel(long pulse, bool alternating) {
  return alternating && (pulse % 2) ? TagChannel::freq_b : TagChannel::freq_a;
}

}  // namespace

TimeTagSeries detect_stream(const std::vector<Emission>& emissions,
                            const DetectorConfig& cfg, const PulseSchedule& schedule,
                            double outcoupling_efficiency, uint64_t seed,
                            int workers) {
  cfg.validate();
  if (schedule.window_us > schedule.period_us)
    throw ConfigError("detect_stream: gate window exceeds pulse period");
  const double p_detect =
      cfg.efficiency * cfg.path_efficiency * outcoupling_efficiency;

  auto blocks = chunked_map<std::vector<TimeTag>>(
      static_cast<std::size_t>(schedule.n_pulses), kPulseBlock, workers,
      [&](std::size_t chunk, std::size_t first_pulse, std::size_t last_pulse) {
        Rng rng = Rng::substream(seed, 0xde7, chunk);
        std::vector<TimeTag> out;
        // emissions are ordered by pulse; find this block's slice
        const auto lo = std::lower_bound(
            emissions.begin(), emissions.end(), static_cast<long>(first_pulse),
            [](const Emission& e, long p) { return e.pulse_index < p; });
        auto it = lo;
        std::vector<TimeTag> window;
        for (std::size_t p = first_pulse; p < last_pulse; ++p) {
          window.clear();
          const double t0 = static_cast<double>(p) * schedule.period_us;
          for (; it != emissions.end() &&
                 it->pulse_index == static_cast<long>(p);
               ++it) {
            const double dt = it->time_us - t0;
            if (dt < 0 || dt > schedule.window_us) continue;  // outside the gate
            if (rng.bernoulli(p_detect))
              window.push_back({it->time_us, static_cast<long>(p),
                                drive_channel(static_cast<long>(p),
                                              schedule.alternating)});
          }
          const long darks =
              rng.poisson(cfg.dark_rate_hz * schedule.window_us * 1e-6);
          for (long d = 0; d < darks; ++d)
            window.push_back({t0 + rng.uniform() * schedule.window_us,
                              static_cast<long>(p), TagChannel::dark});
          std::sort(window.begin(), window.end(),
                    [](const TimeTag& a, const TimeTag& b) {
                      return a.timestamp_us < b.timestamp_us;
                    });
          // dead time restarts at the gate edge, so the first tag survives
          double last_kept = -1e18;
          for (const auto& tag : window) {
            if (tag.timestamp_us - last_kept < cfg.dead_time_us) continue;
            last_kept = tag.timestamp_us;
            out.push_back(tag);
          }
        }
        return out;
      });

  TimeTagSeries series;
  series.schedule = schedule;
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  series.tags.reserve(total);
  for (const auto& b : blocks)
    series.tags.insert(series.tags.end(), b.begin(), b.end());
  return series;
}

void write_time_tags(const TimeTagSeries& series, const std::string& path) {
  CsvWriter csv(path, {"timestamp_us", "pulse_index", "channel"});
  for (const auto& tag : series.tags)
    csv.raw_row(csv_num(tag.timestamp_us) + "," + std::to_string(tag.pulse_index) +
                "," + to_string(tag.channel));
}

TimeTagSeries read_time_tags(const std::string& path,
                             const PulseSchedule& schedule) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tag file: " + path);
  TimeTagSeries series;
  series.schedule = schedule;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty tag file: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 3)
      throw std::runtime_error("bad tag row: " + line);
    TimeTag tag;
    tag.timestamp_us = std::stod(cells[0]);
    tag.pulse_index = std::stol(cells[1]);
    if (cells[2] == "freq_a")
      tag.channel = TagChannel::freq_a;
    else if (cells[2] == "freq_b")
      tag.channel = TagChannel::freq_b;
    else if (cells[2] == "dark")
      tag.channel = TagChannel::dark;
    else
      throw std::runtime_error("bad tag channel: " + cells[2]);
    series.tags.push_back(tag);
  }
  return series;
}

CorrelationEstimate pulsed_g2(const TimeTagSeries& series, long max_lag,
                              bool same_channel) {
  if (series.tags.size() < 2)
    throw std::runtime_error("insufficient statistics");
  if (max_lag < 1) throw std::invalid_argument("pulsed_g2: max_lag < 1");
  const long n_pulses = series.schedule.n_pulses;
  const bool alternating = series.schedule.alternating;

  // tag counts per pulse, sparse (pulse, count), ascending
  std::vector<std::pair<long, double>> counts;
  for (const auto& tag : series.tags) {
    if (!counts.empty() && counts.back().first == tag.pulse_index)
      counts.back().second += 1;
    else
      counts.emplace_back(tag.pulse_index, 1.0);
  }

  double sum_even = 0, sum_odd = 0, pairs_zero = 0, total_tags = 0;
  for (const auto& [p, n] : counts) {
    total_tags += n;
    // without alternation every pulse belongs to the single drive channel
    if (!alternating || p % 2 == 0)
      sum_even += n;
    else
      sum_odd += n;
    pairs_zero += n * (n - 1);
  }
  const double n_even = alternating ? std::ceil(n_pulses / 2.0)
                                    : static_cast<double>(n_pulses);
  const double n_odd = static_cast<double>(n_pulses) - (alternating ? n_even : 0);
  const double rate_even = sum_even / n_even;
  const double rate_odd = alternating ? sum_odd / std::max(n_odd, 1.0) : rate_even;

  CorrelationEstimate est;
  est.mean_tags_per_pulse = total_tags / static_cast<double>(n_pulses);

  // lag grid: same-frequency separations are even when alternating; the
  // cross estimate lives on the odd separations
  const long step = alternating ? 2 : 1;
  const long first = alternating ? (same_channel ? 2 : 1) : 1;
  std::vector<double> coincidences, norms;
  for (long k = first; k <= max_lag; k += step) {
    est.lags.push_back(k);
    coincidences.push_back(0.0);
    norms.push_back(0.0);
  }

  // pair counts via two pointers over the sparse list
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = i + 1; j < counts.size(); ++j) {
      const long k = counts[j].first - counts[i].first;
      if (k > max_lag) break;
      const bool odd = k % 2 != 0;
      if (alternating && (odd == same_channel)) continue;
      if (same_channel && alternating && counts[i].first % 2) continue;
      const std::size_t slot = static_cast<std::size_t>((k - first) / step);
      coincidences[slot] += counts[i].second * counts[j].second;
    }
  }
  // normalization: number of in-range pulse pairs at each lag times the
  // singles rates of the two sides
  for (std::size_t s = 0; s < est.lags.size(); ++s) {
    const long k = est.lags[s];
    double n_pairs;
    double rate_product;
    if (!alternating) {
      n_pairs = static_cast<double>(n_pulses - k);
      rate_product = rate_even * rate_even;
    } else if (same_channel) {
      n_pairs = std::ceil((n_pulses - k) / 2.0);  // even -> even starts
      rate_product = rate_even * rate_even;
    } else {
      n_pairs = static_cast<double>(n_pulses - k);  // either parity start
      rate_product = rate_even * rate_odd;
    }
    norms[s] = n_pairs * rate_product;
    est.g2.push_back(norms[s] > 0 ? coincidences[s] / norms[s] : 0.0);
    est.stderr_.push_back(
        norms[s] > 0 ? std::sqrt(std::max(coincidences[s], 1.0)) / norms[s] : 0.0);
  }

  const double zero_norm =
      static_cast<double>(n_pulses) *
      (alternating ? (rate_even * rate_even + rate_odd * rate_odd) / 2
                   : rate_even * rate_even);
  est.g2_zero = zero_norm > 0 ? pairs_zero / zero_norm : 0.0;
  est.g2_zero_stderr =
      zero_norm > 0 ? std::sqrt(std::max(pairs_zero, 1.0)) / zero_norm : 0.0;
  return est;
}

double background_correct(double raw_g2_zero, double signal_fraction) {
  if (!(signal_fraction > 0) || signal_fraction > 1)
    throw std::invalid_argument("background_correct: signal fraction outside (0,1]");
  const double rho2 = signal_fraction * signal_fraction;
  return (raw_g2_zero - (1 - rho2)) / rho2;
}

BunchingFit bunching_fit(const CorrelationEstimate& est) {
  BunchingFit out;
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < est.lags.size(); ++i) {
    x.push_back(static_cast<double>(est.lags[i]));
    y.push_back(est.g2[i]);
    const double s = est.stderr_[i] > 0 ? est.stderr_[i] : 1.0;
    w.push_back(1.0 / (s * s));
  }
  if (x.size() < 4) throw std::runtime_error("bunching_fit: too few lags");

  // shoulder sign and scale from the first lags vs the tail
  double head = 0;
  const std::size_t n_head = std::min<std::size_t>(5, x.size() / 2);
  for (std::size_t i = 0; i < n_head; ++i) head += y[i] - 1.0;
  head /= static_cast<double>(n_head);
  const double a0 = head;
  const double k0 = x[x.size() / 2];

  const ModelFn model = [](double k, const std::vector<double>& p) {
    return 1.0 + p[0] * std::exp(-k / std::abs(p[1]));
  };
  out.fit = least_squares(model, x, y, w, {a0 == 0 ? 0.1 : a0, k0},
                          {"amplitude", "decay_attempts"});
  out.amplitude = out.fit.params[0];
  out.decay_attempts = std::abs(out.fit.params[1]);
  out.decay_attempts_stderr = out.fit.stderrs[1];
  out.shoulders_present =
      std::abs(out.amplitude) > 2 * out.fit.stderrs[0] && out.fit.converged;
  if (!out.shoulders_present) out.amplitude = 0;
  return out;
}

Histogram1D fluorescence_bins(const TimeTagSeries& series, double bin_us) {
  if (bin_us <= 0) throw std::invalid_argument("fluorescence_bins: bin <= 0");
  const double window = series.schedule.window_us;
  const auto nbins = static_cast<std::size_t>(std::ceil(window / bin_us));
  Histogram1D hist(0.0, nbins * bin_us, nbins);
  for (const auto& tag : series.tags)
    hist.add(tag.timestamp_us -
             static_cast<double>(tag.pulse_index) * series.schedule.period_us);
  return hist;
}

}  // namespace remsim
