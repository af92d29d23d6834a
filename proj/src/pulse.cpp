#include "remsim/pulse.hpp"

#include <cmath>
#include <stdexcept>

#include "remsim/units.hpp"

namespace remsim {

void PulseSpec::validate() const {
  if (duration_us <= 0) throw ConfigError("pulse.duration_us <= 0");
  if (shape == PulseShape::square_chirp) {
    const double expected = chirp_rate_mhz_per_us * duration_us;
    if (std::abs(sweep_span_mhz - expected) > 1e-9 * std::max(1.0, expected))
      throw ConfigError("pulse: sweep_span must equal chirp_rate * duration");
  }
}

void NoiseModel::validate() const {
  if (ou_sigma_mhz < 0) throw ConfigError("noise: ou_sigma < 0");
  if (ou_tau_ms <= 0) throw ConfigError("noise: ou_tau <= 0");
  if (shf_depth < 0 || shf_depth > 1) throw ConfigError("noise.shf_depth outside [0,1]");
}

NoiseModel NoiseModel::from_config(const Config& cfg) {
  NoiseModel n;
  n.ou_sigma_mhz = cfg.num("noise", "ou_sigma_mhz", n.ou_sigma_mhz);
  n.ou_tau_ms = cfg.num("noise", "ou_tau_ms", n.ou_tau_ms);
  n.shf_depth = cfg.num("noise", "shf_depth", n.shf_depth);
  n.shf_frequency_mhz = cfg.num("noise", "shf_frequency_mhz", n.shf_frequency_mhz);
  n.pure_dephasing_enabled =
      cfg.boolean("noise", "pure_dephasing_enabled", n.pure_dephasing_enabled);
  n.validate();
  return n;
}

double rap_excitation_probability(const PulseSpec& pulse,
                                  double detuning_at_start_mhz) {
  if (pulse.shape != PulseShape::square_chirp)
    throw ConfigError("rap_excitation_probability needs a square_chirp pulse");
  if (pulse.chirp_rate_mhz_per_us == 0) throw ConfigError("not a sweep");
  const double rabi2 = pulse.rabi_peak_mhz * pulse.rabi_peak_mhz;
  if (rabi2 == 0) return 0;
  const double span = std::abs(pulse.sweep_span_mhz);
  const double d = detuning_at_start_mhz;
  if (d >= 0 && d <= span)
    return 1.0 - std::exp(-kPi * rabi2 / (2 * std::abs(pulse.chirp_rate_mhz_per_us)));
  const double delta_min = d < 0 ? -d : d - span;
  return 0.5 * rabi2 / (rabi2 + delta_min * delta_min);
}

namespace {

void rotate(double& u, double& v, double& w, double ax, double ay, double az,
            double dt) {
  const double norm = std::sqrt(ax * ax + ay * ay + az * az);
  if (norm * dt < 1e-14) return;
  const double nx = ax / norm, ny = ay / norm, nz = az / norm;
  const double th = norm * dt;
  const double c = std::cos(th), s = std::sin(th);
  // dr/dt = a x r integrates to a right-handed rotation about a by |a| dt
  const double dot = nx * u + ny * v + nz * w;
  const double cx = ny * w - nz * v;
  const double cy = nz * u - nx * w;
  const double cz = nx * v - ny * u;
  const double nu = u * c + cx * s + nx * dot * (1 - c);
  const double nv = v * c + cy * s + ny * dot * (1 - c);
  const double nw = w * c + cz * s + nz * dot * (1 - c);
  u = nu;
  v = nv;
  w = nw;
}

// envelope area of exp(-4 ln2 t^2/f^2) over +-2f
double gaussian_area(double fwhm) {
  const double a = 4 * std::log(2.0) / (fwhm * fwhm);
  return std::sqrt(kPi / a) * std::erf(std::sqrt(a) * 2 * fwhm);
}

}  // namespace

EmitterDynamicState gaussian_pulse_rotation(const PulseSpec& pulse,
                                            EmitterDynamicState state) {
  if (pulse.shape != PulseShape::gaussian)
    throw ConfigError("gaussian_pulse_rotation needs a gaussian pulse");
  pulse.validate();
  const double detuning = pulse.carrier_detuning_mhz + state.ou_offset_mhz;
  const double cphi = std::cos(pulse.phase), sphi = std::sin(pulse.phase);
  const double f = pulse.duration_us;

  if (detuning == 0) {
    const double theta = 2 * kPi * pulse.rabi_peak_mhz * gaussian_area(f);
    rotate(state.u, state.v, state.w, cphi, sphi, 0, theta);
  } else {
    const int n_slices = 128;
    const double dt = 4 * f / n_slices;
    const double delta_ang = 2 * kPi * detuning;
    for (int i = 0; i < n_slices; ++i) {
      const double t = -2 * f + (i + 0.5) * dt;
      const double env = std::exp(-4 * std::log(2.0) * t * t / (f * f));
      const double omega_ang = 2 * kPi * pulse.rabi_peak_mhz * env;
      rotate(state.u, state.v, state.w, omega_ang * cphi, omega_ang * sphi,
             delta_ang, dt);
    }
  }
  state.time_us += 4 * f;
  state.electronic = state.w > 0 ? EmitterDynamicState::Electronic::excited
                                 : EmitterDynamicState::Electronic::ground;
  return state;
}

DecayEvent sample_decay(const EmitterDynamicState& state, double purcell,
                        double bulk_lifetime_ms, const SpinBranching& branching,
                        Rng& rng) {
  if (state.electronic != EmitterDynamicState::Electronic::excited)
    throw std::logic_error("sample_decay: emitter not excited");
  const double rate_per_us = (1.0 + purcell) / ms_to_us(bulk_lifetime_ms);
  DecayEvent ev;
  ev.emission_time_us = rng.exponential(rate_per_us);
  if (rng.bernoulli(branching.q_flip)) {
    ev.channel = DecayChannel::sf_free;
    ev.new_spin = state.spin == EmitterDynamicState::Spin::low
                      ? EmitterDynamicState::Spin::high
                      : EmitterDynamicState::Spin::low;
  } else {
    ev.channel = DecayChannel::sp_cavity;
    ev.new_spin = state.spin;
  }
  return ev;
}

}  // namespace remsim
