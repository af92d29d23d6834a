#pragma once

#include "remsim/config.hpp"
#include "remsim/rng.hpp"

namespace remsim {

enum class PulseShape { square_chirp, gaussian };
enum class TargetTransition { sp_low, sp_high, sf_red, sf_blue };

struct PulseSpec {
  PulseShape shape = PulseShape::gaussian;
  // gaussian: envelope FWHM; square_chirp: sweep length
  double duration_us = 1;
  double chirp_rate_mhz_per_us = 0;  // square_chirp only
  double sweep_span_mhz = 0;
  double rabi_peak_mhz = 0;
  double carrier_detuning_mhz = 0;
  double phase = 0;  // radians, rotation-axis azimuth
  TargetTransition target = TargetTransition::sp_low;

  void validate() const;
};

struct NoiseModel {
  double ou_sigma_mhz = 0;
  double ou_tau_ms = 1000;
  double shf_depth = 0;  // nuclear-spin envelope modulation, off by default
  double shf_frequency_mhz = 0;
  bool pure_dephasing_enabled = true;

  void validate() const;
  static NoiseModel from_config(const Config& cfg);
};

struct EmitterDynamicState {
  enum class Spin { low, high };
  enum class Electronic { ground, excited };
  Spin spin = Spin::low;
  Electronic electronic = Electronic::ground;
  // Bloch vector of the driven optical transition; w = -1 is ground
  double u = 0, v = 0, w = -1;
  double ou_offset_mhz = 0;
  double time_us = 0;

  double excited_population() const { return (1 + w) / 2; }
};

// Landau-Zener transfer for a linear sweep crossing the emitter:
// 1 - exp(-pi rabi^2 / (2 chirp)), rabi and chirp taken as given (the sweep
// dynamics treat them as angular rad/us and rad/us^2, which is what makes
// this expression dimensionless as written). Outside the swept band the
// off-resonant residual 0.5 rabi^2/(rabi^2 + delta_min^2) is returned.
// detuning_at_start is emitter minus laser frequency at sweep start; the
// sweep moves up by sweep_span.
double rap_excitation_probability(const PulseSpec& pulse,
                                  double detuning_at_start_mhz);

// Bloch rotation under a Gaussian envelope. On resonance (carrier plus
// current noise offset zero) the rotation angle is
// theta = 2 pi rabi_peak_MHz * envelope area; detuned pulses are integrated
// as piecewise-constant rotations across +-2 FWHM.
EmitterDynamicState gaussian_pulse_rotation(const PulseSpec& pulse,
                                            EmitterDynamicState state);

struct SpinBranching {
  double q_flip = 0;  // per-decay spin randomization probability
};

enum class DecayChannel { sp_cavity, sf_free };

struct DecayEvent {
  double emission_time_us = 0;  // measured from the decay start
  DecayChannel channel = DecayChannel::sp_cavity;
  EmitterDynamicState::Spin new_spin = EmitterDynamicState::Spin::low;
};

DecayEvent sample_decay(const EmitterDynamicState& state, double purcell,
                        double bulk_lifetime_ms, const SpinBranching& branching,
                        Rng& rng);

}  // namespace remsim
