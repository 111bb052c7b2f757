#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qcs/exec.hpp"

namespace qcs {

// Single spin qubit behind one drive channel. Drive amplitude 1.0 (full
// scale) produces a Rabi frequency of rabi_rate_hz_per_unit. Dephasing is
// a per-shot quasi-static detuning draw (Gaussian decay with t2_star_s)
// plus white frequency noise (exponential decay with t2_echo_s, which an
// echo cannot refocus). Readout has limited visibility v: the reported
// excited-state probability is 0.5 + v * (p_true - 0.5).
struct QubitParams {
  int drive_channel = 0;
  double f_qubit_hz = 62.5e6;
  double rabi_rate_hz_per_unit = 10.0e6;
  double t2_star_s = 1.2e-6;
  double t2_echo_s = 115.0e-6;
  double visibility = 0.30;
  double detuning_offset_hz = 0.0;
  bool noise_enabled = true;

  // ADC waveform synthesis for readout windows, full-scale fractions
  double readout_level0 = -0.25;
  double readout_level1 = 0.25;
  double readout_noise_sigma = 0.02;

  static QubitParams from_json_text(const std::string& text);
  static QubitParams load(const std::string& path);
  std::string to_json_text() const;
};

struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;  // +1 is the ground state; p1 = (1 - z) / 2
};

// Evolves one Bloch vector sample by sample. Works in the frame rotating
// at the qubit's nominal frequency (quantized to the tuning-word grid;
// the sub-resolution residue folds into the static detuning). Each
// drive sample applies an exact constant-field propagator, so segments
// with fixed amplitude and frequency compose to the closed-form
// generalized Rabi rotation with no per-sample integration error.
class BlochEvolver {
 public:
  BlochEvolver(const QubitParams& params, uint64_t seed);

  // One 1 ns drive sample: post-correction I/Q in full-scale units plus
  // the tuning word of the synthesizing NCO.
  void drive_sample(double i, double q, uint32_t ftw);

  // Undriven evolution: deterministic frame precession plus one lumped
  // white-noise phase draw covering the whole stretch.
  void idle(uint64_t samples);

  struct Projection {
    bool true_outcome = false;  // collapse result
    bool reported = false;      // after classification error
  };

  // Projective measurement in z, then a classification flip with
  // probability (1 - visibility) / 2. Collapses the state.
  Projection project();

  const BlochState& state() const { return state_; }
  double p1_true() const { return 0.5 * (1.0 - state_.z); }
  double quasistatic_detuning_hz() const { return delta_shot_; }
  std::mt19937_64& rng() { return rng_; }

 private:
  QubitParams p_;
  BlochState state_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  uint32_t fq_ftw_ = 0;
  uint32_t demod_acc_ = 0;     // frame phase on the tuning-word grid
  double delta_static_ = 0.0;  // Hz: configured offset + frame residue
  double delta_shot_ = 0.0;    // Hz: per-shot quasi-static draw
  double sigma_white_hz_ = 0.0;
  double flip_probability_ = 0.0;
};

// Recorded drive waveform for Monte Carlo replay: synthesize once, then
// evolve any number of noise realizations without rerunning the engine.
struct DriveRecord {
  struct Sample {
    double i = 0.0;
    double q = 0.0;
    uint32_t ftw = 0;
  };
  struct Segment {
    uint64_t idle_samples = 0;      // when nonzero, a silent stretch
    std::vector<Sample> samples;    // otherwise active samples
  };
  std::vector<Segment> segments;
  uint64_t total_samples = 0;

  void truncate(uint64_t keep_samples);
};

class DriveRecorder : public PrequantTap {
 public:
  void consume(uint64_t cycle, const double* i, const double* q, int n_samples,
               uint32_t ftw) override;
  DriveRecord take();

 private:
  DriveRecord record_;
  uint64_t pending_idle_ = 0;
};

void replay_drive(const DriveRecord& record, BlochEvolver& evolver);

// Live binding of a qubit into a controller: consumes the drive channel's
// output and serves readout windows. The ADC block is synthesized at the
// reported outcome's level, so the measurement unit's thresholding
// reproduces the outcome and captured windows replay bit-exactly.
class QubitSim : public PrequantTap, public AdcSource {
 public:
  QubitSim(const QubitParams& params, uint64_t seed)
      : params_(params), evolver_(params, seed) {}

  void consume(uint64_t cycle, const double* i, const double* q, int n_samples,
               uint32_t ftw) override;
  std::vector<int16_t> window(const MuTrigger& trigger,
                              const ReadoutParams& params) override;

  BlochEvolver& evolver() { return evolver_; }
  const std::vector<BlochEvolver::Projection>& projections() const {
    return projections_;
  }

 private:
  QubitParams params_;
  BlochEvolver evolver_;
  std::vector<BlochEvolver::Projection> projections_;
};

}  // namespace qcs
