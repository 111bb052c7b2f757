#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qcs/fit.hpp"
#include "qcs/isa.hpp"
#include "qcs/qubit.hpp"

namespace qcs {

// Resonant gate set on one drive channel. The amplitude is quantized to
// the DAC grid first, then pulse lengths are chosen so a pi rotation
// lands on the cycle grid: with the default 10 MHz-per-unit Rabi rate and
// amplitude 0.5, a pi pulse is exactly 20 cycles.
struct GateSet {
  int channel = 0;
  uint32_t ftw = 0;
  int16_t amplitude_word = 0;
  uint64_t pi_cycles = 0;
  uint64_t pi_half_cycles = 0;
  double omega_hz = 0.0;  // Rabi frequency at this amplitude

  Instruction set_frequency() const;                       // STF, one idle cycle
  Instruction pulse(double phase_turns, uint64_t cycles) const;  // STAP on
  Instruction idle(uint64_t cycles) const;                 // WAIT off
};

GateSet make_gate_set(const QubitParams& qubit, double amplitude);

// Synthesizes one single-channel sequence through the full engine and
// returns the post-correction drive waveform for Monte Carlo replay.
DriveRecord synthesize_drive(const QubitParams& qubit,
                             const std::vector<Instruction>& sequence);

struct ChevronConfig {
  double span_hz = 4.0e6;      // detuning sweep, centered on the qubit
  int detuning_points = 21;
  double max_duration_s = 2.0e-6;
  int duration_points = 21;
  double amplitude = 0.5;
  int shots = 0;               // 0: exact state probabilities, no noise
  uint64_t seed = 1;
};

struct GridResult {
  std::vector<double> detuning_hz;
  std::vector<double> duration_s;              // quantized to the cycle grid
  std::vector<std::vector<double>> p1;         // [duration][detuning]
};

GridResult run_rabi_chevron(const QubitParams& qubit, const ChevronConfig& cfg);

struct LinecutConfig {
  double detuning_hz = 0.0;
  double max_duration_s = 2.0e-6;
  int points = 81;
  double amplitude = 0.5;
  int shots = 0;  // 0: exact state probabilities, no noise
  uint64_t seed = 1;
};

struct LinecutResult {
  std::vector<double> duration_s;
  std::vector<double> p1;
  FitResult fit;              // a * sin^2(pi f t) + c
  double fitted_rabi_hz = 0.0;
};

LinecutResult run_rabi_linecut(const QubitParams& qubit, const LinecutConfig& cfg);

// Single-sideband image study: synthesizes a tone, pushes it through a
// modeled modulator imperfection (gain imbalance, phase skew, carrier
// leakage), and measures the image tone with and without the analytic
// inverse correction installed in the channel's correction stage.
struct QmcSweepConfig {
  double gain = 1.05;
  double phase_skew_deg = 3.0;
  double dc_i = 0.0;
  double dc_q = 0.0;
  double tone_hz = kSampleRateHz / 8.0;
  double amplitude = 0.5;
  int fft_points = 8192;
};

struct QmcSweepResult {
  double carrier_db_corrected = 0.0;
  double image_dbc_uncorrected = 0.0;  // image relative to carrier
  double image_dbc_corrected = 0.0;
  double suppression_db = 0.0;         // corrected gain over uncorrected
  int carrier_bin = 0;
  int image_bin = 0;
};

QmcSweepResult run_qmc_sweep(const QmcSweepConfig& cfg);

struct AllXyConfig {
  double amplitude = 0.5;
  int shots = 0;  // 0: exact state probabilities, no noise
  uint64_t seed = 1;
};

struct AllXyResult {
  std::vector<std::string> labels;
  std::vector<double> p1;
};

AllXyResult run_allxy(const QubitParams& qubit, const AllXyConfig& cfg);

struct RamseyConfig {
  double virtual_detuning_hz = 2.0e6;  // phase ramp on the closing pulse
  double tau_max_s = 4.0e-6;
  int points = 41;
  int shots = 10000;
  double amplitude = 0.5;
  uint64_t seed = 1;
};

struct DecayResult {
  std::vector<double> tau_s;
  std::vector<double> p1;
  FitResult fit;
  double fitted_time_s = 0.0;
  double fitted_frequency_hz = 0.0;  // Ramsey only
};

DecayResult run_ramsey(const QubitParams& qubit, const RamseyConfig& cfg);

struct EchoConfig {
  double tau_max_s = 250.0e-6;
  int points = 31;
  int shots = 10000;
  double amplitude = 0.5;
  uint64_t seed = 1;
};

DecayResult run_hahn_echo(const QubitParams& qubit, const EchoConfig& cfg);

struct ResetConfig {
  int shots = 10000;
  double amplitude = 0.5;
  bool prepare_excited = true;
  int readout_channel = 1;
  uint64_t readout_window_cycles = 10;
  uint64_t seed = 1;
};

struct ResetResult {
  uint64_t shots = 0;
  uint64_t first_ones = 0;    // outcomes of the triggering measurement
  uint64_t verify_ones = 0;   // outcomes after conditional correction
  double first_one_fraction = 0.0;
  double verify_one_fraction = 0.0;
  double expected_verify_fraction = 0.0;  // classification-limited floor
};

ResetResult run_active_reset(const QubitParams& qubit, const ResetConfig& cfg);

// CSV/JSON serialization. `header` pairs become leading "# key: value"
// comment lines (CSV) or a "meta" object (JSON).
using MetaHeader = std::vector<std::pair<std::string, std::string>>;

std::string grid_to_csv(const GridResult& r, const MetaHeader& header = {});
std::string grid_to_json(const GridResult& r, const MetaHeader& header = {});
std::string linecut_to_csv(const LinecutResult& r, const MetaHeader& header = {});
std::string linecut_to_json(const LinecutResult& r, const MetaHeader& header = {});
std::string qmc_sweep_to_json(const QmcSweepResult& r, const MetaHeader& header = {});
std::string allxy_to_csv(const AllXyResult& r, const MetaHeader& header = {});
std::string allxy_to_json(const AllXyResult& r, const MetaHeader& header = {});
std::string decay_to_csv(const DecayResult& r, const MetaHeader& header = {});
std::string decay_to_json(const DecayResult& r, const MetaHeader& header = {});
std::string reset_to_json(const ResetResult& r, const MetaHeader& header = {});

}  // namespace qcs
