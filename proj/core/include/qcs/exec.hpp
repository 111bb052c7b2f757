#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "qcs/envelope.hpp"
#include "qcs/isa.hpp"
#include "qcs/measure.hpp"
#include "qcs/synth.hpp"

namespace qcs {

// The 32-bit measurement register shared by all channels. Only the
// measurement unit writes it; sequencers read it for conditionals.
struct MeasurementRegister {
  uint32_t value = 0;

  bool bit(int i) const { return (value >> i) & 1u; }
  void set_bit(int i, bool v) {
    if (v) value |= 1u << i;
    else value &= ~(1u << i);
  }
};

struct RegisterWrite {
  uint64_t cycle = 0;
  uint8_t bit = 0;
  bool value = false;
};

// One cycle of quantized DAC output: 5 samples per live channel, I/Q
// interleaved (DC-path channels carry the level in I with Q zero).
struct ChannelSamples {
  std::array<int16_t, 2 * kSamplesPerCycle> iq{};
};

struct SampleFrame {
  uint64_t cycle = 0;
  std::vector<ChannelSamples> channels;  // parallel to Controller::live_channels()
};

// Post-DSP, pre-quantization observation point. `ftw` is the channel's
// current tuning word, which instrument models use to track the carrier
// between samples.
class PrequantTap {
 public:
  virtual ~PrequantTap() = default;
  virtual void consume(uint64_t cycle, const double* i, const double* q,
                       int n_samples, uint32_t ftw) = 0;
};

// Produces the ADC window for a readout trigger. The default source
// returns all-zero samples.
class AdcSource {
 public:
  virtual ~AdcSource() = default;
  virtual std::vector<int16_t> window(const MuTrigger& trigger,
                                      const ReadoutParams& params) = 0;
};

class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void frame(const SampleFrame& f) = 0;
};

struct SyncResume {
  uint64_t edge_cycle = 0;
  std::vector<int> channels;
};

struct StepEvents {
  std::vector<MuTrigger> triggers;
  std::vector<bool> outcomes;  // parallel to triggers
  std::vector<RegisterWrite> register_writes;
  std::optional<SyncResume> sync_resume;
};

struct RunResult {
  uint64_t cycles = 0;
  uint64_t trace_hash = 0;  // FNV-1a over (cycle, samples) of every frame
  std::vector<MuTrigger> triggers;
  std::vector<RegisterWrite> register_writes;
  std::vector<SyncResume> sync_resumes;
  std::vector<bool> outcomes;  // per readout trigger, in trigger order
  uint32_t final_register = 0;
  uint32_t measured_mask = 0;
};

struct ControllerConfig {
  DspConfig dsp;
  EnvelopeLibrary envelopes;
  ReadoutTable readout_table;
  std::vector<std::pair<int, int>> stat_pairs;
  std::size_t capture_capacity = 0;
  std::vector<uint64_t> sync_edges;  // external trigger rising edges, ascending
  uint64_t max_cycles = 0;           // run() guard, 0 = unbounded
};

// Per-channel sequencer state. Channels run in lock step: every step()
// call advances every channel by exactly one cycle and produces exactly
// 5 samples per channel, so instruction boundaries never create gaps.
struct ChannelState {
  // program position
  const std::vector<Instruction>* sequence = nullptr;
  uint32_t pc = 0;
  uint64_t remaining_cycles = 0;
  bool halted = true;
  bool blocked_on_sync = false;

  // current instruction window
  bool gate_on = false;
  bool suppressed = false;   // condition failed: timed silent no-op
  bool rect_hold = false;    // WAIT on: hold latched tone, unit envelope
  EnvelopeCursor cursor;

  // latched synthesis parameters; the NCO accumulator is never reset
  Nco nco;
  int16_t amplitude_word = 0;
  uint8_t envelope_id = 0;

  // DSP chain state
  PathKind path = PathKind::RF;
  FirFilter fir_i;
  FirFilter fir_q;
  DelayLine skew_i;
  DelayLine skew_q;
  DcRamp dc;
  uint32_t dc_ramp_cycles = 0;
};

// A single 22-channel controller. Construction validates the program
// against the configuration (ConfigError on out-of-range channels,
// missing readout table entries, or missing envelopes). Channels with no
// program stay halted and do not appear in frames.
class Controller {
 public:
  Controller(Program program, ControllerConfig config);

  // Advances one 5 ns cycle. The frame is resized as needed and reused.
  void step(SampleFrame& frame, StepEvents* events = nullptr);

  // Runs to halt (all channels done). Scheduled sync edges fire on their
  // cycle; if every live channel is blocked on SYNC and no edge is left,
  // raises DeadlockError. Frames go to `sink` when given; the trace hash
  // is computed either way.
  RunResult run(FrameSink* sink = nullptr);

  // External trigger rising edge during the current cycle; channels
  // blocked on SYNC resume with their next instruction one cycle later.
  void sync_edge_now() { edge_this_cycle_ = true; }

  bool halted() const;
  uint64_t cycle() const { return cycle_; }
  const std::vector<int>& live_channels() const { return live_; }
  const MeasurementRegister& measurement_register() const { return reg_; }
  const ChannelState& channel(int ch) const { return channels_.at(ch); }
  MeasurementUnit& mu() { return mu_; }
  const MeasurementUnit& mu() const { return mu_; }
  uint32_t measured_mask() const { return measured_mask_; }

  void set_prequant_tap(int channel, PrequantTap* tap);
  void set_adc_source(AdcSource* source) { adc_source_ = source; }

 private:
  void fetch(int ch, StepEvents* events);
  void begin_window(int ch, const Instruction& instr, StepEvents* events);

  Program program_;
  ControllerConfig config_;
  MeasurementUnit mu_;
  MeasurementRegister reg_;
  std::array<ChannelState, kNumChannels> channels_{};
  std::array<PrequantTap*, kNumChannels> taps_{};
  AdcSource* adc_source_ = nullptr;
  std::vector<int> live_;
  uint64_t cycle_ = 0;
  std::size_t next_edge_ = 0;
  bool edge_this_cycle_ = false;
  uint32_t measured_mask_ = 0;

  struct PendingWrite {
    uint64_t cycle;
    uint8_t bit;
    bool value;
  };
  std::vector<PendingWrite> pending_writes_;

  // scratch buffers for one cycle of one channel
  std::array<double, kSamplesPerCycle> buf_i_{};
  std::array<double, kSamplesPerCycle> buf_q_{};
};

class CollectSink : public FrameSink {
 public:
  void frame(const SampleFrame& f) override { frames.push_back(f); }
  std::vector<SampleFrame> frames;
};

class ZeroAdcSource : public AdcSource {
 public:
  std::vector<int16_t> window(const MuTrigger& trigger, const ReadoutParams&) override {
    return std::vector<int16_t>(trigger.window_cycles * kSamplesPerCycle, 0);
  }
};

// Constant-level source, handy for exercising thresholds without a qubit.
class FixedLevelAdcSource : public AdcSource {
 public:
  explicit FixedLevelAdcSource(double level) : level_(level) {}
  std::vector<int16_t> window(const MuTrigger& trigger, const ReadoutParams&) override {
    return std::vector<int16_t>(trigger.window_cycles * kSamplesPerCycle,
                                quantize(level_));
  }

 private:
  double level_;
};

}  // namespace qcs
