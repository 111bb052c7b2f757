#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qcs/common.hpp"

namespace qcs {

// State discrimination schemes: boxcar integration of a baseband charge
// sensor, or demodulation of a reflectometry tone followed by IQ rotation
// and a threshold on the rotated I axis.
enum class ReadoutMode { ChargeSensing, Reflectometry };
enum class Polarity { AboveIsOne, BelowIsOne };

struct ReadoutParams {
  ReadoutMode mode = ReadoutMode::ChargeSensing;
  uint32_t window_cycles = 1;       // nominal window; the RDO instruction's
                                    // duration sets the actual window
  double threshold = 0.0;           // integrator units: sum of full-scale
                                    // sample fractions over the window
  Polarity polarity = Polarity::AboveIsOne;
  uint8_t target_bit = 0;           // measurement register bit 0..31
  uint32_t readout_ftw = 0;         // reflectometry probe/demodulation tone
  uint16_t rotation_phase_word = 0; // IQ rotation before thresholding
};

struct ReadoutTable {
  std::vector<ReadoutParams> entries;

  static ReadoutTable from_json_text(const std::string& text);
  static ReadoutTable load(const std::string& path);
  std::string to_json_text() const;
};

// Emitted by the sequencer when an RDO instruction starts. The phase seed
// is the issuing channel's NCO accumulator at the window start, which
// keeps the demodulator phase-coherent with pulse generation.
struct MuTrigger {
  uint64_t cycle = 0;
  int channel = 0;
  uint8_t table_index = 0;
  uint64_t window_cycles = 1;
  uint32_t nco_phase_seed = 0;
};

struct RdoResult {
  bool outcome = false;
  double integral_i = 0.0;  // rotated I for reflectometry, boxcar sum otherwise
  double integral_q = 0.0;
};

// Pure discrimination: same samples and parameters always give the same
// result, which is what makes offline reprocessing of raw captures agree
// with the live data path bit for bit. The ADC block must hold exactly
// window_cycles * 5 samples (LengthMismatch otherwise).
RdoResult process_rdo(const ReadoutParams& params, const MuTrigger& trigger,
                      std::span<const int16_t> adc);

// Per-bit outcome tallies plus 2x2 joint tables for configured bit pairs.
// One accumulate() call is one shot; only bits in measured_mask count, so
// marginals of a pair equal the per-bit counts whenever both bits are
// measured in the same shots. Accumulation is associative: merging
// batch statistics equals accumulating the union shot by shot.
class ShotStatistics {
 public:
  struct BitCounts {
    uint64_t zeros = 0;
    uint64_t ones = 0;
  };
  struct PairTable {
    int bit_a = 0;
    int bit_b = 0;
    std::array<std::array<uint64_t, 2>, 2> counts{};  // [value_a][value_b]
  };

  void configure_pair(int bit_a, int bit_b);
  void accumulate(uint32_t snapshot, uint32_t measured_mask);
  void merge(const ShotStatistics& other);

  uint64_t shots() const { return shots_; }
  const BitCounts& bit(int i) const { return bits_.at(static_cast<size_t>(i)); }
  const std::vector<PairTable>& pairs() const { return pairs_; }

  std::string to_json_text() const;

 private:
  std::array<BitCounts, 32> bits_{};
  std::vector<PairTable> pairs_;
  uint64_t shots_ = 0;
};

// Ring buffer of raw ADC windows; when full, the oldest entry is evicted.
struct CaptureEntry {
  uint64_t shot_index = 0;     // global readout event number
  uint8_t table_index = 0;
  int channel = 0;
  uint64_t trigger_cycle = 0;
  uint32_t nco_phase_seed = 0;
  bool outcome = false;        // live discrimination result
  std::vector<int16_t> samples;
};

class RawCapture {
 public:
  explicit RawCapture(std::size_t capacity = 0) : capacity_(capacity) {}

  void push(CaptureEntry entry);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  uint64_t total_pushed() const { return total_; }
  // Index 0 is the oldest retained entry.
  const CaptureEntry& entry(std::size_t i) const;

  // Little-endian binary export: { "QCR1", u16 version, u16 zero,
  // u64 shot count, u32 window samples, u32 sample rate } followed by the
  // 16-bit samples of each retained window, oldest first. All retained
  // windows must share one length (LengthMismatch otherwise).
  void export_binary(const std::string& path) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  uint64_t total_ = 0;
  std::vector<CaptureEntry> entries_;
};

// Readout processing unit: a parameter table plus live statistics and an
// optional raw window capture.
class MeasurementUnit {
 public:
  MeasurementUnit() = default;
  MeasurementUnit(ReadoutTable table, std::size_t capture_capacity,
                  std::vector<std::pair<int, int>> stat_pairs);

  bool has_entry(uint8_t index) const {
    return index < table_.entries.size();
  }
  const ReadoutParams& params(uint8_t index) const;

  // Discriminates one window, captures it, and returns the result.
  RdoResult handle(const MuTrigger& trigger, std::vector<int16_t> adc);

  void accumulate_shot(uint32_t snapshot, uint32_t measured_mask) {
    stats_.accumulate(snapshot, measured_mask);
  }

  const ShotStatistics& stats() const { return stats_; }
  const RawCapture& capture() const { return capture_; }

 private:
  ReadoutTable table_;
  ShotStatistics stats_;
  RawCapture capture_{0};
  uint64_t next_shot_index_ = 0;
};

}  // namespace qcs
