#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qcs/common.hpp"
#include "qcs/envelope.hpp"

namespace qcs {

// Numerically controlled oscillator. A 32-bit accumulator advances by the
// frequency tuning word once per 1 GSa/s sample, so f = ftw * fs / 2^32
// and the frequency resolution is fs / 2^32 (~0.233 Hz). The phase offset
// word adds phase_offset * 2^16 to the accumulator value at evaluation
// time; the accumulator itself is never rewritten by amplitude or phase
// updates, which keeps the carrier phase-continuous across instructions.
struct Nco {
  uint32_t phase_acc = 0;
  uint32_t ftw = 0;
  uint16_t phase_offset = 0;

  static constexpr double kPhaseScale = 6.283185307179586476925286766559 / 4294967296.0;

  double phase_radians() const {
    return (phase_acc + (static_cast<uint32_t>(phase_offset) << 16)) * kPhaseScale;
  }

  // Emits (cos, sin) at the pre-increment phase, then advances.
  std::pair<double, double> step() {
    const double theta = phase_radians();
    phase_acc += ftw;
    return {std::cos(theta), std::sin(theta)};
  }

  void advance(uint64_t samples) {
    phase_acc += static_cast<uint32_t>(ftw * (samples & 0xffffffffull));
  }
};

// Quadrature modulator correction: out = matrix * (i, q) + dc, with the
// result saturated to [-1, 1]. The identity correction is an exact
// pass-through.
struct QmcParams {
  std::array<std::array<double, 2>, 2> matrix{{{1.0, 0.0}, {0.0, 1.0}}};
  double dc_i = 0.0;
  double dc_q = 0.0;

  bool is_identity() const {
    return matrix[0][0] == 1.0 && matrix[0][1] == 0.0 && matrix[1][0] == 0.0 &&
           matrix[1][1] == 1.0 && dc_i == 0.0 && dc_q == 0.0;
  }
};

inline double saturate(double v) {
  if (v > 1.0) return 1.0;
  if (v < -1.0) return -1.0;
  return v;
}

inline std::pair<double, double> apply_qmc(const QmcParams& p, double i, double q) {
  if (p.is_identity()) return {saturate(i), saturate(q)};
  const double oi = p.matrix[0][0] * i + p.matrix[0][1] * q + p.dc_i;
  const double oq = p.matrix[1][0] * i + p.matrix[1][1] * q + p.dc_q;
  return {saturate(oi), saturate(oq)};
}

// Analytic predistortion for a modulator whose imperfection acts as the
// affine map given by `imperfection`: applying the returned correction
// before that modulator yields the identity. Throws ConfigError when the
// imperfection matrix is singular.
QmcParams qmc_inverse(const QmcParams& imperfection);

inline constexpr int kMaxFirTaps = 64;

// Streaming FIR predistortion filter. The delay line persists across
// block boundaries, so filtering a stream in pieces equals filtering it
// in one call.
class FirFilter {
 public:
  FirFilter() : FirFilter(std::vector<double>{1.0}) {}
  explicit FirFilter(std::vector<double> taps);

  double process(double x) {
    history_[pos_] = x;
    double acc = 0.0;
    int idx = pos_;
    for (double tap : taps_) {
      acc += tap * history_[idx];
      idx = idx == 0 ? static_cast<int>(history_.size()) - 1 : idx - 1;
    }
    pos_ = pos_ + 1 == static_cast<int>(history_.size()) ? 0 : pos_ + 1;
    return acc;
  }

  bool is_unit() const { return taps_.size() == 1 && taps_[0] == 1.0; }
  const std::vector<double>& taps() const { return taps_; }

 private:
  std::vector<double> taps_;
  std::vector<double> history_;
  int pos_ = 0;
};

// Whole-sample skew alignment delay, zero-filled at the head.
class DelayLine {
 public:
  DelayLine() = default;
  explicit DelayLine(int delay_samples);

  double process(double x) {
    if (buffer_.empty()) return x;
    const double out = buffer_[pos_];
    buffer_[pos_] = x;
    pos_ = pos_ + 1 == static_cast<int>(buffer_.size()) ? 0 : pos_ + 1;
    return out;
  }

 private:
  std::vector<double> buffer_;
  int pos_ = 0;
};

inline constexpr int kMaxSkewDelaySamples = 1023;

// Linear level mover for the DC path: each retarget ramps from the
// current level to the new one over ramp_samples outputs (a 0-sample ramp
// is a square step), then holds.
class DcRamp {
 public:
  void retarget(double level, uint64_t ramp_samples) {
    start_ = current_;
    target_ = level;
    ramp_samples_ = ramp_samples;
    k_ = 0;
  }

  double next() {
    if (k_ < ramp_samples_) {
      ++k_;
      current_ = start_ + (target_ - start_) * static_cast<double>(k_) /
                              static_cast<double>(ramp_samples_);
    } else {
      current_ = target_;
    }
    return current_;
  }

  double current() const { return current_; }
  double target() const { return target_; }

 private:
  double current_ = 0.0;
  double start_ = 0.0;
  double target_ = 0.0;
  uint64_t ramp_samples_ = 0;
  uint64_t k_ = 0;
};

// 16-bit DAC quantization: saturate to [-1, 1], scale by 2^15, round half
// to even. +1.0 saturates to 32767, -1.0 maps exactly to -32768.
inline int16_t quantize(double v) {
  double r = std::nearbyint(saturate(v) * 32768.0);
  if (r > 32767.0) r = 32767.0;
  return static_cast<int16_t>(r);
}

enum class PathKind { RF, DC };

struct ChannelDspConfig {
  PathKind path = PathKind::RF;
  QmcParams qmc;
  std::vector<double> fir_taps{1.0};
  int skew_delay_samples = 0;
  uint32_t dc_ramp_cycles = 0;  // rise/fall time for DC level moves
};

struct DspConfig {
  std::array<ChannelDspConfig, kNumChannels> channels{};

  static DspConfig from_json_text(const std::string& text);
  static DspConfig load(const std::string& path);
  std::string to_json_text() const;
};

void validate_dsp_config(const ChannelDspConfig& config);

}  // namespace qcs
