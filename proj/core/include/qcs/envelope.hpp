#pragma once

#include <map>
#include <string>
#include <vector>

#include "qcs/common.hpp"

namespace qcs {

// Pulse envelopes are 4096-point shape tables played back with linear
// interpolation, stretched over whatever pulse length an instruction
// carries. Envelope id 0 is the rectangular (all ones) envelope and is
// reserved; it cannot be redefined.
struct Envelope {
  std::string name;
  std::vector<double> points;  // exactly kEnvelopeTablePoints
};

Envelope make_gaussian(const std::string& name, double sigma_fraction);
Envelope make_triangle(const std::string& name);
Envelope make_flattop(const std::string& name, double edge_fraction);

class EnvelopeLibrary {
 public:
  // Registers a shape under id 1..255. Throws ConfigError for id 0, an id
  // out of range, or a table whose size is not 4096.
  void set(int id, Envelope envelope);

  bool contains(int id) const;              // id 0 is always present
  const Envelope& at(int id) const;         // throws UnknownEnvelope; not for id 0
  std::vector<int> ids() const;             // registered ids, ascending, without 0

  // Stretched lookup: position k of an n-sample pulse maps to
  // u = k * 4095 / (n - 1), so sample 0 plays table[0] and sample n-1
  // plays table[4095]. Id 0 returns 1.0. Throws UnknownEnvelope.
  double value(int id, uint64_t k, uint64_t n_samples) const;

  // On-disk form: a JSON index {"version", "envelopes": [{id, name, file}]}
  // next to one raw little-endian float64 file per table.
  void save(const std::string& index_path) const;
  static EnvelopeLibrary load(const std::string& index_path);

 private:
  std::map<int, Envelope> envelopes_;
};

// Incremental playback cursor for one pulse, hoisting the per-sample
// stretch arithmetic out of the synthesis loop.
class EnvelopeCursor {
 public:
  EnvelopeCursor() = default;  // rectangular
  EnvelopeCursor(const Envelope* envelope, uint64_t n_samples)
      : table_(envelope ? envelope->points.data() : nullptr),
        step_(envelope && n_samples > 1
                  ? static_cast<double>(kEnvelopeTablePoints - 1) /
                        static_cast<double>(n_samples - 1)
                  : 0.0) {}

  double next() {
    if (table_ == nullptr) return 1.0;
    const double u = pos_;
    pos_ += step_;
    int i = static_cast<int>(u);
    if (i >= kEnvelopeTablePoints - 1) return table_[kEnvelopeTablePoints - 1];
    const double frac = u - i;
    return table_[i] * (1.0 - frac) + table_[i + 1] * frac;
  }

 private:
  const double* table_ = nullptr;
  double pos_ = 0.0;
  double step_ = 0.0;
};

}  // namespace qcs
