#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qcs {

// Hardware-wide constants. The controller runs a 200 MHz instruction clock
// (5 ns cycles) driving DACs at 1 GSa/s, i.e. 5 samples per cycle.
inline constexpr double kSampleRateHz = 1.0e9;
inline constexpr double kCycleSeconds = 5.0e-9;
inline constexpr double kSamplePeriodSeconds = 1.0e-9;
inline constexpr int kSamplesPerCycle = 5;
inline constexpr int kNumChannels = 22;
inline constexpr int kEnvelopeTablePoints = 4096;
inline constexpr const char* kVersionString = "1.0.0";

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct FieldRangeError : Error {
  explicit FieldRangeError(const std::string& msg) : Error(msg) {}
};

struct DecodeError : Error {
  explicit DecodeError(const std::string& msg) : Error(msg) {}
};

struct SyntaxError : Error {
  SyntaxError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct UnknownMnemonic : Error {
  UnknownMnemonic(const std::string& mnemonic, int line)
      : Error("unknown mnemonic '" + mnemonic + "' (line " +
              std::to_string(line) + ")"),
        line(line) {}
  int line;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct UnknownEnvelope : Error {
  explicit UnknownEnvelope(int id)
      : Error("unknown envelope id " + std::to_string(id)) {}
};

struct LengthMismatch : Error {
  explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

struct DeadlockError : Error {
  explicit DeadlockError(const std::string& msg) : Error(msg) {}
};

struct RoleError : Error {
  explicit RoleError(const std::string& msg) : Error(msg) {}
};

struct SyncTimeout : Error {
  explicit SyncTimeout(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// FNV-1a, used for trace and file fingerprints. Stable across platforms.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ull;
    }
  }
  template <typename T>
  void update_value(const T& v) {
    update(&v, sizeof(v));
  }
  uint64_t value() const { return state_; }

 private:
  uint64_t state_ = 0xcbf29ce484222325ull;
};

uint64_t hash_bytes(const void* data, std::size_t n);

// SplitMix64. Used to derive independent seeds for per-shot substreams so
// shot k's randomness does not depend on how many draws earlier shots made.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x51a9b2c3d4e5f601ull));
}

}  // namespace qcs
