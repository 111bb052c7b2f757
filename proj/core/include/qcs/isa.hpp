#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qcs/common.hpp"

namespace qcs {

// Instruction set of the control processor. Each channel runs its own
// ordered sequence; one instruction occupies an integer number of 5 ns
// cycles and the next one starts on the cycle immediately after, so there
// is never dead time between instructions on a channel.
enum class Opcode : uint8_t {
  STA = 0,   // set amplitude (+ envelope), optionally emit
  STF = 1,   // set NCO frequency tuning word, optionally emit
  STP = 2,   // set NCO phase offset (+ envelope), optionally emit
  STAP = 3,  // set amplitude and phase together, optionally emit
  WAIT = 4,  // idle (off) or hold the latched tone (on) for a duration
  SYNC = 5,  // block until the external trigger's rising edge
  RDO = 6,   // start a readout window handled by the measurement unit
};

const char* opcode_name(Opcode op);

// Conditional execution against the shared 32-bit measurement register.
// A disabled condition always passes; its bit/level are canonically zero.
// The instruction encoding addresses register bits 0..15 only; the upper
// half of the register is reserved for future encodings.
struct Condition {
  bool enabled = false;
  uint8_t register_bit = 0;
  bool required_level = false;

  bool operator==(const Condition&) const = default;
};

inline constexpr int kMaxConditionBit = 15;

// One decoded instruction. Fields not used by an opcode are zero in
// canonical form (see canonicalize). Amplitude is a signed fraction of
// full scale: -32768 -> -1.0, +32767 -> +1.0 - 2^-15. Phase words are in
// turns: phase = phase_word * 2*pi / 2^16. Frequency tuning words follow
// f = ftw * fs / 2^32.
struct Instruction {
  Opcode opcode = Opcode::STA;
  uint8_t channel = 0;
  uint64_t duration_cycles = 1;
  int16_t amplitude_word = 0;
  uint32_t ftw = 0;
  uint16_t phase_word = 0;
  uint8_t envelope_id = 0;
  uint8_t rdo_index = 0;
  bool active = false;
  Condition condition;

  bool operator==(const Instruction&) const = default;
};

// Durations are stored as mantissa << (2*exponent). Instructions with a
// 16-bit parameter field carry a 20-bit mantissa, the two wide-parameter
// opcodes (STF, STAP) carry a 12-bit mantissa. Everything up to the
// mantissa limit is cycle-exact; longer durations snap to the grid.
uint64_t max_duration_cycles(Opcode op);
bool duration_is_representable(Opcode op, uint64_t cycles);
uint64_t quantize_duration(Opcode op, uint64_t cycles);

// Rewrites an instruction into its canonical encodable form: fields the
// opcode does not use are zeroed (including a disabled condition's bit and
// level) and the duration is snapped to the opcode's representable grid.
// Raises FieldRangeError for values no encoding exists for (bad channel,
// condition bit > 15, zero duration, duration beyond the opcode's range).
Instruction canonicalize(const Instruction& instr);

// 64-bit instruction word. encode canonicalizes first, so
// decode(encode(i)) == canonicalize(i) for every valid instruction and
// encode is injective on canonical instructions. decode accepts any word
// whose ranges are valid and zeroes don't-care bits; it raises DecodeError
// for the unused opcode value 7, a channel >= 22, or a zero duration
// mantissa (which makes the all-zero word invalid by construction).
uint64_t encode(const Instruction& instr);
Instruction decode(uint64_t word);

// A program maps channel -> instruction sequence. Channels without an
// entry are simply never started.
struct Program {
  std::map<int, std::vector<Instruction>> channels;

  bool operator==(const Program&) const = default;
};

// Throws ConfigError if a channel index is out of range or an
// instruction's channel field disagrees with the sequence it sits in.
void validate_program(const Program& program);

// Total cycles a sequence occupies, counting SYNC as its minimum single
// cycle (the real duration depends on the trigger).
uint64_t sequence_cycles(const std::vector<Instruction>& seq);

// Binary container: little-endian, 16-byte header
// { "QCP1", u16 version, u16 channel count, u32 total words, u32 zero },
// then one 8-byte {u16 channel, u16 zero, u32 word count} entry per
// channel in ascending order, then the instruction words channel by
// channel. Identical programs serialize to identical bytes.
inline constexpr uint16_t kProgramFormatVersion = 1;

void write_program(const Program& program, std::ostream& out);
Program read_program(std::istream& in);
void save_program(const Program& program, const std::string& path);
Program load_program(const std::string& path);

}  // namespace qcs
