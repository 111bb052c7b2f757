#include "qcs/isa.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace qcs {

namespace {

// Word layout, LSB first. All opcodes share the low 16 bits:
//   [0:3) opcode   [3:8) channel   [8] cond enable   [9] cond level
//   [10:14) cond bit   [14] active   [15] reserved
// Short-parameter opcodes (STA, STP, WAIT, SYNC, RDO):
//   [16:32) param16   [32:40) envelope   [40:60) mantissa   [60:64) exp
// Wide-parameter opcodes (STF, STAP):
//   [16:48) param32   [48:60) mantissa   [60:64) exp
// Duration = mantissa << (2*exp). The envelope field exists only in the
// short format; STF and STAP reuse the channel's latched envelope.
constexpr int kOpcodeShift = 0;
constexpr int kChannelShift = 3;
constexpr int kCondEnableShift = 8;
constexpr int kCondLevelShift = 9;
constexpr int kCondBitShift = 10;
constexpr int kActiveShift = 14;
constexpr int kParamShift = 16;
constexpr int kEnvelopeShift = 32;
constexpr int kShortMantissaShift = 40;
constexpr int kWideMantissaShift = 48;
constexpr int kExponentShift = 60;

constexpr uint64_t kShortMantissaMax = (1ull << 20) - 1;
constexpr uint64_t kWideMantissaMax = (1ull << 12) - 1;
constexpr int kExponentMax = 15;

bool is_wide(Opcode op) { return op == Opcode::STF || op == Opcode::STAP; }

uint64_t mantissa_max(Opcode op) {
  return is_wide(op) ? kWideMantissaMax : kShortMantissaMax;
}

uint64_t field(uint64_t word, int shift, int bits) {
  return (word >> shift) & ((1ull << bits) - 1);
}

}  // namespace

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::STA: return "STA";
    case Opcode::STF: return "STF";
    case Opcode::STP: return "STP";
    case Opcode::STAP: return "STAP";
    case Opcode::WAIT: return "WAIT";
    case Opcode::SYNC: return "SYNC";
    case Opcode::RDO: return "RDO";
  }
  return "?";
}

uint64_t max_duration_cycles(Opcode op) {
  return mantissa_max(op) << (2 * kExponentMax);
}

bool duration_is_representable(Opcode op, uint64_t cycles) {
  if (cycles == 0) return false;
  for (int e = 0; e <= kExponentMax; ++e) {
    uint64_t m = cycles >> (2 * e);
    if (m <= mantissa_max(op)) return (m << (2 * e)) == cycles;
  }
  return false;
}

uint64_t quantize_duration(Opcode op, uint64_t cycles) {
  const uint64_t mmax = mantissa_max(op);
  if (cycles <= mmax) return cycles;
  for (int e = 1; e <= kExponentMax; ++e) {
    const int shift = 2 * e;
    uint64_t m = (cycles + (1ull << (shift - 1))) >> shift;
    if (m <= mmax) return m << shift;
  }
  return mmax << (2 * kExponentMax);
}

Instruction canonicalize(const Instruction& instr) {
  if (instr.channel >= kNumChannels) {
    throw FieldRangeError("channel " + std::to_string(instr.channel) +
                          " out of range 0.." + std::to_string(kNumChannels - 1));
  }
  Instruction c;
  c.opcode = instr.opcode;
  c.channel = instr.channel;
  if (instr.condition.enabled) {
    if (instr.condition.register_bit > kMaxConditionBit) {
      throw FieldRangeError("condition bit " +
                            std::to_string(instr.condition.register_bit) +
                            " not addressable (0.." +
                            std::to_string(kMaxConditionBit) + ")");
    }
    c.condition = instr.condition;
  }

  if (instr.opcode == Opcode::SYNC) {
    c.duration_cycles = 1;
  } else {
    if (instr.duration_cycles == 0) {
      throw FieldRangeError("duration must be at least one cycle");
    }
    if (instr.duration_cycles > max_duration_cycles(instr.opcode)) {
      throw FieldRangeError("duration " + std::to_string(instr.duration_cycles) +
                            " cycles exceeds " + opcode_name(instr.opcode) +
                            " range");
    }
    c.duration_cycles = quantize_duration(instr.opcode, instr.duration_cycles);
  }

  switch (instr.opcode) {
    case Opcode::STA:
      c.amplitude_word = instr.amplitude_word;
      c.envelope_id = instr.envelope_id;
      c.active = instr.active;
      break;
    case Opcode::STF:
      c.ftw = instr.ftw;
      c.active = instr.active;
      break;
    case Opcode::STP:
      c.phase_word = instr.phase_word;
      c.envelope_id = instr.envelope_id;
      c.active = instr.active;
      break;
    case Opcode::STAP:
      c.amplitude_word = instr.amplitude_word;
      c.phase_word = instr.phase_word;
      c.active = instr.active;
      break;
    case Opcode::WAIT:
      c.active = instr.active;
      break;
    case Opcode::SYNC:
      break;
    case Opcode::RDO:
      c.rdo_index = instr.rdo_index;
      break;
  }
  return c;
}

uint64_t encode(const Instruction& instr) {
  const Instruction c = canonicalize(instr);
  uint64_t w = 0;
  w |= static_cast<uint64_t>(c.opcode) << kOpcodeShift;
  w |= static_cast<uint64_t>(c.channel) << kChannelShift;
  w |= static_cast<uint64_t>(c.condition.enabled) << kCondEnableShift;
  w |= static_cast<uint64_t>(c.condition.required_level) << kCondLevelShift;
  w |= static_cast<uint64_t>(c.condition.register_bit) << kCondBitShift;
  w |= static_cast<uint64_t>(c.active) << kActiveShift;

  uint64_t m = c.duration_cycles;
  int e = 0;
  while (m > mantissa_max(c.opcode)) {
    m >>= 2;
    ++e;
  }

  if (is_wide(c.opcode)) {
    uint32_t param = 0;
    if (c.opcode == Opcode::STF) {
      param = c.ftw;
    } else {
      param = static_cast<uint16_t>(c.amplitude_word) |
              (static_cast<uint32_t>(c.phase_word) << 16);
    }
    w |= static_cast<uint64_t>(param) << kParamShift;
    w |= m << kWideMantissaShift;
  } else {
    uint16_t param = 0;
    switch (c.opcode) {
      case Opcode::STA: param = static_cast<uint16_t>(c.amplitude_word); break;
      case Opcode::STP: param = c.phase_word; break;
      case Opcode::RDO: param = c.rdo_index; break;
      default: break;
    }
    w |= static_cast<uint64_t>(param) << kParamShift;
    w |= static_cast<uint64_t>(c.envelope_id) << kEnvelopeShift;
    w |= m << kShortMantissaShift;
  }
  w |= static_cast<uint64_t>(e) << kExponentShift;
  return w;
}

Instruction decode(uint64_t word) {
  const uint64_t opbits = field(word, kOpcodeShift, 3);
  if (opbits > 6) {
    throw DecodeError("invalid opcode bits " + std::to_string(opbits));
  }
  const Opcode op = static_cast<Opcode>(opbits);

  Instruction instr;
  instr.opcode = op;
  instr.channel = static_cast<uint8_t>(field(word, kChannelShift, 5));
  if (instr.channel >= kNumChannels) {
    throw DecodeError("channel " + std::to_string(instr.channel) +
                      " out of range");
  }
  instr.condition.enabled = field(word, kCondEnableShift, 1) != 0;
  if (instr.condition.enabled) {
    instr.condition.required_level = field(word, kCondLevelShift, 1) != 0;
    instr.condition.register_bit =
        static_cast<uint8_t>(field(word, kCondBitShift, 4));
  }
  instr.active = field(word, kActiveShift, 1) != 0;

  uint64_t m;
  const int exponent = static_cast<int>(field(word, kExponentShift, 4));
  if (is_wide(op)) {
    const uint32_t param = static_cast<uint32_t>(field(word, kParamShift, 32));
    if (op == Opcode::STF) {
      instr.ftw = param;
    } else {
      instr.amplitude_word = static_cast<int16_t>(param & 0xffff);
      instr.phase_word = static_cast<uint16_t>(param >> 16);
    }
    m = field(word, kWideMantissaShift, 12);
  } else {
    const uint16_t param = static_cast<uint16_t>(field(word, kParamShift, 16));
    switch (op) {
      case Opcode::STA: instr.amplitude_word = static_cast<int16_t>(param); break;
      case Opcode::STP: instr.phase_word = param; break;
      case Opcode::RDO: instr.rdo_index = static_cast<uint8_t>(param & 0xff); break;
      default: break;
    }
    instr.envelope_id = static_cast<uint8_t>(field(word, kEnvelopeShift, 8));
    m = field(word, kShortMantissaShift, 20);
  }
  if (m == 0) {
    throw DecodeError("zero duration mantissa");
  }
  instr.duration_cycles = m << (2 * exponent);
  return canonicalize(instr);
}

void validate_program(const Program& program) {
  for (const auto& [ch, seq] : program.channels) {
    if (ch < 0 || ch >= kNumChannels) {
      throw ConfigError("program channel " + std::to_string(ch) +
                        " out of range");
    }
    for (const Instruction& instr : seq) {
      if (instr.channel != ch) {
        throw ConfigError("instruction channel " +
                          std::to_string(instr.channel) +
                          " does not match sequence channel " +
                          std::to_string(ch));
      }
    }
  }
}

uint64_t sequence_cycles(const std::vector<Instruction>& seq) {
  uint64_t total = 0;
  for (const Instruction& instr : seq) {
    total += instr.opcode == Opcode::SYNC ? 1 : instr.duration_cycles;
  }
  return total;
}

namespace {

void put_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

uint64_t get_bytes(std::istream& in, int n, const char* what) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), n);
  if (!in) throw IoError(std::string("truncated program file while reading ") + what);
  uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_program(const Program& program, std::ostream& out) {
  validate_program(program);
  uint64_t total = 0;
  for (const auto& [ch, seq] : program.channels) total += seq.size();
  if (total > 0xffffffffull) throw IoError("program too large for container");

  out.write("QCP1", 4);
  put_u16(out, kProgramFormatVersion);
  put_u16(out, static_cast<uint16_t>(program.channels.size()));
  put_u32(out, static_cast<uint32_t>(total));
  put_u32(out, 0);
  for (const auto& [ch, seq] : program.channels) {
    put_u16(out, static_cast<uint16_t>(ch));
    put_u16(out, 0);
    put_u32(out, static_cast<uint32_t>(seq.size()));
  }
  for (const auto& [ch, seq] : program.channels) {
    for (const Instruction& instr : seq) put_u64(out, encode(instr));
  }
  if (!out) throw IoError("failed to write program stream");
}

Program read_program(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "QCP1", 4) != 0) {
    throw IoError("not a QCP1 program file");
  }
  const uint16_t version = static_cast<uint16_t>(get_bytes(in, 2, "version"));
  if (version != kProgramFormatVersion) {
    throw IoError("unsupported program format version " +
                  std::to_string(version));
  }
  const uint16_t nchannels = static_cast<uint16_t>(get_bytes(in, 2, "channel count"));
  const uint32_t total = static_cast<uint32_t>(get_bytes(in, 4, "word count"));
  get_bytes(in, 4, "reserved");

  std::vector<std::pair<int, uint32_t>> table;
  table.reserve(nchannels);
  uint64_t sum = 0;
  int prev = -1;
  for (int i = 0; i < nchannels; ++i) {
    const int ch = static_cast<int>(get_bytes(in, 2, "channel id"));
    get_bytes(in, 2, "channel pad");
    const uint32_t count = static_cast<uint32_t>(get_bytes(in, 4, "channel word count"));
    if (ch >= kNumChannels) throw IoError("channel " + std::to_string(ch) + " out of range");
    if (ch <= prev) throw IoError("channel table not strictly ascending");
    prev = ch;
    table.emplace_back(ch, count);
    sum += count;
  }
  if (sum != total) throw IoError("channel table does not match total word count");

  Program program;
  for (const auto& [ch, count] : table) {
    std::vector<Instruction>& seq = program.channels[ch];
    seq.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
      Instruction instr = decode(get_bytes(in, 8, "instruction word"));
      if (instr.channel != ch) {
        throw DecodeError("instruction word channel " +
                          std::to_string(instr.channel) +
                          " does not match table channel " + std::to_string(ch));
      }
      seq.push_back(instr);
    }
  }
  return program;
}

void save_program(const Program& program, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_program(program, out);
}

Program load_program(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_program(in);
}

}  // namespace qcs
