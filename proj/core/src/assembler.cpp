#include "qcs/assembler.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qcs {

uint32_t frequency_to_ftw(double hz) {
  if (!(hz >= 0.0) || hz >= kSampleRateHz) {
    throw FieldRangeError("frequency " + std::to_string(hz) +
                          " Hz outside [0, fs)");
  }
  const double w = std::round(hz / kSampleRateHz * 4294967296.0);
  if (w >= 4294967296.0) return 0xffffffffu;
  return static_cast<uint32_t>(w);
}

double ftw_to_frequency(uint32_t ftw) {
  return static_cast<double>(ftw) * kSampleRateHz / 4294967296.0;
}

int16_t amplitude_to_word(double fraction) {
  if (!(fraction >= -1.0) || fraction > 1.0 - 1.0 / 32768.0 + 1e-12) {
    throw FieldRangeError("amplitude " + std::to_string(fraction) +
                          " outside [-1, 1 - 2^-15]");
  }
  const double w = std::round(fraction * 32768.0);
  return static_cast<int16_t>(std::min(w, 32767.0));
}

double word_to_amplitude(int16_t word) { return word / 32768.0; }

uint16_t phase_turns_to_word(double turns) {
  double t = turns - std::floor(turns);
  long w = std::lround(t * 65536.0);
  return static_cast<uint16_t>(w & 0xffff);
}

double word_to_phase_turns(uint16_t word) { return word / 65536.0; }

uint64_t seconds_to_cycles(double seconds) {
  const double cycles = seconds / kCycleSeconds;
  const double rounded = std::round(cycles);
  if (rounded < 1.0 || std::abs(cycles - rounded) > 1e-6 * std::max(1.0, cycles)) {
    throw FieldRangeError("duration " + std::to_string(seconds) +
                          " s is not a whole number of 5 ns cycles");
  }
  return static_cast<uint64_t>(rounded);
}

namespace {

struct Token {
  std::string text;
  int column;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '#') {
      ++i;
    }
    tokens.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return tokens;
}

bool parse_integer(const std::string& s, long long* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_number_suffix(const std::string& s, double* value, std::string* suffix) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str()) return false;
  *value = v;
  *suffix = std::string(end);
  return true;
}

struct LineContext {
  int line;
  int column;
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg, line, column);
  }
};

uint64_t parse_duration(const std::string& s, const LineContext& ctx) {
  long long cycles;
  if (parse_integer(s, &cycles)) {
    if (cycles < 1) ctx.fail("duration must be at least one cycle");
    return static_cast<uint64_t>(cycles);
  }
  double v;
  std::string suffix;
  if (!parse_number_suffix(s, &v, &suffix)) ctx.fail("cannot parse duration '" + s + "'");
  double scale;
  if (suffix == "ns") scale = 1e-9;
  else if (suffix == "us") scale = 1e-6;
  else if (suffix == "ms") scale = 1e-3;
  else if (suffix == "s") scale = 1.0;
  else ctx.fail("unknown duration suffix '" + suffix + "'");
  return seconds_to_cycles(v * scale);
}

uint32_t parse_frequency(const std::string& s, const LineContext& ctx) {
  double v;
  std::string suffix;
  if (!parse_number_suffix(s, &v, &suffix)) ctx.fail("cannot parse frequency '" + s + "'");
  double scale;
  if (suffix == "Hz" || suffix.empty()) scale = 1.0;
  else if (suffix == "kHz") scale = 1e3;
  else if (suffix == "MHz") scale = 1e6;
  else if (suffix == "GHz") scale = 1e9;
  else ctx.fail("unknown frequency suffix '" + suffix + "'");
  return frequency_to_ftw(v * scale);
}

uint16_t parse_phase(const std::string& s, const LineContext& ctx) {
  double v;
  std::string suffix;
  if (!parse_number_suffix(s, &v, &suffix)) ctx.fail("cannot parse phase '" + s + "'");
  double turns;
  if (suffix == "deg") turns = v / 360.0;
  else if (suffix == "rad") turns = v / (2.0 * M_PI);
  else if (suffix == "turn") turns = v;
  else ctx.fail("unknown phase suffix '" + suffix + "' (use deg, rad or turn)");
  return phase_turns_to_word(turns);
}

// "m[K]==V" after an 'if' token.
Condition parse_condition(const std::string& s, const LineContext& ctx) {
  size_t close = s.find("]==");
  if (s.rfind("m[", 0) != 0 || close == std::string::npos ||
      close + 4 != s.size()) {
    ctx.fail("malformed condition '" + s + "' (expected m[K]==0 or m[K]==1)");
  }
  long long bit;
  if (!parse_integer(s.substr(2, close - 2), &bit) || bit < 0 || bit > 31) {
    ctx.fail("condition bit in '" + s + "' out of range 0..31");
  }
  const char level = s[close + 3];
  if (level != '0' && level != '1') {
    ctx.fail("condition level in '" + s + "' must be 0 or 1");
  }
  Condition cond;
  cond.enabled = true;
  cond.register_bit = static_cast<uint8_t>(bit);
  cond.required_level = level == '1';
  return cond;
}

Opcode parse_mnemonic(const std::string& s, int line) {
  std::string u;
  for (char c : s) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "STA") return Opcode::STA;
  if (u == "STF") return Opcode::STF;
  if (u == "STP") return Opcode::STP;
  if (u == "STAP") return Opcode::STAP;
  if (u == "WAIT") return Opcode::WAIT;
  if (u == "SYNC") return Opcode::SYNC;
  if (u == "RDO") return Opcode::RDO;
  throw UnknownMnemonic(s, line);
}

bool opcode_takes(Opcode op, const std::string& key) {
  switch (op) {
    case Opcode::STA: return key == "a" || key == "aw" || key == "d" || key == "env";
    case Opcode::STF: return key == "f" || key == "ftw" || key == "d";
    case Opcode::STP: return key == "p" || key == "pw" || key == "d" || key == "env";
    case Opcode::STAP:
      return key == "a" || key == "aw" || key == "p" || key == "pw" || key == "d";
    case Opcode::WAIT: return key == "d";
    case Opcode::SYNC: return false;
    case Opcode::RDO: return key == "table" || key == "d";
  }
  return false;
}

bool opcode_takes_active(Opcode op) {
  return op != Opcode::SYNC && op != Opcode::RDO;
}

}  // namespace

Program assemble(const std::string& source) {
  Program program;
  std::istringstream in(source);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<Token> tokens = tokenize(line);
    if (tokens.empty()) continue;

    LineContext ctx{lineno, tokens[0].column};
    const std::string& head = tokens[0].text;
    if (head.size() < 4 || head.rfind("ch", 0) != 0 || head.back() != ':') {
      ctx.fail("expected a 'chN:' channel prefix, got '" + head + "'");
    }
    long long ch;
    if (!parse_integer(head.substr(2, head.size() - 3), &ch) || ch < 0 ||
        ch >= kNumChannels) {
      ctx.fail("channel in '" + head + "' out of range 0.." +
               std::to_string(kNumChannels - 1));
    }
    if (tokens.size() < 2) ctx.fail("missing mnemonic after '" + head + "'");

    Instruction instr;
    instr.channel = static_cast<uint8_t>(ch);
    instr.opcode = parse_mnemonic(tokens[1].text, lineno);
    bool saw_duration = false;

    for (size_t t = 2; t < tokens.size(); ++t) {
      ctx.column = tokens[t].column;
      const std::string& tok = tokens[t].text;
      if (tok == "on" || tok == "off") {
        if (!opcode_takes_active(instr.opcode)) {
          ctx.fail(std::string(opcode_name(instr.opcode)) + " takes no on/off flag");
        }
        instr.active = tok == "on";
        continue;
      }
      if (tok == "if") {
        if (t + 1 >= tokens.size()) ctx.fail("missing condition after 'if'");
        ctx.column = tokens[t + 1].column;
        instr.condition = parse_condition(tokens[t + 1].text, ctx);
        ++t;
        continue;
      }
      const size_t eq = tok.find('=');
      if (eq == std::string::npos) {
        // WAIT accepts a bare positional duration: "ch1: WAIT 100 off".
        if (instr.opcode == Opcode::WAIT && !saw_duration) {
          instr.duration_cycles = parse_duration(tok, ctx);
          saw_duration = true;
          continue;
        }
        ctx.fail("unexpected token '" + tok + "'");
      }
      const std::string key = tok.substr(0, eq);
      const std::string value = tok.substr(eq + 1);
      if (!opcode_takes(instr.opcode, key)) {
        ctx.fail(std::string(opcode_name(instr.opcode)) + " takes no '" + key + "' field");
      }
      long long raw;
      try {
        if (key == "d") {
          instr.duration_cycles = parse_duration(value, ctx);
          saw_duration = true;
        } else if (key == "a") {
          double v;
          std::string suffix;
          if (!parse_number_suffix(value, &v, &suffix) || !suffix.empty()) {
            ctx.fail("cannot parse amplitude '" + value + "'");
          }
          instr.amplitude_word = amplitude_to_word(v);
        } else if (key == "aw") {
          if (!parse_integer(value, &raw) || raw < -32768 || raw > 32767) {
            ctx.fail("amplitude word '" + value + "' out of range -32768..32767");
          }
          instr.amplitude_word = static_cast<int16_t>(raw);
        } else if (key == "f") {
          instr.ftw = parse_frequency(value, ctx);
        } else if (key == "ftw") {
          if (!parse_integer(value, &raw) || raw < 0 || raw > 0xffffffffll) {
            ctx.fail("tuning word '" + value + "' out of range");
          }
          instr.ftw = static_cast<uint32_t>(raw);
        } else if (key == "p") {
          instr.phase_word = parse_phase(value, ctx);
        } else if (key == "pw") {
          if (!parse_integer(value, &raw) || raw < 0 || raw > 0xffff) {
            ctx.fail("phase word '" + value + "' out of range 0..65535");
          }
          instr.phase_word = static_cast<uint16_t>(raw);
        } else if (key == "env") {
          if (!parse_integer(value, &raw) || raw < 0 || raw > 255) {
            ctx.fail("envelope id '" + value + "' out of range 0..255");
          }
          instr.envelope_id = static_cast<uint8_t>(raw);
        } else if (key == "table") {
          if (!parse_integer(value, &raw) || raw < 0 || raw > 255) {
            ctx.fail("readout table index '" + value + "' out of range 0..255");
          }
          instr.rdo_index = static_cast<uint8_t>(raw);
        }
      } catch (const FieldRangeError& e) {
        throw FieldRangeError(std::string(e.what()) + " (line " +
                              std::to_string(lineno) + ")");
      }
    }

    if (instr.opcode != Opcode::SYNC && !saw_duration) {
      ctx.fail("missing duration (d=...)");
    }
    try {
      program.channels[static_cast<int>(ch)].push_back(canonicalize(instr));
    } catch (const FieldRangeError& e) {
      throw FieldRangeError(std::string(e.what()) + " (line " +
                            std::to_string(lineno) + ")");
    }
  }
  return program;
}

std::string disassemble(const Program& program) {
  validate_program(program);
  std::ostringstream out;
  for (const auto& [ch, seq] : program.channels) {
    for (const Instruction& raw : seq) {
      const Instruction instr = canonicalize(raw);
      out << "ch" << ch << ": " << opcode_name(instr.opcode);
      switch (instr.opcode) {
        case Opcode::STA:
          out << " aw=" << instr.amplitude_word;
          break;
        case Opcode::STF:
          out << " ftw=" << instr.ftw;
          break;
        case Opcode::STP:
          out << " pw=" << instr.phase_word;
          break;
        case Opcode::STAP:
          out << " aw=" << instr.amplitude_word << " pw=" << instr.phase_word;
          break;
        case Opcode::RDO:
          out << " table=" << static_cast<int>(instr.rdo_index);
          break;
        default:
          break;
      }
      if (instr.opcode != Opcode::SYNC) {
        out << " d=" << instr.duration_cycles;
      }
      if ((instr.opcode == Opcode::STA || instr.opcode == Opcode::STP) &&
          instr.envelope_id != 0) {
        out << " env=" << static_cast<int>(instr.envelope_id);
      }
      if (opcode_takes_active(instr.opcode)) {
        out << (instr.active ? " on" : " off");
      }
      if (instr.condition.enabled) {
        out << " if m[" << static_cast<int>(instr.condition.register_bit)
            << "]==" << (instr.condition.required_level ? 1 : 0);
      }
      out << "\n";
    }
  }
  return out.str();
}

Program load_program_any(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(magic, "QCP1", 4) == 0) {
    return read_program(in);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return assemble(text.str());
}

}  // namespace qcs
