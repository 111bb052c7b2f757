#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "qcs/isa.hpp"

using namespace qcs;

namespace {

Instruction random_instruction(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> op_dist(0, 6);
  std::uniform_int_distribution<int> ch_dist(0, kNumChannels - 1);
  std::uniform_int_distribution<uint32_t> word_dist;
  std::uniform_int_distribution<int> bit_dist(0, kMaxConditionBit);

  Instruction i;
  i.opcode = static_cast<Opcode>(op_dist(rng));
  i.channel = static_cast<uint8_t>(ch_dist(rng));
  // Durations biased toward the representable short range but reaching
  // into exponent territory often enough to exercise it.
  const uint64_t raw = word_dist(rng) % (1ull << (word_dist(rng) % 32 + 1));
  i.duration_cycles =
      quantize_duration(i.opcode, raw == 0 ? 1 : raw);
  i.amplitude_word = static_cast<int16_t>(word_dist(rng));
  i.ftw = word_dist(rng);
  i.phase_word = static_cast<uint16_t>(word_dist(rng));
  i.envelope_id = static_cast<uint8_t>(word_dist(rng));
  i.rdo_index = static_cast<uint8_t>(word_dist(rng));
  i.active = word_dist(rng) & 1;
  i.condition.enabled = word_dist(rng) & 1;
  if (i.condition.enabled) {
    i.condition.register_bit = static_cast<uint8_t>(bit_dist(rng));
    i.condition.required_level = word_dist(rng) & 1;
  }
  return i;
}

}  // namespace

TEST_CASE("encode decode round trip over a fuzz corpus") {
  std::mt19937_64 rng(0x15a);
  for (int n = 0; n < 100000; ++n) {
    const Instruction i = random_instruction(rng);
    const Instruction canonical = canonicalize(i);
    const uint64_t word = encode(i);
    CHECK(decode(word) == canonical);
    CHECK(encode(canonical) == word);
  }
}

TEST_CASE("decode rejects invalid words") {
  CHECK_THROWS_AS(decode(0), DecodeError);         // zero duration mantissa
  CHECK_THROWS_AS(decode(7), DecodeError);         // opcode 7 unused
  CHECK_THROWS_AS(decode(22ull << 3), DecodeError);  // channel 22
  // Valid neighbors of those words decode fine.
  CHECK(decode(encode(Instruction{})).opcode == Opcode::STA);
}

TEST_CASE("canonicalize rejects unencodable fields") {
  Instruction i;
  i.channel = kNumChannels;
  CHECK_THROWS_AS(canonicalize(i), FieldRangeError);

  i = Instruction{};
  i.duration_cycles = 0;
  CHECK_THROWS_AS(canonicalize(i), FieldRangeError);

  i = Instruction{};
  i.condition.enabled = true;
  i.condition.register_bit = 16;
  CHECK_THROWS_AS(canonicalize(i), FieldRangeError);

  i = Instruction{};
  i.opcode = Opcode::STF;
  i.duration_cycles = max_duration_cycles(Opcode::STF) + 1;
  CHECK_THROWS_AS(canonicalize(i), FieldRangeError);
}

TEST_CASE("canonicalize zeroes fields the opcode does not use") {
  Instruction i;
  i.opcode = Opcode::WAIT;
  i.duration_cycles = 5;
  i.amplitude_word = 123;
  i.ftw = 456;
  i.phase_word = 789;
  i.rdo_index = 9;
  i.envelope_id = 2;
  i.active = true;
  const Instruction c = canonicalize(i);
  CHECK(c.amplitude_word == 0);
  CHECK(c.ftw == 0);
  CHECK(c.phase_word == 0);
  CHECK(c.rdo_index == 0);
  CHECK(c.envelope_id == 0);
  CHECK(c.active);

  // A disabled condition's bit and level are canonically zero.
  i = Instruction{};
  i.condition.enabled = false;
  i.condition.register_bit = 7;
  i.condition.required_level = true;
  CHECK(canonicalize(i).condition == Condition{});
}

TEST_CASE("duration grid") {
  // Short format: cycle-exact through 2^20 - 1, then snaps to a power of
  // four grid. Wide format does the same from 4096 up.
  CHECK(duration_is_representable(Opcode::STA, (1ull << 20) - 1));
  CHECK_FALSE(duration_is_representable(Opcode::STA, (1ull << 20) + 1));
  CHECK(quantize_duration(Opcode::STA, (1ull << 20) + 1) == 1ull << 20);

  CHECK(duration_is_representable(Opcode::STF, 4095));
  CHECK_FALSE(duration_is_representable(Opcode::STF, 4097));
  CHECK(quantize_duration(Opcode::STF, 4097) == 4096);
  CHECK(quantize_duration(Opcode::STF, 4098) == 4100);  // half rounds up
  CHECK(quantize_duration(Opcode::STF, 4099) == 4100);

  CHECK(max_duration_cycles(Opcode::WAIT) == ((1ull << 20) - 1) << 30);
  CHECK(max_duration_cycles(Opcode::STAP) == 4095ull << 30);

  // Round-to-nearest on the coarse grid.
  CHECK(quantize_duration(Opcode::STF, 4095 * 4 + 1) == 4095 * 4);
  CHECK(quantize_duration(Opcode::STF, 4095 * 4 + 2) == 4096 * 4);
}

TEST_CASE("hand-assembled boundary words") {
  // Every word here was produced from the documented layout by hand, not
  // by the encoder under test.
  Instruction sta;
  sta.opcode = Opcode::STA;
  sta.duration_cycles = 20;
  sta.amplitude_word = -32768;
  sta.envelope_id = 3;
  sta.active = true;
  CHECK(encode(sta) == 0x0000140380004000ull);

  Instruction stf;
  stf.opcode = Opcode::STF;
  stf.duration_cycles = 4096;
  stf.ftw = 0xDEADBEEF;
  stf.condition = {true, 15, true};
  CHECK(encode(stf) == 0x1400deadbeef3f01ull);

  Instruction wait;
  wait.opcode = Opcode::WAIT;
  wait.channel = 21;
  wait.duration_cycles = ((1ull << 20) - 1) << 30;
  wait.active = true;
  wait.condition = {true, 0, false};
  CHECK(encode(wait) == 0xffffff00000041acull);

  Instruction rdo;
  rdo.opcode = Opcode::RDO;
  rdo.channel = 21;
  rdo.duration_cycles = 7;
  rdo.rdo_index = 255;
  CHECK(encode(rdo) == 0x0000070000ff00aeull);
}

TEST_CASE("golden container decodes to the expected program") {
  const Program p = load_program(std::string(GOLDEN_DIR) + "/boundary.qcp");
  REQUIRE(p.channels.size() == 2);
  REQUIRE(p.channels.count(0) == 1);
  REQUIRE(p.channels.count(21) == 1);
  const auto& ch0 = p.channels.at(0);
  const auto& ch21 = p.channels.at(21);
  REQUIRE(ch0.size() == 5);
  REQUIRE(ch21.size() == 3);

  CHECK(ch0[0].opcode == Opcode::STA);
  CHECK(ch0[0].amplitude_word == -32768);
  CHECK(ch0[0].envelope_id == 3);
  CHECK(ch0[0].duration_cycles == 20);
  CHECK(ch0[0].active);

  CHECK(ch0[1].amplitude_word == 32767);
  CHECK(ch0[1].duration_cycles == 1);

  CHECK(ch0[2].opcode == Opcode::STF);
  CHECK(ch0[2].ftw == 0xDEADBEEF);
  CHECK(ch0[2].duration_cycles == 4096);
  CHECK((ch0[2].condition == Condition{true, 15, true}));

  CHECK(ch0[3].opcode == Opcode::STP);
  CHECK(ch0[3].phase_word == 0xFFFF);
  CHECK(ch0[3].envelope_id == 255);
  CHECK(ch0[3].duration_cycles == (1ull << 20) - 1);

  CHECK(ch0[4].opcode == Opcode::STAP);
  CHECK(ch0[4].amplitude_word == -1);
  CHECK(ch0[4].phase_word == 0x8000);
  CHECK(ch0[4].duration_cycles == 4095ull << 30);

  CHECK(ch21[0].opcode == Opcode::SYNC);
  CHECK(ch21[0].duration_cycles == 1);
  CHECK(ch21[1].opcode == Opcode::WAIT);
  CHECK(ch21[1].duration_cycles == ((1ull << 20) - 1) << 30);
  CHECK(ch21[2].opcode == Opcode::RDO);
  CHECK(ch21[2].rdo_index == 255);
  CHECK(ch21[2].duration_cycles == 7);

  // Serialization is canonical: writing the decoded program reproduces
  // the golden bytes exactly.
  std::ostringstream out(std::ios::binary);
  write_program(p, out);
  std::ifstream in(std::string(GOLDEN_DIR) + "/boundary.qcp",
                   std::ios::binary);
  std::ostringstream golden;
  golden << in.rdbuf();
  CHECK(out.str() == golden.str());
}

TEST_CASE("container round trip and validation") {
  std::mt19937_64 rng(7);
  Program p;
  for (int ch : {0, 3, 21}) {
    for (int n = 0; n < 50; ++n) {
      Instruction i = canonicalize(random_instruction(rng));
      i.channel = static_cast<uint8_t>(ch);
      p.channels[ch].push_back(i);
    }
  }
  std::ostringstream out(std::ios::binary);
  write_program(p, out);
  std::istringstream in(out.str());
  CHECK(read_program(in) == p);

  // Same program, same bytes.
  std::ostringstream again(std::ios::binary);
  write_program(p, again);
  CHECK(again.str() == out.str());

  Program bad;
  bad.channels[22] = {};
  CHECK_THROWS_AS(validate_program(bad), ConfigError);

  Program mismatched;
  Instruction i;
  i.channel = 4;
  mismatched.channels[5] = {i};
  CHECK_THROWS_AS(validate_program(mismatched), ConfigError);
}

TEST_CASE("sequence cycle accounting") {
  Instruction a;
  a.duration_cycles = 10;
  Instruction b;
  b.opcode = Opcode::SYNC;
  Instruction c;
  c.opcode = Opcode::WAIT;
  c.duration_cycles = 32;
  CHECK(sequence_cycles({a, b, c}) == 43);
  CHECK(sequence_cycles({}) == 0);
}
