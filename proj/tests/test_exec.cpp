#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qcs/assembler.hpp"
#include "qcs/exec.hpp"

using namespace qcs;

namespace {

Instruction make(Opcode op, int ch, uint64_t dur) {
  Instruction i;
  i.opcode = op;
  i.channel = static_cast<uint8_t>(ch);
  i.duration_cycles = dur;
  return i;
}

// Expected RF sample for a rectangular pulse: the accumulator counts every
// sample since the channel started, silent or not.
int16_t expect_rf(uint64_t sample_index, uint32_t ftw, double amp) {
  const uint32_t acc = static_cast<uint32_t>(sample_index * ftw);
  return quantize(amp * std::cos(acc * Nco::kPhaseScale));
}

ReadoutTable one_entry_table(uint8_t bit) {
  ReadoutParams p;
  p.mode = ReadoutMode::ChargeSensing;
  p.threshold = 0.0;
  p.polarity = Polarity::AboveIsOne;
  p.target_bit = bit;
  ReadoutTable t;
  t.entries.push_back(p);
  return t;
}

}  // namespace

TEST_CASE("lock step frames and halt") {
  Program p;
  p.channels[2] = {make(Opcode::WAIT, 2, 7)};
  p.channels[9] = {make(Opcode::WAIT, 9, 3)};
  Controller ctl(p, {});
  CHECK(ctl.live_channels() == std::vector<int>{2, 9});

  CollectSink sink;
  const RunResult run = ctl.run(&sink);
  CHECK(run.cycles == 7);
  REQUIRE(sink.frames.size() == 7);
  for (uint64_t c = 0; c < 7; ++c) {
    CHECK(sink.frames[c].cycle == c);
    CHECK(sink.frames[c].channels.size() == 2);
  }
  CHECK(ctl.halted());
}

TEST_CASE("latched parameters render the documented waveform") {
  const uint32_t ftw = frequency_to_ftw(100e6);
  Program p;
  Instruction stf = make(Opcode::STF, 0, 1);
  stf.ftw = ftw;
  Instruction sta = make(Opcode::STA, 0, 4);
  sta.amplitude_word = 16384;
  sta.active = true;
  Instruction idle = make(Opcode::WAIT, 0, 3);
  Instruction hold = make(Opcode::WAIT, 0, 2);
  hold.active = true;
  p.channels[0] = {stf, sta, idle, hold};

  Controller ctl(p, {});
  CollectSink sink;
  ctl.run(&sink);
  REQUIRE(sink.frames.size() == 10);

  auto sample = [&](uint64_t cycle, int k) {
    return sink.frames[cycle].channels[0].iq[2 * k];
  };

  // Window 0 (STF) is silent but the accumulator is already counting.
  for (int k = 0; k < 5; ++k) CHECK(sample(0, k) == 0);
  // STA window: cycles 1..4. WAIT off: 5..7 silent. WAIT on: 8..9 resumes
  // the same carrier as if the gate had never closed.
  for (uint64_t c = 1; c < 5; ++c)
    for (int k = 0; k < 5; ++k)
      CHECK(sample(c, k) == expect_rf(5 * c + k, ftw, 0.5));
  for (uint64_t c = 5; c < 8; ++c)
    for (int k = 0; k < 5; ++k) CHECK(sample(c, k) == 0);
  for (uint64_t c = 8; c < 10; ++c)
    for (int k = 0; k < 5; ++k)
      CHECK(sample(c, k) == expect_rf(5 * c + k, ftw, 0.5));
}

TEST_CASE("back to back pulses have no gap") {
  const uint32_t ftw = frequency_to_ftw(31.25e6);
  Program p;
  Instruction stf = make(Opcode::STF, 0, 1);
  stf.ftw = ftw;
  Instruction a = make(Opcode::STA, 0, 3);
  a.amplitude_word = 16384;
  a.active = true;
  Instruction b = make(Opcode::STAP, 0, 3);
  b.amplitude_word = 8192;
  b.active = true;
  p.channels[0] = {stf, a, b};

  Controller ctl(p, {});
  CollectSink sink;
  ctl.run(&sink);
  REQUIRE(sink.frames.size() == 7);
  // Every sample from cycle 1 through 6 is part of a pulse; amplitude
  // switches exactly at the cycle-4 boundary.
  for (uint64_t c = 1; c < 7; ++c) {
    const double amp = c < 4 ? 0.5 : 0.25;
    for (int k = 0; k < 5; ++k)
      CHECK(sink.frames[c].channels[0].iq[2 * k] ==
            expect_rf(5 * c + k, ftw, amp));
  }
}

TEST_CASE("measurement write is visible the cycle after the window ends") {
  ControllerConfig cfg;
  cfg.readout_table = one_entry_table(3);

  Program p;
  Instruction rdo = make(Opcode::RDO, 0, 4);
  rdo.rdo_index = 0;

  // Fetched at cycle 4, one cycle after the write lands at the end of
  // cycle 3: sees the bit.
  Instruction sees = make(Opcode::STA, 1, 4);
  sees.amplitude_word = 16384;
  sees.active = true;
  sees.condition = {true, 3, true};

  // Fetched at cycle 3, the same cycle the write lands: must not see it.
  Instruction blind = make(Opcode::STA, 2, 4);
  blind.amplitude_word = 16384;
  blind.active = true;
  blind.condition = {true, 3, true};

  p.channels[0] = {rdo};
  p.channels[1] = {make(Opcode::WAIT, 1, 4), sees};
  p.channels[2] = {make(Opcode::WAIT, 2, 3), blind};

  Controller ctl(p, cfg);
  FixedLevelAdcSource high(0.5);
  ctl.set_adc_source(&high);
  CollectSink sink;
  const RunResult run = ctl.run(&sink);

  REQUIRE(run.register_writes.size() == 1);
  CHECK(run.register_writes[0].cycle == 3);
  CHECK(run.register_writes[0].bit == 3);
  CHECK(run.register_writes[0].value);
  REQUIRE(run.outcomes.size() == 1);
  CHECK(run.outcomes[0]);
  CHECK(run.final_register == (1u << 3));
  CHECK(run.measured_mask == (1u << 3));

  auto channel_has_signal = [&](std::size_t li, uint64_t from, uint64_t to) {
    for (uint64_t c = from; c < to; ++c)
      for (int k = 0; k < 5; ++k)
        if (sink.frames[c].channels[li].iq[2 * k] != 0) return true;
    return false;
  };
  CHECK(channel_has_signal(1, 4, 8));        // condition met
  CHECK_FALSE(channel_has_signal(2, 3, 7));  // suppressed, still timed
  CHECK(run.cycles == 8);                    // suppression keeps the duration
}

TEST_CASE("suppressed readout neither triggers nor writes") {
  ControllerConfig cfg;
  cfg.readout_table = one_entry_table(0);
  Program p;
  Instruction rdo = make(Opcode::RDO, 0, 2);
  rdo.condition = {true, 5, true};  // bit 5 never set
  p.channels[0] = {rdo};

  Controller ctl(p, cfg);
  FixedLevelAdcSource high(0.5);
  ctl.set_adc_source(&high);
  const RunResult run = ctl.run(nullptr);
  CHECK(run.cycles == 2);
  CHECK(run.triggers.empty());
  CHECK(run.outcomes.empty());
  CHECK(run.register_writes.empty());
  CHECK(run.measured_mask == 0);
}

TEST_CASE("sync blocks until the edge and resumes one cycle later") {
  ControllerConfig cfg;
  cfg.sync_edges = {5};
  Program p;
  Instruction sta = make(Opcode::STA, 0, 3);
  sta.amplitude_word = 16384;
  sta.active = true;
  p.channels[0] = {make(Opcode::WAIT, 0, 2), make(Opcode::SYNC, 0, 1), sta};

  Controller ctl(p, cfg);
  CollectSink sink;
  const RunResult run = ctl.run(&sink);

  REQUIRE(run.sync_resumes.size() == 1);
  CHECK(run.sync_resumes[0].edge_cycle == 5);
  CHECK(run.sync_resumes[0].channels == std::vector<int>{0});
  CHECK(run.cycles == 9);  // pulse occupies cycles 6..8

  for (uint64_t c = 0; c < 6; ++c)
    for (int k = 0; k < 5; ++k)
      CHECK(sink.frames[c].channels[0].iq[2 * k] == 0);
  bool any = false;
  for (uint64_t c = 6; c < 9; ++c)
    for (int k = 0; k < 5; ++k)
      any = any || sink.frames[c].channels[0].iq[2 * k] != 0;
  CHECK(any);
}

TEST_CASE("sync with a failed condition is a single silent cycle") {
  Program p;
  Instruction sync = make(Opcode::SYNC, 0, 1);
  sync.condition = {true, 0, true};  // never satisfied
  Instruction sta = make(Opcode::STA, 0, 2);
  sta.amplitude_word = 16384;
  sta.active = true;
  p.channels[0] = {sync, sta};

  Controller ctl(p, {});  // no edges scheduled at all
  const RunResult run = ctl.run(nullptr);
  CHECK(run.cycles == 3);  // 1 no-op cycle + 2 pulse cycles
  CHECK(run.sync_resumes.empty());
}

TEST_CASE("all channels blocked with no scheduled edge deadlocks") {
  Program p;
  p.channels[0] = {make(Opcode::SYNC, 0, 1)};
  p.channels[1] = {make(Opcode::WAIT, 1, 2), make(Opcode::SYNC, 1, 1)};
  Controller ctl(p, {});
  CHECK_THROWS_AS(ctl.run(nullptr), DeadlockError);
}

TEST_CASE("manual edge via sync_edge_now") {
  Program p;
  Instruction sta = make(Opcode::STA, 0, 1);
  sta.amplitude_word = 16384;
  sta.active = true;
  p.channels[0] = {make(Opcode::SYNC, 0, 1), sta};

  Controller ctl(p, {});
  SampleFrame frame;
  ctl.step(frame);  // SYNC fetched, blocks
  CHECK_FALSE(ctl.halted());
  ctl.sync_edge_now();
  StepEvents ev;
  ctl.step(frame, &ev);  // edge cycle
  REQUIRE(ev.sync_resume.has_value());
  CHECK(ev.sync_resume->channels == std::vector<int>{0});
  ctl.step(frame);  // pulse cycle
  CHECK(ctl.halted());
}

TEST_CASE("dc path ramps between latched levels") {
  ControllerConfig cfg;
  cfg.dsp.channels[4].path = PathKind::DC;
  cfg.dsp.channels[4].dc_ramp_cycles = 1;  // 5-sample ramps

  Program p;
  Instruction sta = make(Opcode::STA, 4, 3);
  sta.amplitude_word = 16384;
  sta.active = true;
  p.channels[4] = {sta, make(Opcode::WAIT, 4, 2)};

  Controller ctl(p, cfg);
  CollectSink sink;
  ctl.run(&sink);
  REQUIRE(sink.frames.size() == 5);

  // Cycle 0 ramps 0 -> 0.5 in 5 steps, cycles 1-2 hold, cycle 3 ramps
  // back toward 0, cycle 4 holds 0. Q stays 0 on a DC channel.
  for (int k = 0; k < 5; ++k) {
    CHECK(sink.frames[0].channels[0].iq[2 * k] ==
          quantize(0.5 * (k + 1) / 5.0));
    CHECK(sink.frames[0].channels[0].iq[2 * k + 1] == 0);
  }
  for (uint64_t c = 1; c < 3; ++c)
    for (int k = 0; k < 5; ++k)
      CHECK(sink.frames[c].channels[0].iq[2 * k] == quantize(0.5));
  for (int k = 0; k < 5; ++k)
    CHECK(sink.frames[3].channels[0].iq[2 * k] ==
          quantize(0.5 - 0.5 * (k + 1) / 5.0));
  for (int k = 0; k < 5; ++k) CHECK(sink.frames[4].channels[0].iq[2 * k] == 0);
}

TEST_CASE("construction validates configuration references") {
  Program p;
  Instruction sta = make(Opcode::STA, 0, 2);
  sta.envelope_id = 9;
  p.channels[0] = {sta};
  CHECK_THROWS_AS(Controller(p, {}), ConfigError);

  Program q;
  Instruction rdo = make(Opcode::RDO, 0, 2);
  rdo.rdo_index = 1;
  q.channels[0] = {rdo};
  ControllerConfig cfg;
  cfg.readout_table = one_entry_table(0);  // entry 0 only
  CHECK_THROWS_AS(Controller(q, cfg), ConfigError);
}

TEST_CASE("run honors the cycle budget guard") {
  ControllerConfig cfg;
  cfg.max_cycles = 10;
  Program p;
  p.channels[0] = {make(Opcode::WAIT, 0, 100)};
  Controller ctl(p, cfg);
  CHECK_THROWS_AS(ctl.run(nullptr), Error);
}

TEST_CASE("identical runs produce identical traces") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> op(0, 4);  // STA..WAIT
  std::uniform_int_distribution<int> dur(1, 12);
  std::uniform_int_distribution<uint32_t> word;

  Program p;
  for (int ch = 0; ch < 5; ++ch) {
    for (int n = 0; n < 30; ++n) {
      Instruction i = make(static_cast<Opcode>(op(rng)), ch, dur(rng));
      i.amplitude_word = static_cast<int16_t>(word(rng));
      i.ftw = word(rng);
      i.phase_word = static_cast<uint16_t>(word(rng));
      i.active = word(rng) & 1;
      p.channels[ch].push_back(canonicalize(i));
    }
  }

  Controller a(p, {});
  Controller b(p, {});
  CollectSink fa, fb;
  const RunResult ra = a.run(&fa);
  const RunResult rb = b.run(&fb);
  CHECK(ra.trace_hash == rb.trace_hash);
  CHECK(ra.cycles == rb.cycles);
  REQUIRE(fa.frames.size() == fb.frames.size());
  for (std::size_t i = 0; i < fa.frames.size(); ++i)
    for (std::size_t ch = 0; ch < fa.frames[i].channels.size(); ++ch)
      CHECK(fa.frames[i].channels[ch].iq == fb.frames[i].channels[ch].iq);
}

TEST_CASE("per channel envelopes shape the pulse") {
  EnvelopeLibrary lib;
  lib.set(1, make_triangle("tri"));
  ControllerConfig cfg;
  cfg.envelopes = lib;

  Program p;
  Instruction stf = make(Opcode::STF, 0, 1);
  stf.ftw = 0;  // DC carrier: cos = 1, so output is the envelope itself
  Instruction sta = make(Opcode::STA, 0, 20);
  sta.amplitude_word = 32767;
  sta.envelope_id = 1;
  sta.active = true;
  p.channels[0] = {stf, sta};

  Controller ctl(p, cfg);
  CollectSink sink;
  ctl.run(&sink);

  // 100 samples across a triangle: rises to the midpoint then falls.
  std::vector<int16_t> v;
  for (uint64_t c = 1; c < 21; ++c)
    for (int k = 0; k < 5; ++k) v.push_back(sink.frames[c].channels[0].iq[2 * k]);
  CHECK(v.front() == 0);
  CHECK(*std::max_element(v.begin(), v.end()) > 32000);
  CHECK(v[49] > v[10]);
  CHECK(v[49] > v[90]);
  const int16_t back = v.back();
  CHECK(back <= quantize(32767.0 / 32768.0 * (2.0 / 99.0)));
}
