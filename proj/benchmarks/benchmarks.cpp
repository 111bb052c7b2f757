#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "qcs/assembler.hpp"
#include "qcs/envelope.hpp"
#include "qcs/exec.hpp"
#include "qcs/isa.hpp"
#include "qcs/measure.hpp"
#include "qcs/qubit.hpp"
#include "qcs/synth.hpp"

using namespace qcs;

namespace {

void BM_NcoStep(benchmark::State& state) {
  Nco nco;
  nco.ftw = 0x20000000;  // fs/8
  double acc = 0.0;
  for (auto _ : state) {
    const auto [i, q] = nco.step();
    acc += i + q;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NcoStep);

void BM_EncodeDecode(benchmark::State& state) {
  Instruction instr;
  instr.opcode = Opcode::STAP;
  instr.channel = 7;
  instr.duration_cycles = 1234;
  instr.amplitude_word = -20000;
  instr.phase_word = 0x4321;
  instr.active = true;
  instr.condition = {true, 5, true};
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(encode(instr)));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EncodeDecode);

void BM_FirFilter(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  std::vector<double> taps(static_cast<std::size_t>(state.range(0)));
  for (double& t : taps) t = u(rng);
  taps[taps.size() / 2] = 1.0;
  FirFilter fir(taps);
  double x = 0.5, acc = 0.0;
  for (auto _ : state) {
    x = fir.process(x * 0.999);
    acc += x;
  }
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FirFilter)->Arg(7)->Arg(31)->Arg(63);

// Continuous tone on every active channel; items are DAC samples so the
// numbers compare directly across channel counts and DSP settings.
Program tone_program(int channels) {
  Program p;
  for (int ch = 0; ch < channels; ++ch) {
    Instruction stf;
    stf.opcode = Opcode::STF;
    stf.channel = static_cast<uint8_t>(ch);
    stf.duration_cycles = 1;
    stf.ftw = 0x10000000 + static_cast<uint32_t>(ch) * 0x01000000;
    p.channels[ch].push_back(stf);

    Instruction sta;
    sta.opcode = Opcode::STA;
    sta.channel = static_cast<uint8_t>(ch);
    sta.duration_cycles = 1ull << 40;
    sta.amplitude_word = 24000;
    sta.active = true;
    p.channels[ch].push_back(sta);
  }
  return p;
}

void BM_ControllerStep(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  Controller ctl(tone_program(channels), ControllerConfig{});
  SampleFrame frame;
  for (auto _ : state) {
    ctl.step(frame, nullptr);
    benchmark::DoNotOptimize(frame.channels.data());
  }
  state.SetItemsProcessed(state.iterations() * channels * kSamplesPerCycle);
}
BENCHMARK(BM_ControllerStep)->Arg(1)->Arg(8)->Arg(22);

void BM_ControllerStepShapedDsp(benchmark::State& state) {
  const int channels = static_cast<int>(state.range(0));
  ControllerConfig cc;
  cc.envelopes.set(1, make_gaussian("gauss", 0.25));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (int ch = 0; ch < channels; ++ch) {
    auto& d = cc.dsp.channels[ch];
    d.qmc = {1.02, 0.03};
    d.fir_taps.assign(15, 0.0);
    for (double& t : d.fir_taps) t = u(rng);
    d.fir_taps[7] = 1.0;
    d.skew_delay_samples = 3;
  }
  Program p = tone_program(channels);
  for (auto& [ch, seq] : p.channels) seq[1].envelope_id = 1;
  Controller ctl(p, cc);
  SampleFrame frame;
  for (auto _ : state) {
    ctl.step(frame, nullptr);
    benchmark::DoNotOptimize(frame.channels.data());
  }
  state.SetItemsProcessed(state.iterations() * channels * kSamplesPerCycle);
}
BENCHMARK(BM_ControllerStepShapedDsp)->Arg(1)->Arg(22);

void BM_ProcessRdo(benchmark::State& state) {
  ReadoutParams params;
  params.mode = ReadoutMode::Reflectometry;
  params.readout_ftw = 0x20000000;
  params.window_cycles = 50;
  MuTrigger trigger;
  trigger.window_cycles = 50;
  std::vector<int16_t> window(50 * kSamplesPerCycle);
  Nco nco;
  nco.ftw = params.readout_ftw;
  for (int16_t& s : window) {
    const auto [i, q] = nco.step();
    s = quantize(0.4 * i);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(process_rdo(params, trigger, window));
  }
  state.SetItemsProcessed(state.iterations() * window.size());
}
BENCHMARK(BM_ProcessRdo);

void BM_QubitDriveSample(benchmark::State& state) {
  QubitParams params;
  params.f_qubit_hz = 62.5e6;
  params.noise_enabled = true;
  BlochEvolver ev(params, 7);
  const uint32_t ftw = frequency_to_ftw(params.f_qubit_hz);
  Nco nco;
  nco.ftw = ftw;
  for (auto _ : state) {
    const auto [i, q] = nco.step();
    ev.drive_sample(0.5 * i, 0.5 * q, ftw);
  }
  benchmark::DoNotOptimize(ev.p1_true());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_QubitDriveSample);

}  // namespace

BENCHMARK_MAIN();
