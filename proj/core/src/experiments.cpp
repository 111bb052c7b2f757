#include "qcs/experiments.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qcs/assembler.hpp"
#include "qcs/spectrum.hpp"

namespace qcs {

namespace {

double cycles_to_seconds(uint64_t cycles) {
  return static_cast<double>(cycles) * kCycleSeconds;
}

uint64_t round_cycles(double seconds) {
  return static_cast<uint64_t>(std::llround(seconds / kCycleSeconds));
}

QubitParams without_noise(QubitParams p) {
  p.noise_enabled = false;
  return p;
}

void append_meta_csv(std::ostringstream& out, const MetaHeader& header) {
  for (const auto& [k, v] : header) out << "# " << k << ": " << v << "\n";
}

nlohmann::json meta_json(const MetaHeader& header) {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : header) m[k] = v;
  return m;
}

}  // namespace

Instruction GateSet::set_frequency() const {
  Instruction in;
  in.opcode = Opcode::STF;
  in.channel = static_cast<uint8_t>(channel);
  in.duration_cycles = 1;
  in.ftw = ftw;
  in.active = false;
  return in;
}

Instruction GateSet::pulse(double phase_turns, uint64_t cycles) const {
  Instruction in;
  in.opcode = Opcode::STAP;
  in.channel = static_cast<uint8_t>(channel);
  in.duration_cycles = cycles;
  in.amplitude_word = amplitude_word;
  in.phase_word = phase_turns_to_word(phase_turns);
  in.active = true;
  return in;
}

Instruction GateSet::idle(uint64_t cycles) const {
  Instruction in;
  in.opcode = Opcode::WAIT;
  in.channel = static_cast<uint8_t>(channel);
  in.duration_cycles = cycles;
  in.active = false;
  return in;
}

GateSet make_gate_set(const QubitParams& qubit, double amplitude) {
  GateSet g;
  g.channel = qubit.drive_channel;
  g.ftw = frequency_to_ftw(qubit.f_qubit_hz);
  g.amplitude_word = amplitude_to_word(amplitude);
  g.omega_hz = qubit.rabi_rate_hz_per_unit * word_to_amplitude(g.amplitude_word);
  if (g.omega_hz <= 0.0) throw ConfigError("gate amplitude must be positive");
  const double t_pi = 0.5 / g.omega_hz;
  g.pi_cycles = round_cycles(t_pi);
  g.pi_half_cycles = round_cycles(0.5 * t_pi);
  if (g.pi_cycles == 0 || g.pi_half_cycles == 0)
    throw ConfigError("gate amplitude too large for the cycle grid");
  return g;
}

DriveRecord synthesize_drive(const QubitParams& qubit,
                             const std::vector<Instruction>& sequence) {
  Program p;
  p.channels[qubit.drive_channel] = sequence;
  ControllerConfig cc;
  Controller ctl(std::move(p), std::move(cc));
  DriveRecorder rec;
  ctl.set_prequant_tap(qubit.drive_channel, &rec);
  ctl.run(nullptr);
  return rec.take();
}

GridResult run_rabi_chevron(const QubitParams& qubit, const ChevronConfig& cfg) {
  if (cfg.detuning_points < 2 || cfg.duration_points < 1)
    throw ConfigError("chevron grid needs at least 2 x 1 points");
  GateSet g = make_gate_set(qubit, cfg.amplitude);

  GridResult res;
  for (int i = 0; i < cfg.detuning_points; ++i) {
    const double det =
        -0.5 * cfg.span_hz +
        cfg.span_hz * static_cast<double>(i) / (cfg.detuning_points - 1);
    res.detuning_hz.push_back(det);
  }
  for (int t = 0; t < cfg.duration_points; ++t) {
    const double want =
        cfg.duration_points > 1
            ? cfg.max_duration_s * static_cast<double>(t) / (cfg.duration_points - 1)
            : cfg.max_duration_s;
    res.duration_s.push_back(cycles_to_seconds(round_cycles(want)));
  }

  const QubitParams ideal = without_noise(qubit);
  res.p1.assign(res.duration_s.size(),
                std::vector<double>(res.detuning_hz.size(), 0.0));

  uint64_t point = 0;
  for (std::size_t t = 0; t < res.duration_s.size(); ++t) {
    const uint64_t cycles = round_cycles(res.duration_s[t]);
    for (std::size_t d = 0; d < res.detuning_hz.size(); ++d, ++point) {
      std::vector<Instruction> seq;
      Instruction stf = g.set_frequency();
      stf.ftw = frequency_to_ftw(qubit.f_qubit_hz + res.detuning_hz[d]);
      seq.push_back(stf);
      if (cycles > 0) seq.push_back(g.pulse(0.0, cycles));
      const DriveRecord record = synthesize_drive(qubit, seq);

      if (cfg.shots <= 0) {
        BlochEvolver ev(ideal, derive_seed(cfg.seed, point));
        replay_drive(record, ev);
        res.p1[t][d] = ev.p1_true();
      } else {
        uint64_t ones = 0;
        for (int s = 0; s < cfg.shots; ++s) {
          BlochEvolver ev(qubit, derive_seed(cfg.seed, point * cfg.shots + s));
          replay_drive(record, ev);
          ones += ev.project().reported ? 1 : 0;
        }
        res.p1[t][d] = static_cast<double>(ones) / cfg.shots;
      }
    }
  }
  return res;
}

LinecutResult run_rabi_linecut(const QubitParams& qubit, const LinecutConfig& cfg) {
  if (cfg.points < 4) throw ConfigError("linecut needs at least 4 points");
  GateSet g = make_gate_set(qubit, cfg.amplitude);
  const uint32_t ftw = frequency_to_ftw(qubit.f_qubit_hz + cfg.detuning_hz);
  const QubitParams ideal = without_noise(qubit);

  LinecutResult res;
  for (int k = 0; k < cfg.points; ++k) {
    const double want =
        cfg.max_duration_s * static_cast<double>(k) / (cfg.points - 1);
    const uint64_t cycles = round_cycles(want);
    std::vector<Instruction> seq;
    Instruction stf = g.set_frequency();
    stf.ftw = ftw;
    seq.push_back(stf);
    if (cycles > 0) seq.push_back(g.pulse(0.0, cycles));
    const DriveRecord record = synthesize_drive(qubit, seq);

    res.duration_s.push_back(cycles_to_seconds(cycles));
    if (cfg.shots <= 0) {
      BlochEvolver ev(ideal, derive_seed(cfg.seed, k));
      replay_drive(record, ev);
      res.p1.push_back(ev.p1_true());
    } else {
      uint64_t ones = 0;
      for (int s = 0; s < cfg.shots; ++s) {
        BlochEvolver ev(qubit, derive_seed(cfg.seed,
                                           static_cast<uint64_t>(k) * cfg.shots + s));
        replay_drive(record, ev);
        ones += ev.project().reported ? 1 : 0;
      }
      res.p1.push_back(static_cast<double>(ones) / cfg.shots);
    }
  }
  res.fit = fit_rabi_sin2(res.duration_s, res.p1);
  if (res.fit.converged) res.fitted_rabi_hz = res.fit.params[1];
  return res;
}

QmcSweepResult run_qmc_sweep(const QmcSweepConfig& cfg) {
  if (cfg.fft_points < 16 || (cfg.fft_points & (cfg.fft_points - 1)) != 0)
    throw ConfigError("fft_points must be a power of two, at least 16");

  QmcParams imperfection;
  const double phi = cfg.phase_skew_deg * M_PI / 180.0;
  imperfection.matrix = {{{cfg.gain, 0.0}, {std::sin(phi), std::cos(phi)}}};
  imperfection.dc_i = cfg.dc_i;
  imperfection.dc_q = cfg.dc_q;

  const uint32_t ftw = frequency_to_ftw(cfg.tone_hz);
  const uint64_t cycles =
      (static_cast<uint64_t>(cfg.fft_points) + kSamplesPerCycle - 1) /
          kSamplesPerCycle + 2;

  auto synthesize = [&](const QmcParams& correction) {
    Program p;
    Instruction stf;
    stf.opcode = Opcode::STF;
    stf.duration_cycles = 1;
    stf.ftw = ftw;
    Instruction sta;
    sta.opcode = Opcode::STA;
    sta.duration_cycles = cycles;
    sta.amplitude_word = amplitude_to_word(cfg.amplitude);
    sta.active = true;
    p.channels[0] = {stf, sta};
    ControllerConfig cc;
    cc.dsp.channels[0].qmc = correction;
    Controller ctl(std::move(p), std::move(cc));
    DriveRecorder rec;
    ctl.set_prequant_tap(0, &rec);
    ctl.run(nullptr);
    return rec.take();
  };

  auto image_level = [&](const DriveRecord& record, double& carrier_db,
                         int& carrier_bin, int& image_bin) {
    std::vector<std::complex<double>> z;
    z.reserve(cfg.fft_points);
    for (const auto& seg : record.segments) {
      if (seg.idle_samples) continue;
      for (const auto& s : seg.samples) {
        if (static_cast<int>(z.size()) >= cfg.fft_points) break;
        // The modulator imperfection acts on the converter output, after
        // the digital correction stage and the 16-bit quantizer.
        const double di = quantize(s.i) / 32768.0;
        const double dq = quantize(s.q) / 32768.0;
        const auto [i, q] = apply_qmc(imperfection, di, dq);
        z.push_back({i, q});
      }
    }
    if (static_cast<int>(z.size()) < cfg.fft_points)
      throw LengthMismatch("tone too short for the requested FFT");
    const auto db = power_spectrum_db(z);
    const double bins_per_hz = cfg.fft_points / kSampleRateHz;
    carrier_bin = wrap_bin(
        static_cast<int>(std::lround(ftw_to_frequency(ftw) * bins_per_hz)),
        cfg.fft_points);
    image_bin = wrap_bin(-carrier_bin, cfg.fft_points);
    carrier_db = db[carrier_bin];
    return db[image_bin] - db[carrier_bin];
  };

  QmcSweepResult res;
  double carrier_unc = 0.0;
  res.image_dbc_uncorrected =
      image_level(synthesize(QmcParams{}), carrier_unc, res.carrier_bin,
                  res.image_bin);
  res.image_dbc_corrected =
      image_level(synthesize(qmc_inverse(imperfection)), res.carrier_db_corrected,
                  res.carrier_bin, res.image_bin);
  res.suppression_db = res.image_dbc_uncorrected - res.image_dbc_corrected;
  return res;
}

namespace {

enum class Gate { I, X, Y, X2, Y2 };

const char* gate_name(Gate g) {
  switch (g) {
    case Gate::I: return "I";
    case Gate::X: return "X";
    case Gate::Y: return "Y";
    case Gate::X2: return "X/2";
    case Gate::Y2: return "Y/2";
  }
  return "?";
}

void append_gate(std::vector<Instruction>& seq, const GateSet& g, Gate gate) {
  switch (gate) {
    case Gate::I: seq.push_back(g.idle(g.pi_cycles)); break;
    case Gate::X: seq.push_back(g.pulse(0.0, g.pi_cycles)); break;
    case Gate::Y: seq.push_back(g.pulse(0.25, g.pi_cycles)); break;
    case Gate::X2: seq.push_back(g.pulse(0.0, g.pi_half_cycles)); break;
    case Gate::Y2: seq.push_back(g.pulse(0.25, g.pi_half_cycles)); break;
  }
}

}  // namespace

AllXyResult run_allxy(const QubitParams& qubit, const AllXyConfig& cfg) {
  using G = Gate;
  static const std::vector<std::pair<G, G>> kPairs = {
      {G::I, G::I},   {G::X, G::X},   {G::Y, G::Y},   {G::X, G::Y},
      {G::Y, G::X},   {G::X2, G::I},  {G::Y2, G::I},  {G::X2, G::Y2},
      {G::Y2, G::X2}, {G::X2, G::Y},  {G::Y2, G::X},  {G::X, G::Y2},
      {G::Y, G::X2},  {G::X2, G::X},  {G::X, G::X2},  {G::Y2, G::Y},
      {G::Y, G::Y2},  {G::X, G::I},   {G::Y, G::I},   {G::X2, G::X2},
      {G::Y2, G::Y2}};

  GateSet g = make_gate_set(qubit, cfg.amplitude);
  const QubitParams ideal = without_noise(qubit);

  AllXyResult res;
  uint64_t index = 0;
  for (const auto& [a, b] : kPairs) {
    std::vector<Instruction> seq;
    seq.push_back(g.set_frequency());
    append_gate(seq, g, a);
    append_gate(seq, g, b);
    const DriveRecord record = synthesize_drive(qubit, seq);

    res.labels.push_back(std::string(gate_name(a)) + " " + gate_name(b));
    if (cfg.shots <= 0) {
      BlochEvolver ev(ideal, derive_seed(cfg.seed, index));
      replay_drive(record, ev);
      res.p1.push_back(ev.p1_true());
    } else {
      uint64_t ones = 0;
      for (int s = 0; s < cfg.shots; ++s) {
        BlochEvolver ev(qubit, derive_seed(cfg.seed, index * cfg.shots + s));
        replay_drive(record, ev);
        ones += ev.project().reported ? 1 : 0;
      }
      res.p1.push_back(static_cast<double>(ones) / cfg.shots);
    }
    ++index;
  }
  return res;
}

DecayResult run_ramsey(const QubitParams& qubit, const RamseyConfig& cfg) {
  if (cfg.points < 6) throw ConfigError("ramsey needs at least 6 delay points");
  if (cfg.shots < 1) throw ConfigError("ramsey needs at least 1 shot");
  GateSet g = make_gate_set(qubit, cfg.amplitude);

  // A square pi/2 pulse contributes 2 t_pulse / pi of free precession, so
  // the dephasing clock runs for the gap plus both pulse edges. Report
  // that effective time; a Gaussian envelope is not shift-invariant and a
  // fit against the bare gap would come out short by the edge term.
  const double edge_s =
      4.0 * cycles_to_seconds(g.pi_half_cycles) / M_PI;

  DecayResult res;
  for (int k = 0; k < cfg.points; ++k) {
    const double want =
        cfg.tau_max_s * static_cast<double>(k) / (cfg.points - 1);
    const uint64_t cycles = round_cycles(want);
    const double tau = cycles_to_seconds(cycles);

    std::vector<Instruction> seq;
    seq.push_back(g.set_frequency());
    seq.push_back(g.pulse(0.0, g.pi_half_cycles));
    if (cycles > 0) seq.push_back(g.idle(cycles));
    // Virtual detuning: the closing pulse's phase advances with the delay
    // as if the drive ran detuned by cfg.virtual_detuning_hz.
    const double turns = cfg.virtual_detuning_hz * tau;
    seq.push_back(g.pulse(turns - std::floor(turns), g.pi_half_cycles));

    const DriveRecord record = synthesize_drive(qubit, seq);
    uint64_t ones = 0;
    for (int s = 0; s < cfg.shots; ++s) {
      BlochEvolver ev(qubit, derive_seed(cfg.seed,
                                         static_cast<uint64_t>(k) * cfg.shots + s));
      replay_drive(record, ev);
      ones += ev.project().reported ? 1 : 0;
    }
    res.tau_s.push_back(tau + edge_s);
    res.p1.push_back(static_cast<double>(ones) / cfg.shots);
  }

  res.fit = fit_decaying_cosine(res.tau_s, res.p1);
  if (res.fit.converged) {
    res.fitted_time_s = res.fit.params[3];
    res.fitted_frequency_hz = res.fit.params[1];
  }
  return res;
}

DecayResult run_hahn_echo(const QubitParams& qubit, const EchoConfig& cfg) {
  if (cfg.points < 3) throw ConfigError("echo needs at least 3 delay points");
  if (cfg.shots < 1) throw ConfigError("echo needs at least 1 shot");
  GateSet g = make_gate_set(qubit, cfg.amplitude);

  DecayResult res;
  for (int k = 0; k < cfg.points; ++k) {
    const double want =
        cfg.tau_max_s * static_cast<double>(k) / (cfg.points - 1);
    const uint64_t half = round_cycles(0.5 * want);
    const double tau = 2.0 * cycles_to_seconds(half);

    std::vector<Instruction> seq;
    seq.push_back(g.set_frequency());
    seq.push_back(g.pulse(0.0, g.pi_half_cycles));
    if (half > 0) seq.push_back(g.idle(half));
    seq.push_back(g.pulse(0.0, g.pi_cycles));
    if (half > 0) seq.push_back(g.idle(half));
    seq.push_back(g.pulse(0.0, g.pi_half_cycles));

    const DriveRecord record = synthesize_drive(qubit, seq);
    uint64_t ones = 0;
    for (int s = 0; s < cfg.shots; ++s) {
      BlochEvolver ev(qubit, derive_seed(cfg.seed,
                                         static_cast<uint64_t>(k) * cfg.shots + s));
      replay_drive(record, ev);
      ones += ev.project().reported ? 1 : 0;
    }
    res.tau_s.push_back(tau);
    res.p1.push_back(static_cast<double>(ones) / cfg.shots);
  }

  res.fit = fit_exponential_decay(res.tau_s, res.p1);
  if (res.fit.converged) res.fitted_time_s = res.fit.params[1];
  return res;
}

ResetResult run_active_reset(const QubitParams& qubit, const ResetConfig& cfg) {
  if (cfg.shots < 1) throw ConfigError("reset needs at least 1 shot");
  if (cfg.readout_channel == qubit.drive_channel ||
      cfg.readout_channel < 0 || cfg.readout_channel >= kNumChannels)
    throw ConfigError("readout channel must differ from the drive channel");

  GateSet g = make_gate_set(qubit, cfg.amplitude);
  const uint64_t w = cfg.readout_window_cycles;
  const auto rch = static_cast<uint8_t>(cfg.readout_channel);

  ReadoutParams rp;
  rp.mode = ReadoutMode::ChargeSensing;
  rp.window_cycles = static_cast<uint32_t>(w);
  rp.threshold =
      0.5 * (qubit.readout_level0 + qubit.readout_level1) * w * kSamplesPerCycle;
  rp.polarity = Polarity::AboveIsOne;

  ControllerConfig cc;
  rp.target_bit = 0;
  cc.readout_table.entries.push_back(rp);
  rp.target_bit = 1;
  cc.readout_table.entries.push_back(rp);

  Program prog;
  auto& drive = prog.channels[qubit.drive_channel];
  drive.push_back(g.set_frequency());
  if (cfg.prepare_excited) drive.push_back(g.pulse(0.0, g.pi_cycles));
  else drive.push_back(g.idle(g.pi_cycles));
  drive.push_back(g.idle(w));  // triggering measurement
  Instruction correct = g.pulse(0.0, g.pi_cycles);
  correct.condition = {true, 0, true};
  drive.push_back(correct);
  drive.push_back(g.idle(w));  // verifying measurement

  auto& sensor = prog.channels[cfg.readout_channel];
  Instruction wait1;
  wait1.opcode = Opcode::WAIT;
  wait1.channel = rch;
  wait1.duration_cycles = 1 + g.pi_cycles;
  sensor.push_back(wait1);
  Instruction rdo;
  rdo.opcode = Opcode::RDO;
  rdo.channel = rch;
  rdo.duration_cycles = w;
  rdo.rdo_index = 0;
  sensor.push_back(rdo);
  Instruction wait2 = wait1;
  wait2.duration_cycles = g.pi_cycles;
  sensor.push_back(wait2);
  rdo.rdo_index = 1;
  sensor.push_back(rdo);

  ResetResult res;
  res.shots = static_cast<uint64_t>(cfg.shots);
  for (int s = 0; s < cfg.shots; ++s) {
    Controller ctl(prog, cc);
    QubitSim sim(qubit, derive_seed(cfg.seed, s));
    ctl.set_prequant_tap(qubit.drive_channel, &sim);
    ctl.set_adc_source(&sim);
    const RunResult run = ctl.run(nullptr);
    if (run.outcomes.size() != 2)
      throw Error("reset sequence produced an unexpected trigger count");
    res.first_ones += run.outcomes[0] ? 1 : 0;
    res.verify_ones += run.outcomes[1] ? 1 : 0;
  }
  res.first_one_fraction = static_cast<double>(res.first_ones) / res.shots;
  res.verify_one_fraction = static_cast<double>(res.verify_ones) / res.shots;
  const double eps = 0.5 * (1.0 - qubit.visibility);
  res.expected_verify_fraction = 0.5 + qubit.visibility * (eps - 0.5);
  return res;
}

std::string grid_to_csv(const GridResult& r, const MetaHeader& header) {
  std::ostringstream out;
  out.precision(12);
  append_meta_csv(out, header);
  out << "detuning_hz,duration_s,p1\n";
  for (std::size_t t = 0; t < r.duration_s.size(); ++t)
    for (std::size_t d = 0; d < r.detuning_hz.size(); ++d)
      out << r.detuning_hz[d] << ',' << r.duration_s[t] << ',' << r.p1[t][d]
          << '\n';
  return out.str();
}

std::string grid_to_json(const GridResult& r, const MetaHeader& header) {
  nlohmann::json j;
  j["meta"] = meta_json(header);
  j["detuning_hz"] = r.detuning_hz;
  j["duration_s"] = r.duration_s;
  j["p1"] = r.p1;
  return j.dump(2) + "\n";
}

std::string linecut_to_csv(const LinecutResult& r, const MetaHeader& header) {
  std::ostringstream out;
  out.precision(12);
  append_meta_csv(out, header);
  if (r.fit.converged) out << "# fitted_rabi_hz: " << r.fitted_rabi_hz << "\n";
  out << "duration_s,p1\n";
  for (std::size_t i = 0; i < r.duration_s.size(); ++i)
    out << r.duration_s[i] << ',' << r.p1[i] << '\n';
  return out.str();
}

std::string linecut_to_json(const LinecutResult& r, const MetaHeader& header) {
  nlohmann::json j;
  j["meta"] = meta_json(header);
  j["duration_s"] = r.duration_s;
  j["p1"] = r.p1;
  j["fit"] = {{"converged", r.fit.converged},
              {"params", r.fit.params},
              {"rss", r.fit.rss},
              {"fitted_rabi_hz", r.fitted_rabi_hz}};
  return j.dump(2) + "\n";
}

std::string qmc_sweep_to_json(const QmcSweepResult& r, const MetaHeader& header) {
  nlohmann::json j;
  j["meta"] = meta_json(header);
  j["carrier_db_corrected"] = r.carrier_db_corrected;
  j["image_dbc_uncorrected"] = r.image_dbc_uncorrected;
  j["image_dbc_corrected"] = r.image_dbc_corrected;
  j["suppression_db"] = r.suppression_db;
  j["carrier_bin"] = r.carrier_bin;
  j["image_bin"] = r.image_bin;
  return j.dump(2) + "\n";
}

std::string allxy_to_csv(const AllXyResult& r, const MetaHeader& header) {
  std::ostringstream out;
  out.precision(12);
  append_meta_csv(out, header);
  out << "index,gates,p1\n";
  for (std::size_t i = 0; i < r.labels.size(); ++i)
    out << i << ',' << r.labels[i] << ',' << r.p1[i] << '\n';
  return out.str();
}

std::string allxy_to_json(const AllXyResult& r, const MetaHeader& header) {
  nlohmann::json j;
  j["meta"] = meta_json(header);
  j["labels"] = r.labels;
  j["p1"] = r.p1;
  return j.dump(2) + "\n";
}

std::string decay_to_csv(const DecayResult& r, const MetaHeader& header) {
  std::ostringstream out;
  out.precision(12);
  append_meta_csv(out, header);
  if (r.fit.converged) {
    out << "# fitted_time_s: " << r.fitted_time_s << "\n";
    if (r.fitted_frequency_hz != 0.0)
      out << "# fitted_frequency_hz: " << r.fitted_frequency_hz << "\n";
  }
  out << "tau_s,p1\n";
  for (std::size_t i = 0; i < r.tau_s.size(); ++i)
    out << r.tau_s[i] << ',' << r.p1[i] << '\n';
  return out.str();
}

std::string decay_to_json(const DecayResult& r, const MetaHeader& header) {
  nlohmann::json j;
  j["meta"] = meta_json(header);
  j["tau_s"] = r.tau_s;
  j["p1"] = r.p1;
  j["fit"] = {{"converged", r.fit.converged},
              {"params", r.fit.params},
              {"rss", r.fit.rss},
              {"fitted_time_s", r.fitted_time_s},
              {"fitted_frequency_hz", r.fitted_frequency_hz}};
  return j.dump(2) + "\n";
}

std::string reset_to_json(const ResetResult& r, const MetaHeader& header) {
  nlohmann::json j;
  j["meta"] = meta_json(header);
  j["shots"] = r.shots;
  j["first_ones"] = r.first_ones;
  j["verify_ones"] = r.verify_ones;
  j["first_one_fraction"] = r.first_one_fraction;
  j["verify_one_fraction"] = r.verify_one_fraction;
  j["expected_verify_fraction"] = r.expected_verify_fraction;
  return j.dump(2) + "\n";
}

}  // namespace qcs
