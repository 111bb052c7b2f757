#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcs/assembler.hpp"
#include "qcs/ensemble.hpp"
#include "qcs/experiments.hpp"
#include "qcs/qubit.hpp"
#include "qcs/spectrum.hpp"
#include "qcs/trace.hpp"

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw qcs::IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw qcs::IoError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qcs::IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shared provenance header: tool version, seed, and a fingerprint of
// every input file the command consumed.
qcs::MetaHeader make_meta(uint64_t seed,
                          const std::vector<std::pair<std::string, std::string>>&
                              inputs) {
  qcs::MetaHeader meta;
  meta.emplace_back("tool_version", qcs::kVersionString);
  meta.emplace_back("seed", std::to_string(seed));
  for (const auto& [name, path] : inputs)
    meta.emplace_back(name + "_hash", hex64(qcs::hash_file(path)));
  return meta;
}

nlohmann::json meta_to_json(const qcs::MetaHeader& meta) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

struct RunOptions {
  std::string program_path;
  std::string dsp_path;
  std::string readout_path;
  std::string envelopes_path;
  std::string qubit_path;
  std::string out_dir = ".";
  std::string format = "binary";
  uint64_t seed = 1;
  int shots = 1;
  std::size_t capture = 0;
  int spectrum_channel = -1;
  std::vector<uint64_t> sync_edges;
};

int cmd_run(const RunOptions& opt) {
  qcs::Program program = qcs::load_program_any(opt.program_path);

  qcs::ControllerConfig config;
  std::vector<std::pair<std::string, std::string>> inputs{
      {"program", opt.program_path}};
  if (!opt.dsp_path.empty()) {
    config.dsp = qcs::DspConfig::load(opt.dsp_path);
    inputs.emplace_back("dsp", opt.dsp_path);
  }
  if (!opt.readout_path.empty()) {
    config.readout_table = qcs::ReadoutTable::load(opt.readout_path);
    inputs.emplace_back("readout", opt.readout_path);
  }
  if (!opt.envelopes_path.empty()) {
    config.envelopes = qcs::EnvelopeLibrary::load(opt.envelopes_path);
    inputs.emplace_back("envelopes", opt.envelopes_path);
  }
  std::optional<qcs::QubitParams> qubit;
  if (!opt.qubit_path.empty()) {
    qubit = qcs::QubitParams::load(opt.qubit_path);
    inputs.emplace_back("qubit", opt.qubit_path);
  }
  config.sync_edges = opt.sync_edges;
  config.capture_capacity = opt.capture;
  const qcs::MetaHeader meta = make_meta(opt.seed, inputs);

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  qcs::ShotStatistics stats;
  qcs::RawCapture capture(opt.capture);
  qcs::RunResult first_run;
  std::vector<int> live;
  uint64_t readout_events = 0;

  for (int shot = 0; shot < std::max(1, opt.shots); ++shot) {
    qcs::Controller ctl(program, config);
    std::optional<qcs::QubitSim> sim;
    if (qubit) {
      sim.emplace(*qubit, qcs::derive_seed(opt.seed, shot));
      ctl.set_prequant_tap(qubit->drive_channel, &*sim);
      ctl.set_adc_source(&*sim);
    }

    // Only the first shot records a trace; later shots differ solely in
    // their noise draws and measurement outcomes.
    std::optional<qcs::BinaryTraceWriter> qct;
    std::optional<qcs::CsvTraceWriter> csv;
    std::optional<qcs::CollectSink> collect;
    qcs::FrameSink* sink = nullptr;
    if (shot == 0) {
      live = ctl.live_channels();
      const bool need_frames =
          opt.format == "json" || opt.spectrum_channel >= 0;
      if (need_frames) {
        collect.emplace();
        sink = &*collect;
      } else if (opt.format == "binary") {
        qct.emplace((dir / "trace.qct").string(), live);
        sink = &*qct;
      } else {
        csv.emplace((dir / "trace.csv").string(), live);
        sink = &*csv;
      }
    }

    const qcs::RunResult run = ctl.run(sink);
    stats.accumulate(run.final_register, run.measured_mask);
    for (std::size_t i = 0; i < ctl.mu().capture().size(); ++i) {
      qcs::CaptureEntry entry = ctl.mu().capture().entry(i);
      entry.shot_index = readout_events++;
      capture.push(std::move(entry));
    }

    if (shot == 0) {
      first_run = run;
      if (qct) qct->close();
      if (csv) csv->close();
      if (collect && opt.format == "binary") {
        qcs::BinaryTraceWriter w((dir / "trace.qct").string(), live);
        for (const qcs::SampleFrame& f : collect->frames) w.frame(f);
        w.close();
      } else if (collect && opt.format == "csv") {
        qcs::CsvTraceWriter w((dir / "trace.csv").string(), live);
        for (const qcs::SampleFrame& f : collect->frames) w.frame(f);
        w.close();
      } else if (collect) {
        nlohmann::json j;
        j["meta"] = meta_to_json(meta);
        j["channels"] = live;
        auto& frames = j["frames"] = nlohmann::json::array();
        for (const qcs::SampleFrame& f : collect->frames) {
          nlohmann::json fr;
          fr["cycle"] = f.cycle;
          auto& chans = fr["iq"] = nlohmann::json::array();
          for (const qcs::ChannelSamples& cs : f.channels)
            chans.push_back(std::vector<int16_t>(cs.iq.begin(), cs.iq.end()));
          frames.push_back(std::move(fr));
        }
        write_file(dir / "trace.json", j.dump(2) + "\n");
      }

      if (opt.spectrum_channel >= 0) {
        int li = -1;
        for (std::size_t i = 0; i < live.size(); ++i)
          if (live[i] == opt.spectrum_channel) li = static_cast<int>(i);
        if (li < 0)
          throw qcs::ConfigError("spectrum channel has no program");
        std::vector<double> si, sq;
        for (const qcs::SampleFrame& f : collect->frames)
          for (int k = 0; k < qcs::kSamplesPerCycle; ++k) {
            si.push_back(f.channels[li].iq[2 * k] / 32768.0);
            sq.push_back(f.channels[li].iq[2 * k + 1] / 32768.0);
          }
        if (si.empty()) throw qcs::ConfigError("no samples to analyze");
        std::size_t n = 1;
        while (n * 2 <= si.size()) n *= 2;
        const auto db = qcs::power_spectrum_db(
            qcs::to_complex(std::span(si).subspan(0, n), std::span(sq).subspan(0, n)));
        std::ostringstream out;
        out.precision(12);
        for (const auto& [k, v] : meta) out << "# " << k << ": " << v << "\n";
        out << "frequency_hz,power_dbfs\n";
        for (std::size_t k = 0; k < db.size(); ++k) {
          double f = static_cast<double>(k) / n * qcs::kSampleRateHz;
          if (k >= n / 2) f -= qcs::kSampleRateHz;
          out << f << ',' << db[k] << '\n';
        }
        write_file(dir / "spectrum.csv", out.str());
      }
    }
  }

  nlohmann::json events = nlohmann::json::parse(qcs::run_result_to_json(first_run));
  events["meta"] = meta_to_json(meta);
  events["shots"] = std::max(1, opt.shots);
  write_file(dir / "events.json", events.dump(2) + "\n");

  nlohmann::json stats_json = nlohmann::json::parse(stats.to_json_text());
  stats_json["meta"] = meta_to_json(meta);
  write_file(dir / "stats.json", stats_json.dump(2) + "\n");

  if (opt.capture > 0 && capture.size() > 0)
    capture.export_binary((dir / "capture.qcr").string());
  return 0;
}

struct ExperimentOptions {
  std::string name;
  std::string qubit_path;
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  uint64_t seed = 1;
  int shots = -1;  // -1: keep the experiment default
};

int cmd_experiment(const ExperimentOptions& opt) {
  qcs::QubitParams qubit;
  std::vector<std::pair<std::string, std::string>> inputs;
  if (!opt.qubit_path.empty()) {
    qubit = qcs::QubitParams::load(opt.qubit_path);
    inputs.emplace_back("qubit", opt.qubit_path);
  }
  nlohmann::json cfg = nlohmann::json::object();
  if (!opt.config_path.empty()) {
    cfg = nlohmann::json::parse(read_file(opt.config_path));
    inputs.emplace_back("config", opt.config_path);
  }
  const qcs::MetaHeader meta = make_meta(opt.seed, inputs);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  const bool want_json = opt.format == "json";

  auto emit = [&](const std::string& csv, const std::string& json) {
    if (!csv.empty() && !want_json)
      write_file(dir / (opt.name + ".csv"), csv);
    write_file(dir / (opt.name + ".json"), json);
  };

  if (opt.name == "rabi_chevron") {
    qcs::ChevronConfig c;
    c.span_hz = cfg.value("span_hz", c.span_hz);
    c.detuning_points = cfg.value("detuning_points", c.detuning_points);
    c.max_duration_s = cfg.value("max_duration_s", c.max_duration_s);
    c.duration_points = cfg.value("duration_points", c.duration_points);
    c.amplitude = cfg.value("amplitude", c.amplitude);
    c.shots = cfg.value("shots", c.shots);
    if (opt.shots >= 0) c.shots = opt.shots;
    c.seed = opt.seed;
    const auto r = qcs::run_rabi_chevron(qubit, c);
    emit(qcs::grid_to_csv(r, meta), qcs::grid_to_json(r, meta));
  } else if (opt.name == "rabi_linecut") {
    qcs::LinecutConfig c;
    c.detuning_hz = cfg.value("detuning_hz", c.detuning_hz);
    c.max_duration_s = cfg.value("max_duration_s", c.max_duration_s);
    c.points = cfg.value("points", c.points);
    c.amplitude = cfg.value("amplitude", c.amplitude);
    c.shots = cfg.value("shots", c.shots);
    if (opt.shots >= 0) c.shots = opt.shots;
    c.seed = opt.seed;
    const auto r = qcs::run_rabi_linecut(qubit, c);
    emit(qcs::linecut_to_csv(r, meta), qcs::linecut_to_json(r, meta));
  } else if (opt.name == "ramsey") {
    qcs::RamseyConfig c;
    c.virtual_detuning_hz = cfg.value("virtual_detuning_hz", c.virtual_detuning_hz);
    c.tau_max_s = cfg.value("tau_max_s", c.tau_max_s);
    c.points = cfg.value("points", c.points);
    c.shots = cfg.value("shots", c.shots);
    c.amplitude = cfg.value("amplitude", c.amplitude);
    if (opt.shots > 0) c.shots = opt.shots;
    c.seed = opt.seed;
    const auto r = qcs::run_ramsey(qubit, c);
    emit(qcs::decay_to_csv(r, meta), qcs::decay_to_json(r, meta));
  } else if (opt.name == "hahn_echo") {
    qcs::EchoConfig c;
    c.tau_max_s = cfg.value("tau_max_s", c.tau_max_s);
    c.points = cfg.value("points", c.points);
    c.shots = cfg.value("shots", c.shots);
    c.amplitude = cfg.value("amplitude", c.amplitude);
    if (opt.shots > 0) c.shots = opt.shots;
    c.seed = opt.seed;
    const auto r = qcs::run_hahn_echo(qubit, c);
    emit(qcs::decay_to_csv(r, meta), qcs::decay_to_json(r, meta));
  } else if (opt.name == "allxy") {
    qcs::AllXyConfig c;
    c.amplitude = cfg.value("amplitude", c.amplitude);
    c.shots = cfg.value("shots", c.shots);
    if (opt.shots >= 0) c.shots = opt.shots;
    c.seed = opt.seed;
    const auto r = qcs::run_allxy(qubit, c);
    emit(qcs::allxy_to_csv(r, meta), qcs::allxy_to_json(r, meta));
  } else if (opt.name == "qmc_sweep") {
    qcs::QmcSweepConfig c;
    c.gain = cfg.value("gain", c.gain);
    c.phase_skew_deg = cfg.value("phase_skew_deg", c.phase_skew_deg);
    c.dc_i = cfg.value("dc_i", c.dc_i);
    c.dc_q = cfg.value("dc_q", c.dc_q);
    c.tone_hz = cfg.value("tone_hz", c.tone_hz);
    c.amplitude = cfg.value("amplitude", c.amplitude);
    c.fft_points = cfg.value("fft_points", c.fft_points);
    const auto r = qcs::run_qmc_sweep(c);
    emit("", qcs::qmc_sweep_to_json(r, meta));
  } else {
    throw qcs::ConfigError("unknown experiment '" + opt.name + "'");
  }
  return 0;
}

struct EnsembleOptions {
  std::string config_path;
  std::string out_dir = ".";
  int64_t start_cycle = -1;
  bool deskew = false;
  bool capture = false;
};

int cmd_ensemble(const EnsembleOptions& opt) {
  qcs::EnsembleSpec spec = qcs::load_ensemble_spec(opt.config_path);
  const qcs::MetaHeader meta = make_meta(0, {{"config", opt.config_path}});
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  qcs::Ensemble ensemble(std::move(spec.units));
  if (opt.deskew) ensemble.deskew();
  const uint64_t start =
      opt.start_cycle >= 0 ? static_cast<uint64_t>(opt.start_cycle)
                           : spec.start_cycle;
  const qcs::EnsembleResult result = ensemble.run(start, opt.capture);

  nlohmann::json summary = nlohmann::json::parse(qcs::ensemble_to_json(result));
  summary["meta"] = meta_to_json(meta);
  auto skews = nlohmann::json::array();
  for (const auto& [unit, ps] : ensemble.measure_skews())
    skews.push_back({{"unit_id", unit}, {"measured_skew_ps", ps}});
  summary["measured_skews"] = std::move(skews);
  write_file(dir / "ensemble.json", summary.dump(2) + "\n");

  if (opt.capture) {
    write_file(dir / "timeline.json", qcs::merged_timeline_json(result));
    for (const qcs::UnitRunResult& u : result.units) {
      qcs::BinaryTraceWriter w(
          (dir / ("unit" + std::to_string(u.unit_id) + ".qct")).string(),
          u.trace.channels);
      for (const qcs::SampleFrame& f : u.trace.frames) w.frame(f);
      w.close();
    }
    bool aligned = true;
    for (const qcs::UnitRunResult& u : result.units)
      if (u.start_time_s != result.units.front().start_time_s) aligned = false;
    if (aligned) {
      const qcs::TraceData merged = qcs::merge_traces(result.units);
      qcs::BinaryTraceWriter w((dir / "merged.qct").string(), merged.channels);
      for (const qcs::SampleFrame& f : merged.frames) w.frame(f);
      w.close();
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qubit controller simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qcs::kVersionString));

  std::string asm_in, asm_out;
  auto* assemble = app.add_subcommand("assemble", "assemble text to a binary program");
  assemble->add_option("input", asm_in, "assembly source")->required();
  assemble->add_option("-o,--output", asm_out, "binary program path")->required();

  std::string dis_in, dis_out;
  auto* disasm = app.add_subcommand("disasm", "disassemble a binary program");
  disasm->add_option("input", dis_in, "binary program")->required();
  disasm->add_option("-o,--output", dis_out, "write here instead of stdout");

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "execute a program and write traces");
  run->add_option("program", run_opt.program_path, "program (.qcp or assembly)")
      ->required();
  run->add_option("--dsp", run_opt.dsp_path, "channel correction config (JSON)");
  run->add_option("--readout", run_opt.readout_path, "readout table (JSON)");
  run->add_option("--envelopes", run_opt.envelopes_path, "envelope library index");
  run->add_option("--qubit", run_opt.qubit_path, "qubit model parameters (JSON)");
  run->add_option("--seed", run_opt.seed, "random seed");
  run->add_option("--shots", run_opt.shots, "program repetitions")
      ->check(CLI::PositiveNumber);
  run->add_option("--capture", run_opt.capture, "raw readout windows to keep");
  run->add_option("--sync-edge", run_opt.sync_edges,
                  "external trigger edge cycle (repeatable)");
  run->add_option("--spectrum-channel", run_opt.spectrum_channel,
                  "also write an FFT of this channel");
  run->add_option("--out-dir", run_opt.out_dir, "output directory");
  run->add_option("--format", run_opt.format, "trace format")
      ->check(CLI::IsMember({"csv", "json", "binary"}));

  ExperimentOptions exp_opt;
  auto* experiment = app.add_subcommand("experiment", "run a calibration experiment");
  experiment
      ->add_option("name", exp_opt.name,
                   "rabi_chevron | rabi_linecut | ramsey | hahn_echo | allxy | "
                   "qmc_sweep")
      ->required();
  experiment->add_option("--qubit", exp_opt.qubit_path, "qubit model parameters");
  experiment->add_option("--config", exp_opt.config_path, "experiment parameters");
  experiment->add_option("--seed", exp_opt.seed, "random seed");
  experiment->add_option("--shots", exp_opt.shots, "Monte Carlo shots per point");
  experiment->add_option("--out-dir", exp_opt.out_dir, "output directory");
  experiment->add_option("--format", exp_opt.format, "result format")
      ->check(CLI::IsMember({"csv", "json"}));

  EnsembleOptions ens_opt;
  auto* ensemble = app.add_subcommand("ensemble", "run a multi-unit configuration");
  ensemble->add_option("config", ens_opt.config_path, "ensemble config (JSON)")
      ->required();
  ensemble->add_option("--start-cycle", ens_opt.start_cycle,
                       "override the configured start cycle");
  ensemble->add_flag("--deskew", ens_opt.deskew, "zero out measured skews first");
  ensemble->add_flag("--capture-frames", ens_opt.capture,
                     "write per-unit traces, a merged trace, and the timeline");
  ensemble->add_option("--out-dir", ens_opt.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*assemble) {
      qcs::save_program(qcs::assemble(read_file(asm_in)), asm_out);
      return 0;
    }
    if (*disasm) {
      const std::string text = qcs::disassemble(qcs::load_program_any(dis_in));
      if (dis_out.empty()) std::cout << text;
      else write_file(dis_out, text);
      return 0;
    }
    if (*run) return cmd_run(run_opt);
    if (*experiment) return cmd_experiment(exp_opt);
    if (*ensemble) return cmd_ensemble(ens_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
