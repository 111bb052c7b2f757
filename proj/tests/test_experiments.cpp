#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qcs/assembler.hpp"
#include "qcs/experiments.hpp"

using namespace qcs;

namespace {

constexpr double kPi = 3.14159265358979323846;

QubitParams ideal_params() {
  QubitParams p;
  p.f_qubit_hz = 62.5e6;
  p.rabi_rate_hz_per_unit = 10e6;
  p.noise_enabled = false;
  return p;
}

// Generalized Rabi probability for a drive detuned by delta.
double rabi_p1(double omega, double delta, double t) {
  const double norm = std::hypot(omega, delta);
  if (norm == 0.0) return 0.0;
  const double s = std::sin(kPi * norm * t);
  return (omega * omega) / (norm * norm) * s * s;
}

}  // namespace

TEST_CASE("gate set lands pi rotations on the cycle grid") {
  const QubitParams p = ideal_params();
  const GateSet g = make_gate_set(p, 0.5);
  CHECK(g.amplitude_word == 16384);
  CHECK(g.omega_hz == doctest::Approx(5e6));
  CHECK(g.pi_cycles == 20);
  CHECK(g.pi_half_cycles == 10);

  CHECK(g.set_frequency().opcode == Opcode::STF);
  CHECK(g.set_frequency().duration_cycles == 1);
  const Instruction y = g.pulse(0.25, g.pi_cycles);
  CHECK(y.opcode == Opcode::STAP);
  CHECK(y.phase_word == 16384);
  CHECK(y.active);
  CHECK_FALSE(g.idle(3).active);

  CHECK_THROWS_AS(make_gate_set(p, 0.0), ConfigError);
  QubitParams fast = p;
  fast.rabi_rate_hz_per_unit = 1e9;  // pi pulse under one cycle
  CHECK_THROWS_AS(make_gate_set(fast, 0.99), ConfigError);
}

TEST_CASE("chevron grid matches the generalized rabi surface") {
  const QubitParams p = ideal_params();
  ChevronConfig cfg;
  cfg.span_hz = 4e6;
  cfg.detuning_points = 5;
  cfg.max_duration_s = 1e-6;
  cfg.duration_points = 5;
  cfg.amplitude = 0.5;
  cfg.shots = 0;

  const GridResult r = run_rabi_chevron(p, cfg);
  REQUIRE(r.detuning_hz.size() == 5);
  REQUIRE(r.duration_s.size() == 5);
  CHECK(r.detuning_hz.front() == doctest::Approx(-2e6));
  CHECK(r.detuning_hz.back() == doctest::Approx(2e6));

  const uint32_t fq = frequency_to_ftw(p.f_qubit_hz);
  const double omega = 10e6 * (16384.0 / 32768.0);
  for (std::size_t t = 0; t < r.duration_s.size(); ++t) {
    // Durations land on the cycle grid.
    const double cycles = r.duration_s[t] / 5e-9;
    CHECK(cycles == doctest::Approx(std::round(cycles)).epsilon(1e-12));
    for (std::size_t d = 0; d < r.detuning_hz.size(); ++d) {
      const uint32_t ftw = frequency_to_ftw(p.f_qubit_hz + r.detuning_hz[d]);
      const double delta = static_cast<int32_t>(ftw - fq) *
                           (kSampleRateHz / 4294967296.0);
      const double expect = rabi_p1(omega, delta, r.duration_s[t]);
      CHECK(r.p1[t][d] == doctest::Approx(expect).epsilon(1e-9));
    }
  }

  ChevronConfig bad = cfg;
  bad.detuning_points = 1;
  CHECK_THROWS_AS(run_rabi_chevron(p, bad), ConfigError);
}

TEST_CASE("linecut fit recovers the programmed rabi frequency") {
  const QubitParams p = ideal_params();
  LinecutConfig cfg;
  cfg.detuning_hz = 0.0;
  cfg.max_duration_s = 2e-6;
  cfg.points = 41;
  cfg.amplitude = 0.5;
  cfg.shots = 0;

  const LinecutResult r = run_rabi_linecut(p, cfg);
  REQUIRE(r.fit.converged);
  CHECK(r.fitted_rabi_hz == doctest::Approx(5e6).epsilon(1e-3));
  CHECK(r.p1.front() == doctest::Approx(0.0));
  REQUIRE(r.duration_s.size() == 41);
  // A pi pulse sits at 100 ns, point index 2 of the 50 ns grid.
  CHECK(r.duration_s[2] == doctest::Approx(100e-9));
  CHECK(r.p1[2] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("allxy staircase is exact without noise") {
  const QubitParams p = ideal_params();
  AllXyConfig cfg;
  cfg.shots = 0;
  const AllXyResult r = run_allxy(p, cfg);
  REQUIRE(r.labels.size() == 21);
  REQUIRE(r.p1.size() == 21);
  CHECK(r.labels.front() == "I I");
  CHECK(r.labels.back() == "Y/2 Y/2");

  for (int k = 0; k < 5; ++k)
    CHECK(r.p1[k] == doctest::Approx(0.0).epsilon(1e-6));
  for (int k = 5; k < 17; ++k)
    CHECK(r.p1[k] == doctest::Approx(0.5).epsilon(1e-6));
  for (int k = 17; k < 21; ++k)
    CHECK(r.p1[k] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("modulator image sits at the analytic level until corrected") {
  QmcSweepConfig cfg;
  cfg.fft_points = 4096;
  const QmcSweepResult r = run_qmc_sweep(cfg);

  // Imbalance g and skew phi put the image at |g - e^{-i phi}| over
  // |g + e^{i phi}| relative to the carrier.
  const double phi = cfg.phase_skew_deg * kPi / 180.0;
  const double image = std::hypot(cfg.gain - std::cos(phi), std::sin(phi));
  const double carrier = std::hypot(cfg.gain + std::cos(phi), std::sin(phi));
  const double expect_db = 20.0 * std::log10(image / carrier);

  CHECK(r.image_dbc_uncorrected == doctest::Approx(expect_db).epsilon(0.02));
  CHECK(r.image_dbc_corrected < -80.0);
  CHECK(r.suppression_db > 55.0);
  CHECK(r.carrier_bin == 4096 / 8);
  CHECK(r.image_bin == 4096 - 4096 / 8);

  QmcSweepConfig bad = cfg;
  bad.fft_points = 100;
  CHECK_THROWS_AS(run_qmc_sweep(bad), ConfigError);
}

TEST_CASE("ramsey fringes oscillate at the virtual detuning and decay") {
  QubitParams p = ideal_params();
  p.noise_enabled = true;  // default t2* 1.2 us, visibility 0.3
  RamseyConfig cfg;
  cfg.virtual_detuning_hz = 2e6;
  cfg.tau_max_s = 3e-6;
  cfg.points = 21;
  cfg.shots = 400;

  const DecayResult r = run_ramsey(p, cfg);
  REQUIRE(r.tau_s.size() == 21);
  REQUIRE(r.fit.converged);
  CHECK(r.fitted_frequency_hz == doctest::Approx(2e6).epsilon(0.10));
  CHECK(r.fitted_time_s > 0.6e-6);
  CHECK(r.fitted_time_s < 2.4e-6);
  // tau = 0 prepares a full pi rotation, visibility-limited to 0.65.
  CHECK(std::abs(r.p1.front() - 0.65) < 0.10);

  CHECK_THROWS_AS(run_ramsey(p, RamseyConfig{.points = 3}), ConfigError);
}

TEST_CASE("hahn echo decays with the echo time constant") {
  QubitParams p = ideal_params();
  p.noise_enabled = true;  // t2_echo 115 us
  EchoConfig cfg;
  cfg.tau_max_s = 250e-6;
  cfg.points = 11;
  cfg.shots = 1500;

  const DecayResult r = run_hahn_echo(p, cfg);
  REQUIRE(r.fit.converged);
  CHECK(r.fitted_time_s > 70e-6);
  CHECK(r.fitted_time_s < 180e-6);
  // The refocused sequence starts visibility-limited near 0.35 and
  // relaxes toward 0.5 as the white-noise phase diffuses.
  CHECK(std::abs(r.p1.front() - 0.35) < 0.10);
  CHECK(std::abs(r.p1.back() - 0.5) < 0.10);

  CHECK_THROWS_AS(run_hahn_echo(p, EchoConfig{.points = 2}), ConfigError);
}

TEST_CASE("active reset converges to the classification floor") {
  QubitParams p = ideal_params();
  p.noise_enabled = true;
  ResetConfig cfg;
  cfg.shots = 1200;

  const ResetResult r = run_active_reset(p, cfg);
  CHECK(r.shots == 1200);
  CHECK(r.expected_verify_fraction == doctest::Approx(0.455));

  // Triggering measurement of a prepared |1>: mean 0.65.
  double sigma = std::sqrt(0.65 * 0.35 / cfg.shots);
  CHECK(std::abs(r.first_one_fraction - 0.65) < 4 * sigma);
  // Verification after the conditional flip: classification-limited.
  sigma = std::sqrt(0.455 * 0.545 / cfg.shots);
  CHECK(std::abs(r.verify_one_fraction - r.expected_verify_fraction) <
        4 * sigma);

  ResetConfig bad = cfg;
  bad.readout_channel = p.drive_channel;
  CHECK_THROWS_AS(run_active_reset(p, bad), ConfigError);
}

TEST_CASE("result serialization carries data and meta headers") {
  const QubitParams p = ideal_params();
  ChevronConfig ccfg;
  ccfg.detuning_points = 3;
  ccfg.duration_points = 2;
  ccfg.shots = 0;
  const GridResult grid = run_rabi_chevron(p, ccfg);

  const std::string csv = grid_to_csv(grid, {{"seed", "1"}, {"tool", "x"}});
  CHECK(csv.rfind("# seed: 1\n", 0) == 0);
  CHECK(csv.find("detuning_hz,duration_s,p1\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 1 + 3 * 2);

  const auto j = nlohmann::json::parse(grid_to_json(grid, {{"seed", "1"}}));
  CHECK(j["meta"]["seed"] == "1");
  CHECK(j["detuning_hz"].size() == 3);
  CHECK(j["p1"].size() == 2);
  CHECK(j["p1"][0].size() == 3);

  AllXyConfig acfg;
  acfg.shots = 0;
  const AllXyResult axy = run_allxy(p, acfg);
  const std::string acsv = allxy_to_csv(axy);
  CHECK(acsv.find("index,gates,p1\n") != std::string::npos);
  CHECK(acsv.find("X/2 Y/2") != std::string::npos);
  const auto aj = nlohmann::json::parse(allxy_to_json(axy));
  CHECK(aj["labels"].size() == 21);

  QmcSweepConfig qcfg;
  qcfg.fft_points = 1024;
  const auto qj = nlohmann::json::parse(qmc_sweep_to_json(run_qmc_sweep(qcfg)));
  CHECK(qj.contains("image_dbc_uncorrected"));
  CHECK(qj.contains("suppression_db"));
}
