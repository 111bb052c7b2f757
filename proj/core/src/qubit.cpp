#include "qcs/qubit.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

namespace qcs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void rotate_z(BlochState& s, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double x = s.x * c - s.y * sn;
  const double y = s.x * sn + s.y * c;
  s.x = x;
  s.y = y;
}

// Rotation around the unit axis n by `angle` (Rodrigues form).
void rotate_axis(BlochState& s, double nx, double ny, double nz, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  const double dot = nx * s.x + ny * s.y + nz * s.z;
  const double cx = ny * s.z - nz * s.y;
  const double cy = nz * s.x - nx * s.z;
  const double cz = nx * s.y - ny * s.x;
  const double k = dot * (1.0 - c);
  s.x = s.x * c + cx * sn + nx * k;
  s.y = s.y * c + cy * sn + ny * k;
  s.z = s.z * c + cz * sn + nz * k;
}

uint32_t frequency_word(double hz) {
  double word = std::nearbyint(hz / kSampleRateHz * 4294967296.0);
  if (word < 0.0) word = 0.0;
  if (word > 4294967295.0) word = 4294967295.0;
  return static_cast<uint32_t>(word);
}

}  // namespace

BlochEvolver::BlochEvolver(const QubitParams& params, uint64_t seed)
    : p_(params), rng_(seed) {
  fq_ftw_ = frequency_word(p_.f_qubit_hz);
  const double frame_hz = fq_ftw_ * (kSampleRateHz / 4294967296.0);
  delta_static_ = (p_.f_qubit_hz - frame_hz) + p_.detuning_offset_hz;
  flip_probability_ = 0.5 * (1.0 - p_.visibility);
  if (p_.noise_enabled) {
    // Quasi-static sigma gives <exp(i 2 pi df t)> = exp(-(t/T2*)^2);
    // white per-sample sigma gives phase variance 2 t / T2echo.
    const double sigma_f = 1.0 / (std::sqrt(2.0) * M_PI * p_.t2_star_s);
    delta_shot_ = sigma_f * normal_(rng_);
    sigma_white_hz_ =
        std::sqrt(2.0 / (kSamplePeriodSeconds * p_.t2_echo_s)) / kTwoPi;
  }
}

void BlochEvolver::idle(uint64_t samples) {
  if (samples == 0) return;
  const double t = static_cast<double>(samples) * kSamplePeriodSeconds;
  double angle = kTwoPi * (delta_static_ + delta_shot_) * t;
  if (p_.noise_enabled) {
    const double var = 2.0 * t / p_.t2_echo_s;
    angle += std::sqrt(var) * normal_(rng_);
  }
  rotate_z(state_, angle);
  demod_acc_ += static_cast<uint32_t>(fq_ftw_ * (samples & 0xffffffffull));
}

void BlochEvolver::drive_sample(double i, double q, uint32_t ftw) {
  const double amp = std::hypot(i, q);
  if (amp == 0.0) {
    idle(1);
    return;
  }
  const double dt = kSamplePeriodSeconds;
  const double theta = std::atan2(q, i);
  const double alpha0 = theta - demod_acc_ * Nco::kPhaseScale;

  // Drive frequency relative to the rotating frame, signed.
  const auto dword = static_cast<int32_t>(ftw - fq_ftw_);
  const double drive_rel_hz = dword * (kSampleRateHz / 4294967296.0);

  double delta_hz = delta_static_ + delta_shot_;
  if (p_.noise_enabled) delta_hz += sigma_white_hz_ * normal_(rng_);

  const double omega = p_.rabi_rate_hz_per_unit * amp;
  const double dz = delta_hz - drive_rel_hz;  // qubit minus drive
  const double norm = std::sqrt(omega * omega + dz * dz);

  rotate_z(state_, -alpha0);
  if (norm > 0.0)
    rotate_axis(state_, omega / norm, 0.0, dz / norm, kTwoPi * norm * dt);
  rotate_z(state_, alpha0 + kTwoPi * drive_rel_hz * dt);

  demod_acc_ += fq_ftw_;
}

BlochEvolver::Projection BlochEvolver::project() {
  Projection proj;
  double p1 = p1_true();
  if (p1 < 0.0) p1 = 0.0;
  if (p1 > 1.0) p1 = 1.0;
  proj.true_outcome = uniform_(rng_) < p1;
  state_.x = 0.0;
  state_.y = 0.0;
  state_.z = proj.true_outcome ? -1.0 : 1.0;
  const bool flip = uniform_(rng_) < flip_probability_;
  proj.reported = proj.true_outcome != flip;
  return proj;
}

void DriveRecord::truncate(uint64_t keep_samples) {
  std::vector<Segment> kept;
  uint64_t seen = 0;
  for (Segment& seg : segments) {
    if (seen >= keep_samples) break;
    const uint64_t len = seg.idle_samples ? seg.idle_samples : seg.samples.size();
    if (seen + len <= keep_samples) {
      seen += len;
      kept.push_back(std::move(seg));
      continue;
    }
    const uint64_t take = keep_samples - seen;
    if (seg.idle_samples) {
      kept.push_back({take, {}});
    } else {
      seg.samples.resize(take);
      kept.push_back(std::move(seg));
    }
    seen = keep_samples;
  }
  segments = std::move(kept);
  total_samples = seen;
}

void DriveRecorder::consume(uint64_t, const double* i, const double* q,
                            int n_samples, uint32_t ftw) {
  bool silent = true;
  for (int k = 0; k < n_samples; ++k) {
    if (i[k] != 0.0 || q[k] != 0.0) {
      silent = false;
      break;
    }
  }
  record_.total_samples += n_samples;
  if (silent) {
    pending_idle_ += n_samples;
    return;
  }
  if (pending_idle_ > 0) {
    record_.segments.push_back({pending_idle_, {}});
    pending_idle_ = 0;
  }
  if (record_.segments.empty() || record_.segments.back().idle_samples != 0)
    record_.segments.push_back({0, {}});
  auto& seg = record_.segments.back().samples;
  for (int k = 0; k < n_samples; ++k) seg.push_back({i[k], q[k], ftw});
}

DriveRecord DriveRecorder::take() {
  if (pending_idle_ > 0) {
    record_.segments.push_back({pending_idle_, {}});
    pending_idle_ = 0;
  }
  DriveRecord out = std::move(record_);
  record_ = DriveRecord{};
  return out;
}

void replay_drive(const DriveRecord& record, BlochEvolver& evolver) {
  for (const auto& seg : record.segments) {
    if (seg.idle_samples) {
      evolver.idle(seg.idle_samples);
    } else {
      for (const auto& s : seg.samples) evolver.drive_sample(s.i, s.q, s.ftw);
    }
  }
}

void QubitSim::consume(uint64_t, const double* i, const double* q, int n_samples,
                       uint32_t ftw) {
  bool silent = true;
  for (int k = 0; k < n_samples; ++k) {
    if (i[k] != 0.0 || q[k] != 0.0) {
      silent = false;
      break;
    }
  }
  if (silent) {
    evolver_.idle(static_cast<uint64_t>(n_samples));
    return;
  }
  for (int k = 0; k < n_samples; ++k) evolver_.drive_sample(i[k], q[k], ftw);
}

std::vector<int16_t> QubitSim::window(const MuTrigger& trigger,
                                      const ReadoutParams&) {
  const auto proj = evolver_.project();
  projections_.push_back(proj);
  const double level = proj.reported ? params_.readout_level1 : params_.readout_level0;
  const uint64_t n = trigger.window_cycles * kSamplesPerCycle;
  std::vector<int16_t> samples(n);
  auto& rng = evolver_.rng();
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& s : samples) {
    double v = level;
    if (params_.noise_enabled && params_.readout_noise_sigma > 0.0)
      v += params_.readout_noise_sigma * noise(rng);
    s = quantize(v);
  }
  return samples;
}

QubitParams QubitParams::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad qubit config: ") + e.what());
  }
  QubitParams p;
  p.drive_channel = j.value("drive_channel", p.drive_channel);
  p.f_qubit_hz = j.value("f_qubit_hz", p.f_qubit_hz);
  p.rabi_rate_hz_per_unit = j.value("rabi_rate_hz_per_unit", p.rabi_rate_hz_per_unit);
  p.t2_star_s = j.value("t2_star_s", p.t2_star_s);
  p.t2_echo_s = j.value("t2_echo_s", p.t2_echo_s);
  p.visibility = j.value("visibility", p.visibility);
  p.detuning_offset_hz = j.value("detuning_offset_hz", p.detuning_offset_hz);
  p.noise_enabled = j.value("noise_enabled", p.noise_enabled);
  p.readout_level0 = j.value("readout_level0", p.readout_level0);
  p.readout_level1 = j.value("readout_level1", p.readout_level1);
  p.readout_noise_sigma = j.value("readout_noise_sigma", p.readout_noise_sigma);
  if (p.drive_channel < 0 || p.drive_channel >= kNumChannels)
    throw ConfigError("drive_channel out of range");
  if (p.t2_star_s <= 0.0 || p.t2_echo_s <= 0.0)
    throw ConfigError("coherence times must be positive");
  if (p.visibility < 0.0 || p.visibility > 1.0)
    throw ConfigError("visibility must lie in [0, 1]");
  if (p.rabi_rate_hz_per_unit <= 0.0)
    throw ConfigError("rabi_rate_hz_per_unit must be positive");
  return p;
}

QubitParams QubitParams::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string QubitParams::to_json_text() const {
  nlohmann::json j;
  j["drive_channel"] = drive_channel;
  j["f_qubit_hz"] = f_qubit_hz;
  j["rabi_rate_hz_per_unit"] = rabi_rate_hz_per_unit;
  j["t2_star_s"] = t2_star_s;
  j["t2_echo_s"] = t2_echo_s;
  j["visibility"] = visibility;
  j["detuning_offset_hz"] = detuning_offset_hz;
  j["noise_enabled"] = noise_enabled;
  j["readout_level0"] = readout_level0;
  j["readout_level1"] = readout_level1;
  j["readout_noise_sigma"] = readout_noise_sigma;
  return j.dump(2) + "\n";
}

}  // namespace qcs
