#include "qcs/synth.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qcs {

QmcParams qmc_inverse(const QmcParams& imperfection) {
  const auto& m = imperfection.matrix;
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (std::abs(det) < 1e-12) {
    throw ConfigError("modulator imperfection matrix is singular");
  }
  QmcParams inv;
  inv.matrix[0][0] = m[1][1] / det;
  inv.matrix[0][1] = -m[0][1] / det;
  inv.matrix[1][0] = -m[1][0] / det;
  inv.matrix[1][1] = m[0][0] / det;
  inv.dc_i = -(inv.matrix[0][0] * imperfection.dc_i + inv.matrix[0][1] * imperfection.dc_q);
  inv.dc_q = -(inv.matrix[1][0] * imperfection.dc_i + inv.matrix[1][1] * imperfection.dc_q);
  return inv;
}

FirFilter::FirFilter(std::vector<double> taps) : taps_(std::move(taps)) {
  if (taps_.empty() || taps_.size() > kMaxFirTaps) {
    throw ConfigError("FIR tap count must be 1.." + std::to_string(kMaxFirTaps));
  }
  history_.assign(taps_.size(), 0.0);
}

DelayLine::DelayLine(int delay_samples) {
  if (delay_samples < 0 || delay_samples > kMaxSkewDelaySamples) {
    throw ConfigError("skew delay must be 0.." + std::to_string(kMaxSkewDelaySamples) +
                      " samples");
  }
  buffer_.assign(delay_samples, 0.0);
}

void validate_dsp_config(const ChannelDspConfig& config) {
  if (config.fir_taps.empty() || config.fir_taps.size() > kMaxFirTaps) {
    throw ConfigError("FIR tap count must be 1.." + std::to_string(kMaxFirTaps));
  }
  if (config.skew_delay_samples < 0 || config.skew_delay_samples > kMaxSkewDelaySamples) {
    throw ConfigError("skew delay must be 0.." + std::to_string(kMaxSkewDelaySamples) +
                      " samples");
  }
}

namespace {

nlohmann::json qmc_to_json(const QmcParams& qmc) {
  return {
      {"matrix", {{qmc.matrix[0][0], qmc.matrix[0][1]}, {qmc.matrix[1][0], qmc.matrix[1][1]}}},
      {"dc_offset", {qmc.dc_i, qmc.dc_q}},
  };
}

QmcParams qmc_from_json(const nlohmann::json& j) {
  QmcParams qmc;
  if (j.contains("matrix")) {
    const auto& m = j.at("matrix");
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) qmc.matrix[r][c] = m.at(r).at(c).get<double>();
  }
  if (j.contains("dc_offset")) {
    qmc.dc_i = j.at("dc_offset").at(0).get<double>();
    qmc.dc_q = j.at("dc_offset").at(1).get<double>();
  }
  return qmc;
}

}  // namespace

DspConfig DspConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad DSP config: ") + e.what());
  }
  DspConfig config;
  for (const auto& entry : j.value("channels", nlohmann::json::array())) {
    const int ch = entry.at("channel").get<int>();
    if (ch < 0 || ch >= kNumChannels) {
      throw ConfigError("DSP config channel " + std::to_string(ch) + " out of range");
    }
    ChannelDspConfig& c = config.channels[ch];
    const std::string path = entry.value("path", "rf");
    if (path == "rf") c.path = PathKind::RF;
    else if (path == "dc") c.path = PathKind::DC;
    else throw ConfigError("DSP config path must be 'rf' or 'dc', got '" + path + "'");
    if (entry.contains("qmc")) c.qmc = qmc_from_json(entry.at("qmc"));
    if (entry.contains("fir_taps")) c.fir_taps = entry.at("fir_taps").get<std::vector<double>>();
    c.skew_delay_samples = entry.value("skew_delay_samples", 0);
    c.dc_ramp_cycles = entry.value("dc_ramp_cycles", 0u);
    validate_dsp_config(c);
  }
  return config;
}

DspConfig DspConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open DSP config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

std::string DspConfig::to_json_text() const {
  nlohmann::json j;
  j["channels"] = nlohmann::json::array();
  for (int ch = 0; ch < kNumChannels; ++ch) {
    const ChannelDspConfig& c = channels[ch];
    j["channels"].push_back({
        {"channel", ch},
        {"path", c.path == PathKind::RF ? "rf" : "dc"},
        {"qmc", qmc_to_json(c.qmc)},
        {"fir_taps", c.fir_taps},
        {"skew_delay_samples", c.skew_delay_samples},
        {"dc_ramp_cycles", c.dc_ramp_cycles},
    });
  }
  return j.dump(2) + "\n";
}

}  // namespace qcs
