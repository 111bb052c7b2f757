#include "qcs/measure.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qcs/synth.hpp"

namespace qcs {

RdoResult process_rdo(const ReadoutParams& params, const MuTrigger& trigger,
                      std::span<const int16_t> adc) {
  const uint64_t expected = trigger.window_cycles * kSamplesPerCycle;
  if (adc.size() != expected) {
    throw LengthMismatch("ADC block has " + std::to_string(adc.size()) +
                         " samples, window needs " + std::to_string(expected));
  }

  RdoResult result;
  if (params.mode == ReadoutMode::ChargeSensing) {
    // Boxcar integration in exact integer arithmetic; scale once at the end.
    int64_t sum = 0;
    for (int16_t s : adc) sum += s;
    result.integral_i = static_cast<double>(sum) / 32768.0;
  } else {
    // Demodulate at the readout tone with a phase-coherent copy of the
    // channel NCO, boxcar over the full window, rotate, threshold on I.
    Nco demod;
    demod.phase_acc = trigger.nco_phase_seed;
    demod.ftw = params.readout_ftw;
    double acc_i = 0.0;
    double acc_q = 0.0;
    for (int16_t s : adc) {
      const auto [c, si] = demod.step();
      acc_i += s * c;
      acc_q -= s * si;
    }
    acc_i /= 32768.0;
    acc_q /= 32768.0;
    const double rho = params.rotation_phase_word * (2.0 * M_PI / 65536.0);
    const double cr = std::cos(rho);
    const double sr = std::sin(rho);
    result.integral_i = acc_i * cr - acc_q * sr;
    result.integral_q = acc_i * sr + acc_q * cr;
  }

  const bool above = result.integral_i > params.threshold;
  result.outcome = params.polarity == Polarity::AboveIsOne ? above : !above;
  return result;
}

void ShotStatistics::configure_pair(int bit_a, int bit_b) {
  if (bit_a < 0 || bit_a > 31 || bit_b < 0 || bit_b > 31) {
    throw ConfigError("statistics pair bits must be 0..31");
  }
  PairTable table;
  table.bit_a = bit_a;
  table.bit_b = bit_b;
  pairs_.push_back(table);
}

void ShotStatistics::accumulate(uint32_t snapshot, uint32_t measured_mask) {
  ++shots_;
  for (int b = 0; b < 32; ++b) {
    if ((measured_mask >> b) & 1u) {
      if ((snapshot >> b) & 1u) ++bits_[b].ones;
      else ++bits_[b].zeros;
    }
  }
  for (PairTable& pair : pairs_) {
    const uint32_t need = (1u << pair.bit_a) | (1u << pair.bit_b);
    if ((measured_mask & need) == need) {
      const int va = (snapshot >> pair.bit_a) & 1u;
      const int vb = (snapshot >> pair.bit_b) & 1u;
      ++pair.counts[va][vb];
    }
  }
}

void ShotStatistics::merge(const ShotStatistics& other) {
  if (other.pairs_.size() != pairs_.size()) {
    throw ConfigError("cannot merge statistics with different pair configurations");
  }
  shots_ += other.shots_;
  for (int b = 0; b < 32; ++b) {
    bits_[b].zeros += other.bits_[b].zeros;
    bits_[b].ones += other.bits_[b].ones;
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    if (pairs_[i].bit_a != other.pairs_[i].bit_a ||
        pairs_[i].bit_b != other.pairs_[i].bit_b) {
      throw ConfigError("cannot merge statistics with different pair configurations");
    }
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) pairs_[i].counts[a][b] += other.pairs_[i].counts[a][b];
  }
}

std::string ShotStatistics::to_json_text() const {
  nlohmann::json j;
  j["shots"] = shots_;
  j["bits"] = nlohmann::json::array();
  for (int b = 0; b < 32; ++b) {
    const uint64_t n = bits_[b].zeros + bits_[b].ones;
    if (n == 0) continue;
    j["bits"].push_back({
        {"bit", b},
        {"count0", bits_[b].zeros},
        {"count1", bits_[b].ones},
        {"shots", n},
        {"mean", static_cast<double>(bits_[b].ones) / static_cast<double>(n)},
    });
  }
  j["pairs"] = nlohmann::json::array();
  for (const PairTable& pair : pairs_) {
    j["pairs"].push_back({
        {"bit_a", pair.bit_a},
        {"bit_b", pair.bit_b},
        {"counts", {{pair.counts[0][0], pair.counts[0][1]},
                    {pair.counts[1][0], pair.counts[1][1]}}},
    });
  }
  return j.dump(2) + "\n";
}

void RawCapture::push(CaptureEntry entry) {
  ++total_;
  if (capacity_ == 0) return;
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(entry));
    return;
  }
  entries_[head_] = std::move(entry);
  head_ = head_ + 1 == capacity_ ? 0 : head_ + 1;
}

const CaptureEntry& RawCapture::entry(std::size_t i) const {
  if (i >= entries_.size()) throw Error("raw capture index out of range");
  if (entries_.size() < capacity_) return entries_[i];
  return entries_[(head_ + i) % capacity_];
}

void RawCapture::export_binary(const std::string& path) const {
  std::size_t window = entries_.empty() ? 0 : entries_.front().samples.size();
  for (std::size_t i = 0; i < size(); ++i) {
    if (entry(i).samples.size() != window) {
      throw LengthMismatch("raw capture holds mixed window lengths");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write("QCR1", 4);
  auto put16 = [&](uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    out.write(b, 2);
  };
  auto put32 = [&](uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
  };
  auto put64 = [&](uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
  };
  put16(1);
  put16(0);
  put64(size());
  put32(static_cast<uint32_t>(window));
  put32(static_cast<uint32_t>(kSampleRateHz));
  for (std::size_t i = 0; i < size(); ++i) {
    for (int16_t s : entry(i).samples) put16(static_cast<uint16_t>(s));
  }
  if (!out) throw IoError("failed writing " + path);
}

MeasurementUnit::MeasurementUnit(ReadoutTable table, std::size_t capture_capacity,
                                 std::vector<std::pair<int, int>> stat_pairs)
    : table_(std::move(table)), capture_(capture_capacity) {
  for (const auto& [a, b] : stat_pairs) stats_.configure_pair(a, b);
}

const ReadoutParams& MeasurementUnit::params(uint8_t index) const {
  if (!has_entry(index)) {
    throw ConfigError("readout table has no entry " + std::to_string(index));
  }
  return table_.entries[index];
}

RdoResult MeasurementUnit::handle(const MuTrigger& trigger, std::vector<int16_t> adc) {
  const RdoResult result = process_rdo(params(trigger.table_index), trigger, adc);
  CaptureEntry entry;
  entry.shot_index = next_shot_index_++;
  entry.table_index = trigger.table_index;
  entry.channel = trigger.channel;
  entry.trigger_cycle = trigger.cycle;
  entry.nco_phase_seed = trigger.nco_phase_seed;
  entry.outcome = result.outcome;
  entry.samples = std::move(adc);
  capture_.push(std::move(entry));
  return result;
}

namespace {

ReadoutParams readout_params_from_json(const nlohmann::json& j) {
  ReadoutParams p;
  const std::string mode = j.value("mode", "charge_sensing");
  if (mode == "charge_sensing") p.mode = ReadoutMode::ChargeSensing;
  else if (mode == "reflectometry") p.mode = ReadoutMode::Reflectometry;
  else throw ConfigError("readout mode must be charge_sensing or reflectometry");
  p.window_cycles = j.value("window_cycles", 1u);
  if (p.window_cycles < 1) throw ConfigError("readout window must be at least one cycle");
  p.threshold = j.value("threshold", 0.0);
  const std::string polarity = j.value("polarity", "above");
  if (polarity == "above") p.polarity = Polarity::AboveIsOne;
  else if (polarity == "below") p.polarity = Polarity::BelowIsOne;
  else throw ConfigError("readout polarity must be 'above' or 'below'");
  const int bit = j.value("target_bit", 0);
  if (bit < 0 || bit > 31) throw ConfigError("readout target bit out of range 0..31");
  p.target_bit = static_cast<uint8_t>(bit);
  p.readout_ftw = j.value("readout_ftw", 0u);
  p.rotation_phase_word = static_cast<uint16_t>(j.value("rotation_phase_word", 0u));
  return p;
}

nlohmann::json readout_params_to_json(const ReadoutParams& p) {
  return {
      {"mode", p.mode == ReadoutMode::ChargeSensing ? "charge_sensing" : "reflectometry"},
      {"window_cycles", p.window_cycles},
      {"threshold", p.threshold},
      {"polarity", p.polarity == Polarity::AboveIsOne ? "above" : "below"},
      {"target_bit", p.target_bit},
      {"readout_ftw", p.readout_ftw},
      {"rotation_phase_word", p.rotation_phase_word},
  };
}

}  // namespace

ReadoutTable ReadoutTable::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad readout table: ") + e.what());
  }
  ReadoutTable table;
  for (const auto& entry : j) table.entries.push_back(readout_params_from_json(entry));
  return table;
}

ReadoutTable ReadoutTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open readout table " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

std::string ReadoutTable::to_json_text() const {
  nlohmann::json j = nlohmann::json::array();
  for (const ReadoutParams& p : entries) j.push_back(readout_params_to_json(p));
  return j.dump(2) + "\n";
}

}  // namespace qcs
