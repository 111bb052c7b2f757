#include "qcs/trace.hpp"

#include <cstring>

#include <nlohmann/json.hpp>

namespace qcs {

uint64_t hash_bytes(const void* data, std::size_t n) {
  Fnv1a64 h;
  h.update(data, n);
  return h.value();
}

uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  Fnv1a64 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.value();
}

namespace {

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = (u >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    u |= static_cast<std::make_unsigned_t<T>>(b[i]) << (8 * i);
  return static_cast<T>(u);
}

}  // namespace

BinaryTraceWriter::BinaryTraceWriter(const std::string& path,
                                     const std::vector<int>& channels)
    : out_(path, std::ios::binary), channel_count_(channels.size()), path_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  out_.write("QCT1", 4);
  put<uint16_t>(out_, kTraceFormatVersion);
  put<uint16_t>(out_, static_cast<uint16_t>(channels.size()));
  for (int ch : channels) put<uint16_t>(out_, static_cast<uint16_t>(ch));
}

BinaryTraceWriter::~BinaryTraceWriter() { close(); }

void BinaryTraceWriter::frame(const SampleFrame& f) {
  if (f.channels.size() != channel_count_)
    throw LengthMismatch("frame width does not match trace header");
  put<uint64_t>(out_, f.cycle);
  for (const ChannelSamples& cs : f.channels)
    for (int16_t v : cs.iq) put<int16_t>(out_, v);
}

void BinaryTraceWriter::close() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
    out_.close();
  }
}

TraceData read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "QCT1", 4) != 0)
    throw DecodeError("not a sample trace: " + path);
  const auto version = get<uint16_t>(in);
  if (version != kTraceFormatVersion)
    throw DecodeError("unsupported trace version " + std::to_string(version));
  const auto count = get<uint16_t>(in);
  TraceData data;
  data.channels.reserve(count);
  for (int i = 0; i < count; ++i) data.channels.push_back(get<uint16_t>(in));
  if (!in) throw DecodeError("truncated trace header: " + path);

  while (true) {
    SampleFrame f;
    f.cycle = get<uint64_t>(in);
    if (in.eof()) break;
    f.channels.resize(count);
    for (auto& cs : f.channels)
      for (auto& v : cs.iq) v = get<int16_t>(in);
    if (!in) throw DecodeError("truncated trace frame: " + path);
    data.frames.push_back(std::move(f));
  }
  return data;
}

CsvTraceWriter::CsvTraceWriter(const std::string& path,
                               const std::vector<int>& channels)
    : out_(path), channels_(channels), path_(path) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  out_ << "cycle,channel";
  for (int k = 0; k < kSamplesPerCycle; ++k) out_ << ",i" << k << ",q" << k;
  out_ << "\n";
}

CsvTraceWriter::~CsvTraceWriter() { close(); }

void CsvTraceWriter::frame(const SampleFrame& f) {
  if (f.channels.size() != channels_.size())
    throw LengthMismatch("frame width does not match channel list");
  for (std::size_t li = 0; li < channels_.size(); ++li) {
    out_ << f.cycle << ',' << channels_[li];
    for (int16_t v : f.channels[li].iq) out_ << ',' << v;
    out_ << '\n';
  }
}

void CsvTraceWriter::close() {
  if (out_.is_open()) {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_);
    out_.close();
  }
}

std::string run_result_to_json(const RunResult& result) {
  nlohmann::json j;
  j["cycles"] = result.cycles;
  j["trace_hash"] = result.trace_hash;
  j["final_register"] = result.final_register;
  j["measured_mask"] = result.measured_mask;
  auto& triggers = j["readout_triggers"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.triggers.size(); ++i) {
    const MuTrigger& t = result.triggers[i];
    triggers.push_back({{"cycle", t.cycle},
                        {"channel", t.channel},
                        {"table_index", t.table_index},
                        {"window_cycles", t.window_cycles},
                        {"outcome", static_cast<int>(result.outcomes[i])}});
  }
  auto& writes = j["register_writes"] = nlohmann::json::array();
  for (const RegisterWrite& w : result.register_writes)
    writes.push_back(
        {{"cycle", w.cycle}, {"bit", w.bit}, {"value", static_cast<int>(w.value)}});
  auto& resumes = j["sync_resumes"] = nlohmann::json::array();
  for (const SyncResume& r : result.sync_resumes)
    resumes.push_back({{"edge_cycle", r.edge_cycle}, {"channels", r.channels}});
  return j.dump(2) + "\n";
}

}  // namespace qcs
