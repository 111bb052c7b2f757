#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "qcs/exec.hpp"

namespace qcs {

// Binary sample trace. Layout, all little endian:
//   "QCT1"  u16 version  u16 channel_count
//   channel_count x u16 channel id (ascending)
//   frames: u64 cycle, then channel_count x 10 x i16 (I/Q interleaved,
//   5 samples per cycle)
// The stream has no frame count; it ends at EOF.
inline constexpr uint16_t kTraceFormatVersion = 1;

class BinaryTraceWriter : public FrameSink {
 public:
  BinaryTraceWriter(const std::string& path, const std::vector<int>& channels);
  ~BinaryTraceWriter() override;

  void frame(const SampleFrame& f) override;
  void close();

 private:
  std::ofstream out_;
  std::size_t channel_count_ = 0;
  std::string path_;
};

struct TraceData {
  std::vector<int> channels;
  std::vector<SampleFrame> frames;
};

TraceData read_trace(const std::string& path);

// One row per channel per cycle: cycle,channel,i0,q0,...,i4,q4
class CsvTraceWriter : public FrameSink {
 public:
  CsvTraceWriter(const std::string& path, const std::vector<int>& channels);
  ~CsvTraceWriter() override;

  void frame(const SampleFrame& f) override;
  void close();

 private:
  std::ofstream out_;
  std::vector<int> channels_;
  std::string path_;
};

// Event summary (triggers, register writes, sync resumes, hash) as JSON.
std::string run_result_to_json(const RunResult& result);

uint64_t hash_file(const std::string& path);

}  // namespace qcs
