#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qcs/exec.hpp"
#include "qcs/trace.hpp"

namespace qcs {

enum class Role { Conductor, Performer };

const char* role_name(Role role);

inline constexpr double kMaxSkewPs = 5000.0;  // less than one cycle

struct UnitConfig {
  int unit_id = 0;
  Role role = Role::Performer;
  double skew_ps = 0.0;  // start-time offset from the shared reference
  Program program;
  ControllerConfig controller;
};

// Start-of-run coordination traffic, recorded in order.
struct SyncMessage {
  enum class Type { Arm, Ready, Start, Abort };
  Type type = Type::Arm;
  int from_unit = 0;
  int to_unit = -1;  // -1: broadcast
  uint64_t start_cycle = 0;  // Start only
};

const char* sync_message_name(SyncMessage::Type type);

struct UnitRunResult {
  int unit_id = 0;
  Role role = Role::Performer;
  double skew_ps = 0.0;
  double start_time_s = 0.0;  // start_cycle * 5 ns + skew
  RunResult run;
  TraceData trace;  // populated when frames were captured
};

struct EnsembleResult {
  uint64_t start_cycle = 0;
  std::vector<SyncMessage> messages;
  std::vector<UnitRunResult> units;
};

// A set of controllers sharing one reference clock and trigger line. One
// unit must be the conductor (RoleError otherwise); it arms every
// performer, waits for acknowledgements, and broadcasts the start cycle.
// A performer whose program or configuration fails to load never
// acknowledges, which surfaces as SyncTimeout.
class Ensemble {
 public:
  explicit Ensemble(std::vector<UnitConfig> units);

  EnsembleResult run(uint64_t start_cycle, bool capture_frames = false);

  // Arrival offset of each unit's start marker relative to the
  // conductor's, in picoseconds.
  std::vector<std::pair<int, double>> measure_skews() const;

  // Retunes every unit's start offset onto the conductor's, so measured
  // skews become zero.
  void deskew();

  const std::vector<UnitConfig>& units() const { return units_; }

 private:
  int conductor_index() const;
  std::vector<UnitConfig> units_;
};

// Recombines the per-unit traces of a program partitioned across units
// into the single timeline a lone controller would have produced.
// Requires identical start times, identical cycle counts, and disjoint
// channel sets.
TraceData merge_traces(const std::vector<UnitRunResult>& units);

uint64_t trace_hash(const TraceData& trace);

std::string ensemble_to_json(const EnsembleResult& result);

// Absolute-time pulse on/off edges across all units, sorted. Needs a run
// with frame capture.
std::string merged_timeline_json(const EnsembleResult& result);

// On-disk ensemble description: {"start_cycle", "units": [{"unit_id",
// "role", "skew_ps", "program", "dsp"?, "readout"?, "envelopes"?,
// "sync_edges"?, "capture_capacity"?}]}. Relative paths resolve against
// the config file's directory.
struct EnsembleSpec {
  uint64_t start_cycle = 0;
  std::vector<UnitConfig> units;
};

EnsembleSpec load_ensemble_spec(const std::string& path);

}  // namespace qcs
