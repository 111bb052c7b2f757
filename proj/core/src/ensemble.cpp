#include "qcs/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "qcs/assembler.hpp"

namespace qcs {

const char* role_name(Role role) {
  return role == Role::Conductor ? "conductor" : "performer";
}

const char* sync_message_name(SyncMessage::Type type) {
  switch (type) {
    case SyncMessage::Type::Arm: return "arm";
    case SyncMessage::Type::Ready: return "ready";
    case SyncMessage::Type::Start: return "start";
    case SyncMessage::Type::Abort: return "abort";
  }
  return "?";
}

Ensemble::Ensemble(std::vector<UnitConfig> units) : units_(std::move(units)) {
  if (units_.empty()) throw ConfigError("ensemble has no units");
  int conductors = 0;
  std::set<int> ids;
  for (const UnitConfig& u : units_) {
    if (u.role == Role::Conductor) ++conductors;
    if (!ids.insert(u.unit_id).second)
      throw ConfigError("duplicate unit id " + std::to_string(u.unit_id));
    if (std::fabs(u.skew_ps) >= kMaxSkewPs)
      throw ConfigError("unit " + std::to_string(u.unit_id) +
                        ": skew must stay below one cycle");
  }
  if (conductors != 1)
    throw RoleError("ensemble needs exactly one conductor, found " +
                    std::to_string(conductors));
}

int Ensemble::conductor_index() const {
  for (std::size_t i = 0; i < units_.size(); ++i)
    if (units_[i].role == Role::Conductor) return static_cast<int>(i);
  return -1;
}

EnsembleResult Ensemble::run(uint64_t start_cycle, bool capture_frames) {
  EnsembleResult result;
  result.start_cycle = start_cycle;
  const int ci = conductor_index();
  const int conductor_id = units_[ci].unit_id;

  // The conductor loads first; its own failures propagate unchanged.
  std::vector<std::unique_ptr<Controller>> controllers(units_.size());
  controllers[ci] = std::make_unique<Controller>(units_[ci].program,
                                                 units_[ci].controller);

  // Arm phase: each performer loads on arm and acknowledges when ready.
  std::vector<int> silent;
  for (std::size_t i = 0; i < units_.size(); ++i) {
    if (static_cast<int>(i) == ci) continue;
    result.messages.push_back(
        {SyncMessage::Type::Arm, conductor_id, units_[i].unit_id, 0});
    try {
      controllers[i] = std::make_unique<Controller>(units_[i].program,
                                                    units_[i].controller);
      result.messages.push_back(
          {SyncMessage::Type::Ready, units_[i].unit_id, conductor_id, 0});
    } catch (const Error&) {
      silent.push_back(units_[i].unit_id);
    }
  }
  if (!silent.empty()) {
    std::string who;
    for (int id : silent) who += (who.empty() ? "" : ", ") + std::to_string(id);
    throw SyncTimeout("no ready acknowledgement from unit " + who);
  }

  result.messages.push_back(
      {SyncMessage::Type::Start, conductor_id, -1, start_cycle});

  for (std::size_t i = 0; i < units_.size(); ++i) {
    UnitRunResult ur;
    ur.unit_id = units_[i].unit_id;
    ur.role = units_[i].role;
    ur.skew_ps = units_[i].skew_ps;
    ur.start_time_s =
        static_cast<double>(start_cycle) * kCycleSeconds + ur.skew_ps * 1e-12;
    std::optional<CollectSink> sink;
    if (capture_frames) sink.emplace();
    try {
      ur.run = controllers[i]->run(capture_frames ? &*sink : nullptr);
    } catch (const Error&) {
      result.messages.push_back(
          {SyncMessage::Type::Abort, conductor_id, -1, 0});
      throw;
    }
    if (capture_frames) {
      ur.trace.channels = controllers[i]->live_channels();
      ur.trace.frames = std::move(sink->frames);
    }
    result.units.push_back(std::move(ur));
  }
  return result;
}

std::vector<std::pair<int, double>> Ensemble::measure_skews() const {
  const int ci = conductor_index();
  const double ref = units_[ci].skew_ps;
  std::vector<std::pair<int, double>> out;
  out.reserve(units_.size());
  for (const UnitConfig& u : units_) out.emplace_back(u.unit_id, u.skew_ps - ref);
  return out;
}

void Ensemble::deskew() {
  const int ci = conductor_index();
  const double ref = units_[ci].skew_ps;
  for (UnitConfig& u : units_) u.skew_ps = ref;
}

TraceData merge_traces(const std::vector<UnitRunResult>& units) {
  if (units.empty()) throw ConfigError("nothing to merge");
  const double t0 = units.front().start_time_s;
  const std::size_t cycles = units.front().trace.frames.size();
  std::map<int, std::pair<const UnitRunResult*, std::size_t>> by_channel;
  for (const UnitRunResult& u : units) {
    if (u.start_time_s != t0)
      throw LengthMismatch("units did not start together; deskew first");
    if (u.trace.frames.size() != cycles)
      throw LengthMismatch("per-unit traces have different lengths");
    for (std::size_t li = 0; li < u.trace.channels.size(); ++li) {
      const int ch = u.trace.channels[li];
      if (!by_channel.emplace(ch, std::make_pair(&u, li)).second)
        throw ConfigError("channel " + std::to_string(ch) +
                          " is driven by more than one unit");
    }
  }

  TraceData merged;
  for (const auto& [ch, src] : by_channel) merged.channels.push_back(ch);
  merged.frames.resize(cycles);
  for (std::size_t f = 0; f < cycles; ++f) {
    SampleFrame& out = merged.frames[f];
    out.cycle = units.front().trace.frames[f].cycle;
    out.channels.reserve(by_channel.size());
    for (const auto& [ch, src] : by_channel) {
      const auto& [unit, li] = src;
      if (unit->trace.frames[f].cycle != out.cycle)
        throw LengthMismatch("per-unit traces disagree on cycle numbering");
      out.channels.push_back(unit->trace.frames[f].channels[li]);
    }
  }
  return merged;
}

uint64_t trace_hash(const TraceData& trace) {
  Fnv1a64 hash;
  for (const SampleFrame& f : trace.frames) {
    hash.update_value(f.cycle);
    for (const ChannelSamples& cs : f.channels)
      for (int16_t v : cs.iq) hash.update_value(v);
  }
  return hash.value();
}

std::string merged_timeline_json(const EnsembleResult& result) {
  struct Edge {
    double time_s;
    int unit_id;
    int channel;
    bool on;
  };
  std::vector<Edge> edges;
  for (const UnitRunResult& u : result.units) {
    std::vector<bool> emitting(u.trace.channels.size(), false);
    for (const SampleFrame& f : u.trace.frames) {
      for (std::size_t li = 0; li < f.channels.size(); ++li) {
        bool active = false;
        for (int16_t v : f.channels[li].iq)
          if (v != 0) {
            active = true;
            break;
          }
        if (active != emitting[li]) {
          emitting[li] = active;
          edges.push_back({u.start_time_s +
                               static_cast<double>(f.cycle) * kCycleSeconds,
                           u.unit_id, u.trace.channels[li], active});
        }
      }
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.time_s != b.time_s) return a.time_s < b.time_s;
    if (a.unit_id != b.unit_id) return a.unit_id < b.unit_id;
    return a.channel < b.channel;
  });

  nlohmann::json j;
  j["start_cycle"] = result.start_cycle;
  auto& arr = j["pulse_edges"] = nlohmann::json::array();
  for (const Edge& e : edges)
    arr.push_back({{"time_s", e.time_s},
                   {"unit_id", e.unit_id},
                   {"channel", e.channel},
                   {"edge", e.on ? "on" : "off"}});
  return j.dump(2) + "\n";
}

std::string ensemble_to_json(const EnsembleResult& result) {
  nlohmann::json j;
  j["start_cycle"] = result.start_cycle;
  auto& msgs = j["messages"] = nlohmann::json::array();
  for (const SyncMessage& m : result.messages) {
    nlohmann::json e = {{"type", sync_message_name(m.type)},
                        {"from", m.from_unit},
                        {"to", m.to_unit}};
    if (m.type == SyncMessage::Type::Start) e["start_cycle"] = m.start_cycle;
    msgs.push_back(std::move(e));
  }
  auto& units = j["units"] = nlohmann::json::array();
  for (const UnitRunResult& u : result.units) {
    units.push_back({{"unit_id", u.unit_id},
                     {"role", role_name(u.role)},
                     {"skew_ps", u.skew_ps},
                     {"start_time_s", u.start_time_s},
                     {"cycles", u.run.cycles},
                     {"trace_hash", u.run.trace_hash},
                     {"final_register", u.run.final_register}});
  }
  return j.dump(2) + "\n";
}

EnsembleSpec load_ensemble_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad ensemble config: ") + e.what());
  }
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  EnsembleSpec spec;
  spec.start_cycle = j.value("start_cycle", 0ull);
  if (!j.contains("units") || !j["units"].is_array())
    throw ConfigError("ensemble config needs a units array");
  for (const auto& ju : j["units"]) {
    UnitConfig u;
    u.unit_id = ju.at("unit_id").get<int>();
    const std::string role = ju.value("role", "performer");
    if (role == "conductor") u.role = Role::Conductor;
    else if (role == "performer") u.role = Role::Performer;
    else throw ConfigError("unknown role '" + role + "'");
    u.skew_ps = ju.value("skew_ps", 0.0);
    u.program = load_program_any(resolve(ju.at("program").get<std::string>()));
    if (ju.contains("dsp"))
      u.controller.dsp = DspConfig::load(resolve(ju["dsp"].get<std::string>()));
    if (ju.contains("readout"))
      u.controller.readout_table =
          ReadoutTable::load(resolve(ju["readout"].get<std::string>()));
    if (ju.contains("envelopes"))
      u.controller.envelopes =
          EnvelopeLibrary::load(resolve(ju["envelopes"].get<std::string>()));
    if (ju.contains("sync_edges"))
      u.controller.sync_edges = ju["sync_edges"].get<std::vector<uint64_t>>();
    u.controller.capture_capacity = ju.value("capture_capacity", 0ull);
    spec.units.push_back(std::move(u));
  }
  return spec;
}

}  // namespace qcs
