#include "qcs/exec.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

namespace qcs {

namespace {

std::string channel_str(int ch) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "ch%d", ch);
  return buf;
}

}  // namespace

Controller::Controller(Program program, ControllerConfig config)
    : program_(std::move(program)),
      config_(std::move(config)),
      mu_(config_.readout_table, config_.capture_capacity, config_.stat_pairs) {
  validate_program(program_);
  for (const auto& cd : config_.dsp.channels) validate_dsp_config(cd);

  std::sort(config_.sync_edges.begin(), config_.sync_edges.end());
  config_.sync_edges.erase(
      std::unique(config_.sync_edges.begin(), config_.sync_edges.end()),
      config_.sync_edges.end());

  // Cross-check programs against the configuration up front so failures
  // surface at load rather than mid-run.
  for (const auto& [ch, seq] : program_.channels) {
    for (const Instruction& instr : seq) {
      if (instr.opcode == Opcode::RDO && !mu_.has_entry(instr.rdo_index)) {
        throw ConfigError(channel_str(ch) + ": readout table entry " +
                          std::to_string(instr.rdo_index) + " is not configured");
      }
      const bool latches_envelope =
          instr.opcode == Opcode::STA || instr.opcode == Opcode::STP;
      if (latches_envelope && instr.envelope_id != 0 &&
          !config_.envelopes.contains(instr.envelope_id)) {
        throw ConfigError(channel_str(ch) + ": envelope " +
                          std::to_string(instr.envelope_id) + " is not configured");
      }
    }
  }

  taps_.fill(nullptr);
  for (const auto& [ch, seq] : program_.channels) {
    if (seq.empty()) continue;
    live_.push_back(ch);
    ChannelState& st = channels_[ch];
    st.sequence = &seq;
    st.halted = false;
    const ChannelDspConfig& cd = config_.dsp.channels[ch];
    st.path = cd.path;
    st.fir_i = FirFilter(cd.fir_taps);
    st.fir_q = FirFilter(cd.fir_taps);
    st.skew_i = DelayLine(cd.skew_delay_samples);
    st.skew_q = DelayLine(cd.skew_delay_samples);
    st.dc_ramp_cycles = cd.dc_ramp_cycles;
  }
}

void Controller::set_prequant_tap(int channel, PrequantTap* tap) {
  if (channel < 0 || channel >= kNumChannels)
    throw ConfigError("tap channel out of range");
  taps_[channel] = tap;
}

bool Controller::halted() const {
  for (int ch : live_)
    if (!channels_[ch].halted) return false;
  return true;
}

void Controller::fetch(int ch, StepEvents* events) {
  ChannelState& st = channels_[ch];
  const auto& seq = *st.sequence;
  if (st.pc >= seq.size()) {
    st.halted = true;
    st.gate_on = false;
    st.rect_hold = false;
    st.suppressed = false;
    return;
  }
  begin_window(ch, seq[st.pc++], events);
}

void Controller::begin_window(int ch, const Instruction& instr, StepEvents* events) {
  ChannelState& st = channels_[ch];
  bool met = true;
  if (instr.condition.enabled)
    met = reg_.bit(instr.condition.register_bit) == instr.condition.required_level;
  st.suppressed = !met;
  st.gate_on = false;
  st.rect_hold = false;

  if (instr.opcode == Opcode::SYNC) {
    if (met) {
      st.blocked_on_sync = true;
    } else {
      st.remaining_cycles = 1;  // skipped SYNC still costs its one cycle
    }
    return;
  }

  st.remaining_cycles = instr.duration_cycles;
  if (!met) {
    // Timed silent no-op: nothing is latched, nothing triggers, but the
    // window occupies the full duration so timing downstream is unchanged.
    if (st.path == PathKind::DC && st.dc.target() != 0.0)
      st.dc.retarget(0.0, static_cast<uint64_t>(st.dc_ramp_cycles) * kSamplesPerCycle);
    return;
  }

  switch (instr.opcode) {
    case Opcode::STA:
      st.amplitude_word = instr.amplitude_word;
      st.envelope_id = instr.envelope_id;
      st.gate_on = instr.active;
      break;
    case Opcode::STF:
      st.nco.ftw = instr.ftw;
      st.gate_on = instr.active;
      break;
    case Opcode::STP:
      st.nco.phase_offset = instr.phase_word;
      st.envelope_id = instr.envelope_id;
      st.gate_on = instr.active;
      break;
    case Opcode::STAP:
      st.amplitude_word = instr.amplitude_word;
      st.nco.phase_offset = instr.phase_word;
      st.gate_on = instr.active;
      break;
    case Opcode::WAIT:
      st.gate_on = instr.active;
      st.rect_hold = st.gate_on;  // hold the latched tone, unit envelope
      break;
    case Opcode::RDO: {
      MuTrigger trig;
      trig.cycle = cycle_;
      trig.channel = ch;
      trig.table_index = instr.rdo_index;
      trig.window_cycles = instr.duration_cycles;
      trig.nco_phase_seed = st.nco.phase_acc;
      const ReadoutParams& rp = mu_.params(instr.rdo_index);
      std::vector<int16_t> adc =
          adc_source_ ? adc_source_->window(trig, rp)
                      : std::vector<int16_t>(trig.window_cycles * kSamplesPerCycle, 0);
      const RdoResult res = mu_.handle(trig, std::move(adc));
      pending_writes_.push_back(
          {cycle_ + instr.duration_cycles - 1, rp.target_bit, res.outcome});
      if (events) {
        events->triggers.push_back(trig);
        events->outcomes.push_back(res.outcome);
      }
      break;
    }
    case Opcode::SYNC:
      break;  // handled above
  }

  if (st.path == PathKind::DC) {
    const double target = st.gate_on ? st.amplitude_word / 32768.0 : 0.0;
    if (target != st.dc.target())
      st.dc.retarget(target, static_cast<uint64_t>(st.dc_ramp_cycles) * kSamplesPerCycle);
  } else if (st.gate_on && !st.rect_hold) {
    st.cursor = st.envelope_id == 0
                    ? EnvelopeCursor()
                    : EnvelopeCursor(&config_.envelopes.at(st.envelope_id),
                                     instr.duration_cycles * kSamplesPerCycle);
  } else if (st.rect_hold) {
    st.cursor = EnvelopeCursor();
  }
}

void Controller::step(SampleFrame& frame, StepEvents* events) {
  if (events) {
    events->triggers.clear();
    events->outcomes.clear();
    events->register_writes.clear();
    events->sync_resume.reset();
  }
  if (next_edge_ < config_.sync_edges.size() &&
      config_.sync_edges[next_edge_] == cycle_) {
    edge_this_cycle_ = true;
    ++next_edge_;
  }

  frame.cycle = cycle_;
  frame.channels.resize(live_.size());

  for (std::size_t li = 0; li < live_.size(); ++li) {
    const int ch = live_[li];
    ChannelState& st = channels_[ch];
    if (!st.halted && !st.blocked_on_sync && st.remaining_cycles == 0)
      fetch(ch, events);
    const bool emitting = st.gate_on && !st.halted && !st.blocked_on_sync;

    const ChannelDspConfig& cd = config_.dsp.channels[ch];
    if (st.path == PathKind::RF) {
      if (emitting) {
        const double amp = st.amplitude_word / 32768.0;
        for (int k = 0; k < kSamplesPerCycle; ++k) {
          const auto [c, s] = st.nco.step();
          const double e = st.cursor.next();
          buf_i_[k] = amp * e * c;
          buf_q_[k] = amp * e * s;
        }
      } else {
        st.nco.advance(kSamplesPerCycle);  // phase runs through silence
        buf_i_.fill(0.0);
        buf_q_.fill(0.0);
      }
      if (!cd.qmc.is_identity()) {
        for (int k = 0; k < kSamplesPerCycle; ++k) {
          const auto [oi, oq] = apply_qmc(cd.qmc, buf_i_[k], buf_q_[k]);
          buf_i_[k] = oi;
          buf_q_[k] = oq;
        }
      }
      if (!st.fir_i.is_unit()) {
        for (int k = 0; k < kSamplesPerCycle; ++k) {
          buf_i_[k] = st.fir_i.process(buf_i_[k]);
          buf_q_[k] = st.fir_q.process(buf_q_[k]);
        }
      }
      if (cd.skew_delay_samples > 0) {
        for (int k = 0; k < kSamplesPerCycle; ++k) {
          buf_i_[k] = st.skew_i.process(buf_i_[k]);
          buf_q_[k] = st.skew_q.process(buf_q_[k]);
        }
      }
    } else {
      for (int k = 0; k < kSamplesPerCycle; ++k) {
        buf_i_[k] = st.dc.next();
        buf_q_[k] = 0.0;
      }
      if (!st.fir_i.is_unit())
        for (int k = 0; k < kSamplesPerCycle; ++k)
          buf_i_[k] = st.fir_i.process(buf_i_[k]);
      if (cd.skew_delay_samples > 0)
        for (int k = 0; k < kSamplesPerCycle; ++k)
          buf_i_[k] = st.skew_i.process(buf_i_[k]);
    }

    if (taps_[ch])
      taps_[ch]->consume(cycle_, buf_i_.data(), buf_q_.data(), kSamplesPerCycle,
                         st.nco.ftw);

    ChannelSamples& out = frame.channels[li];
    for (int k = 0; k < kSamplesPerCycle; ++k) {
      out.iq[2 * k] = quantize(buf_i_[k]);
      out.iq[2 * k + 1] = quantize(buf_q_[k]);
    }

    if (!st.halted && !st.blocked_on_sync && st.remaining_cycles > 0) {
      --st.remaining_cycles;
      // A channel whose final window just finished halts now, not one
      // fetch later, so the run ends on the last programmed cycle.
      if (st.remaining_cycles == 0 && st.pc >= st.sequence->size()) {
        st.halted = true;
        st.gate_on = false;
        st.rect_hold = false;
        st.suppressed = false;
      }
    }
  }

  // Measurement results land at the end of the window's last cycle, so a
  // conditional fetched on the following cycle is the first to see them.
  for (auto it = pending_writes_.begin(); it != pending_writes_.end();) {
    if (it->cycle == cycle_) {
      reg_.set_bit(it->bit, it->value);
      measured_mask_ |= 1u << it->bit;
      if (events) events->register_writes.push_back({cycle_, it->bit, it->value});
      it = pending_writes_.erase(it);
    } else {
      ++it;
    }
  }

  if (edge_this_cycle_) {
    SyncResume resume;
    resume.edge_cycle = cycle_;
    for (int ch : live_) {
      if (channels_[ch].blocked_on_sync) {
        channels_[ch].blocked_on_sync = false;
        // A SYNC at the end of a sequence has nothing to resume into.
        if (channels_[ch].pc >= channels_[ch].sequence->size())
          channels_[ch].halted = true;
        resume.channels.push_back(ch);
      }
    }
    if (events && !resume.channels.empty()) events->sync_resume = resume;
    edge_this_cycle_ = false;
  }

  ++cycle_;
}

RunResult Controller::run(FrameSink* sink) {
  RunResult res;
  SampleFrame frame;
  StepEvents ev;
  Fnv1a64 hash;

  while (!halted()) {
    bool any_live = false;
    bool any_ready = false;
    for (int ch : live_) {
      const ChannelState& st = channels_[ch];
      if (st.halted) continue;
      any_live = true;
      if (!st.blocked_on_sync) {
        any_ready = true;
        break;
      }
    }
    if (any_live && !any_ready && !edge_this_cycle_ &&
        next_edge_ >= config_.sync_edges.size()) {
      throw DeadlockError(
          "all running channels are blocked on SYNC and no trigger edge is pending");
    }

    step(frame, &ev);

    hash.update_value(frame.cycle);
    for (const ChannelSamples& cs : frame.channels)
      for (int16_t v : cs.iq) hash.update_value(v);
    if (sink) sink->frame(frame);

    res.triggers.insert(res.triggers.end(), ev.triggers.begin(), ev.triggers.end());
    res.outcomes.insert(res.outcomes.end(), ev.outcomes.begin(), ev.outcomes.end());
    res.register_writes.insert(res.register_writes.end(),
                               ev.register_writes.begin(), ev.register_writes.end());
    if (ev.sync_resume) res.sync_resumes.push_back(*ev.sync_resume);

    ++res.cycles;
    if (config_.max_cycles != 0 && res.cycles > config_.max_cycles)
      throw Error("cycle budget exceeded (" + std::to_string(config_.max_cycles) + ")");
  }

  res.trace_hash = hash.value();
  res.final_register = reg_.value;
  res.measured_mask = measured_mask_;
  return res;
}

}  // namespace qcs
