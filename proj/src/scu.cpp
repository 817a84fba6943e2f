/*
 * Copyright 2026 The scusim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "scu.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "error.hpp"

namespace scusim {

const char* to_string(FsmState s) {
  switch (s) {
    case FsmState::Active: return "active";
    case FsmState::Sleep: return "sleep";
    case FsmState::IrqHandling: return "irq";
  }
  return "?";
}

Scu::Scu(const ValidatedConfig& cfg)
    : map_(cfg.address_map()),
      n_cores_(cfg.n_cores()),
      fifo_depth_(cfg.fifo_depth()),
      units_(cfg.n_cores()),
      barriers_(cfg.n_barriers()),
      mutexes_(cfg.n_mutexes()),
      lines_now_(cfg.n_cores(), 0),
      lines_next_(cfg.n_cores(), 0),
      activity_(cfg.n_cores(), 0) {}

std::uint32_t Scu::wait_bits(const PendingWait& w, const ScuBaseUnitState&) const {
  switch (w.kind) {
    case RegKind::BarrierTriggerWait:
    case RegKind::BarrierTriggerWaitClear:
      return 1u << kBarrierLine;
    case RegKind::MutexLock:
      return 1u << kMutexLine;
    case RegKind::FifoWaitPop:
      return 1u << kFifoLine;
    default:
      return ~0u;
  }
}

ScuAccessResult Scu::access(std::uint64_t cycle, unsigned core, std::uint32_t offset, bool write,
                            std::uint32_t wdata, bool via_port) {
  if (core >= n_cores_) throw Error(ErrorCode::InvalidArgument, "SCU access from unknown core");
  const ScuRegister* r = map_.decode(offset);
  if (!r) {
    std::ostringstream os;
    os << "unmapped SCU offset 0x" << std::hex << offset << " from core " << std::dec << core;
    throw Error(ErrorCode::DecodeFault, os.str());
  }
  activity_[core] = 1;
  now_ = cycle;
  auto& u = units_[core];

  if (write || !r->is_wait()) {
    if (write) {
      write_register(core, *r, wdata);
      if (log_triggers_ && (r->kind == RegKind::NotifierTrigger ||
                            r->kind == RegKind::BarrierTrigger || r->kind == RegKind::MutexLock ||
                            r->kind == RegKind::NotifierTriggerWait ||
                            r->kind == RegKind::NotifierTriggerWaitClear ||
                            r->kind == RegKind::BarrierTriggerWait ||
                            r->kind == RegKind::BarrierTriggerWaitClear))
        trigger_log_.push_back({cycle, core, r->kind, r->instance});
      return {true, 0};
    }
    if (log_triggers_ &&
        (r->kind == RegKind::NotifierTrigger || r->kind == RegKind::BarrierTrigger))
      trigger_log_.push_back({cycle, core, r->kind, r->instance});
    return {true, read_register(core, *r)};
  }

  if (via_port) {
    // No power management through the port: trigger and answer at once.
    std::uint32_t rdata = 0;
    if (r->kind == RegKind::MutexLock) {
      auto& m = mutexes_.at(r->instance);
      if (!m.owner) {
        m.owner = core;
        rdata = m.message;
      } else {
        rdata = 0xFFFFFFFFu;
      }
      if (log_triggers_) trigger_log_.push_back({cycle, core, r->kind, r->instance});
    } else if (r->kind == RegKind::FifoWaitPop) {
      if (fifo_.fifo.empty()) {
        rdata = 0xFFFFFFFFu;
      } else {
        rdata = fifo_.fifo.front();
        fifo_.fifo.pop_front();
      }
    } else {
      trigger(cycle, core, *r, 0, false);
      PendingWait w{offset, r->kind, r->instance, true};
      rdata = u.event_buffer & u.event_mask;
      if (r->clears_on_grant()) u.event_buffer &= ~(rdata & wait_bits(w, u));
    }
    return {true, rdata};
  }

  PendingWait w{offset, r->kind, r->instance, false};
  if (u.suspended_elw && u.suspended_elw->offset == offset) w = *u.suspended_elw;
  u.suspended_elw.reset();
  if (!w.triggered) {
    trigger(cycle, core, *r, 0, false);
    w.triggered = true;
  }
  u.pending_elw = w;
  bool now = r->kind == RegKind::MutexLock ? mutexes_.at(r->instance).owner == core
                                           : wait_ready(core);
  if (now) return {true, grant(core)};
  return {false, 0};
}

bool Scu::wait_ready(unsigned core) const {
  const auto& u = units_.at(core);
  if (!u.pending_elw) return false;
  const auto& w = *u.pending_elw;
  if (!(u.event_buffer & u.event_mask & wait_bits(w, u))) return false;
  if (w.kind == RegKind::FifoWaitPop && fifo_.fifo.empty()) return false;
  return true;
}

std::uint32_t Scu::grant(unsigned core) {
  auto& u = units_.at(core);
  if (!u.pending_elw) throw Error(ErrorCode::InvalidArgument, "grant without pending wait");
  const auto w = *u.pending_elw;
  u.pending_elw.reset();
  std::uint32_t rdata = u.event_buffer & u.event_mask;
  if (w.kind == RegKind::MutexLock) {
    rdata = mutexes_.at(w.instance).message;
  } else if (w.kind == RegKind::FifoWaitPop) {
    if (fifo_.fifo.empty()) {
      rdata = 0xFFFFFFFFu;
    } else {
      rdata = fifo_.fifo.front();
      fifo_.fifo.pop_front();
    }
  }
  const auto* r = map_.decode(w.offset);
  if (r && r->clears_on_grant()) u.event_buffer &= ~(u.event_buffer & u.event_mask & wait_bits(w, u));
  if (u.fsm == FsmState::Sleep) u.fsm = FsmState::Active;
  activity_[core] = 1;
  return rdata;
}

bool Scu::irq_pending(unsigned core) const {
  const auto& u = units_.at(core);
  return u.fsm != FsmState::IrqHandling && (u.event_buffer & u.irq_mask) != 0;
}

unsigned Scu::take_irq(unsigned core) {
  auto& u = units_.at(core);
  std::uint32_t p = u.event_buffer & u.irq_mask;
  if (!p) throw Error(ErrorCode::InvalidArgument, "no interrupt pending");
  unsigned line = static_cast<unsigned>(std::countr_zero(p));
  u.event_buffer &= ~(1u << line);
  if (u.pending_elw) {
    u.suspended_elw = u.pending_elw;
    u.pending_elw.reset();
  }
  u.fsm = FsmState::IrqHandling;
  activity_[core] = 1;
  return line;
}

void Scu::irq_return(unsigned core) { units_.at(core).fsm = FsmState::Active; }

void Scu::assert_lines(unsigned core, std::uint32_t lines) { lines_now_.at(core) |= lines; }

bool Scu::push_external(std::uint8_t id) {
  if (fifo_.fifo.size() >= fifo_depth_) {
    ++fifo_.overflows;
    return false;
  }
  fifo_.fifo.push_back(id);
  return true;
}

void Scu::end_cycle() {
  for (unsigned c = 0; c < n_cores_; ++c) {
    units_[c].event_buffer |= lines_now_[c];
    lines_now_[c] = lines_next_[c];
    lines_next_[c] = 0;
    activity_[c] = 0;
  }
  fifo_.line_asserted = !fifo_.fifo.empty();
  if (fifo_.line_asserted)
    for (auto& l : lines_now_) l |= 1u << kFifoLine;
}

void Scu::notify(unsigned event, std::uint32_t targets) {
  if (targets == 0) targets = all_cores();
  targets &= all_cores();
  for (unsigned c = 0; c < n_cores_; ++c)
    if (targets & (1u << c)) lines_next_[c] |= 1u << (kNotifierLineFirst + event);
}

void Scu::barrier_arrive(std::uint64_t cycle, unsigned b, unsigned core) {
  auto& br = barriers_.at(b);
  std::uint32_t bit = 1u << core;
  if (!(br.worker_mask & bit)) {
    ++stray_arrivals_;
    if (warnings_.size() < 16)
      warnings_.push_back("cycle " + std::to_string(cycle) + ": core " + std::to_string(core) +
                          " arrived at barrier " + std::to_string(b) +
                          " but is not a worker; ignored");
    return;
  }
  br.status |= bit;
  if (br.status == br.worker_mask) {
    br.status = 0;
    ++br.firings;
    for (unsigned c = 0; c < n_cores_; ++c)
      if (br.target_mask & (1u << c)) lines_next_[c] |= 1u << kBarrierLine;
  }
}

void Scu::mutex_unlock(unsigned m, unsigned core, std::uint32_t message) {
  auto& mx = mutexes_.at(m);
  if (mx.owner != core)
    throw Error(ErrorCode::UnlockNotOwner,
                "core " + std::to_string(core) + " unlocked mutex " + std::to_string(m) +
                    (mx.owner ? " owned by core " + std::to_string(*mx.owner) : " that is free"));
  mx.message = message;
  if (mx.wait_queue.empty()) {
    mx.owner.reset();
    return;
  }
  mx.owner = mx.wait_queue.front();
  mx.wait_queue.pop_front();
  lines_next_[*mx.owner] |= 1u << kMutexLine;
}

void Scu::trigger(std::uint64_t cycle, unsigned core, const ScuRegister& r, std::uint32_t wdata,
                  bool write) {
  auto& u = units_[core];
  switch (r.kind) {
    case RegKind::NotifierTrigger:
      notify(r.instance, write ? wdata : u.notifier_target_reg);
      break;
    case RegKind::NotifierTriggerWait:
    case RegKind::NotifierTriggerWaitClear:
      notify(r.instance, u.notifier_target_reg);
      break;
    case RegKind::BarrierTrigger:
    case RegKind::BarrierTriggerWait:
    case RegKind::BarrierTriggerWaitClear:
      barrier_arrive(cycle, r.instance, core);
      break;
    case RegKind::MutexLock: {
      auto& m = mutexes_.at(r.instance);
      if (!m.owner) {
        m.owner = core;
      } else if (*m.owner != core &&
                 std::find(m.wait_queue.begin(), m.wait_queue.end(), core) ==
                     m.wait_queue.end()) {
        m.wait_queue.push_back(core);
      }
      break;
    }
    default:
      return;
  }
  if (log_triggers_) trigger_log_.push_back({cycle, core, r.kind, r.instance});
}

std::uint32_t Scu::read_register(unsigned core, const ScuRegister& r) {
  auto& u = units_[core];
  switch (r.kind) {
    case RegKind::EvtBuffer: return u.event_buffer;
    case RegKind::EvtMask: return u.event_mask;
    case RegKind::IrqMask: return u.irq_mask;
    case RegKind::NotifierTarget: return u.notifier_target_reg;
    case RegKind::FsmStatus: return static_cast<std::uint32_t>(u.fsm);
    case RegKind::NotifierTrigger:
      notify(r.instance, u.notifier_target_reg);
      return 0;
    case RegKind::BarrierTrigger:
      barrier_arrive(now_, r.instance, core);
      return barriers_.at(r.instance).status;
    case RegKind::BarrierStatus: return barriers_.at(r.instance).status;
    case RegKind::BarrierWorkerMask: return barriers_.at(r.instance).worker_mask;
    case RegKind::BarrierTargetMask: return barriers_.at(r.instance).target_mask;
    case RegKind::MutexState: {
      const auto& m = mutexes_.at(r.instance);
      std::uint32_t v = 0;
      if (m.owner) v = 0x80000000u | *m.owner;
      v |= static_cast<std::uint32_t>(std::min<std::size_t>(m.wait_queue.size(), 255)) << 8;
      return v;
    }
    case RegKind::FifoPop: {
      if (fifo_.fifo.empty()) return 0xFFFFFFFFu;
      std::uint32_t v = fifo_.fifo.front();
      fifo_.fifo.pop_front();
      return v;
    }
    case RegKind::FifoCount: return static_cast<std::uint32_t>(fifo_.fifo.size());
    default: return 0;
  }
}

void Scu::write_register(unsigned core, const ScuRegister& r, std::uint32_t wdata) {
  auto& u = units_[core];
  switch (r.kind) {
    case RegKind::EvtBufferClear: u.event_buffer &= ~wdata; break;
    case RegKind::EvtMask: u.event_mask = wdata; break;
    case RegKind::EvtMaskSet: u.event_mask |= wdata; break;
    case RegKind::EvtMaskClear: u.event_mask &= ~wdata; break;
    case RegKind::IrqMask: u.irq_mask = wdata; break;
    case RegKind::IrqMaskSet: u.irq_mask |= wdata; break;
    case RegKind::IrqMaskClear: u.irq_mask &= ~wdata; break;
    case RegKind::NotifierTarget: u.notifier_target_reg = wdata & all_cores(); break;
    case RegKind::NotifierTrigger:
    case RegKind::NotifierTriggerWait:
    case RegKind::NotifierTriggerWaitClear:
      notify(r.instance, wdata);
      break;
    case RegKind::BarrierTrigger:
    case RegKind::BarrierTriggerWait:
    case RegKind::BarrierTriggerWaitClear:
      barrier_arrive(now_, r.instance, core);
      break;
    case RegKind::BarrierWorkerMask:
      barriers_.at(r.instance).worker_mask = wdata & all_cores();
      barriers_.at(r.instance).status &= wdata;
      break;
    case RegKind::BarrierTargetMask: barriers_.at(r.instance).target_mask = wdata & all_cores(); break;
    case RegKind::MutexLock: mutex_unlock(r.instance, core, wdata); break;
    default: break;
  }
}

}  // namespace scusim
