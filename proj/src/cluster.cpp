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

#include "cluster.hpp"

#include <ostream>
#include <sstream>

#include "error.hpp"

namespace scusim {

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Halted: return "halted";
    case RunStatus::Deadlock: return "deadlock";
    case RunStatus::CycleLimit: return "cycle_limit";
  }
  return "?";
}

Cluster::Cluster(ValidatedConfig cfg)
    : cfg_(std::move(cfg)),
      tcdm_(cfg_),
      scu_(cfg_),
      programs_(cfg_.n_cores()),
      cores_(cfg_.n_cores()),
      last_kind_(cfg_.n_cores(), CycleKind::Gated),
      port_req_(cfg_.n_cores(), 0),
      tcdm_req_(cfg_.n_cores(), 0),
      trace_pc_(cfg_.n_cores(), 0),
      halt_cycle_(cfg_.n_cores()),
      open_elw_(cfg_.n_cores()),
      timeline_(cfg_.n_cores()) {
  for (unsigned k = 0; k < cores_.size(); ++k) cores_[k].id = k;
}

void Cluster::load_program(unsigned core, Program program) {
  if (core >= n_cores()) throw Error(ErrorCode::InvalidArgument, "no such core");
  auto& s = cores_[core];
  programs_.at(core) = std::move(program);
  s.pc = 0;
  s.mode = CoreMode::Ready;
  halt_cycle_[core].reset();
}

void Cluster::set_register(unsigned core, unsigned reg, std::uint32_t value) {
  if (core >= n_cores()) throw Error(ErrorCode::InvalidArgument, "no such core");
  if (reg >= kNumRegs) throw Error(ErrorCode::InvalidArgument, "register index out of range");
  cores_.at(core).set_reg(reg, value);
}

void Cluster::schedule_event_line(std::uint64_t cycle, unsigned core, unsigned line) {
  if (core >= n_cores() || line >= kEventLines)
    throw Error(ErrorCode::InvalidArgument, "event line stimulus out of range");
  line_stimuli_.emplace(cycle, std::make_pair(core, line));
}

void Cluster::schedule_fifo_push(std::uint64_t cycle, std::uint8_t id) {
  fifo_stimuli_.emplace(cycle, id);
}

bool Cluster::all_halted() const {
  for (const auto& s : cores_)
    if (s.mode != CoreMode::Halted) return false;
  return true;
}

void Cluster::mark(unsigned k, std::uint64_t c, const Instr& in) {
  if (in.op == Op::Label) return;
  markers_.push_back({c, k, in.op, in.sym});
  if (in.op == Op::MeasureBegin) ++measure_open_;
  if (in.op == Op::MeasureEnd) --measure_open_;
  if (trace_) {
    *trace_ << "{\"cycle\":" << c << ",\"core\":" << k << ",\"marker\":\"" << to_string(in.op)
            << "\"";
    if (!in.sym.empty()) *trace_ << ",\"tag\":\"" << in.sym << "\"";
    *trace_ << "}\n";
  }
}

void Cluster::take_irq(unsigned k, std::uint64_t c) {
  auto& s = cores_[k];
  int entry = programs_[k].irq_entry();
  scu_.take_irq(k);
  if (open_elw_[k]) {
    elw_log_[*open_elw_[k]].interrupted = true;
    open_elw_[k].reset();
  }
  s.epc = s.pc;
  s.pc = static_cast<std::uint32_t>(entry);
  s.in_handler = true;
  s.busy = true;
  s.mode = CoreMode::IrqEntry;
  s.mode_cycle = c + 1;
}

void Cluster::wake(unsigned k, std::uint64_t c) {
  auto& s = cores_[k];
  s.response = scu_.grant(k);
  s.busy = true;
  s.mode = CoreMode::ElwWake;
  s.mode_cycle = s.gate_allowed ? c + 3 : c + 1;
  scu_.set_fsm(k, s.in_handler ? FsmState::IrqHandling : FsmState::Active);
  if (open_elw_[k]) {
    elw_log_[*open_elw_[k]].grant = c;
    open_elw_[k].reset();
  }
}

void Cluster::retire_response(unsigned k) {
  auto& s = cores_[k];
  const auto& in = programs_[k][s.pc];
  if (in.op != Op::Store) s.set_reg(s.dest_reg, s.response);
  if (in.op == Op::Load && s.mem_request && s.mem_request->kind == MemKind::Read &&
      cfg_.load_use_penalty() > 0 && s.dest_reg != 0) {
    s.load_pending = true;
    s.load_reg = s.dest_reg;
    s.load_blocked_until = cycle_ + cfg_.load_use_penalty();
  }
  ++s.pc;
  s.mode = CoreMode::Ready;
  s.mem_request.reset();
  last_kind_[k] = CycleKind::Executing;
}

void Cluster::memory_op(unsigned k, std::uint64_t c, const Instr& in,
                        std::vector<MemRequest>& reqs) {
  auto& s = cores_[k];
  const auto& m = cfg_.address_map();
  std::uint32_t addr = effective_address(s, in);
  auto fault = [&](const char* why) {
    std::ostringstream os;
    os << why << " at 0x" << std::hex << addr << " (core " << std::dec << k << ", pc " << s.pc
       << ": " << format_instr(in) << ")";
    throw Error(ErrorCode::AddressFault, os.str());
  };
  if (addr % 4 != 0) fault("misaligned access");
  s.dest_reg = in.rd;

  bool tas = in.op == Op::TasLoad;
  std::uint32_t plain = addr;
  if ((addr & m.tas_flag()) && m.in_tcdm(addr & ~m.tas_flag())) {
    tas = true;
    plain = addr & ~m.tas_flag();
  }
  if (tas) {
    if (in.op == Op::Store || in.op == Op::Elw) fault("TAS attribute on a store or event load");
    if (!m.in_tcdm(plain)) fault("TAS access outside TCDM");
    s.mem_request = MemRequest{k, plain, MemKind::TasRead, 0};
  } else if (m.in_tcdm(addr)) {
    if (in.op == Op::Store) s.mem_request = MemRequest{k, addr, MemKind::Write, s.reg(in.rs2)};
    else s.mem_request = MemRequest{k, addr, MemKind::Read, 0};
  }
  if (s.mem_request) {
    s.mode = CoreMode::MemWait;
    s.mode_cycle = c;
    reqs.push_back(*s.mem_request);
    tcdm_req_[k] = 1;
    return;
  }

  if (m.in_alias(addr)) {
    std::uint32_t off = addr - m.scu_alias_base;
    if (in.op == Op::Store) {
      scu_.access(c, k, off, true, s.reg(in.rs2), false);
      ++s.pc;
      last_kind_[k] = CycleKind::Executing;
      return;
    }
    const ScuRegister* r = m.decode(off);
    auto res = scu_.access(c, k, off, false, 0, false);
    bool waits = r && r->is_wait();
    if (waits) elw_log_.push_back({k, s.pc, off, c, std::nullopt, res.granted, false});
    if (res.granted) {
      if (waits) elw_log_.back().grant = c;
      s.set_reg(in.rd, res.rdata);
      ++s.pc;
      last_kind_[k] = CycleKind::Executing;
      return;
    }
    open_elw_[k] = elw_log_.size() - 1;
    s.mode = CoreMode::ElwEntry;
    s.mode_cycle = c;
    s.gate_allowed = in.op == Op::Elw;
    s.stall_cause = StallCause::ElwBlocked;
    last_kind_[k] = CycleKind::Stalled;
    return;
  }

  if (m.in_global(addr)) {
    std::uint32_t rel = addr - m.scu_global_base;
    s.port_unit = rel / m.scu_alias_size;
    s.port_offset = rel % m.scu_alias_size;
    s.port_write = in.op == Op::Store;
    s.port_wdata = s.port_write ? s.reg(in.rs2) : 0;
    s.mode = CoreMode::PortWait;
    s.mode_cycle = c;
    port_req_[k] = 1;
    return;
  }
  fault("unmapped address");
}

void Cluster::issue(unsigned k, std::uint64_t c, std::vector<MemRequest>& reqs) {
  auto& s = cores_[k];
  const auto& prog = programs_[k];
  if (!s.in_handler && prog.irq_entry() >= 0 && scu_.irq_pending(k)) {
    take_irq(k, c);
    s.stall_cause = StallCause::InterruptEntry;
    last_kind_[k] = CycleKind::Stalled;
    return;
  }
  while (s.pc < prog.size() && is_pseudo(prog[s.pc].op)) {
    mark(k, c, prog[s.pc]);
    ++s.pc;
  }
  if (s.pc >= prog.size()) {
    s.mode = CoreMode::Halted;
    halt_cycle_[k] = c;
    last_kind_[k] = CycleKind::Gated;
    return;
  }
  const Instr& in = prog[s.pc];
  trace_pc_[k] = s.pc;
  if (s.load_pending) {
    if (c <= s.load_blocked_until && reads_register(in, s.load_reg)) {
      s.stall_cause = StallCause::LoadUse;
      last_kind_[k] = CycleKind::Stalled;
      return;
    }
    s.load_pending = false;
  }
  switch (in.op) {
    case Op::Halt:
      s.mode = CoreMode::Halted;
      halt_cycle_[k] = c + 1;
      last_kind_[k] = CycleKind::Executing;
      return;
    case Op::Compute:
      if (in.imm > 1) {
        s.mode = CoreMode::Compute;
        s.compute_left = static_cast<std::uint32_t>(in.imm - 1);
        s.mode_cycle = s.pc;
      }
      ++s.pc;
      last_kind_[k] = CycleKind::Executing;
      return;
    case Op::Iret:
      if (!s.in_handler) throw Error(ErrorCode::IllegalInstr, "iret outside an interrupt handler");
      s.in_handler = false;
      s.pc = s.epc;
      scu_.irq_return(k);
      last_kind_[k] = CycleKind::Executing;
      return;
    case Op::Load:
    case Op::Store:
    case Op::TasLoad:
    case Op::Elw:
      memory_op(k, c, in, reqs);
      return;
    default: {
      const std::uint32_t next = execute_simple(s, in);
      const unsigned bubble = in.op == Op::Jump ? cfg_.jump_penalty() : cfg_.branch_penalty();
      if (is_branch(in.op) && next != s.pc + 1 && bubble > 0) {
        s.mode = CoreMode::Bubble;
        s.compute_left = bubble;
      }
      s.pc = next;
      last_kind_[k] = CycleKind::Executing;
      return;
    }
  }
}

void Cluster::step() {
  const std::uint64_t c = cycle_;
  for (auto it = line_stimuli_.begin(); it != line_stimuli_.end() && it->first <= c;)
    {
      scu_.assert_lines(it->second.first, 1u << it->second.second);
      it = line_stimuli_.erase(it);
    }
  for (auto it = fifo_stimuli_.begin(); it != fifo_stimuli_.end() && it->first <= c;) {
    scu_.push_external(it->second);
    it = fifo_stimuli_.erase(it);
  }

  const unsigned n = n_cores();
  for (unsigned k = 0; k < n; ++k) {
    last_kind_[k] = CycleKind::Gated;
    cores_[k].stall_cause = StallCause::None;
    port_req_[k] = 0;
    tcdm_req_[k] = 0;
    trace_pc_[k] = cores_[k].pc;
  }

  // Wake and interrupt resolution for cores whose grant is withheld.
  for (unsigned k = 0; k < n; ++k) {
    auto& s = cores_[k];
    if (s.mode == CoreMode::ElwEntry && c >= s.mode_cycle + 2) {
      if (s.gate_allowed) {
        s.mode = CoreMode::Sleeping;
        scu_.set_fsm(k, FsmState::Sleep);
      } else if (scu_.wait_ready(k)) {
        wake(k, c);
      }
    }
    if (s.mode == CoreMode::Sleeping) {
      if (!s.in_handler && programs_[k].irq_entry() >= 0 && scu_.irq_pending(k)) take_irq(k, c);
      else if (scu_.wait_ready(k)) wake(k, c);
    }
  }

  std::vector<MemRequest> reqs;
  for (unsigned k = 0; k < n; ++k) {
    auto& s = cores_[k];
    switch (s.mode) {
      case CoreMode::Halted:
      case CoreMode::Sleeping:
        break;
      case CoreMode::Ready:
        issue(k, c, reqs);
        break;
      case CoreMode::Compute:
        trace_pc_[k] = static_cast<std::uint32_t>(s.mode_cycle);
        last_kind_[k] = CycleKind::Executing;
        if (--s.compute_left == 0) s.mode = CoreMode::Ready;
        break;
      case CoreMode::MemWait:
        reqs.push_back(*s.mem_request);
        tcdm_req_[k] = 1;
        break;
      case CoreMode::MemRespond:
      case CoreMode::PortRespond:
        if (c >= s.mode_cycle) {
          retire_response(k);
        } else {
          s.stall_cause = StallCause::MemPending;
          last_kind_[k] = CycleKind::Stalled;
        }
        break;
      case CoreMode::PortWait:
        port_req_[k] = 1;
        break;
      case CoreMode::ElwEntry:
        if (c == s.mode_cycle + 1 && s.gate_allowed) s.busy = false;
        s.stall_cause = StallCause::ElwBlocked;
        last_kind_[k] = CycleKind::Stalled;
        break;
      case CoreMode::ElwWake:
        if (c >= s.mode_cycle) {
          retire_response(k);
        } else {
          s.stall_cause = StallCause::ElwBlocked;
          last_kind_[k] = CycleKind::Stalled;
        }
        break;
      case CoreMode::Bubble:
        s.stall_cause = StallCause::BranchBubble;
        last_kind_[k] = CycleKind::Stalled;
        if (--s.compute_left == 0) s.mode = CoreMode::Ready;
        break;
      case CoreMode::IrqEntry:
        s.stall_cause = StallCause::InterruptEntry;
        last_kind_[k] = CycleKind::Stalled;
        if (c >= s.mode_cycle) s.mode = CoreMode::Ready;
        break;
    }
  }

  // TCDM arbitration (also drains TAS writebacks when nothing is requested).
  {
    std::vector<std::uint8_t> granted(n, 0);
    for (const auto& g : tcdm_.arbitrate(c, reqs)) {
      auto& s = cores_[g.core_id];
      granted[g.core_id] = 1;
      s.response = g.rdata;
      unsigned lat = g.kind == MemKind::TasRead ? cfg_.tas_latency() : cfg_.mem_latency();
      s.mode = CoreMode::MemRespond;
      s.mode_cycle = c + lat - 1;
      if (lat == 1) {
        retire_response(g.core_id);
      } else {
        s.stall_cause = StallCause::MemPending;
        last_kind_[g.core_id] = CycleKind::Stalled;
      }
    }
    for (const auto& r : reqs) {
      if (granted[r.core_id]) continue;
      cores_[r.core_id].stall_cause = StallCause::MemPending;
      last_kind_[r.core_id] = CycleKind::Stalled;
    }
  }

  // Peripheral port: one grant per cycle, round robin.
  std::optional<unsigned> port_winner;
  for (unsigned i = 0; i < n; ++i) {
    unsigned k = (port_rr_ + i) % n;
    if (port_req_[k] && cores_[k].mode == CoreMode::PortWait) {
      port_winner = k;
      break;
    }
  }
  for (unsigned k = 0; k < n; ++k) {
    if (!port_req_[k]) continue;
    auto& s = cores_[k];
    if (port_winner == k) {
      if (s.port_unit >= n) throw Error(ErrorCode::AddressFault, "global SCU window out of range");
      auto res = scu_.access(c, s.port_unit, s.port_offset, s.port_write, s.port_wdata, true);
      s.response = res.rdata;
      s.mode = CoreMode::PortRespond;
      s.mode_cycle = c + cfg_.periph_latency() - 1;
      port_rr_ = (k + 1) % n;
      if (cfg_.periph_latency() == 1) {
        retire_response(k);
        continue;
      }
    }
    s.stall_cause = StallCause::MemPending;
    last_kind_[k] = CycleKind::Stalled;
  }

  power_.set_window(measure_open_ > 0);
  account(c);
  scu_.end_cycle();
  ++cycle_;
}

void Cluster::account(std::uint64_t c) {
  const unsigned n = n_cores();
  ActivityCounts a;
  for (unsigned k = 0; k < n; ++k) {
    auto& s = cores_[k];
    CycleKind kind = last_kind_[k];
    bool clocked = kind != CycleKind::Gated;
    s.clock_enabled = clocked;
    if (clocked) {
      ++s.active_cycles;
      auto& tl = timeline_[k];
      if (!tl.empty() && tl.back().second == c) ++tl.back().second;
      else tl.emplace_back(c, c + 1);
    } else {
      ++s.gated_cycles;
    }
    if (kind == CycleKind::Executing) ++s.retired;
    if (kind == CycleKind::Stalled) ++s.stalled_cycles;

    a.at(Component::Core, kind == CycleKind::Executing ? UnitState::Active
                          : clocked                    ? UnitState::Idle
                                                       : UnitState::Gated) += 1;
    a.at(Component::ClockTree, clocked ? UnitState::Active : UnitState::Gated) += 1;
    a.at(Component::Interconnect,
         (tcdm_req_[k] || port_req_[k]) ? UnitState::Active : UnitState::Idle) += 1;
    a.at(Component::Scu, (scu_.unit_active(k) || scu_.lines_now(k)) ? UnitState::Active
                                                                    : UnitState::Idle) += 1;
    if (trace_ && clocked) {
      *trace_ << "{\"cycle\":" << c << ",\"core\":" << k << ",\"pc\":" << trace_pc_[k]
              << ",\"kind\":\"" << to_string(kind) << "\",\"stall_cause\":\""
              << to_string(s.stall_cause) << "\",\"fsm\":\"" << to_string(scu_.unit(k).fsm)
              << "\"}\n";
    }
  }
  const auto& banks = tcdm_.bank_activity();
  for (unsigned b = 0; b < banks.size(); ++b) {
    a.at(Component::TcdmBank, banks[b] ? UnitState::Active : UnitState::Idle) += 1;
  }
  last_activity_ = a;
  power_.accumulate(a);
}

bool Cluster::deadlocked() const {
  if (!line_stimuli_.empty() || !fifo_stimuli_.empty()) return false;
  bool any_sleeping = false;
  for (unsigned k = 0; k < n_cores(); ++k) {
    const auto& s = cores_[k];
    if (s.mode == CoreMode::Halted) continue;
    if (s.mode != CoreMode::Sleeping) return false;
    if (scu_.wait_ready(k) || scu_.irq_pending(k)) return false;
    if (scu_.lines_now(k)) return false;
    any_sleeping = true;
  }
  return any_sleeping;
}

RunStatus Cluster::run(std::uint64_t max_cycles) {
  const std::uint64_t limit = cycle_ + max_cycles;
  while (cycle_ < limit) {
    if (all_halted()) return RunStatus::Halted;
    step();
    if (deadlocked()) return RunStatus::Deadlock;
  }
  return all_halted() ? RunStatus::Halted : RunStatus::CycleLimit;
}

}  // namespace scusim
