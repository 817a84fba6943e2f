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

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "interconnect.hpp"
#include "isa.hpp"

namespace scusim {

enum class StallCause : std::uint8_t { None, MemPending, ElwBlocked, InterruptEntry, BranchBubble, LoadUse };

const char* to_string(StallCause s);

// What a core did in one cycle.
enum class CycleKind : std::uint8_t { Gated, Executing, Stalled };

const char* to_string(CycleKind k);

enum class CoreMode : std::uint8_t {
  Ready,       // next instruction issues in the next clocked cycle
  Compute,     // multi-cycle compute in progress
  MemWait,     // TCDM request presented, not yet granted
  MemRespond,  // granted, waiting for the response cycle
  PortWait,    // peripheral-port request presented, not yet granted
  PortRespond,
  ElwEntry,    // wait issued, grant withheld, busy being released
  Sleeping,    // clock gated until the SCU grants
  ElwWake,     // granted, clock restarting
  IrqEntry,
  Bubble,      // pipeline refill after a taken branch
  Halted,
};

const char* to_string(CoreMode m);

/// Architectural and micro-architectural state of one in-order core.
struct CoreState {
  unsigned id = 0;
  std::uint32_t pc = 0;
  std::array<std::uint32_t, kNumRegs> regs{};
  bool busy = true;
  bool clock_enabled = true;
  StallCause stall_cause = StallCause::None;
  std::uint64_t retired = 0;
  std::uint64_t active_cycles = 0;
  std::uint64_t gated_cycles = 0;
  std::uint64_t stalled_cycles = 0;

  CoreMode mode = CoreMode::Ready;
  std::uint64_t mode_cycle = 0;  // issue cycle, grant cycle or deadline depending on mode
  std::uint32_t compute_left = 0;
  std::optional<MemRequest> mem_request;
  std::uint8_t dest_reg = 0;
  std::uint32_t response = 0;
  bool gate_allowed = true;  // false for plain loads that hit a wait offset

  // port access in flight
  unsigned port_unit = 0;
  std::uint32_t port_offset = 0;
  bool port_write = false;
  std::uint32_t port_wdata = 0;

  // register written by the last plain load and the last cycle it is not yet usable
  std::uint8_t load_reg = 0;
  std::uint64_t load_blocked_until = 0;
  bool load_pending = false;

  bool in_handler = false;
  std::uint32_t epc = 0;

  std::uint32_t reg(unsigned r) const { return r == 0 ? 0 : regs[r]; }
  void set_reg(unsigned r, std::uint32_t v) {
    if (r != 0) regs[r] = v;
  }
};

// Result of an ALU or branch instruction: the new pc.
std::uint32_t execute_simple(CoreState& s, const Instr& in);

// Effective address of a memory-type instruction.
inline std::uint32_t effective_address(const CoreState& s, const Instr& in) {
  return s.reg(in.rs1) + static_cast<std::uint32_t>(in.imm);
}

}  // namespace scusim
